#pragma once

#include "udgen/clustering.hpp"
#include "udgen/generation_model.hpp"
#include "udgen/losses.hpp"
#include "udgen/synth.hpp"
#include "udgen/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

// Measurements on trained models shared by the trained-model tests and the
// acceptance binary. Everything here is an oracle written against the public
// API only.
namespace udgen::testing {

inline std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size();) {
        std::size_t e = k;
        while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[k]]) ++e;
        const double avg = static_cast<double>(k + e) / 2.0;
        for (std::size_t q = k; q <= e; ++q) r[idx[q]] = avg;
        k = e + 1;
    }
    return r;
}

/// Pearson correlation of average ranks; 0 when either side is constant.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(ra.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    if (da == 0.0 || db == 0.0) return 0.0;
    return num / std::sqrt(da * db);
}

inline double mean_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

inline double l2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

inline Dataset training_set() { return make_synth_dataset(SynthSpec{}); }

/// Patches rendered from a seed the training set never uses.
inline Dataset held_out_set(std::size_t per_combination = 20) {
    SynthSpec spec;
    spec.seed = 99;
    spec.images_per_combination = per_combination;
    return make_synth_dataset(spec);
}

inline TrainResult train_default(std::uint64_t seed, double w1, const Dataset& data) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.weights.w1 = w1;
    return train(make_model(ModelDims{}, seed), data, cfg);
}

inline double held_out_recon_l1(const GenerationModel& m, const Dataset& held) {
    double total = 0.0;
    for (const auto& p : held.patches) {
        const auto z = encode(m, p.pixels);
        total += mean_abs_diff(generate(m, z.content, z.style), p.pixels);
    }
    return total / static_cast<double>(held.size());
}

struct InterpolationScore {
    double mean_spearman = 0.0;
    std::size_t pairs = 0;
};

/// Random held-out pairs with different true styles; lambda grid 0, 0.1, ..., 1.
inline InterpolationScore interpolation_score(const GenerationModel& m, const Dataset& held, std::size_t pairs,
                                              std::uint64_t seed = 5) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, held.size() - 1);
    InterpolationScore out;
    double total = 0.0;
    while (out.pairs < pairs) {
        const auto& a = held.patches[pick(rng)];
        const auto& b = held.patches[pick(rng)];
        if (*a.true_style == *b.true_style) continue;
        const auto za = encode(m, a.pixels);
        const auto sb = encode_style(m, b.pixels);
        std::vector<double> lambdas, dists;
        for (int k = 0; k <= 10; ++k) {
            const double lam = k / 10.0;
            const auto x = generate(m, za.content, interpolate_style(za.style, sb, lam));
            lambdas.push_back(lam);
            dists.push_back(style_distance(x, b.pixels, m.bank));
        }
        total += spearman(lambdas, dists);
        ++out.pairs;
    }
    out.mean_spearman = total / static_cast<double>(out.pairs);
    return out;
}

/// Real held-out patches count as correct at p >= 0.5; generated patches with
/// interpolated styles at p < 0.5.
inline double discriminator_accuracy(const GenerationModel& m, const Dataset& held, std::uint64_t seed = 9) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, held.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t correct = 0, total = 0;
    for (const auto& p : held.patches) {
        if (discriminator_probability(m, p.pixels) >= 0.5) ++correct;
        const auto& a = held.patches[pick(rng)];
        const auto& b = held.patches[pick(rng)];
        const auto za = encode(m, a.pixels);
        const auto sb = encode_style(m, b.pixels);
        const auto x = generate(m, za.content, interpolate_style(za.style, sb, unit(rng)));
        if (discriminator_probability(m, x) < 0.5) ++correct;
        total += 2;
    }
    return static_cast<double>(correct) / static_cast<double>(total);
}

struct ClusterRecovery {
    double style_ari = 0.0;
    double content_ari = 0.0;
    std::size_t vectors = 0;
};

/// Clusters `count` held-out latents (seeded subset) with k equal to the true
/// factor counts and compares against the ground truth.
inline ClusterRecovery cluster_recovery(const GenerationModel& m, const Dataset& held, std::size_t count,
                                        std::uint64_t seed = 3) {
    std::vector<std::size_t> ids(held.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(count);
    std::vector<std::vector<double>> content, style;
    std::vector<std::size_t> true_content, true_style;
    for (auto id : ids) {
        const auto& p = held.patches[id];
        const auto z = encode(m, p.pixels);
        content.push_back(z.content);
        style.push_back(z.style);
        true_content.push_back(static_cast<std::size_t>(*p.true_content));
        true_style.push_back(static_cast<std::size_t>(*p.true_style));
    }
    const SynthSpec spec;
    ClusterRecovery out;
    out.vectors = count;
    out.style_ari = adjusted_rand_index(agglomerative_cluster(style, spec.n_style_factors).labels, true_style);
    out.content_ari = adjusted_rand_index(agglomerative_cluster(content, spec.n_content_factors).labels, true_content);
    return out;
}

struct DisentangleScore {
    double mean_style_shift = 0.0;
    double mean_content_shift = 0.0;
    std::size_t pairs_style_dominant = 0;
    std::size_t pairs = 0;
};

/// Pairs rendered from the same content layout and noise seed that differ only
/// in the style transform.
inline DisentangleScore style_only_shift(const GenerationModel& m, std::size_t pairs) {
    const SynthSpec spec;
    DisentangleScore out;
    for (std::size_t k = 0; k < pairs; ++k) {
        const std::size_t content = k % spec.n_content_factors;
        const std::size_t s1 = k % spec.n_style_factors;
        const std::size_t s2 = (s1 + 1 + k / spec.n_style_factors % (spec.n_style_factors - 1)) % spec.n_style_factors;
        const auto p1 = render_patch(spec, content, s1, 1000 + k);
        const auto p2 = render_patch(spec, content, s2, 1000 + k);
        const auto z1 = encode(m, p1.pixels), z2 = encode(m, p2.pixels);
        const double ds = l2(z1.style, z2.style), dc = l2(z1.content, z2.content);
        out.mean_style_shift += ds / static_cast<double>(pairs);
        out.mean_content_shift += dc / static_cast<double>(pairs);
        if (ds > dc) ++out.pairs_style_dominant;
        ++out.pairs;
    }
    return out;
}

}  // namespace udgen::testing
