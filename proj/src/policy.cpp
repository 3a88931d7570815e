#include "udgen/policy.hpp"

#include "udgen/errors.hpp"
#include "udgen/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace udgen {

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::random_cm: return "random_cm";
        case PolicyKind::distribution_matching: return "distribution_matching";
        case PolicyKind::hard_case: return "hard_case";
        case PolicyKind::mixed: return "mixed";
    }
    return "unknown";
}

PolicyKind policy_kind_from_string(std::string_view name) {
    if (name == "random_cm" || name == "cm") return PolicyKind::random_cm;
    if (name == "distribution_matching" || name == "dm") return PolicyKind::distribution_matching;
    if (name == "hard_case" || name == "hc") return PolicyKind::hard_case;
    if (name == "mixed") return PolicyKind::mixed;
    throw DataError("unknown policy '" + std::string(name) +
                    "' (expected random_cm, distribution_matching, hard_case or mixed)");
}

void PolicySpec::validate() const {
    if (!(r_a >= 0.0 && r_a <= 1.0)) throw DataError("policy: R_a must lie in [0, 1]");
}

namespace {

void check_alignment(const PatchSpace& space, const Dataset& dataset) {
    if (space.content_of.size() != dataset.patches.size() || space.style_of.size() != dataset.patches.size()) {
        throw ShapeError("patch space covers " + std::to_string(space.content_of.size()) + " patches, dataset has " +
                         std::to_string(dataset.patches.size()));
    }
}

std::vector<std::vector<std::size_t>> labeled_by_row(const PatchSpace& space, const Dataset& dataset) {
    std::vector<std::vector<std::size_t>> rows(space.m);
    for (std::size_t id = 0; id < dataset.patches.size(); ++id) {
        if (dataset.patches[id].labeled) rows[space.content_of[id]].push_back(id);
    }
    return rows;
}

// Zeroes cells without candidates and renormalizes.
std::vector<double> masked_normalized(std::vector<double> weights, const std::vector<std::size_t>& counts,
                                      const char* what) {
    double total = 0.0;
    for (std::size_t c = 0; c < weights.size(); ++c) {
        if (counts[c] == 0) weights[c] = 0.0;
        total += weights[c];
    }
    if (!(total > 0.0)) {
        throw PolicyDegenerateError(std::string(what) + ": every cell with generation candidates has zero weight");
    }
    for (auto& w : weights) w /= total;
    return weights;
}

double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t index_draw(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

std::vector<std::size_t> candidate_counts(const PatchSpace& space, const Dataset& dataset) {
    check_alignment(space, dataset);
    const auto rows = labeled_by_row(space, dataset);
    std::vector<std::size_t> counts(space.m * space.n);
    for (std::size_t i = 0; i < space.m; ++i) {
        for (std::size_t j = 0; j < space.n; ++j) {
            const auto& cell = space.cell(i, j);
            counts[i * space.n + j] = rows[i].size() * cell.members.size() - cell.n_label;
        }
    }
    return counts;
}

std::vector<GenerationCandidate> content_matched_pairs(const PatchSpace& space, const Dataset& dataset) {
    check_alignment(space, dataset);
    const auto rows = labeled_by_row(space, dataset);
    std::vector<GenerationCandidate> out;
    for (std::size_t i = 0; i < space.m; ++i) {
        for (std::size_t j = 0; j < space.n; ++j) {
            for (std::size_t a : rows[i]) {
                for (std::size_t b : space.cell(i, j).members) {
                    if (a != b) out.push_back({a, b, i, j});
                }
            }
        }
    }
    return out;
}

CellProbTable cell_probs(const PatchSpace& space, const Dataset& dataset, PolicyKind kind,
                         const UncertaintyTable* uncertainties) {
    if ((kind == PolicyKind::hard_case || kind == PolicyKind::mixed) && !uncertainties) {
        throw DataError(std::string(to_string(kind)) + " policy requires an uncertainty table");
    }
    const auto counts = candidate_counts(space, dataset);
    const std::size_t cells = space.m * space.n;
    auto dm = [&] {
        std::vector<double> w(cells);
        for (std::size_t c = 0; c < cells; ++c) w[c] = static_cast<double>(space.cells[c].n_unlabel);
        return masked_normalized(std::move(w), counts, "distribution_matching");
    };
    auto hc = [&] {
        if (uncertainties->m != space.m || uncertainties->n != space.n) {
            throw ShapeError("uncertainty table is " + std::to_string(uncertainties->m) + "x" +
                             std::to_string(uncertainties->n) + ", patch space is " + std::to_string(space.m) + "x" +
                             std::to_string(space.n));
        }
        for (double u : uncertainties->values) {
            if (!(u >= 0.0) || !std::isfinite(u)) throw NumericError("uncertainty values must be finite and >= 0");
        }
        return masked_normalized(uncertainties->values, counts, "hard_case");
    };
    CellProbTable table{space.m, space.n, {}};
    switch (kind) {
        case PolicyKind::random_cm:
            table.p = masked_normalized(std::vector<double>(cells, 1.0), counts, "random_cm");
            break;
        case PolicyKind::distribution_matching: table.p = dm(); break;
        case PolicyKind::hard_case: table.p = hc(); break;
        case PolicyKind::mixed: {
            const auto a = dm();
            const auto b = hc();
            table.p.resize(cells);
            for (std::size_t c = 0; c < cells; ++c) table.p[c] = 0.5 * a[c] + 0.5 * b[c];
            break;
        }
    }
    return table;
}

PolicySampler::PolicySampler(const PatchSpace& space, const Dataset& dataset, CellProbTable probs,
                             const PolicySpec& spec)
    : space_(space), dataset_(dataset), probs_(std::move(probs)), spec_(spec), rng_(derive_seed(spec.seed, 0x5a3b)) {
    spec_.validate();
    check_alignment(space, dataset);
    if (probs_.m != space.m || probs_.n != space.n || probs_.p.size() != space.m * space.n) {
        throw ShapeError("probability table does not match the patch space grid");
    }
    row_labeled_ = labeled_by_row(space, dataset);
    const auto counts = candidate_counts(space, dataset);
    cell_labeled_.resize(probs_.p.size());
    double total = 0.0;
    for (std::size_t c = 0; c < probs_.p.size(); ++c) {
        if (!(probs_.p[c] >= 0.0)) throw DataError("probability table has a negative entry");
        if (probs_.p[c] > 0.0 && counts[c] == 0) {
            throw DataError("cell (" + std::to_string(c / space.n) + "," + std::to_string(c % space.n) +
                            ") has probability but no generation candidates");
        }
        total += probs_.p[c];
        cumulative_.push_back(total);
        cell_labeled_[c] = space.labeled_members(c / space.n, c % space.n, dataset);
    }
    if (std::abs(total - 1.0) > 1e-9) throw DataError("probability table does not sum to 1");
}

Draw PolicySampler::next() {
    const double u = unit_draw(rng_) * cumulative_.back();
    std::size_t c = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
                                             cumulative_.begin());
    // upper_bound never selects a zero-probability cell except past the end.
    if (c == cumulative_.size()) {
        do --c;
        while (probs_.p[c] == 0.0);
    }

    Draw draw;
    draw.i = c / space_.n;
    draw.j = c % space_.n;
    const bool generate_branch = unit_draw(rng_) < spec_.r_a;
    const auto& labeled = cell_labeled_[c];
    if (!generate_branch && !labeled.empty()) {
        draw.content_source = labeled[index_draw(rng_, labeled.size())];
        return draw;
    }
    draw.provenance = Provenance::generated;
    draw.fallback = !generate_branch;
    // Uniform over {(a, b) : a labeled in row i, b in H_ij, a != b} by rejection.
    const auto& sources = row_labeled_[draw.i];
    const auto& targets = space_.cell(draw.i, draw.j).members;
    while (true) {
        const std::size_t a = sources[index_draw(rng_, sources.size())];
        const std::size_t b = targets[index_draw(rng_, targets.size())];
        if (a == b) continue;
        draw.content_source = a;
        draw.style_source = b;
        return draw;
    }
}

TrainingExample realize(const GenerationModel& model, const Dataset& dataset, const Draw& draw) {
    const auto& source = dataset.patches.at(draw.content_source);
    if (!source.labeled || !source.mask) throw DataError("draw content source is not a labeled patch");
    TrainingExample out;
    out.draw = draw;
    out.mask = *source.mask;
    if (draw.provenance == Provenance::original) {
        out.pixels = source.pixels;
    } else {
        const auto& style_patch = dataset.patches.at(draw.style_source.value());
        out.pixels = generate(model, encode_content(model, source.pixels), encode_style(model, style_patch.pixels));
    }
    return out;
}

std::vector<TrainingExample> sample_batch(const GenerationModel& model, const PatchSpace& space, const Dataset& dataset,
                                          const CellProbTable& probs, const PolicySpec& spec, std::size_t count) {
    if (count < 1) throw DataError("sample_batch: count must be at least 1");
    PolicySampler sampler(space, dataset, probs, spec);
    std::vector<TrainingExample> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(realize(model, dataset, sampler.next()));
    return out;
}

PolicyRun make_policy_run(const PolicySpec& spec, const CellProbTable& probs) {
    PolicyRun run;
    run.spec = spec;
    run.probs = probs;
    run.cell_counts.assign(probs.p.size(), 0);
    return run;
}

void PolicyRun::record(const Draw& draw) {
    ++cell_counts.at(draw.i * probs.n + draw.j);
    ++draws;
    if (draw.provenance == Provenance::generated) {
        ++generated;
    } else {
        ++original;
    }
    if (draw.fallback) ++fallbacks;
}

std::vector<double> PolicyRun::frequencies() const {
    if (draws == 0) return {};
    std::vector<double> f(cell_counts.size());
    for (std::size_t c = 0; c < f.size(); ++c) f[c] = static_cast<double>(cell_counts[c]) / static_cast<double>(draws);
    return f;
}

std::optional<double> PolicyRun::tv_distance() const {
    if (draws == 0) return std::nullopt;
    const auto f = frequencies();
    double tv = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c) tv += std::abs(f[c] - probs.p[c]);
    return 0.5 * tv;
}

std::optional<double> PolicyRun::generated_fraction() const {
    if (draws == 0) return std::nullopt;
    return static_cast<double>(generated - fallbacks) / static_cast<double>(draws);
}

}  // namespace udgen
