#include "trained_support.hpp"

#include "cli.hpp"
#include "udgen/checkpoint.hpp"
#include "udgen/latent_space.hpp"
#include "udgen/loss_checks.hpp"
#include "udgen/policy.hpp"
#include "udgen/random.hpp"
#include "udgen/segmenter.hpp"
#include "udgen/uncertainty.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>

using namespace udgen;
using namespace udgen::testing;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kSeeds = 5;
constexpr std::size_t kDraws = 100000;
// Same stream numbering as the command-line front end.
constexpr std::uint64_t kSplitStream = 0x5711;
constexpr std::uint64_t kSegmenterStream = 0x5e6;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// Models trained once with the default configuration and reused by every
// criterion that needs a trained model.
struct TrainedRun {
    GenerationModel model;
    double seconds = 0.0;
};

class Models {
public:
    const TrainedRun& get(std::uint64_t seed, double w1) {
        const auto key = std::make_pair(seed, w1);
        auto it = runs_.find(key);
        if (it == runs_.end()) {
            const auto t0 = Clock::now();
            auto result = train_default(seed, w1, data_);
            it = runs_.emplace(key, TrainedRun{std::move(result.model), seconds_since(t0)}).first;
            std::fprintf(stderr, "  trained seed %llu w1 %g in %.1fs\n", static_cast<unsigned long long>(seed), w1,
                         it->second.seconds);
        }
        return it->second;
    }
    const Dataset& data() const { return data_; }
    const Dataset& held() const { return held_; }

private:
    Dataset data_ = training_set();
    Dataset held_ = held_out_set();
    std::map<std::pair<std::uint64_t, double>, TrainedRun> runs_;
};

// Patch space from clustering the model's latents.
PatchSpace latent_patch_space(const Dataset& ds, const LatentTable& latents) {
    const SynthSpec spec;
    const auto content = latents.contents();
    const auto style = latents.styles();
    return build_patch_space(agglomerative_cluster(content, spec.n_content_factors),
                             agglomerative_cluster(style, spec.n_style_factors), ds);
}

// --- criterion 1 -----------------------------------------------------------

Verdict gradient_correctness() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::string worst_name;
    std::size_t checks = 0;
    bool all_checked = true;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        for (const auto& c : check_loss_gradients(seed)) {
            ++checks;
            if (c.result.checked == 0) all_checked = false;
            if (c.result.max_rel_error >= worst) {
                worst = c.result.max_rel_error;
                worst_name = c.name;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-4 && all_checked && secs < 60.0,
            fmt("%zu loss checks over 3 seeds, max rel error %.2e (%s), %.1fs", checks, worst, worst_name.c_str(),
                secs)};
}

// --- criterion 2 -----------------------------------------------------------

Verdict closed_form_reductions(Models& models) {
    double worst1 = 0.0, worst0 = 0.0;
    std::size_t cases = 0;
    const auto untrained = make_model(ModelDims{}, 3);
    const auto& trained = models.get(1, LossWeights{}.w1).model;
    const auto& held = models.held();
    for (const GenerationModel* m : {&untrained, &trained}) {
        for (std::size_t k = 0; k < 20; ++k) {
            const auto& a = held.patches[(k * 13) % held.size()].pixels;
            const auto& b = held.patches[(k * 29 + 7) % held.size()].pixels;
            const auto ca = encode_content(*m, a);
            const auto to_b = generate(*m, ca, encode_style(*m, b));
            const auto to_a = generate(*m, ca, encode_style(*m, a));
            worst1 = std::max(worst1, std::abs(style_matching_loss(*m, a, b, 1.0) - style_distance(to_b, b, m->bank)));
            worst0 = std::max(worst0, std::abs(style_matching_loss(*m, a, b, 0.0) - style_distance(to_a, a, m->bank)));
            ++cases;
        }
    }
    return {worst1 <= 1e-10 && worst0 <= 1e-10,
            fmt("%zu pairs, |L(1) - d(x_g2, x_b)| max %.1e, |L(0) - d(x_g2, x_a)| max %.1e", cases, worst1, worst0)};
}

// --- criterion 3 -----------------------------------------------------------

Verdict interpolation_property(Models& models) {
    const std::size_t pairs = 60;
    const auto score = interpolation_score(models.get(1, LossWeights{}.w1).model, models.held(), pairs);
    const double secs = models.get(1, LossWeights{}.w1).seconds;
    const bool baseline = score.mean_spearman <= -0.8 && score.pairs >= 50 && secs < 300.0;

    std::string ablation;
    std::size_t ablation_failures = 0;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        const double rho = interpolation_score(models.get(seed, 0.0).model, models.held(), pairs).mean_spearman;
        if (!(rho <= -0.8)) ++ablation_failures;
        ablation += fmt("%s%.3f", seed == 1 ? "" : " ", rho);
    }
    std::string defaults;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed)
        defaults += fmt("%s%.3f", seed == 1 ? "" : " ",
                        interpolation_score(models.get(seed, LossWeights{}.w1).model, models.held(), pairs)
                            .mean_spearman);
    const bool ablation_ok = 2 * ablation_failures > kSeeds;
    return {baseline && ablation_ok,
            fmt("default: Spearman %.3f over %zu pairs, trained in %.0fs (seeds 1-5: %s); w1=0 fails %zu/5 "
                "seeds (%s), majority needed",
                score.mean_spearman, score.pairs, secs, defaults.c_str(), ablation_failures, ablation.c_str())};
}

// --- criterion 4 -----------------------------------------------------------

// The verdict is on the default training run (seed 1), the run criterion 3
// also judges; the other seeds are reported alongside.
Verdict cluster_recovery_default(Models& models) {
    const auto rec = cluster_recovery(models.get(1, LossWeights{}.w1).model, models.held(), 200);
    std::string others;
    for (std::uint64_t seed = 2; seed <= kSeeds; ++seed) {
        const auto r = cluster_recovery(models.get(seed, LossWeights{}.w1).model, models.held(), 200);
        others += fmt("%s%.3f/%.3f", seed == 2 ? "" : " ", r.style_ari, r.content_ari);
    }
    return {rec.style_ari >= 0.9 && rec.content_ari >= 0.8,
            fmt("200 held-out vectors: style ARI %.3f, content ARI %.3f (seeds 2-5 style/content: %s)", rec.style_ari,
                rec.content_ari, others.c_str())};
}

// --- criteria 5-7 ----------------------------------------------------------

struct PolicySetup {
    Dataset dataset;
    PatchSpace space;
    UncertaintyTable uncertainties;
};

const PolicySetup& policy_setup(Models& models) {
    static std::optional<PolicySetup> setup;
    if (!setup) {
        const auto& m = models.get(1, LossWeights{}.w1).model;
        PolicySetup s;
        s.dataset = split_labeled(models.data(), 0.5, derive_seed(1, kSplitStream));
        const auto latents = embed_all(m, s.dataset);
        s.space = latent_patch_space(s.dataset, latents);
        const auto seg = train_toy_segmenter(s.dataset, s.dataset.labeled_ids, ToySegmenterConfig{});
        s.uncertainties = uncertainty_table(m, seg, s.space, s.dataset, latents);
        setup = std::move(s);
    }
    return *setup;
}

PolicyRun draw_run(const PolicySetup& s, const CellProbTable& probs, const PolicySpec& spec, std::size_t draws) {
    PolicySampler sampler(s.space, s.dataset, probs, spec);
    auto run = make_policy_run(spec, probs);
    for (std::size_t k = 0; k < draws; ++k) run.record(sampler.next());
    return run;
}

Verdict sampling_laws(Models& models) {
    const auto& s = policy_setup(models);
    const auto dm = cell_probs(s.space, s.dataset, PolicyKind::distribution_matching);
    const auto hc = cell_probs(s.space, s.dataset, PolicyKind::hard_case, &s.uncertainties);
    const auto mixed = cell_probs(s.space, s.dataset, PolicyKind::mixed, &s.uncertainties);
    double mix_gap = 0.0;
    for (std::size_t c = 0; c < mixed.p.size(); ++c)
        mix_gap = std::max(mix_gap, std::abs(mixed.p[c] - 0.5 * (dm.p[c] + hc.p[c])));

    std::string tvs;
    bool tv_ok = true;
    std::uint64_t seed = 21;
    for (const auto* probs : {&dm, &hc, &mixed}) {
        PolicySpec spec;
        spec.seed = seed++;
        const double tv = *draw_run(s, *probs, spec, kDraws).tv_distance();
        tv_ok = tv_ok && tv < 0.02;
        tvs += fmt("%s%.4f", tvs.empty() ? "" : "/", tv);
    }
    return {tv_ok && mix_gap <= 1e-12,
            fmt("TV over %zu draws DM/HC/mixed %s; max |mixed - (DM+HC)/2| %.1e", kDraws, tvs.c_str(), mix_gap)};
}

Verdict r_a_contract(Models& models) {
    const auto& s = policy_setup(models);
    const auto probs = cell_probs(s.space, s.dataset, PolicyKind::mixed, &s.uncertainties);
    auto fraction = [&](double r_a, std::size_t& fallbacks) {
        PolicySpec spec;
        spec.r_a = r_a;
        spec.seed = 31;
        const auto run = draw_run(s, probs, spec, kDraws);
        fallbacks = run.fallbacks;
        return *run.generated_fraction();
    };
    std::size_t fb15 = 0, fb0 = 0, fb1 = 0;
    const double f15 = fraction(0.15, fb15), f0 = fraction(0.0, fb0), f1 = fraction(1.0, fb1);
    return {f15 >= 0.14 && f15 <= 0.16 && f0 == 0.0 && f1 == 1.0,
            fmt("R_a 0.15 -> %.4f (%zu fallbacks excluded); R_a 0 -> %g; R_a 1 -> %g", f15, fb15, f0, f1)};
}

// Every (labeled a, b) pair sharing a content cluster with b != a, in the
// documented order.
std::vector<GenerationCandidate> brute_force_pairs(const PatchSpace& space, const Dataset& ds) {
    std::vector<GenerationCandidate> out;
    for (std::size_t a = 0; a < ds.size(); ++a) {
        if (!ds.patches[a].labeled) continue;
        for (std::size_t b = 0; b < ds.size(); ++b) {
            if (b == a || space.content_of[b] != space.content_of[a]) continue;
            out.push_back({a, b, space.content_of[a], space.style_of[b]});
        }
    }
    std::sort(out.begin(), out.end(), [&](const GenerationCandidate& x, const GenerationCandidate& y) {
        const auto cx = x.i * space.n + x.j, cy = y.i * space.n + y.j;
        if (cx != cy) return cx < cy;
        return std::tie(x.content_source, x.style_source) < std::tie(y.content_source, y.style_source);
    });
    return out;
}

Verdict content_matching(Models& models) {
    const auto& s = policy_setup(models);
    const auto probs = cell_probs(s.space, s.dataset, PolicyKind::mixed, &s.uncertainties);
    PolicySpec spec;
    spec.r_a = 1.0;
    spec.seed = 41;
    PolicySampler sampler(s.space, s.dataset, probs, spec);
    std::size_t generated = 0, violations = 0;
    while (generated < kDraws) {
        const auto d = sampler.next();
        if (d.provenance != Provenance::generated) continue;
        ++generated;
        const auto a = d.content_source, b = *d.style_source;
        const bool ok = s.dataset.patches[a].labeled && s.space.content_of[a] == d.i &&
                        s.space.content_of[b] == d.i && s.space.style_of[b] == d.j && a != b;
        if (!ok) ++violations;
    }

    // 200-patch instance clustered by the trained model.
    const auto& m = models.get(1, LossWeights{}.w1).model;
    Dataset small;
    small.patch_size = models.held().patch_size;
    small.patches.assign(models.held().patches.begin(), models.held().patches.begin() + 200);
    reindex_labels(small);
    small = split_labeled(small, 0.4, 77);
    const auto space = latent_patch_space(small, embed_all(m, small));
    const auto oracle = brute_force_pairs(space, small);
    const auto enumerated = content_matched_pairs(space, small);
    const auto counts = candidate_counts(space, small);
    std::vector<std::size_t> oracle_counts(space.m * space.n, 0);
    for (const auto& c : oracle) ++oracle_counts[c.i * space.n + c.j];
    const bool enum_ok = enumerated == oracle && counts == oracle_counts;
    return {violations == 0 && enum_ok,
            fmt("%zu violations in %zu generated draws; 200-patch enumeration %s brute force (%zu candidates)",
                violations, generated, enum_ok ? "matches" : "DIFFERS from", oracle.size())};
}

// --- criterion 8 -----------------------------------------------------------

constexpr std::size_t kWithheldStyle = 2;

struct WithholdingOutcome {
    bool top2_match = false;
    double total_u = 0.0;
    std::string detail;
};

std::set<std::size_t> top2(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    return {order[0], order[1]};
}

// The toy segmenter never sees the withheld style. The expected cells are
// the two whose unlabeled members transfer worst: highest mean pixel error,
// against the withheld true masks, of the segmenter on G(E^c(x_a), Rep(S_l))
// over every representative style. U_ij sees no masks.
WithholdingOutcome withholding_experiment(const GenerationModel& m, const Dataset& data, std::uint64_t seed) {
    const auto ds = split_labeled(data, 0.5, derive_seed(seed, kSplitStream));
    std::vector<std::size_t> seg_ids;
    for (auto id : ds.labeled_ids)
        if (static_cast<std::size_t>(*ds.patches[id].true_style) != kWithheldStyle) seg_ids.push_back(id);
    ToySegmenterConfig seg_cfg;
    seg_cfg.seed = derive_seed(seed, kSegmenterStream);
    const auto seg = train_toy_segmenter(ds, seg_ids, seg_cfg);

    const auto latents = embed_all(m, ds);
    const auto space = latent_patch_space(ds, latents);
    const auto reps = representative_styles(latents, ClusterAssignment{space.n, space.style_of});
    std::vector<double> transfer_error(space.cells.size(), 0.0);
    for (std::size_t i = 0; i < space.m; ++i) {
        for (std::size_t j = 0; j < space.n; ++j) {
            const auto members = space.unlabeled_members(i, j, ds);
            for (auto id : members) {
                const auto& p = ds.patches[id];
                const auto c = encode_content(m, p.pixels);
                for (const auto& r : reps)
                    transfer_error[i * space.n + j] +=
                        (1.0 - pixel_accuracy(seg, generate(m, c, r), *p.hidden_mask)) /
                        static_cast<double>(reps.size() * members.size());
            }
        }
    }
    const auto expected = top2(transfer_error);

    const auto table = uncertainty_table(m, seg, space, ds, latents);
    const auto found = top2(table.values);
    WithholdingOutcome out;
    out.top2_match = found == expected;
    for (double u : table.values) out.total_u += u;
    const auto cell = [&](std::size_t c) { return fmt("(%zu,%zu)", c / space.n, c % space.n); };
    const auto lo = [&](const std::set<std::size_t>& s) { return cell(*s.begin()) + cell(*s.rbegin()); };
    const auto [u_min, u_max] = std::minmax_element(table.values.begin(), table.values.end());
    out.detail = fmt("seed %llu: worst-transfer cells %s, top-2 U %s, U range %.4f..%.4f -> %s",
                     static_cast<unsigned long long>(seed), lo(expected).c_str(), lo(found).c_str(), *u_min, *u_max,
                     out.top2_match ? "match" : "miss");
    return out;
}

Verdict hard_case_detection(Models& models) {
    std::size_t matches = 0;
    bool positive = true;
    std::string lines;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        const auto o = withholding_experiment(models.get(seed, LossWeights{}.w1).model, models.data(), seed);
        if (o.top2_match) ++matches;
        positive = positive && o.total_u > 0.0;
        lines += "\n    " + o.detail;
    }
    const auto& s = policy_setup(models);
    const auto& m = models.get(1, LossWeights{}.w1).model;
    const ConstantSegmenter constant(s.dataset.patch_size, 0.37);
    const auto zero = uncertainty_table(m, constant, s.space, s.dataset, embed_all(m, s.dataset));
    const bool all_zero = std::all_of(zero.values.begin(), zero.values.end(), [](double u) { return u == 0.0; });
    return {matches >= 4 && positive && all_zero,
            fmt("top-2 U cells are the worst-transfer cells in %zu/5 seeds (4 needed); sum U > 0 in every seed: %s; constant "
                "segmenter table all zero: %s",
                matches, positive ? "yes" : "no", all_zero ? "yes" : "no") +
                lines};
}

// --- criterion 9 -----------------------------------------------------------

Verdict medoid_correctness() {
    std::mt19937_64 rng(2024);
    std::size_t mismatches = 0, ties = 0;
    for (std::size_t trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 40;
        LatentTable latents;
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t k = 0; k < n + 10; ++k) {
            LatentPair z{{0.0}, std::vector<double>(8)};
            for (auto& v : z.style) v = normal(rng);
            // Duplicate an earlier row now and then to force medoid ties.
            if (k > 0 && rng() % 5 == 0) z.style = latents.rows[rng() % k].style;
            latents.rows.push_back(z);
        }
        std::vector<std::size_t> members(n + 10);
        std::iota(members.begin(), members.end(), 0);
        std::shuffle(members.begin(), members.end(), rng);
        members.resize(n);
        std::sort(members.begin(), members.end());

        std::size_t best = members[0];
        double best_sum = std::numeric_limits<double>::infinity();
        for (auto c : members) {
            double sum = 0.0;
            for (auto k : members) sum += l2(latents.rows[c].style, latents.rows[k].style);
            if (sum < best_sum) {
                best_sum = sum;
                best = c;
            } else if (sum == best_sum) {
                ++ties;
            }
        }
        if (representative_style(latents, members) != latents.rows[best].style) ++mismatches;
    }
    return {mismatches == 0, fmt("100 random clusters (%zu exact-tie candidates), %zu mismatches", ties, mismatches)};
}

// --- criterion 10 ----------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

bool run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run_command(args, out, err);
    if (code != 0) std::fprintf(stderr, "  udgen %s exited %d: %s\n", args[0].c_str(), code, err.str().c_str());
    return code == 0;
}

bool pipeline(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto d = dir.string();
    std::ofstream(dir / "run.cfg") << "seed = 2024\nsteps = 200\n";
    const auto cfg = d + "/run.cfg";
    return run_cli({"synth", "--config", cfg, "--out", d + "/data"}) &&
           run_cli({"train", "--config", cfg, "--data", d + "/data", "--out", d + "/ckpt"}) &&
           run_cli({"embed", "--data", d + "/data", "--checkpoint", d + "/ckpt", "--out", d + "/latents.csv"}) &&
           run_cli({"cluster", "--config", cfg, "--data", d + "/data", "--latents", d + "/latents.csv", "--out",
                    d + "/clusters"}) &&
           run_cli({"uncertainty", "--config", cfg, "--data", d + "/data", "--checkpoint", d + "/ckpt", "--latents",
                    d + "/latents.csv", "--clusters", d + "/clusters", "--out", d + "/u.csv"}) &&
           run_cli({"sample", "--config", cfg, "--policy", "mixed", "--data", d + "/data", "--checkpoint",
                    d + "/ckpt", "--clusters", d + "/clusters", "--uncertainty", d + "/u.csv", "--out",
                    d + "/batch"}) &&
           run_cli({"report", "--run", d + "/batch/sample_run.json", "--data", d + "/data", "--clusters",
                    d + "/clusters", "--uncertainty", d + "/u.csv", "--out", d + "/report"});
}

Verdict reproducibility() {
    const auto root = fs::temp_directory_path() / "udgen_acceptance";
    const auto a = root / "run_a", b = root / "run_b";
    if (!pipeline(a) || !pipeline(b)) return {false, "pipeline failed"};

    std::size_t compared = 0, differing = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), a);
        ++compared;
        if (!fs::exists(b / rel) || slurp(entry.path()) != slurp(b / rel)) {
            ++differing;
            std::fprintf(stderr, "  differs: %s\n", rel.string().c_str());
        }
    }
    const bool reports_same = slurp(a / "report" / "policy_report.json") == slurp(b / "report" / "policy_report.json") &&
                              slurp(a / "report" / "policy_report.txt") == slurp(b / "report" / "policy_report.txt") &&
                              !slurp(a / "report" / "policy_report.json").empty();

    // Checkpoint round trip: load, save again, compare bytes and outputs.
    const auto loaded = load_checkpoint(a / "ckpt");
    save_checkpoint(root / "resaved", loaded.model, loaded.weights);
    std::size_t tensor_files = 0, tensor_diffs = 0;
    for (const auto& entry : fs::directory_iterator(a / "ckpt")) {
        if (entry.path().extension() != ".bin" && entry.path().filename() != "checkpoint.json") continue;
        ++tensor_files;
        if (slurp(entry.path()) != slurp(root / "resaved" / entry.path().filename())) ++tensor_diffs;
    }
    const auto again = load_checkpoint(root / "resaved");
    const auto& patch = training_set().patches[5].pixels;
    const auto z1 = encode(loaded.model, patch), z2 = encode(again.model, patch);
    const auto x1 = generate(loaded.model, z1.content, z1.style), x2 = generate(again.model, z2.content, z2.style);
    const bool outputs_same = z1 == z2 && x1.size() == x2.size() &&
                              std::memcmp(x1.data(), x2.data(), x1.size() * sizeof(double)) == 0;

    return {reports_same && differing == 0 && tensor_diffs == 0 && outputs_same && tensor_files > 0,
            fmt("two pipeline runs: %zu/%zu files identical, reports identical: %s; checkpoint resave %zu/%zu "
                "files identical, outputs bit-exact: %s",
                compared - differing, compared, reports_same ? "yes" : "no", tensor_files - tensor_diffs,
                tensor_files, outputs_same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria, one PASS/FAIL line each"};
    std::vector<int> only;
    app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    Models models;
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"gradient correctness", [] { return gradient_correctness(); }},
        {"closed-form reductions", [&] { return closed_form_reductions(models); }},
        {"interpolation property", [&] { return interpolation_property(models); }},
        {"cluster recovery", [&] { return cluster_recovery_default(models); }},
        {"sampling laws", [&] { return sampling_laws(models); }},
        {"R_a contract", [&] { return r_a_contract(models); }},
        {"content matching", [&] { return content_matching(models); }},
        {"hard-case detection", [&] { return hard_case_detection(models); }},
        {"medoid correctness", [] { return medoid_correctness(); }},
        {"reproducibility", [] { return reproducibility(); }},
    };

    std::size_t failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int number = static_cast<int>(k + 1);
        if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::printf("criterion %2d %s  %-24s %s\n", number, v.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                    v.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
