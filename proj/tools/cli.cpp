#include "cli.hpp"

#include "udgen/checkpoint.hpp"
#include "udgen/config.hpp"
#include "udgen/dataset_io.hpp"
#include "udgen/errors.hpp"
#include "udgen/latent_space.hpp"
#include "udgen/loss_checks.hpp"
#include "udgen/policy.hpp"
#include "udgen/random.hpp"
#include "udgen/reports.hpp"
#include "udgen/segmenter.hpp"
#include "udgen/trainer.hpp"
#include "udgen/uncertainty.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

namespace udgen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bad settings are usage errors (exit 1), unlike data errors met while a
// stage runs (exit 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Streams split from the root seed, one per consumer.
constexpr std::uint64_t kSplitStream = 0x5711;
constexpr std::uint64_t kModelStream = 0x30de1;
constexpr std::uint64_t kSegmenterStream = 0x5e6;

constexpr const char* kContentClusters = "content_clusters.csv";
constexpr const char* kStyleClusters = "style_clusters.csv";
constexpr const char* kPatchSpace = "patch_space.json";
constexpr const char* kSampleRun = "sample_run.json";

struct KeySpec {
    const char* key;
    const char* help;
};

constexpr KeySpec kKeys[] = {
    {"seed", "root seed for every random stream of the command"},
    {"patch_size", "patch edge in pixels"},
    {"n_content", "synthetic content factors"},
    {"n_style", "synthetic style factors"},
    {"images_per_combination", "patches per (content, style) pair"},
    {"noise_sigma", "pixel noise standard deviation"},
    {"labeled_fraction", "fraction of patches that keep their masks"},
    {"steps", "generator training steps"},
    {"batch_size", "pairs per training step"},
    {"lr_generator", "Adam learning rate of encoders and generator"},
    {"lr_discriminator", "Adam learning rate of the discriminator"},
    {"lr_final_fraction", "final fraction of both learning rates (linear decay)"},
    {"w1", "style-matching weight"},
    {"w2", "adversarial weight"},
    {"w3", "reconstruction weight"},
    {"filter_scale", "std-dev of the style feature-bank filters"},
    {"m", "content clusters"},
    {"n", "style clusters"},
    {"linkage", "average | complete | single"},
    {"policy", "random_cm | distribution_matching | hard_case | mixed"},
    {"r_a", "probability of emitting a generated example"},
    {"count", "number of draws"},
    {"write_limit", "maximum number of drawn examples written as images"},
    {"seg_steps", "toy segmenter training steps"},
};

std::string dashed(std::string key) {
    for (auto& ch : key) {
        if (ch == '_') ch = '-';
    }
    return key;
}

/// Config file values overridden by flags.
class Settings {
    template <typename F>
    static auto checked(F&& f) -> decltype(f()) {
        try {
            return f();
        } catch (const DataError& e) {
            throw UsageError(e.what());
        }
    }

public:
    void attach(CLI::App& app, std::initializer_list<std::string_view> keys) {
        app.add_option("--config", config_path_, "key = value settings file")->check(CLI::ExistingFile);
        for (const auto& spec : kKeys) {
            if (std::find(keys.begin(), keys.end(), spec.key) == keys.end()) continue;
            app.add_option("--" + dashed(spec.key), flags_[spec.key], spec.help);
        }
    }

    void resolve() {
        if (!config_path_.empty()) {
            try {
                kv_ = KeyValueConfig::load(config_path_);
            } catch (const DataError& e) {
                throw UsageError(e.what());
            }
            for (const auto& [key, value] : kv_.values()) {
                const bool known = std::any_of(std::begin(kKeys), std::end(kKeys),
                                               [&](const KeySpec& k) { return key == k.key; });
                if (!known) throw UsageError("config file " + config_path_ + ": unknown key '" + key + "'");
            }
        }
        for (const auto& [key, value] : flags_) {
            if (!value.empty()) kv_.set(key, value);
        }
    }

    std::uint64_t seed() const { return uint_or("seed", 7); }

    SynthSpec synth() const {
        SynthSpec spec;
        spec.patch_size = uint_or("patch_size", spec.patch_size);
        spec.n_content_factors = uint_or("n_content", spec.n_content_factors);
        spec.n_style_factors = uint_or("n_style", spec.n_style_factors);
        spec.images_per_combination = uint_or("images_per_combination", spec.images_per_combination);
        spec.noise_sigma = double_or("noise_sigma", spec.noise_sigma);
        spec.seed = seed();
        checked([&] { spec.validate(); });
        return spec;
    }

    double labeled_fraction() const {
        const double f = double_or("labeled_fraction", 0.5);
        if (!(f > 0.0 && f <= 1.0)) throw UsageError("labeled_fraction must lie in (0, 1]");
        return f;
    }

    TrainConfig train() const {
        TrainConfig cfg;
        cfg.steps = uint_or("steps", cfg.steps);
        cfg.batch_size = uint_or("batch_size", cfg.batch_size);
        cfg.lr_generator = double_or("lr_generator", cfg.lr_generator);
        cfg.lr_discriminator = double_or("lr_discriminator", cfg.lr_discriminator);
        cfg.lr_final_fraction = double_or("lr_final_fraction", cfg.lr_final_fraction);
        cfg.seed = seed();
        cfg.weights.w1 = double_or("w1", cfg.weights.w1);
        cfg.weights.w2 = double_or("w2", cfg.weights.w2);
        cfg.weights.w3 = double_or("w3", cfg.weights.w3);
        checked([&] { cfg.validate(); });
        return cfg;
    }

    FeatureBankConfig bank() const {
        FeatureBankConfig cfg;
        cfg.filter_scale = double_or("filter_scale", cfg.filter_scale);
        if (!(cfg.filter_scale > 0.0)) throw UsageError("filter_scale must be positive");
        return cfg;
    }

    std::size_t clusters(const char* key, std::size_t fallback) const {
        const auto k = uint_or(key, fallback);
        if (k < 1) throw UsageError(std::string(key) + " must be at least 1");
        return k;
    }

    Linkage linkage() const {
        return checked([&] { return linkage_from_string(kv_.get("linkage").value_or("average")); });
    }

    PolicySpec policy() const {
        PolicySpec spec;
        spec.kind = checked([&] { return policy_kind_from_string(kv_.get("policy").value_or("mixed")); });
        spec.r_a = double_or("r_a", spec.r_a);
        spec.seed = seed();
        checked([&] { spec.validate(); });
        return spec;
    }

    std::size_t count() const {
        const auto c = uint_or("count", 1000);
        if (c < 1) throw UsageError("count must be at least 1");
        return c;
    }

    std::size_t write_limit() const { return uint_or("write_limit", 1000); }

    ToySegmenterConfig segmenter() const {
        ToySegmenterConfig cfg;
        cfg.steps = uint_or("seg_steps", cfg.steps);
        cfg.seed = derive_seed(seed(), kSegmenterStream);
        checked([&] { cfg.validate(); });
        return cfg;
    }

private:
    std::uint64_t uint_or(const char* key, std::uint64_t fallback) const {
        return checked([&] { return kv_.get_uint(key).value_or(fallback); });
    }
    double double_or(const char* key, double fallback) const {
        return checked([&] { return kv_.get_double(key).value_or(fallback); });
    }

    std::string config_path_;
    std::map<std::string, std::string> flags_;
    KeyValueConfig kv_;
};

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw CorruptionError(path.string() + ": " + e.what());
    }
}

void require_file(const fs::path& path, const std::string& what, const std::string& stage) {
    if (!fs::exists(path)) {
        throw DataError("missing " + what + " " + path.string() + " (produced by `udgen " + stage + "`)");
    }
}

Dataset load_data(const fs::path& dir) {
    require_file(dir / "manifest.json", "dataset manifest", "synth");
    return load_dataset(dir);
}

GenerationModel load_model(const fs::path& dir) {
    require_file(dir / "checkpoint.json", "checkpoint", "train");
    return load_checkpoint(dir).model;
}

PatchSpace load_space(const fs::path& clusters, const Dataset& dataset) {
    require_file(clusters / kContentClusters, "content clusters", "cluster");
    require_file(clusters / kStyleClusters, "style clusters", "cluster");
    return build_patch_space(read_assignment_csv(clusters / kContentClusters),
                             read_assignment_csv(clusters / kStyleClusters), dataset);
}

std::optional<UncertaintyTable> load_uncertainty(const std::string& path, const PatchSpace& space) {
    if (path.empty()) return std::nullopt;
    require_file(path, "uncertainty table", "uncertainty");
    auto table = read_uncertainty_csv(path);
    if (table.m != space.m || table.n != space.n) {
        throw DataError("uncertainty table " + path + " does not match the patch space grid");
    }
    return table;
}

std::string history_csv(const std::vector<StepRecord>& history) {
    std::string out = "step,style,gan_generator,gan_discriminator,recon_image,recon_content,recon_style,total\n";
    for (const auto& r : history) {
        out += std::to_string(r.step);
        for (double v : {r.style, r.gan_generator, r.gan_discriminator, r.recon_image, r.recon_content, r.recon_style,
                         r.total}) {
            out += ',' + num(v);
        }
        out += '\n';
    }
    return out;
}

std::string example_stem(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "example_%05zu", k);
    return buf;
}

json draw_json(const Draw& d) {
    json j{{"cell", {d.i, d.j}},
           {"provenance", d.provenance == Provenance::generated ? "generated" : "original"},
           {"content_source", d.content_source},
           {"fallback", d.fallback}};
    j["style_source"] = d.style_source ? json(*d.style_source) : json(nullptr);
    return j;
}

struct Paths {
    std::string data, out, checkpoint, latents, clusters, uncertainty, run;
};

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Unlabeled-data-guided generation pipeline at desk scale", "udgen"};
    app.require_subcommand(1);
    Settings settings;
    Paths paths;
    std::size_t gradcheck_seeds = 3;
    double gradcheck_eps = 1e-5;

    auto* synth = app.add_subcommand("synth", "write a synthetic dataset (PPM/PGM + manifest.json)");
    synth->add_option("--out", paths.out, "output directory")->required();
    settings.attach(*synth, {"seed", "patch_size", "n_content", "n_style", "images_per_combination", "noise_sigma",
                             "labeled_fraction"});

    auto* train = app.add_subcommand("train", "train the generation module, write a checkpoint");
    train->add_option("--data", paths.data, "dataset directory")->required();
    train->add_option("--out", paths.out, "checkpoint directory")->required();
    settings.attach(*train, {"seed", "steps", "batch_size", "lr_generator", "lr_discriminator", "lr_final_fraction",
                             "w1", "w2", "w3", "filter_scale"});

    auto* embed = app.add_subcommand("embed", "encode every patch into content/style latents (CSV)");
    embed->add_option("--data", paths.data, "dataset directory")->required();
    embed->add_option("--checkpoint", paths.checkpoint, "checkpoint directory")->required();
    embed->add_option("--out", paths.out, "latent CSV")->required();
    settings.attach(*embed, {});

    auto* cluster = app.add_subcommand("cluster", "cluster latents and build the patch space");
    cluster->add_option("--data", paths.data, "dataset directory")->required();
    cluster->add_option("--latents", paths.latents, "latent CSV")->required();
    cluster->add_option("--out", paths.out, "output directory")->required();
    settings.attach(*cluster, {"m", "n", "linkage"});

    auto* uncertainty = app.add_subcommand("uncertainty", "train the toy segmenter and compute U_ij (CSV)");
    uncertainty->add_option("--data", paths.data, "dataset directory")->required();
    uncertainty->add_option("--checkpoint", paths.checkpoint, "checkpoint directory")->required();
    uncertainty->add_option("--latents", paths.latents, "latent CSV")->required();
    uncertainty->add_option("--clusters", paths.clusters, "cluster directory")->required();
    uncertainty->add_option("--out", paths.out, "uncertainty CSV")->required();
    settings.attach(*uncertainty, {"seed", "seg_steps"});

    auto* sample = app.add_subcommand("sample", "draw training examples under a policy");
    sample->add_option("--data", paths.data, "dataset directory")->required();
    sample->add_option("--checkpoint", paths.checkpoint, "checkpoint directory")->required();
    sample->add_option("--clusters", paths.clusters, "cluster directory")->required();
    sample->add_option("--uncertainty", paths.uncertainty, "uncertainty CSV (hard_case, mixed)");
    sample->add_option("--out", paths.out, "output directory")->required();
    settings.attach(*sample, {"seed", "policy", "r_a", "count", "write_limit"});

    auto* report = app.add_subcommand("report", "write the policy report (JSON + text)");
    report->add_option("--run", paths.run, "sample_run.json from `udgen sample`")->required();
    report->add_option("--data", paths.data, "dataset directory")->required();
    report->add_option("--clusters", paths.clusters, "cluster directory")->required();
    report->add_option("--uncertainty", paths.uncertainty, "uncertainty CSV");
    report->add_option("--out", paths.out, "output directory")->required();
    settings.attach(*report, {});

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference checks of every loss");
    gradcheck->add_option("--seeds", gradcheck_seeds, "number of micro-model seeds")->check(CLI::PositiveNumber);
    gradcheck->add_option("--eps", gradcheck_eps, "central-difference step")->check(CLI::PositiveNumber);
    settings.attach(*gradcheck, {});

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        settings.resolve();
        if (synth->parsed()) {
            const auto spec = settings.synth();
            const auto fraction = settings.labeled_fraction();
            const auto dataset = split_labeled(make_synth_dataset(spec), fraction, derive_seed(spec.seed, kSplitStream));
            save_dataset(dataset, paths.out);
            out << "synth: " << dataset.size() << " patches (" << dataset.labeled_ids.size() << " labeled), seed "
                << spec.seed << " -> " << paths.out << '\n';
        } else if (train->parsed()) {
            const auto cfg = settings.train();
            const auto bank = settings.bank();
            const auto dataset = load_data(paths.data);
            ModelDims dims;
            dims.patch_size = dataset.patch_size;
            auto result = udgen::train(make_model(dims, derive_seed(cfg.seed, kModelStream), bank), dataset, cfg);
            save_checkpoint(paths.out, result.model, cfg.weights);
            write_file(fs::path(paths.out) / "history.csv", history_csv(result.history));
            const auto& last = result.history.back();
            out << "train: " << cfg.steps << " steps, seed " << cfg.seed << ", final recon_image "
                << num(last.recon_image) << " -> " << paths.out << '\n';
        } else if (embed->parsed()) {
            const auto dataset = load_data(paths.data);
            const auto model = load_model(paths.checkpoint);
            write_latents_csv(paths.out, embed_all(model, dataset));
            out << "embed: " << dataset.size() << " patches -> " << paths.out << '\n';
        } else if (cluster->parsed()) {
            const auto dataset = load_data(paths.data);
            require_file(paths.latents, "latent table", "embed");
            const auto latents = read_latents_csv(paths.latents);
            if (latents.size() != dataset.size()) throw DataError("latent table does not match the dataset size");
            const auto linkage = settings.linkage();
            const auto m = settings.clusters("m", 3);
            const auto n = settings.clusters("n", 4);
            const auto content = agglomerative_cluster(latents.contents(), m, linkage);
            const auto style = agglomerative_cluster(latents.styles(), n, linkage);
            fs::create_directories(paths.out);
            write_assignment_csv(fs::path(paths.out) / kContentClusters, content);
            write_assignment_csv(fs::path(paths.out) / kStyleClusters, style);
            write_patch_space_json(fs::path(paths.out) / kPatchSpace, build_patch_space(content, style, dataset));
            out << "cluster: m=" << m << " n=" << n << " (" << to_string(linkage) << " linkage) -> " << paths.out
                << '\n';
        } else if (uncertainty->parsed()) {
            const auto seg_cfg = settings.segmenter();
            const auto dataset = load_data(paths.data);
            const auto model = load_model(paths.checkpoint);
            require_file(paths.latents, "latent table", "embed");
            const auto latents = read_latents_csv(paths.latents);
            const auto space = load_space(paths.clusters, dataset);
            const auto seg = train_toy_segmenter(dataset, dataset.labeled_ids, seg_cfg);
            const auto table = uncertainty_table(model, seg, space, dataset, latents);
            write_uncertainty_csv(paths.out, table);
            for (std::size_t c = 0; c < table.values.size(); ++c) {
                if (table.n_unlabel[c] == 0) {
                    out << "note: cell (" << c / table.n << "," << c % table.n
                        << ") has no unlabeled members; U_ij = 0 by convention\n";
                }
            }
            out << "uncertainty: " << space.m << "x" << space.n << " table, seed " << settings.seed() << " -> "
                << paths.out << '\n';
        } else if (sample->parsed()) {
            const auto spec = settings.policy();
            const auto count = settings.count();
            const auto limit = settings.write_limit();
            const auto dataset = load_data(paths.data);
            const auto space = load_space(paths.clusters, dataset);
            const bool needs_u = spec.kind == PolicyKind::hard_case || spec.kind == PolicyKind::mixed;
            if (needs_u && paths.uncertainty.empty()) {
                throw DataError("policy " + std::string(to_string(spec.kind)) +
                                " needs an uncertainty table: run `udgen uncertainty` and pass --uncertainty");
            }
            const auto u = load_uncertainty(paths.uncertainty, space);
            const auto model = load_model(paths.checkpoint);
            const auto probs = cell_probs(space, dataset, spec.kind, u ? &*u : nullptr);
            PolicySampler sampler(space, dataset, probs, spec);
            auto run = make_policy_run(spec, probs);
            const fs::path dir(paths.out);
            fs::create_directories(dir / "examples");
            json batch = json::array();
            for (std::size_t k = 0; k < count; ++k) {
                const auto draw = sampler.next();
                run.record(draw);
                if (k >= limit) continue;
                const auto example = realize(model, dataset, draw);
                const auto stem = example_stem(k);
                write_ppm(dir / "examples" / (stem + ".ppm"), dataset.patch_size, dataset.patch_size, example.pixels);
                write_pgm(dir / "examples" / (stem + ".pgm"), dataset.patch_size, dataset.patch_size, example.mask);
                auto entry = draw_json(draw);
                entry["file"] = "examples/" + stem + ".ppm";
                entry["mask"] = "examples/" + stem + ".pgm";
                batch.push_back(std::move(entry));
            }
            write_file(dir / "batch.json", batch.dump(2) + "\n");
            write_file(dir / kSampleRun, policy_run_json(run).dump(2) + "\n");
            out << "sample: " << count << " draws (" << run.generated << " generated, " << run.fallbacks
                << " fallbacks), policy " << to_string(spec.kind) << ", seed " << spec.seed << " -> " << paths.out
                << '\n';
        } else if (report->parsed()) {
            require_file(paths.run, "sampling run", "sample");
            const auto run = policy_run_from_json(read_json(paths.run));
            const auto dataset = load_data(paths.data);
            auto space = load_space(paths.clusters, dataset);
            if (const auto u = load_uncertainty(paths.uncertainty, space)) attach_uncertainty(space, *u);
            write_policy_report(paths.out, "policy_report", run, space);
            write_patch_space_json(fs::path(paths.out) / kPatchSpace, space);
            out << policy_report_text(run, space);
        } else if (gradcheck->parsed()) {
            bool ok = true;
            for (std::uint64_t seed = 1; seed <= gradcheck_seeds; ++seed) {
                for (const auto& check : check_loss_gradients(seed, gradcheck_eps)) {
                    const bool pass = check.result.max_rel_error < 1e-4;
                    ok = ok && pass;
                    char line[160];
                    std::snprintf(line, sizeof line, "seed %llu  %-18s max_rel_error %.3e  (%zu checked, %zu kinks)  %s\n",
                                  static_cast<unsigned long long>(seed), check.name.c_str(),
                                  check.result.max_rel_error, check.result.checked, check.result.skipped_kinks,
                                  pass ? "ok" : "FAIL");
                    out << line;
                }
            }
            return ok ? kExitOk : kExitData;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace udgen::cli
