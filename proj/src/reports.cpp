#include "udgen/reports.hpp"

#include "udgen/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace udgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json spec_json(const PolicySpec& spec) {
    return {{"kind", std::string(to_string(spec.kind))}, {"r_a", spec.r_a}, {"seed", spec.seed}};
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace

json policy_run_json(const PolicyRun& run) {
    return {{"spec", spec_json(run.spec)},
            {"m", run.probs.m},
            {"n", run.probs.n},
            {"probs", run.probs.p},
            {"cell_counts", run.cell_counts},
            {"draws", run.draws},
            {"generated", run.generated},
            {"original", run.original},
            {"fallbacks", run.fallbacks}};
}

PolicyRun policy_run_from_json(const json& j) {
    try {
        PolicyRun run;
        const auto& spec = j.at("spec");
        run.spec.kind = policy_kind_from_string(spec.at("kind").get<std::string>());
        run.spec.r_a = spec.at("r_a").get<double>();
        run.spec.seed = spec.at("seed").get<std::uint64_t>();
        run.probs.m = j.at("m").get<std::size_t>();
        run.probs.n = j.at("n").get<std::size_t>();
        run.probs.p = j.at("probs").get<std::vector<double>>();
        run.cell_counts = j.at("cell_counts").get<std::vector<std::size_t>>();
        run.draws = j.at("draws").get<std::size_t>();
        run.generated = j.at("generated").get<std::size_t>();
        run.original = j.at("original").get<std::size_t>();
        run.fallbacks = j.at("fallbacks").get<std::size_t>();
        const std::size_t cells = run.probs.m * run.probs.n;
        if (run.probs.p.size() != cells || run.cell_counts.size() != cells) {
            throw CorruptionError("policy run: table sizes disagree with m x n");
        }
        return run;
    } catch (const json::exception& e) {
        throw CorruptionError(std::string("policy run: ") + e.what());
    }
}

json policy_report_json(const PolicyRun& run, const PatchSpace& space) {
    if (space.m != run.probs.m || space.n != run.probs.n) throw ShapeError("policy report: grid mismatch");
    const auto freq = run.frequencies();
    json cells = json::array();
    for (std::size_t i = 0; i < space.m; ++i) {
        for (std::size_t j = 0; j < space.n; ++j) {
            const std::size_t c = i * space.n + j;
            const auto& cell = space.cell(i, j);
            json entry{{"i", i},
                       {"j", j},
                       {"n_label", cell.n_label},
                       {"n_unlabel", cell.n_unlabel},
                       {"target", run.probs.p[c]},
                       {"count", run.cell_counts[c]},
                       {"empirical", freq.empty() ? json(nullptr) : json(freq[c])}};
            if (cell.uncertainty) entry["uncertainty"] = *cell.uncertainty;
            cells.push_back(std::move(entry));
        }
    }
    const auto tv = run.tv_distance();
    const auto gen = run.generated_fraction();
    return {{"root_seed", run.spec.seed},
            {"spec", spec_json(run.spec)},
            {"m", space.m},
            {"n", space.n},
            {"draws", run.draws},
            {"generated", run.generated},
            {"original", run.original},
            {"fallbacks", run.fallbacks},
            {"generated_fraction", gen ? json(*gen) : json(nullptr)},
            {"r_a", run.spec.r_a},
            {"tv_defined", tv.has_value()},
            {"tv_distance", tv ? json(*tv) : json(nullptr)},
            {"cells", std::move(cells)}};
}

std::string policy_report_text(const PolicyRun& run, const PatchSpace& space) {
    if (space.m != run.probs.m || space.n != run.probs.n) throw ShapeError("policy report: grid mismatch");
    const auto freq = run.frequencies();
    std::ostringstream out;
    out << "policy " << to_string(run.spec.kind) << "  R_a " << fixed(run.spec.r_a, 4) << "  root seed "
        << run.spec.seed << '\n';
    out << "draws " << run.draws << "  generated " << run.generated << "  original " << run.original
        << "  fallbacks " << run.fallbacks << '\n';
    const auto gen = run.generated_fraction();
    out << "generated fraction (R_a branch) " << (gen ? fixed(*gen, 4) : std::string("n/a")) << '\n';
    const auto tv = run.tv_distance();
    out << "TV distance " << (tv ? fixed(*tv, 4) : std::string("undefined (no draws)")) << "\n\n";
    out << "  i  j  n_label  n_unlabel   uncert    target  empirical\n";
    for (std::size_t i = 0; i < space.m; ++i) {
        for (std::size_t j = 0; j < space.n; ++j) {
            const std::size_t c = i * space.n + j;
            const auto& cell = space.cell(i, j);
            char line[160];
            std::snprintf(line, sizeof line, "%3zu%3zu%9zu%11zu%9s%10s%11s\n", i, j, cell.n_label, cell.n_unlabel,
                          cell.uncertainty ? fixed(*cell.uncertainty, 4).c_str() : "-",
                          fixed(run.probs.p[c], 4).c_str(), freq.empty() ? "-" : fixed(freq[c], 4).c_str());
            out << line;
        }
    }
    return out.str();
}

void write_policy_report(const fs::path& dir, const std::string& stem, const PolicyRun& run, const PatchSpace& space) {
    fs::create_directories(dir);
    write_text(dir / (stem + ".json"), policy_report_json(run, space).dump(2) + "\n");
    write_text(dir / (stem + ".txt"), policy_report_text(run, space));
}

}  // namespace udgen
