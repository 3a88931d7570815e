#include "udgen/uncertainty.hpp"

#include "udgen/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace udgen {

namespace fs = std::filesystem;

double mean_pixel_variance(std::span<const std::vector<double>> grids) {
    if (grids.empty()) throw DataError("mean_pixel_variance: no predictions");
    const std::size_t pixels = grids[0].size();
    for (const auto& g : grids) require_extent(g.size(), pixels, "prediction grid");
    if (pixels == 0) return 0.0;
    const double inv_n = 1.0 / static_cast<double>(grids.size());
    double total = 0.0;
    for (std::size_t p = 0; p < pixels; ++p) {
        double mean = 0.0;
        for (const auto& g : grids) mean += g[p];
        mean *= inv_n;
        double var = 0.0;
        for (const auto& g : grids) var += (g[p] - mean) * (g[p] - mean);
        total += var * inv_n;
    }
    return total / static_cast<double>(pixels);
}

double transfer_variance(const GenerationModel& model, const Segmenter& seg, std::span<const double> pixels,
                         std::span<const std::vector<double>> reps) {
    if (reps.empty()) throw DataError("transfer_variance: no representative styles");
    const auto content = encode_content(model, pixels);
    std::vector<std::vector<double>> predictions;
    predictions.reserve(reps.size());
    for (const auto& rep : reps) predictions.push_back(seg.predict(generate(model, content, rep)));
    return mean_pixel_variance(predictions);
}

double cell_uncertainty(const GenerationModel& model, const Segmenter& seg, const Dataset& dataset,
                        std::span<const std::size_t> unlabeled_members, std::span<const std::vector<double>> reps) {
    // An empty average is defined as 0 so that the cell drops out of
    // hard-case sampling.
    if (unlabeled_members.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t id : unlabeled_members) {
        total += transfer_variance(model, seg, dataset.patches.at(id).pixels, reps);
    }
    return total / static_cast<double>(unlabeled_members.size());
}

UncertaintyTable uncertainty_table(const GenerationModel& model, const Segmenter& seg, const PatchSpace& space,
                                   const Dataset& dataset, const LatentTable& latents) {
    if (latents.size() != dataset.patches.size()) throw ShapeError("uncertainty_table: latents/dataset size mismatch");
    ClusterAssignment style{space.n, space.style_of};
    const auto reps = representative_styles(latents, style);
    UncertaintyTable table{space.m, space.n, std::vector<double>(space.m * space.n, 0.0),
                           std::vector<std::size_t>(space.m * space.n, 0)};
    for (std::size_t i = 0; i < space.m; ++i) {
        for (std::size_t j = 0; j < space.n; ++j) {
            const auto members = space.unlabeled_members(i, j, dataset);
            table.n_unlabel[i * space.n + j] = members.size();
            table.values[i * space.n + j] = cell_uncertainty(model, seg, dataset, members, reps);
        }
    }
    return table;
}

void attach_uncertainty(PatchSpace& space, const UncertaintyTable& table) {
    if (table.m != space.m || table.n != space.n) throw ShapeError("uncertainty table does not match patch space");
    for (std::size_t c = 0; c < space.cells.size(); ++c) space.cells[c].uncertainty = table.values[c];
}

void write_uncertainty_csv(const fs::path& path, const UncertaintyTable& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "i,j,U_ij,n_unlabel\n";
    for (std::size_t i = 0; i < table.m; ++i) {
        for (std::size_t j = 0; j < table.n; ++j) {
            char buf[64];
            const auto res = std::to_chars(buf, buf + sizeof buf, table.at(i, j));
            out << i << ',' << j << ',' << std::string(buf, res.ptr) << ',' << table.n_unlabel[i * table.n + j] << '\n';
        }
    }
    if (!out) throw DataError("failed writing " + path.string());
}

UncertaintyTable read_uncertainty_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "i,j,U_ij,n_unlabel") {
        throw CorruptionError(path.string() + ": expected header i,j,U_ij,n_unlabel");
    }
    struct Row {
        std::size_t i, j, count;
        double u;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[4];
        for (auto& field : f) std::getline(ss, field, ',');
        Row row{};
        try {
            row.i = std::stoul(f[0]);
            row.j = std::stoul(f[1]);
            row.u = std::stod(f[2]);
            row.count = std::stoul(f[3]);
        } catch (const std::logic_error&) {
            throw CorruptionError(path.string() + ": malformed row '" + line + "'");
        }
        rows.push_back(row);
    }
    UncertaintyTable table;
    for (const auto& r : rows) {
        table.m = std::max(table.m, r.i + 1);
        table.n = std::max(table.n, r.j + 1);
    }
    if (rows.size() != table.m * table.n) throw CorruptionError(path.string() + ": incomplete grid");
    table.values.assign(rows.size(), 0.0);
    table.n_unlabel.assign(rows.size(), 0);
    for (const auto& r : rows) {
        if (r.i * table.n + r.j != static_cast<std::size_t>(&r - rows.data())) {
            throw CorruptionError(path.string() + ": rows out of order");
        }
        if (!(r.u >= 0.0)) throw CorruptionError(path.string() + ": negative uncertainty");
        table.values[r.i * table.n + r.j] = r.u;
        table.n_unlabel[r.i * table.n + r.j] = r.count;
    }
    return table;
}

}  // namespace udgen
