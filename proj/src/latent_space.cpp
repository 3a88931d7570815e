#include "udgen/latent_space.hpp"

#include "udgen/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace udgen {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw CorruptionError(where + ": not a number: '" + text + "'");
    }
    return v;
}

std::size_t parse_index(const std::string& text, const std::string& where) {
    std::size_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw CorruptionError(where + ": not an index: '" + text + "'");
    }
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw CorruptionError(path.string() + ": missing header");
    header = split_csv_line(line);
    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw CorruptionError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

void check_patch_ids(const std::vector<std::vector<std::string>>& rows, const fs::path& path) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (parse_index(rows[r][0], path.string()) != r) {
            throw CorruptionError(path.string() + ": row " + std::to_string(r) + " has patch_id " + rows[r][0]);
        }
    }
}

double euclidean(std::span<const double> a, std::span<const double> b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sq);
}

}  // namespace

std::vector<std::vector<double>> LatentTable::contents() const {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.content);
    return out;
}

std::vector<std::vector<double>> LatentTable::styles() const {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.style);
    return out;
}

LatentTable embed_all(const GenerationModel& model, const Dataset& dataset) {
    LatentTable table;
    table.rows.reserve(dataset.patches.size());
    for (const auto& patch : dataset.patches) table.rows.push_back(encode(model, patch.pixels));
    return table;
}

void write_latents_csv(const fs::path& path, const LatentTable& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    const std::size_t cdim = table.rows.empty() ? 0 : table.rows[0].content.size();
    const std::size_t sdim = table.rows.empty() ? 0 : table.rows[0].style.size();
    out << "patch_id";
    for (std::size_t i = 0; i < cdim; ++i) out << ",c" << i;
    for (std::size_t i = 0; i < sdim; ++i) out << ",s" << i;
    out << '\n';
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out << r;
        for (double v : table.rows[r].content) out << ',' << format_double(v);
        for (double v : table.rows[r].style) out << ',' << format_double(v);
        out << '\n';
    }
    if (!out) throw DataError("failed writing " + path.string());
}

LatentTable read_latents_csv(const fs::path& path) {
    std::vector<std::string> header;
    const auto rows = read_csv(path, header);
    if (header.empty() || header[0] != "patch_id") throw CorruptionError(path.string() + ": header must start with patch_id");
    std::size_t cdim = 0, sdim = 0;
    for (std::size_t i = 1; i < header.size(); ++i) {
        const char kind = header[i].empty() ? '?' : header[i][0];
        if (kind == 'c' && sdim == 0) {
            ++cdim;
        } else if (kind == 's') {
            ++sdim;
        } else {
            throw CorruptionError(path.string() + ": unexpected column '" + header[i] + "'");
        }
    }
    check_patch_ids(rows, path);
    LatentTable table;
    for (const auto& row : rows) {
        LatentPair pair;
        for (std::size_t i = 0; i < cdim; ++i) pair.content.push_back(parse_double(row[1 + i], path.string()));
        for (std::size_t i = 0; i < sdim; ++i) pair.style.push_back(parse_double(row[1 + cdim + i], path.string()));
        table.rows.push_back(std::move(pair));
    }
    return table;
}

void write_assignment_csv(const fs::path& path, const ClusterAssignment& assignment) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "patch_id,cluster\n";
    for (std::size_t i = 0; i < assignment.labels.size(); ++i) out << i << ',' << assignment.labels[i] << '\n';
    if (!out) throw DataError("failed writing " + path.string());
}

ClusterAssignment read_assignment_csv(const fs::path& path) {
    std::vector<std::string> header;
    const auto rows = read_csv(path, header);
    if (header != std::vector<std::string>{"patch_id", "cluster"}) {
        throw CorruptionError(path.string() + ": expected header patch_id,cluster");
    }
    check_patch_ids(rows, path);
    ClusterAssignment out;
    for (const auto& row : rows) {
        out.labels.push_back(parse_index(row[1], path.string()));
        out.k = std::max(out.k, out.labels.back() + 1);
    }
    try {
        out.validate();
    } catch (const DataError& e) {
        throw CorruptionError(path.string() + ": " + e.what());
    }
    return out;
}

std::vector<std::size_t> PatchSpace::labeled_members(std::size_t i, std::size_t j, const Dataset& dataset) const {
    std::vector<std::size_t> out;
    for (std::size_t id : cell(i, j).members) {
        if (dataset.patches[id].labeled) out.push_back(id);
    }
    return out;
}

std::vector<std::size_t> PatchSpace::unlabeled_members(std::size_t i, std::size_t j, const Dataset& dataset) const {
    std::vector<std::size_t> out;
    for (std::size_t id : cell(i, j).members) {
        if (!dataset.patches[id].labeled) out.push_back(id);
    }
    return out;
}

PatchSpace build_patch_space(const ClusterAssignment& content, const ClusterAssignment& style, const Dataset& dataset) {
    const std::size_t count = dataset.patches.size();
    if (content.labels.size() != count || style.labels.size() != count) {
        throw ShapeError("build_patch_space: assignments cover " + std::to_string(content.labels.size()) + " and " +
                         std::to_string(style.labels.size()) + " patches, dataset has " + std::to_string(count));
    }
    content.validate();
    style.validate();
    PatchSpace space;
    space.m = content.k;
    space.n = style.k;
    space.cells.resize(space.m * space.n);
    space.content_of = content.labels;
    space.style_of = style.labels;
    for (std::size_t id = 0; id < count; ++id) {
        auto& cell = space.cell(content.labels[id], style.labels[id]);
        cell.members.push_back(id);
        if (dataset.patches[id].labeled) {
            ++cell.n_label;
        } else {
            ++cell.n_unlabel;
        }
    }
    return space;
}

nlohmann::json patch_space_json(const PatchSpace& space) {
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t i = 0; i < space.m; ++i) {
        for (std::size_t j = 0; j < space.n; ++j) {
            const auto& c = space.cell(i, j);
            nlohmann::json entry{{"i", i}, {"j", j}, {"n_label", c.n_label}, {"n_unlabel", c.n_unlabel}};
            if (c.uncertainty) entry["uncertainty"] = *c.uncertainty;
            cells.push_back(std::move(entry));
        }
    }
    return {{"m", space.m}, {"n", space.n}, {"cells", std::move(cells)}};
}

void write_patch_space_json(const fs::path& path, const PatchSpace& space) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << patch_space_json(space).dump(2) << '\n';
    if (!out) throw DataError("failed writing " + path.string());
}

std::size_t medoid_index(std::span<const std::vector<double>> vectors) {
    if (vectors.empty()) throw DataError("representative_style: empty cluster");
    std::size_t best = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < vectors.size(); ++j) sum += euclidean(vectors[i], vectors[j]);
        if (sum < best_sum) {
            best_sum = sum;
            best = i;
        }
    }
    return best;
}

std::vector<double> representative_style(const LatentTable& latents, std::span<const std::size_t> members) {
    std::vector<std::size_t> ids(members.begin(), members.end());
    std::sort(ids.begin(), ids.end());
    std::vector<std::vector<double>> styles;
    styles.reserve(ids.size());
    for (std::size_t id : ids) styles.push_back(latents.rows.at(id).style);
    return styles[medoid_index(styles)];
}

std::vector<std::vector<double>> representative_styles(const LatentTable& latents, const ClusterAssignment& style) {
    if (style.labels.size() != latents.size()) throw ShapeError("representative_styles: assignment/latent size mismatch");
    std::vector<std::vector<double>> reps;
    for (std::size_t l = 0; l < style.k; ++l) reps.push_back(representative_style(latents, style.members(l)));
    return reps;
}

}  // namespace udgen
