#include "udgen/clustering.hpp"

#include "udgen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace udgen {

std::string_view to_string(Linkage linkage) {
    switch (linkage) {
        case Linkage::average: return "average";
        case Linkage::complete: return "complete";
        case Linkage::single: return "single";
    }
    return "unknown";
}

Linkage linkage_from_string(std::string_view name) {
    if (name == "average") return Linkage::average;
    if (name == "complete") return Linkage::complete;
    if (name == "single") return Linkage::single;
    throw DataError("unknown linkage '" + std::string(name) + "' (expected average, complete or single)");
}

std::vector<std::size_t> ClusterAssignment::members(std::size_t c) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == c) out.push_back(i);
    }
    return out;
}

void ClusterAssignment::validate() const {
    std::vector<bool> used(k, false);
    for (std::size_t label : labels) {
        if (label >= k) throw DataError("cluster id " + std::to_string(label) + " out of range for k=" + std::to_string(k));
        used[label] = true;
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (!used[c]) throw DataError("cluster id " + std::to_string(c) + " has no members");
    }
}

ClusterAssignment agglomerative_cluster(std::span<const std::vector<double>> vectors, std::size_t k, Linkage linkage) {
    const std::size_t n = vectors.size();
    if (k == 0 || k > n) {
        throw DataError("agglomerative_cluster: k=" + std::to_string(k) + " must be in [1, " + std::to_string(n) + "]");
    }
    for (const auto& v : vectors) {
        if (v.size() != vectors[0].size()) throw ShapeError("agglomerative_cluster: vectors differ in dimension");
    }

    // Slot s holds the cluster whose smallest member index is s, so scanning
    // pairs (a < b) in order with a strict comparison realizes the tie-break.
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            double sq = 0.0;
            for (std::size_t d = 0; d < vectors[a].size(); ++d) {
                const double diff = vectors[a][d] - vectors[b][d];
                sq += diff * diff;
            }
            dist[a * n + b] = dist[b * n + a] = std::sqrt(sq);
        }
    }
    std::vector<std::size_t> size(n, 1);
    std::vector<std::size_t> root(n);
    for (std::size_t i = 0; i < n; ++i) root[i] = i;
    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = i;

    while (active.size() > k) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_a = 0, best_b = 0;
        for (std::size_t ia = 0; ia < active.size(); ++ia) {
            const std::size_t a = active[ia];
            for (std::size_t ib = ia + 1; ib < active.size(); ++ib) {
                const std::size_t b = active[ib];
                if (dist[a * n + b] < best) {
                    best = dist[a * n + b];
                    best_a = a;
                    best_b = b;
                }
            }
        }
        const double na = static_cast<double>(size[best_a]);
        const double nb = static_cast<double>(size[best_b]);
        for (std::size_t c : active) {
            if (c == best_a || c == best_b) continue;
            const double da = dist[best_a * n + c];
            const double db = dist[best_b * n + c];
            double merged = 0.0;
            switch (linkage) {
                case Linkage::average: merged = (na * da + nb * db) / (na + nb); break;
                case Linkage::complete: merged = std::max(da, db); break;
                case Linkage::single: merged = std::min(da, db); break;
            }
            dist[best_a * n + c] = dist[c * n + best_a] = merged;
        }
        size[best_a] += size[best_b];
        for (auto& r : root) {
            if (r == best_b) r = best_a;
        }
        active.erase(std::find(active.begin(), active.end(), best_b));
    }

    ClusterAssignment out;
    out.k = k;
    out.labels.resize(n);
    std::map<std::size_t, std::size_t> renumber;
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, inserted] = renumber.try_emplace(root[i], renumber.size());
        out.labels[i] = it->second;
    }
    return out;
}

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) throw ShapeError("adjusted_rand_index: labelings differ in length");
    const std::size_t n = a.size();
    if (n < 2) return 1.0;
    std::map<std::pair<std::size_t, std::size_t>, double> joint;
    std::map<std::size_t, double> rows, cols;
    for (std::size_t i = 0; i < n; ++i) {
        joint[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto pairs = [](double m) { return m * (m - 1.0) / 2.0; };
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [key, m] : joint) index += pairs(m);
    for (const auto& [key, m] : rows) sum_rows += pairs(m);
    for (const auto& [key, m] : cols) sum_cols += pairs(m);
    const double expected = sum_rows * sum_cols / pairs(static_cast<double>(n));
    const double max_index = 0.5 * (sum_rows + sum_cols);
    // Both labelings trivial (all singletons or one cluster): identical
    // partitions agree perfectly, otherwise there is no chance-adjusted signal.
    if (max_index == expected) return index == max_index ? 1.0 : 0.0;
    return (index - expected) / (max_index - expected);
}

}  // namespace udgen
