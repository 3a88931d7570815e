#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace udgen {

enum class Linkage { average, complete, single };

std::string_view to_string(Linkage linkage);
Linkage linkage_from_string(std::string_view name);

struct ClusterAssignment {
    std::size_t k = 0;
    std::vector<std::size_t> labels;  // per item, in [0, k)

    /// Item indices of cluster `c`, ascending.
    std::vector<std::size_t> members(std::size_t c) const;
    /// Throws DataError unless every label is in range and every id is used.
    void validate() const;

    friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

/// Bottom-up merging under Euclidean distance until `k` clusters remain.
/// Cluster distances follow the Lance-Williams update of the linkage. On
/// equal distances the pair whose smallest member indices are lowest merges
/// first. Labels are numbered by first occurrence in item order.
ClusterAssignment agglomerative_cluster(std::span<const std::vector<double>> vectors, std::size_t k,
                                        Linkage linkage = Linkage::average);

/// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace udgen
