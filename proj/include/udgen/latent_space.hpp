#pragma once

#include "udgen/clustering.hpp"
#include "udgen/generation_model.hpp"
#include "udgen/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace udgen {

/// Latents of every dataset patch, row i belonging to patch i.
struct LatentTable {
    std::vector<LatentPair> rows;

    std::size_t size() const { return rows.size(); }
    std::vector<std::vector<double>> contents() const;
    std::vector<std::vector<double>> styles() const;

    friend bool operator==(const LatentTable&, const LatentTable&) = default;
};

LatentTable embed_all(const GenerationModel& model, const Dataset& dataset);

/// CSV with header `patch_id,c0..,s0..`; values printed with round-trip
/// precision.
void write_latents_csv(const std::filesystem::path& path, const LatentTable& table);
LatentTable read_latents_csv(const std::filesystem::path& path);

/// CSV with header `patch_id,cluster`.
void write_assignment_csv(const std::filesystem::path& path, const ClusterAssignment& assignment);
ClusterAssignment read_assignment_csv(const std::filesystem::path& path);

struct PatchSpaceCell {
    std::vector<std::size_t> members;  // patch ids, ascending
    std::size_t n_label = 0;
    std::size_t n_unlabel = 0;
    std::optional<double> uncertainty;

    friend bool operator==(const PatchSpaceCell&, const PatchSpaceCell&) = default;
};

/// Grid H of m content clusters by n style clusters, row-major cells.
struct PatchSpace {
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<PatchSpaceCell> cells;
    std::vector<std::size_t> content_of;  // per patch
    std::vector<std::size_t> style_of;    // per patch

    const PatchSpaceCell& cell(std::size_t i, std::size_t j) const { return cells.at(i * n + j); }
    PatchSpaceCell& cell(std::size_t i, std::size_t j) { return cells.at(i * n + j); }
    /// Labeled and unlabeled members of the cell.
    std::vector<std::size_t> labeled_members(std::size_t i, std::size_t j, const Dataset& dataset) const;
    std::vector<std::size_t> unlabeled_members(std::size_t i, std::size_t j, const Dataset& dataset) const;

    friend bool operator==(const PatchSpace&, const PatchSpace&) = default;
};

PatchSpace build_patch_space(const ClusterAssignment& content, const ClusterAssignment& style, const Dataset& dataset);

/// {m, n, cells: [{i, j, n_label, n_unlabel, uncertainty?}]}.
nlohmann::json patch_space_json(const PatchSpace& space);
void write_patch_space_json(const std::filesystem::path& path, const PatchSpace& space);

/// Position within `vectors` of the medoid: the member minimizing the sum of
/// Euclidean distances to all members. Ties go to the lowest position.
std::size_t medoid_index(std::span<const std::vector<double>> vectors);

/// Rep(S_l) for the style cluster made of the given patch ids; ties broken by
/// the lowest patch id.
std::vector<double> representative_style(const LatentTable& latents, std::span<const std::size_t> members);
/// Rep(S_l) for every style cluster l in [0, n).
std::vector<std::vector<double>> representative_styles(const LatentTable& latents, const ClusterAssignment& style);

}  // namespace udgen
