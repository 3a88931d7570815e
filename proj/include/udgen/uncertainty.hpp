#pragma once

#include "udgen/generation_model.hpp"
#include "udgen/latent_space.hpp"
#include "udgen/segmenter.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace udgen {

/// U_ij over the patch-space grid, row-major, with the unlabeled member count
/// each value averages over.
struct UncertaintyTable {
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<double> values;
    std::vector<std::size_t> n_unlabel;

    double at(std::size_t i, std::size_t j) const { return values.at(i * n + j); }

    friend bool operator==(const UncertaintyTable&, const UncertaintyTable&) = default;
};

/// Mean over pixels of the population variance, across the given grids, of
/// each pixel's value.
double mean_pixel_variance(std::span<const std::vector<double>> grids);

/// Prediction variance of one patch under transfer to every representative
/// style: segments G(E^c(x), rep_l) for each l.
double transfer_variance(const GenerationModel& model, const Segmenter& seg, std::span<const double> pixels,
                         std::span<const std::vector<double>> reps);

/// U_ij: transfer_variance averaged over the cell's unlabeled members; 0 when
/// the cell has none.
double cell_uncertainty(const GenerationModel& model, const Segmenter& seg, const Dataset& dataset,
                        std::span<const std::size_t> unlabeled_members, std::span<const std::vector<double>> reps);

/// Every cell of the patch space, with representative styles computed once
/// from the latents.
UncertaintyTable uncertainty_table(const GenerationModel& model, const Segmenter& seg, const PatchSpace& space,
                                   const Dataset& dataset, const LatentTable& latents);

/// Copies U_ij into the patch-space cells.
void attach_uncertainty(PatchSpace& space, const UncertaintyTable& table);

/// CSV `i,j,U_ij,n_unlabel`.
void write_uncertainty_csv(const std::filesystem::path& path, const UncertaintyTable& table);
UncertaintyTable read_uncertainty_csv(const std::filesystem::path& path);

}  // namespace udgen
