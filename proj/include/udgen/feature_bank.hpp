#pragma once

#include "udgen/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace udgen {

struct FeatureBankConfig {
    std::vector<std::size_t> filters_per_layer{8, 16};
    double filter_scale = 0.8;  // std-dev of filter taps
    std::uint64_t seed = 1234;
};

/// Frozen stack of 3x3, stride-2, zero-padded relu convolutions whose Gram
/// matrices serve as the style representation. Filters are drawn once from
/// the seed; layer weights default to 1/L.
class FeatureBank {
public:
    struct Layer {
        Tensor filters;  // [N x 9*in_channels], tap order (dr, dc, channel)
        std::size_t in_channels = 0;
        std::size_t in_size = 0;   // input spatial extent (square)
        std::size_t out_size = 0;  // output spatial extent (square)
        double alpha = 0.0;

        std::size_t filter_count() const { return filters.rows(); }
    };

    /// Per-layer post-relu feature maps, [positions x filters] row-major.
    struct Activations {
        std::vector<std::vector<double>> maps;
    };

    FeatureBank() = default;
    FeatureBank(std::size_t patch_size, std::size_t channels, FeatureBankConfig config);

    std::size_t patch_size() const { return patch_size_; }
    std::size_t channels() const { return channels_; }
    const std::vector<Layer>& layers() const { return layers_; }
    const FeatureBankConfig& config() const { return config_; }

    Activations extract(std::span<const double> pixels) const;
    /// Gram matrix J = F^T F of layer `layer` ([N x N]).
    std::vector<double> gram(const Activations& acts, std::size_t layer) const;

    /// Backpropagates per-layer feature gradients (same layout as the maps)
    /// to the input pixels, accumulating into `grad_pixels`.
    void backward(const Activations& acts, std::vector<std::vector<double>> grad_maps,
                  std::span<double> grad_pixels) const;

private:
    std::size_t patch_size_ = 0;
    std::size_t channels_ = 0;
    FeatureBankConfig config_;
    std::vector<Layer> layers_;
};

/// Sum over layers of alpha/(2 N^2) * ||J[x] - J[y]||^2.
double style_distance(std::span<const double> x, std::span<const double> y, const FeatureBank& bank);

/// Same value as style_distance; adds d/dx (times `scale`) into `grad_x`.
/// `y` is treated as a constant.
double style_distance_grad(std::span<const double> x, std::span<const double> y, const FeatureBank& bank,
                           double scale, std::span<double> grad_x);

/// Precomputed Gram matrices of a fixed target, for repeated distance queries.
struct StyleTarget {
    std::vector<std::vector<double>> grams;
};
StyleTarget style_target(std::span<const double> y, const FeatureBank& bank);
double style_distance(const FeatureBank::Activations& x_acts, const StyleTarget& y, const FeatureBank& bank);

}  // namespace udgen
