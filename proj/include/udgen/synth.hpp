#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace udgen {

inline constexpr std::size_t kChannels = 3;

/// Parameters of the synthetic patch corpus. Content factors are blob layouts,
/// style factors are per-channel affine-plus-gamma color transforms.
struct SynthSpec {
    std::size_t patch_size = 16;
    std::size_t n_content_factors = 3;
    std::size_t n_style_factors = 4;
    std::size_t images_per_combination = 40;
    double noise_sigma = 0.02;
    std::uint64_t seed = 7;

    void validate() const;
};

/// Height x width x 3 image, channel-last, values in [0,1].
struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> rgb;

    double& at(std::size_t r, std::size_t c, std::size_t ch) { return rgb[(r * width + c) * kChannels + ch]; }
    double at(std::size_t r, std::size_t c, std::size_t ch) const { return rgb[(r * width + c) * kChannels + ch]; }
};

using Mask = std::vector<std::uint8_t>;

struct Patch {
    std::size_t size = 0;
    std::vector<double> pixels;  // size*size*3, channel-last
    std::size_t source_id = 0;
    std::array<std::size_t, 2> offset{0, 0};
    bool labeled = false;
    std::optional<Mask> mask;  // present iff labeled
    std::optional<int> true_content;
    std::optional<int> true_style;
    // Ground-truth mask withheld from policy consumers after a labeled split;
    // used only for evaluation.
    std::optional<Mask> hidden_mask;

    std::size_t pixel_count() const { return size * size; }
};

struct Dataset {
    std::size_t patch_size = 0;
    std::vector<Patch> patches;
    std::vector<std::size_t> labeled_ids;
    std::vector<std::size_t> unlabeled_ids;

    std::size_t size() const { return patches.size(); }
    /// Throws DataError unless the labeled/unlabeled ids partition the patches
    /// and every patch's flag and mask agree with its membership.
    void validate() const;
};

/// Color transform of one style factor: out_c = low_c + (high_c - low_c) * g^gamma.
struct StyleTransform {
    std::array<double, 3> low{};
    std::array<double, 3> high{};
    double gamma = 1.0;

    std::array<double, 3> apply(double gray) const;
};

struct Blob {
    double row = 0.0;
    double col = 0.0;
    double radius = 0.0;
};

inline constexpr double kForegroundLevel = 0.25;
inline constexpr double kBackgroundLevel = 0.85;

StyleTransform style_transform(const SynthSpec& spec, std::size_t style_factor);
std::vector<Blob> content_layout(const SynthSpec& spec, std::size_t content_factor);

double luminance(const std::array<double, 3>& rgb);

/// Mean luminance a noise-free patch of this style has when `foreground_fraction`
/// of its pixels are foreground.
double expected_luminance(const StyleTransform& style, double foreground_fraction);

/// Renders one labeled patch (mask present) from its factors and a per-image seed.
Patch render_patch(const SynthSpec& spec, std::size_t content_factor, std::size_t style_factor,
                   std::uint64_t image_seed);

/// Every (content, style) pair rendered `images_per_combination` times; all
/// patches start labeled.
Dataset make_synth_dataset(const SynthSpec& spec);

/// Windows of `size` at offsets {0, step, 2*step, ...} on both axes, row-major.
std::vector<Patch> crop_patches(const Image& image, std::size_t size, std::size_t step, std::size_t source_id = 0);

/// Closed-form window count along one axis.
std::size_t crop_count(std::size_t extent, std::size_t size, std::size_t step);

/// Random labeled subset of floor(fraction * size) patches (at least one);
/// the rest lose their visible masks.
Dataset split_labeled(const Dataset& dataset, double fraction, std::uint64_t seed);

/// Rebuilds labeled/unlabeled id lists from the per-patch flags.
void reindex_labels(Dataset& dataset);

}  // namespace udgen
