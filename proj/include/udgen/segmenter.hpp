#pragma once

#include "udgen/adam.hpp"
#include "udgen/mlp.hpp"
#include "udgen/synth.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace udgen {

/// Maps a channel-last patch to a per-pixel foreground probability grid.
class Segmenter {
public:
    virtual ~Segmenter() = default;
    virtual std::vector<double> predict(std::span<const double> pixels) const = 0;
};

/// Ignores its input; the zero-variance reference for uncertainty.
class ConstantSegmenter final : public Segmenter {
public:
    explicit ConstantSegmenter(std::size_t patch_size, double probability = 0.5);
    std::vector<double> predict(std::span<const double> pixels) const override;

private:
    std::size_t patch_size_;
    double probability_;
};

struct ToySegmenterConfig {
    std::size_t hidden = 8;
    std::size_t steps = 3000;
    std::size_t batch_pixels = 64;
    double learning_rate = 1e-2;
    std::uint64_t seed = 11;

    void validate() const;
};

/// Per-pixel classifier over the 3x3 window around each pixel (edge
/// replicated), window -> hidden tanh -> sigmoid.
class ToySegmenter final : public Segmenter {
public:
    ToySegmenter(std::size_t patch_size, MlpParams net);

    std::vector<double> predict(std::span<const double> pixels) const override;
    std::size_t patch_size() const { return patch_size_; }
    const MlpParams& net() const { return net_; }

    static constexpr std::size_t kWindow = 3;
    /// Window features of pixel (r, c), tap order (dr, dc, channel).
    static std::vector<double> window(std::span<const double> pixels, std::size_t patch_size, std::size_t r,
                                      std::size_t c);

private:
    std::size_t patch_size_;
    MlpParams net_;
};

/// Trains on the masks of the given patches (each must carry a mask) with
/// binary cross-entropy on random pixel batches and Adam.
ToySegmenter train_toy_segmenter(const Dataset& dataset, std::span<const std::size_t> patch_ids,
                                 const ToySegmenterConfig& config);

/// toy_segment: probability grid of a trained toy segmenter.
std::vector<double> toy_segment(const ToySegmenter& seg, std::span<const double> pixels);

/// Fraction of pixels whose thresholded (0.5) prediction equals the mask.
double pixel_accuracy(const Segmenter& seg, std::span<const double> pixels, const Mask& mask);

}  // namespace udgen
