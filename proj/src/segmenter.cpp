#include "udgen/segmenter.hpp"

#include "udgen/errors.hpp"
#include "udgen/random.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>

namespace udgen {

namespace {

double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

void check_patch(std::span<const double> pixels, std::size_t patch_size) {
    require_extent(pixels.size(), patch_size * patch_size * kChannels, "segmenter input");
}

}  // namespace

ConstantSegmenter::ConstantSegmenter(std::size_t patch_size, double probability)
    : patch_size_(patch_size), probability_(probability) {
    if (!(probability >= 0.0 && probability <= 1.0)) throw DataError("constant segmenter probability must be in [0, 1]");
}

std::vector<double> ConstantSegmenter::predict(std::span<const double> pixels) const {
    check_patch(pixels, patch_size_);
    return std::vector<double>(patch_size_ * patch_size_, probability_);
}

void ToySegmenterConfig::validate() const {
    if (hidden < 1 || steps < 1 || batch_pixels < 1) throw DataError("toy segmenter: sizes must be positive");
    if (!(learning_rate > 0.0)) throw DataError("toy segmenter: learning rate must be positive");
}

ToySegmenter::ToySegmenter(std::size_t patch_size, MlpParams net) : patch_size_(patch_size), net_(std::move(net)) {
    validate(net_);
    require_extent(net_.in_dim(), kWindow * kWindow * kChannels, "toy segmenter input");
    require_extent(net_.out_dim(), 1, "toy segmenter output");
}

std::vector<double> ToySegmenter::window(std::span<const double> pixels, std::size_t patch_size, std::size_t r,
                                         std::size_t c) {
    std::vector<double> out;
    out.reserve(kWindow * kWindow * kChannels);
    const auto clampi = [&](long v) {
        return static_cast<std::size_t>(std::clamp<long>(v, 0, static_cast<long>(patch_size) - 1));
    };
    for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
            const std::size_t rr = clampi(static_cast<long>(r) + dr);
            const std::size_t cc = clampi(static_cast<long>(c) + dc);
            for (std::size_t ch = 0; ch < kChannels; ++ch) out.push_back(pixels[(rr * patch_size + cc) * kChannels + ch]);
        }
    }
    return out;
}

std::vector<double> ToySegmenter::predict(std::span<const double> pixels) const {
    check_patch(pixels, patch_size_);
    std::vector<double> out(patch_size_ * patch_size_);
    for (std::size_t r = 0; r < patch_size_; ++r) {
        for (std::size_t c = 0; c < patch_size_; ++c) {
            out[r * patch_size_ + c] = sigmoid(mlp_apply(net_, window(pixels, patch_size_, r, c))[0]);
        }
    }
    return out;
}

ToySegmenter train_toy_segmenter(const Dataset& dataset, std::span<const std::size_t> patch_ids,
                                 const ToySegmenterConfig& config) {
    config.validate();
    if (patch_ids.empty()) throw DataError("toy segmenter: no training patches");
    const std::size_t size = dataset.patch_size;
    for (std::size_t id : patch_ids) {
        const auto& p = dataset.patches.at(id);
        if (!p.mask) throw DataError("toy segmenter: patch " + std::to_string(id) + " has no mask");
        check_patch(p.pixels, size);
    }
    // The last layer emits a logit; predict() applies the sigmoid so the
    // cross-entropy gradient is simply p - y.
    const std::array<std::size_t, 3> dims{ToySegmenter::kWindow * ToySegmenter::kWindow * kChannels, config.hidden, 1};
    const std::array<Activation, 2> acts{Activation::tanh, Activation::identity};
    auto net = make_mlp(dims, acts, derive_seed(config.seed, 1));
    AdamConfig adam;
    adam.learning_rate = config.learning_rate;
    auto state = OptimizerState::fresh(net, adam);

    std::mt19937_64 rng(derive_seed(config.seed, 2));
    std::uniform_int_distribution<std::size_t> pick_patch(0, patch_ids.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_pixel(0, size - 1);
    const double inv_batch = 1.0 / static_cast<double>(config.batch_pixels);
    for (std::size_t step = 0; step < config.steps; ++step) {
        auto grads = net.zeros_like();
        for (std::size_t b = 0; b < config.batch_pixels; ++b) {
            const auto& patch = dataset.patches[patch_ids[pick_patch(rng)]];
            const std::size_t r = pick_pixel(rng);
            const std::size_t c = pick_pixel(rng);
            MlpTrace trace;
            const double logit = mlp_forward(net, ToySegmenter::window(patch.pixels, size, r, c), trace)[0];
            const double target = (*patch.mask)[r * size + c] ? 1.0 : 0.0;
            const std::array<double, 1> d{(sigmoid(logit) - target) * inv_batch};
            mlp_backward(net, trace, d, &grads);
        }
        adam_update(net, grads, state);
    }
    return ToySegmenter(size, std::move(net));
}

std::vector<double> toy_segment(const ToySegmenter& seg, std::span<const double> pixels) {
    return seg.predict(pixels);
}

double pixel_accuracy(const Segmenter& seg, std::span<const double> pixels, const Mask& mask) {
    const auto probs = seg.predict(pixels);
    require_extent(mask.size(), probs.size(), "pixel_accuracy mask");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) correct += ((probs[i] >= 0.5) == (mask[i] != 0)) ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(probs.size());
}

}  // namespace udgen
