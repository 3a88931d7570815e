#pragma once

#include "udgen/feature_bank.hpp"
#include "udgen/mlp.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace udgen {

struct ModelDims {
    std::size_t patch_size = 16;
    std::size_t channels = 3;
    std::size_t content_dim = 16;
    std::size_t style_dim = 8;
    std::size_t encoder_hidden = 64;
    std::size_t style_hidden = 32;
    std::size_t generator_hidden = 256;
    std::size_t discriminator_hidden = 64;

    std::size_t pixel_count() const { return patch_size * patch_size * channels; }
};

struct LatentPair {
    std::vector<double> content;
    std::vector<double> style;

    friend bool operator==(const LatentPair&, const LatentPair&) = default;
};

/// Content encoder, style encoder, generator, discriminator, and the frozen
/// style feature bank.
struct GenerationModel {
    ModelDims dims;
    std::uint64_t seed = 0;
    MlpParams content_encoder;  // patch -> c (before normalization)
    MlpParams style_encoder;    // pooled color moments -> s
    MlpParams generator;        // [c, s] -> patch (sigmoid output)
    MlpParams discriminator;    // patch -> logit
    FeatureBank bank;

    /// Same-topology zero gradients for the four networks.
    GenerationModel zero_grads() const;
    void validate() const;
};

GenerationModel make_model(const ModelDims& dims, std::uint64_t seed, FeatureBankConfig bank_config = {});

/// Number of pooled moments fed to the style encoder: mean, second and third
/// raw moment of every channel.
inline constexpr std::size_t kStyleMoments = 3;
std::size_t style_statistic_count(const ModelDims& dims);

/// Global (spatially pooled) per-channel moments of a channel-last patch.
std::vector<double> style_statistics(std::span<const double> patch, std::size_t channels);
/// Accumulates d/d(patch) of the pooled moments into `grad_patch`.
void style_statistics_backward(std::span<const double> patch, std::size_t channels,
                               std::span<const double> grad_stats, std::span<double> grad_patch);

inline constexpr double kContentNormEpsilon = 1e-5;
inline constexpr double kInstanceNormEpsilon = 1e-3;

/// Per-channel normalization to zero mean and unit variance over positions.
std::vector<double> instance_normalize(std::span<const double> patch, std::size_t channels);
void instance_normalize_backward(std::span<const double> patch, std::size_t channels, std::span<const double> grad_out,
                                 std::span<double> grad_patch);

/// E^c(x): per-channel instance normalization of the patch, the content MLP,
/// then a parameter-free normalization of the code to zero mean and unit
/// variance across its components.
std::vector<double> encode_content(const GenerationModel& model, std::span<const double> patch);
std::vector<double> encode_content(const GenerationModel& model, std::span<const double> patch, MlpTrace& trace);
/// Backward through E^c; returns d/d(patch) and accumulates content-MLP
/// gradients into `grads` when non-null.
std::vector<double> encode_content_backward(const GenerationModel& model, std::span<const double> patch,
                                            const MlpTrace& trace, std::span<const double> grad_content,
                                            MlpParams* grads);

/// E^s(x): pooled moments followed by the style MLP.
std::vector<double> encode_style(const GenerationModel& model, std::span<const double> patch);
std::vector<double> encode_style(const GenerationModel& model, std::span<const double> patch, MlpTrace& trace);
/// Backward through E^s; returns d/d(patch) and accumulates style-MLP
/// gradients into `grads` when non-null.
std::vector<double> encode_style_backward(const GenerationModel& model, std::span<const double> patch,
                                          const MlpTrace& trace, std::span<const double> grad_style,
                                          MlpParams* grads);

LatentPair encode(const GenerationModel& model, std::span<const double> patch);
std::vector<double> generate(const GenerationModel& model, std::span<const double> content,
                             std::span<const double> style);

/// Generator input: content followed by style.
std::vector<double> join_latents(std::span<const double> content, std::span<const double> style);

/// (1 - lambda) * a + lambda * b; lambda must lie in [0,1].
std::vector<double> interpolate_style(std::span<const double> a, std::span<const double> b, double lambda);

std::vector<std::span<double>> parameter_spans(GenerationModel& model);
std::vector<std::span<const double>> parameter_spans(const GenerationModel& model);

}  // namespace udgen
