#include "udgen/generation_model.hpp"

#include "udgen/errors.hpp"
#include "udgen/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace udgen {

GenerationModel make_model(const ModelDims& dims, std::uint64_t seed, FeatureBankConfig bank_config) {
    const std::size_t pixels = dims.pixel_count();
    GenerationModel model;
    model.dims = dims;
    model.seed = seed;
    {
        const std::array<std::size_t, 3> d{pixels, dims.encoder_hidden, dims.content_dim};
        const std::array<Activation, 2> a{Activation::tanh, Activation::identity};
        model.content_encoder = make_mlp(d, a, derive_seed(seed, 1));
    }
    {
        const std::array<std::size_t, 3> d{style_statistic_count(dims), dims.style_hidden, dims.style_dim};
        const std::array<Activation, 2> a{Activation::tanh, Activation::identity};
        model.style_encoder = make_mlp(d, a, derive_seed(seed, 2));
    }
    {
        const std::array<std::size_t, 3> d{dims.content_dim + dims.style_dim, dims.generator_hidden, pixels};
        const std::array<Activation, 2> a{Activation::tanh, Activation::sigmoid};
        model.generator = make_mlp(d, a, derive_seed(seed, 3));
    }
    {
        const std::array<std::size_t, 3> d{pixels, dims.discriminator_hidden, 1};
        const std::array<Activation, 2> a{Activation::tanh, Activation::identity};
        model.discriminator = make_mlp(d, a, derive_seed(seed, 4));
    }
    model.bank = FeatureBank(dims.patch_size, dims.channels, std::move(bank_config));
    return model;
}

GenerationModel GenerationModel::zero_grads() const {
    GenerationModel g;
    g.dims = dims;
    g.seed = seed;
    g.content_encoder = content_encoder.zeros_like();
    g.style_encoder = style_encoder.zeros_like();
    g.generator = generator.zeros_like();
    g.discriminator = discriminator.zeros_like();
    return g;
}

void GenerationModel::validate() const {
    udgen::validate(content_encoder);
    udgen::validate(style_encoder);
    udgen::validate(generator);
    udgen::validate(discriminator);
    const std::size_t pixels = dims.pixel_count();
    require_extent(content_encoder.in_dim(), pixels, "content encoder input");
    require_extent(content_encoder.out_dim(), dims.content_dim, "content encoder output");
    require_extent(style_encoder.in_dim(), style_statistic_count(dims), "style encoder input");
    require_extent(style_encoder.out_dim(), dims.style_dim, "style encoder output");
    require_extent(generator.in_dim(), dims.content_dim + dims.style_dim, "generator input");
    require_extent(generator.out_dim(), pixels, "generator output");
    require_extent(discriminator.in_dim(), pixels, "discriminator input");
    require_extent(discriminator.out_dim(), 1, "discriminator output");
}

std::size_t style_statistic_count(const ModelDims& dims) { return kStyleMoments * dims.channels; }

std::vector<double> style_statistics(std::span<const double> patch, std::size_t channels) {
    const std::size_t n = patch.size() / channels;
    std::vector<double> stats(kStyleMoments * channels, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t ch = 0; ch < channels; ++ch) {
            const double v = patch[i * channels + ch];
            double power = v;
            for (std::size_t k = 0; k < kStyleMoments; ++k, power *= v) stats[k * channels + ch] += power;
        }
    }
    for (auto& v : stats) v /= static_cast<double>(n);
    return stats;
}

void style_statistics_backward(std::span<const double> patch, std::size_t channels,
                               std::span<const double> grad_stats, std::span<double> grad_patch) {
    const std::size_t n = patch.size() / channels;
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t ch = 0; ch < channels; ++ch) {
            const double v = patch[i * channels + ch];
            double lower_power = 1.0;  // v^k for moment k+1
            double g = 0.0;
            for (std::size_t k = 0; k < kStyleMoments; ++k, lower_power *= v) {
                g += grad_stats[k * channels + ch] * static_cast<double>(k + 1) * lower_power;
            }
            grad_patch[i * channels + ch] += g * inv;
        }
    }
}

namespace {

std::vector<double> normalize_code(const std::vector<double>& z) {
    const double n = static_cast<double>(z.size());
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= n;
    const double inv_std = 1.0 / std::sqrt(var + kContentNormEpsilon);
    std::vector<double> y(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) y[i] = (z[i] - mean) * inv_std;
    return y;
}

}  // namespace

std::vector<double> encode_content(const GenerationModel& model, std::span<const double> patch) {
    MlpTrace trace;
    return encode_content(model, patch, trace);
}

std::vector<double> instance_normalize(std::span<const double> patch, std::size_t channels) {
    const std::size_t n = patch.size() / channels;
    std::vector<double> out(patch.size());
    for (std::size_t ch = 0; ch < channels; ++ch) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += patch[i * channels + ch];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (patch[i * channels + ch] - mean) * (patch[i * channels + ch] - mean);
        var /= static_cast<double>(n);
        const double inv_std = 1.0 / std::sqrt(var + kInstanceNormEpsilon);
        for (std::size_t i = 0; i < n; ++i) out[i * channels + ch] = (patch[i * channels + ch] - mean) * inv_std;
    }
    return out;
}

void instance_normalize_backward(std::span<const double> patch, std::size_t channels, std::span<const double> grad_out,
                                 std::span<double> grad_patch) {
    const std::size_t n = patch.size() / channels;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t ch = 0; ch < channels; ++ch) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += patch[i * channels + ch];
        mean *= inv_n;
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (patch[i * channels + ch] - mean) * (patch[i * channels + ch] - mean);
        var *= inv_n;
        const double inv_std = 1.0 / std::sqrt(var + kInstanceNormEpsilon);
        double mean_g = 0.0, mean_gy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double y = (patch[i * channels + ch] - mean) * inv_std;
            mean_g += grad_out[i * channels + ch];
            mean_gy += grad_out[i * channels + ch] * y;
        }
        mean_g *= inv_n;
        mean_gy *= inv_n;
        for (std::size_t i = 0; i < n; ++i) {
            const double y = (patch[i * channels + ch] - mean) * inv_std;
            grad_patch[i * channels + ch] += inv_std * (grad_out[i * channels + ch] - mean_g - y * mean_gy);
        }
    }
}

std::vector<double> encode_content(const GenerationModel& model, std::span<const double> patch, MlpTrace& trace) {
    require_extent(patch.size(), model.dims.pixel_count(), "content encoder patch");
    return normalize_code(mlp_forward(model.content_encoder, instance_normalize(patch, model.dims.channels), trace));
}

std::vector<double> encode_content_backward(const GenerationModel& model, std::span<const double> patch,
                                            const MlpTrace& trace, std::span<const double> grad_content,
                                            MlpParams* grads) {
    const auto& z = trace.outputs.back();
    const double n = static_cast<double>(z.size());
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= n;
    const double inv_std = 1.0 / std::sqrt(var + kContentNormEpsilon);
    // dz = inv_std * (dy - mean(dy) - y * mean(dy * y))
    double mean_dy = 0.0, mean_dy_y = 0.0;
    std::vector<double> y(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        y[i] = (z[i] - mean) * inv_std;
        mean_dy += grad_content[i];
        mean_dy_y += grad_content[i] * y[i];
    }
    mean_dy /= n;
    mean_dy_y /= n;
    std::vector<double> dz(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) dz[i] = inv_std * (grad_content[i] - mean_dy - y[i] * mean_dy_y);
    const auto d_normalized = mlp_backward(model.content_encoder, trace, dz, grads);
    std::vector<double> d_patch(patch.size(), 0.0);
    instance_normalize_backward(patch, model.dims.channels, d_normalized, d_patch);
    return d_patch;
}

std::vector<double> encode_style(const GenerationModel& model, std::span<const double> patch) {
    MlpTrace trace;
    return encode_style(model, patch, trace);
}

std::vector<double> encode_style(const GenerationModel& model, std::span<const double> patch, MlpTrace& trace) {
    require_extent(patch.size(), model.dims.pixel_count(), "style encoder patch");
    return mlp_forward(model.style_encoder, style_statistics(patch, model.dims.channels), trace);
}

std::vector<double> encode_style_backward(const GenerationModel& model, std::span<const double> patch,
                                          const MlpTrace& trace, std::span<const double> grad_style,
                                          MlpParams* grads) {
    const auto d_stats = mlp_backward(model.style_encoder, trace, grad_style, grads);
    std::vector<double> d_patch(patch.size(), 0.0);
    style_statistics_backward(patch, model.dims.channels, d_stats, d_patch);
    return d_patch;
}

LatentPair encode(const GenerationModel& model, std::span<const double> patch) {
    require_extent(patch.size(), model.dims.pixel_count(), "encode patch");
    return {encode_content(model, patch), encode_style(model, patch)};
}

std::vector<double> join_latents(std::span<const double> content, std::span<const double> style) {
    std::vector<double> joined(content.begin(), content.end());
    joined.insert(joined.end(), style.begin(), style.end());
    return joined;
}

std::vector<double> generate(const GenerationModel& model, std::span<const double> content,
                             std::span<const double> style) {
    require_extent(content.size(), model.dims.content_dim, "generate content vector");
    require_extent(style.size(), model.dims.style_dim, "generate style vector");
    auto out = mlp_apply(model.generator, join_latents(content, style));
    for (auto& v : out) v = std::clamp(v, 0.0, 1.0);
    return out;
}

std::vector<double> interpolate_style(std::span<const double> a, std::span<const double> b, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw DataError("interpolate_style: lambda must lie in [0,1]");
    require_extent(b.size(), a.size(), "interpolate_style operands");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - lambda) * a[i] + lambda * b[i];
    return out;
}

std::vector<std::span<double>> parameter_spans(GenerationModel& model) {
    std::vector<std::span<double>> spans;
    for (MlpParams* net : {&model.content_encoder, &model.style_encoder, &model.generator, &model.discriminator}) {
        auto s = parameter_spans(*net);
        spans.insert(spans.end(), s.begin(), s.end());
    }
    return spans;
}

std::vector<std::span<const double>> parameter_spans(const GenerationModel& model) {
    std::vector<std::span<const double>> spans;
    for (const MlpParams* net :
         {&model.content_encoder, &model.style_encoder, &model.generator, &model.discriminator}) {
        auto s = parameter_spans(*net);
        spans.insert(spans.end(), s.begin(), s.end());
    }
    return spans;
}

}  // namespace udgen
