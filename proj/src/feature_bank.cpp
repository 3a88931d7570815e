#include "udgen/feature_bank.hpp"

#include "udgen/errors.hpp"

#include <random>

namespace udgen {

namespace {

constexpr std::size_t kKernel = 3;

std::size_t strided_extent(std::size_t in) { return (in - 1) / 2 + 1; }

// out[p, f] = sum_taps filters[f, tap] * in[2r+dr-1, 2c+dc-1, ch]
std::vector<double> conv_forward(const FeatureBank::Layer& layer, std::span<const double> in) {
    const std::size_t n = layer.filter_count();
    const std::size_t cin = layer.in_channels;
    const std::size_t taps = kKernel * kKernel * cin;
    std::vector<double> out(layer.out_size * layer.out_size * n, 0.0);
    std::vector<double> window(taps);
    for (std::size_t r = 0; r < layer.out_size; ++r) {
        for (std::size_t c = 0; c < layer.out_size; ++c) {
            std::size_t t = 0;
            for (std::size_t dr = 0; dr < kKernel; ++dr) {
                for (std::size_t dc = 0; dc < kKernel; ++dc) {
                    const long ir = static_cast<long>(2 * r + dr) - 1;
                    const long ic = static_cast<long>(2 * c + dc) - 1;
                    const bool inside = ir >= 0 && ic >= 0 && ir < static_cast<long>(layer.in_size) &&
                                        ic < static_cast<long>(layer.in_size);
                    for (std::size_t ch = 0; ch < cin; ++ch, ++t) {
                        window[t] = inside ? in[(static_cast<std::size_t>(ir) * layer.in_size +
                                                 static_cast<std::size_t>(ic)) * cin + ch]
                                           : 0.0;
                    }
                }
            }
            double* dst = out.data() + (r * layer.out_size + c) * n;
            for (std::size_t f = 0; f < n; ++f) {
                const double* w = layer.filters.data() + f * taps;
                double z = 0.0;
                for (std::size_t k = 0; k < taps; ++k) z += w[k] * window[k];
                dst[f] = z > 0.0 ? z : 0.0;
            }
        }
    }
    return out;
}

// Given d/d(post-relu output), accumulate d/d(input).
void conv_backward(const FeatureBank::Layer& layer, std::span<const double> out, std::span<const double> grad_out,
                   std::span<double> grad_in) {
    const std::size_t n = layer.filter_count();
    const std::size_t cin = layer.in_channels;
    const std::size_t taps = kKernel * kKernel * cin;
    std::vector<double> dwindow(taps);
    for (std::size_t r = 0; r < layer.out_size; ++r) {
        for (std::size_t c = 0; c < layer.out_size; ++c) {
            std::fill(dwindow.begin(), dwindow.end(), 0.0);
            const std::size_t base = (r * layer.out_size + c) * n;
            bool any = false;
            for (std::size_t f = 0; f < n; ++f) {
                if (out[base + f] <= 0.0) continue;
                const double g = grad_out[base + f];
                if (g == 0.0) continue;
                any = true;
                const double* w = layer.filters.data() + f * taps;
                for (std::size_t k = 0; k < taps; ++k) dwindow[k] += g * w[k];
            }
            if (!any) continue;
            std::size_t t = 0;
            for (std::size_t dr = 0; dr < kKernel; ++dr) {
                for (std::size_t dc = 0; dc < kKernel; ++dc) {
                    const long ir = static_cast<long>(2 * r + dr) - 1;
                    const long ic = static_cast<long>(2 * c + dc) - 1;
                    const bool inside = ir >= 0 && ic >= 0 && ir < static_cast<long>(layer.in_size) &&
                                        ic < static_cast<long>(layer.in_size);
                    for (std::size_t ch = 0; ch < cin; ++ch, ++t) {
                        if (inside) {
                            grad_in[(static_cast<std::size_t>(ir) * layer.in_size + static_cast<std::size_t>(ic)) *
                                        cin + ch] += dwindow[t];
                        }
                    }
                }
            }
        }
    }
}

std::vector<double> gram_of(const std::vector<double>& map, std::size_t n) {
    const std::size_t positions = map.size() / n;
    std::vector<double> g(n * n, 0.0);
    for (std::size_t p = 0; p < positions; ++p) {
        const double* f = map.data() + p * n;
        for (std::size_t a = 0; a < n; ++a) {
            if (f[a] == 0.0) continue;
            for (std::size_t b = a; b < n; ++b) g[a * n + b] += f[a] * f[b];
        }
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < a; ++b) g[a * n + b] = g[b * n + a];
    return g;
}

// Distance contribution of one layer; optionally fills d/dF for the x side.
double layer_distance(const FeatureBank::Layer& layer, const std::vector<double>& x_map,
                      const std::vector<double>& gx, const std::vector<double>& gy, double scale,
                      std::vector<double>* grad_map) {
    const std::size_t n = layer.filter_count();
    const double coeff = layer.alpha / (2.0 * static_cast<double>(n * n));
    double sum = 0.0;
    std::vector<double> diff(n * n);
    for (std::size_t k = 0; k < n * n; ++k) {
        diff[k] = gx[k] - gy[k];
        sum += diff[k] * diff[k];
    }
    if (grad_map) {
        // dL/dJ = 2*coeff*diff (symmetric); dL/dF = F (dJ + dJ^T) = 2 F dJ.
        const std::size_t positions = x_map.size() / n;
        grad_map->assign(x_map.size(), 0.0);
        const double k = 4.0 * coeff * scale;
        for (std::size_t p = 0; p < positions; ++p) {
            const double* f = x_map.data() + p * n;
            double* g = grad_map->data() + p * n;
            for (std::size_t b = 0; b < n; ++b) {
                if (f[b] == 0.0) continue;
                const double* d = diff.data() + b * n;
                for (std::size_t a = 0; a < n; ++a) g[a] += k * f[b] * d[a];
            }
        }
    }
    return coeff * sum;
}

}  // namespace

FeatureBank::FeatureBank(std::size_t patch_size, std::size_t channels, FeatureBankConfig config)
    : patch_size_(patch_size), channels_(channels), config_(std::move(config)) {
    if (config_.filters_per_layer.empty()) throw DataError("feature bank needs at least one layer");
    std::mt19937_64 rng(config_.seed);
    std::normal_distribution<double> normal(0.0, config_.filter_scale);
    std::size_t in_channels = channels;
    std::size_t in_size = patch_size;
    const double alpha = 1.0 / static_cast<double>(config_.filters_per_layer.size());
    for (const std::size_t n : config_.filters_per_layer) {
        Layer layer{Tensor({n, kKernel * kKernel * in_channels}), in_channels, in_size, strided_extent(in_size),
                    alpha};
        for (auto& w : layer.filters.values()) w = normal(rng);
        in_channels = n;
        in_size = layer.out_size;
        layers_.push_back(std::move(layer));
    }
}

FeatureBank::Activations FeatureBank::extract(std::span<const double> pixels) const {
    require_extent(pixels.size(), patch_size_ * patch_size_ * channels_, "feature bank input");
    Activations acts;
    std::span<const double> input = pixels;
    for (const auto& layer : layers_) {
        acts.maps.push_back(conv_forward(layer, input));
        input = acts.maps.back();
    }
    return acts;
}

std::vector<double> FeatureBank::gram(const Activations& acts, std::size_t layer) const {
    return gram_of(acts.maps.at(layer), layers_.at(layer).filter_count());
}

void FeatureBank::backward(const Activations& acts, std::vector<std::vector<double>> grad_maps,
                           std::span<double> grad_pixels) const {
    for (std::size_t l = layers_.size(); l-- > 0;) {
        if (l > 0) {
            conv_backward(layers_[l], acts.maps[l], grad_maps[l], grad_maps[l - 1]);
        } else {
            conv_backward(layers_[l], acts.maps[l], grad_maps[l], grad_pixels);
        }
    }
}

StyleTarget style_target(std::span<const double> y, const FeatureBank& bank) {
    const auto acts = bank.extract(y);
    StyleTarget target;
    for (std::size_t l = 0; l < bank.layers().size(); ++l) target.grams.push_back(bank.gram(acts, l));
    return target;
}

double style_distance(const FeatureBank::Activations& x_acts, const StyleTarget& y, const FeatureBank& bank) {
    double total = 0.0;
    for (std::size_t l = 0; l < bank.layers().size(); ++l) {
        total += layer_distance(bank.layers()[l], x_acts.maps[l], bank.gram(x_acts, l), y.grams[l], 1.0, nullptr);
    }
    return total;
}

double style_distance(std::span<const double> x, std::span<const double> y, const FeatureBank& bank) {
    require_extent(x.size(), y.size(), "style_distance operands");
    return style_distance(bank.extract(x), style_target(y, bank), bank);
}

double style_distance_grad(std::span<const double> x, std::span<const double> y, const FeatureBank& bank,
                           double scale, std::span<double> grad_x) {
    require_extent(x.size(), y.size(), "style_distance operands");
    require_extent(grad_x.size(), x.size(), "style_distance gradient");
    const auto acts = bank.extract(x);
    const auto target = style_target(y, bank);
    std::vector<std::vector<double>> grad_maps(bank.layers().size());
    double total = 0.0;
    for (std::size_t l = 0; l < bank.layers().size(); ++l) {
        total += layer_distance(bank.layers()[l], acts.maps[l], bank.gram(acts, l), target.grams[l], scale,
                                &grad_maps[l]);
    }
    bank.backward(acts, std::move(grad_maps), grad_x);
    return total;
}

}  // namespace udgen
