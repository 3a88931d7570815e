#include "udgen/mlp.hpp"

#include "udgen/errors.hpp"

#include <cmath>
#include <random>
#include <string>

namespace udgen {

namespace {

double activate(Activation activation, double z) {
    switch (activation) {
        case Activation::tanh: return std::tanh(z);
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::identity: return z;
    }
    return z;
}

// Derivative expressed through the activation output.
double activation_slope(Activation activation, double y) {
    switch (activation) {
        case Activation::tanh: return 1.0 - y * y;
        case Activation::relu: return y > 0.0 ? 1.0 : 0.0;
        case Activation::sigmoid: return y * (1.0 - y);
        case Activation::identity: return 1.0;
    }
    return 1.0;
}

}  // namespace

std::string_view to_string(Activation activation) {
    switch (activation) {
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        case Activation::identity: return "identity";
    }
    return "identity";
}

Activation activation_from_string(std::string_view name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "identity") return Activation::identity;
    throw DataError("unknown activation '" + std::string(name) + "'");
}

std::size_t MlpParams::in_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
std::size_t MlpParams::out_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

std::size_t MlpParams::parameter_count() const {
    std::size_t total = 0;
    for (const auto& layer : layers) total += layer.weight.size() + layer.bias.size();
    return total;
}

MlpParams MlpParams::zeros_like() const {
    MlpParams zeros;
    zeros.layers.reserve(layers.size());
    for (const auto& layer : layers) {
        zeros.layers.push_back({Tensor(layer.weight.shape()), Tensor(layer.bias.shape()), layer.activation});
    }
    return zeros;
}

MlpParams make_mlp(std::span<const std::size_t> dims, std::span<const Activation> activations, std::uint64_t seed) {
    if (dims.size() < 2 || activations.size() != dims.size() - 1) {
        throw ShapeError("make_mlp: need n+1 dims for n activations (got " + std::to_string(dims.size()) + " dims, " +
                         std::to_string(activations.size()) + " activations)");
    }
    std::mt19937_64 rng(seed);
    MlpParams params;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t in = dims[l];
        const std::size_t out = dims[l + 1];
        const double scale = activations[l] == Activation::relu ? std::sqrt(2.0 / static_cast<double>(in))
                                                                 : std::sqrt(2.0 / static_cast<double>(in + out));
        std::normal_distribution<double> normal(0.0, scale);
        DenseLayer layer{Tensor({out, in}), Tensor({out}), activations[l]};
        for (auto& w : layer.weight.values()) w = normal(rng);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

void validate(const MlpParams& params) {
    if (params.layers.empty()) throw ShapeError("mlp has no layers");
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        if (layer.weight.rank() != 2 || layer.bias.rank() != 1) {
            throw ShapeError("layer " + std::to_string(l) + ": weight must be 2-D and bias 1-D");
        }
        require_extent(layer.bias.size(), layer.out_dim(), "layer " + std::to_string(l) + " bias");
        if (l > 0) {
            require_extent(layer.in_dim(), params.layers[l - 1].out_dim(), "layer " + std::to_string(l) + " input");
        }
    }
}

std::vector<double> mlp_apply(const MlpParams& params, std::span<const double> input) {
    MlpTrace trace;
    return mlp_forward(params, input, trace);
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input, MlpTrace& trace) {
    require_extent(input.size(), params.in_dim(), "mlp input");
    require_finite(input, "mlp input");
    trace.inputs.resize(params.layers.size());
    trace.outputs.resize(params.layers.size());
    std::vector<double> current(input.begin(), input.end());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        const std::size_t in = layer.in_dim();
        const std::size_t out = layer.out_dim();
        std::vector<double> next(out);
        const double* w = layer.weight.data();
        for (std::size_t o = 0; o < out; ++o) {
            double z = layer.bias[o];
            const double* row = w + o * in;
            for (std::size_t i = 0; i < in; ++i) z += row[i] * current[i];
            next[o] = activate(layer.activation, z);
        }
        trace.inputs[l] = std::move(current);
        current = next;
        trace.outputs[l] = std::move(next);
    }
    require_finite(current, "mlp output");
    return current;
}

std::vector<double> mlp_backward(const MlpParams& params, const MlpTrace& trace, std::span<const double> grad_output,
                                 MlpParams* grads) {
    require_extent(grad_output.size(), params.out_dim(), "mlp output gradient");
    std::vector<double> upstream(grad_output.begin(), grad_output.end());
    for (std::size_t l = params.layers.size(); l-- > 0;) {
        const auto& layer = params.layers[l];
        const std::size_t in = layer.in_dim();
        const std::size_t out = layer.out_dim();
        const auto& x = trace.inputs[l];
        const auto& y = trace.outputs[l];
        std::vector<double> dz(out);
        for (std::size_t o = 0; o < out; ++o) dz[o] = upstream[o] * activation_slope(layer.activation, y[o]);

        if (grads) {
            auto& g = grads->layers[l];
            double* gw = g.weight.data();
            for (std::size_t o = 0; o < out; ++o) {
                if (dz[o] == 0.0) continue;
                g.bias[o] += dz[o];
                double* row = gw + o * in;
                for (std::size_t i = 0; i < in; ++i) row[i] += dz[o] * x[i];
            }
        }
        std::vector<double> dx(in, 0.0);
        const double* w = layer.weight.data();
        for (std::size_t o = 0; o < out; ++o) {
            if (dz[o] == 0.0) continue;
            const double* row = w + o * in;
            for (std::size_t i = 0; i < in; ++i) dx[i] += row[i] * dz[o];
        }
        upstream = std::move(dx);
    }
    return upstream;
}

std::vector<std::span<double>> parameter_spans(MlpParams& params) {
    std::vector<std::span<double>> spans;
    for (auto& layer : params.layers) {
        spans.push_back(layer.weight.values());
        spans.push_back(layer.bias.values());
    }
    return spans;
}

std::vector<std::span<const double>> parameter_spans(const MlpParams& params) {
    std::vector<std::span<const double>> spans;
    for (const auto& layer : params.layers) {
        spans.push_back(layer.weight.values());
        spans.push_back(layer.bias.values());
    }
    return spans;
}

}  // namespace udgen
