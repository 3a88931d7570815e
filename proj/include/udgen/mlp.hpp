#pragma once

#include "udgen/tensor.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace udgen {

enum class Activation { tanh, relu, sigmoid, identity };

std::string_view to_string(Activation activation);
Activation activation_from_string(std::string_view name);

/// Fully connected layer: y = act(W x + b), W stored as [out x in].
struct DenseLayer {
    Tensor weight;
    Tensor bias;
    Activation activation = Activation::identity;

    std::size_t in_dim() const { return weight.cols(); }
    std::size_t out_dim() const { return weight.rows(); }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct MlpParams {
    std::vector<DenseLayer> layers;

    std::size_t in_dim() const;
    std::size_t out_dim() const;
    std::size_t parameter_count() const;

    /// Same topology, every weight and bias set to zero.
    MlpParams zeros_like() const;

    friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Builds an MLP with `dims.size() - 1` layers; weights drawn from a scaled
/// normal (Glorot for tanh/sigmoid/identity, He for relu), biases zero.
MlpParams make_mlp(std::span<const std::size_t> dims, std::span<const Activation> activations, std::uint64_t seed);

/// Throws ShapeError unless adjacent layers chain and bias extents agree.
void validate(const MlpParams& params);

/// Per-layer inputs and post-activation outputs kept for the backward pass.
struct MlpTrace {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> outputs;
};

std::vector<double> mlp_apply(const MlpParams& params, std::span<const double> input);
std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input, MlpTrace& trace);

/// Backpropagates `grad_output` through a recorded forward pass. Parameter
/// gradients are accumulated into `grads` when it is non-null. Returns the
/// gradient with respect to the input.
std::vector<double> mlp_backward(const MlpParams& params, const MlpTrace& trace, std::span<const double> grad_output,
                                 MlpParams* grads);

std::vector<std::span<double>> parameter_spans(MlpParams& params);
std::vector<std::span<const double>> parameter_spans(const MlpParams& params);

}  // namespace udgen
