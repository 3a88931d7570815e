#pragma once

#include "udgen/mlp.hpp"

#include <cstdint>
#include <utility>

namespace udgen {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct OptimizerState {
    AdamConfig config;
    std::uint64_t step = 0;
    MlpParams first_moment;
    MlpParams second_moment;

    static OptimizerState fresh(const MlpParams& params, AdamConfig config = {});
};

/// Bias-corrected Adam update. Pure: inputs are left untouched.
std::pair<MlpParams, OptimizerState> adam_step(const MlpParams& params, const MlpParams& grads,
                                               const OptimizerState& state);

/// In-place variant used by the training loops.
void adam_update(MlpParams& params, const MlpParams& grads, OptimizerState& state);

}  // namespace udgen
