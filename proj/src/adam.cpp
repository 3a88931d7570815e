#include "udgen/adam.hpp"

#include "udgen/errors.hpp"

#include <cmath>

namespace udgen {

namespace {

void require_same_topology(const MlpParams& a, const MlpParams& b, const char* what) {
    if (a.layers.size() != b.layers.size()) {
        throw ShapeError(std::string(what) + ": layer count " + std::to_string(b.layers.size()) +
                         " does not match parameters' " + std::to_string(a.layers.size()));
    }
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].weight.shape() != b.layers[l].weight.shape() ||
            a.layers[l].bias.shape() != b.layers[l].bias.shape()) {
            throw ShapeError(std::string(what) + ": layer " + std::to_string(l) + " shape " +
                             shape_string(b.layers[l].weight.shape()) + " does not match parameters' " +
                             shape_string(a.layers[l].weight.shape()));
        }
    }
}

}  // namespace

OptimizerState OptimizerState::fresh(const MlpParams& params, AdamConfig config) {
    return {config, 0, params.zeros_like(), params.zeros_like()};
}

std::pair<MlpParams, OptimizerState> adam_step(const MlpParams& params, const MlpParams& grads,
                                               const OptimizerState& state) {
    MlpParams updated = params;
    OptimizerState next = state;
    adam_update(updated, grads, next);
    return {std::move(updated), std::move(next)};
}

void adam_update(MlpParams& params, const MlpParams& grads, OptimizerState& state) {
    require_same_topology(params, grads, "adam gradients");
    require_same_topology(params, state.first_moment, "adam first moment");
    require_same_topology(params, state.second_moment, "adam second moment");

    const auto& cfg = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);

    auto p = parameter_spans(params);
    auto g = parameter_spans(grads);
    auto m = parameter_spans(state.first_moment);
    auto v = parameter_spans(state.second_moment);
    for (std::size_t k = 0; k < p.size(); ++k) {
        for (std::size_t i = 0; i < p[k].size(); ++i) {
            const double grad = g[k][i];
            m[k][i] = cfg.beta1 * m[k][i] + (1.0 - cfg.beta1) * grad;
            v[k][i] = cfg.beta2 * v[k][i] + (1.0 - cfg.beta2) * grad * grad;
            const double m_hat = m[k][i] / correction1;
            const double v_hat = v[k][i] / correction2;
            p[k][i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

}  // namespace udgen
