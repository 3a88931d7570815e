#pragma once

#include "udgen/mlp.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace udgen {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped_kinks = 0;
};

/// Central-difference check of `analytic` against `loss()` while each entry of
/// `params` is perturbed in place (and restored). Relative error per entry is
/// |a - n| / max(1e-12, |a| + |n|); an entry whose disagreement is within the
/// roundoff of the two loss evaluations counts as exact. Entries whose
/// one-sided slopes disagree by more than `kink_tolerance` straddle a
/// non-differentiable point (relu, |.|) and are skipped.
GradCheckResult grad_check(const std::function<double()>& loss, std::span<const std::span<double>> params,
                           std::span<const std::span<const double>> analytic, double eps,
                           double kink_tolerance = 1e-3);

/// Loss returning its value and its gradient with respect to the parameters.
using MlpLoss = std::function<std::pair<double, MlpParams>(const MlpParams&)>;

/// Returns the maximum relative error over every weight and bias.
double grad_check(const MlpLoss& loss, const MlpParams& params, double eps);

}  // namespace udgen
