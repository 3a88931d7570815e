#include "udgen/gradcheck.hpp"

#include "udgen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace udgen {

GradCheckResult grad_check(const std::function<double()>& loss, std::span<const std::span<double>> params,
                           std::span<const std::span<const double>> analytic, double eps, double kink_tolerance) {
    if (!(eps > 0.0)) throw DataError("grad_check: eps must be positive");
    if (params.size() != analytic.size()) {
        throw ShapeError("grad_check: " + std::to_string(analytic.size()) + " gradient blocks for " +
                         std::to_string(params.size()) + " parameter blocks");
    }
    constexpr double kRoundoff = 8.0 * std::numeric_limits<double>::epsilon();

    auto evaluate = [&](const char* where) {
        const double value = loss();
        if (!std::isfinite(value)) throw NumericError(std::string("grad_check: non-finite loss at ") + where);
        return value;
    };

    GradCheckResult result;
    const double center = evaluate("unperturbed point");
    for (std::size_t k = 0; k < params.size(); ++k) {
        require_extent(analytic[k].size(), params[k].size(), "grad_check gradient block");
        for (std::size_t i = 0; i < params[k].size(); ++i) {
            double& value = params[k][i];
            const double original = value;
            value = original + eps;
            const double plus = evaluate("perturbed point (+eps)");
            value = original - eps;
            const double minus = evaluate("perturbed point (-eps)");
            value = original;

            const double forward_slope = (plus - center) / eps;
            const double backward_slope = (center - minus) / eps;
            const double numeric = (plus - minus) / (2.0 * eps);
            const double roundoff = kRoundoff * std::max({std::abs(plus), std::abs(minus), std::abs(center)}) / eps;
            const double slope_scale = std::max(1.0, std::abs(numeric));
            const double spread = std::abs(forward_slope - backward_slope);
            if (spread > kink_tolerance * slope_scale + 4.0 * roundoff) {
                // Smooth curvature shrinks the spread linearly with the step; a kink does not.
                const double small = eps / 10.0;
                value = original + small;
                const double plus_small = evaluate("perturbed point (+eps/10)");
                value = original - small;
                const double minus_small = evaluate("perturbed point (-eps/10)");
                value = original;
                const double small_spread =
                    std::abs((plus_small - center) / small - (center - minus_small) / small);
                if (small_spread > 0.2 * spread + 40.0 * roundoff) {
                    ++result.skipped_kinks;
                    continue;
                }
            }
            const double a = analytic[k][i];
            const double diff = std::abs(a - numeric);
            double rel = 0.0;
            if (diff > roundoff) rel = diff / std::max(1e-12, std::abs(a) + std::abs(numeric));
            result.max_rel_error = std::max(result.max_rel_error, rel);
            ++result.checked;
        }
    }
    return result;
}

double grad_check(const MlpLoss& loss, const MlpParams& params, double eps) {
    MlpParams probe = params;
    const MlpParams analytic = loss(params).second;
    auto spans = parameter_spans(probe);
    auto grads = parameter_spans(analytic);
    return grad_check([&] { return loss(probe).first; }, spans, grads, eps).max_rel_error;
}

}  // namespace udgen
