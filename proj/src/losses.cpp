#include "udgen/losses.hpp"

#include "udgen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace udgen {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double mean_abs_diff(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// -log(clamp(p)) and its derivative with respect to the logit, where p is
// sigmoid(z) (want_real) or 1 - sigmoid(z).
std::pair<double, double> neg_log_prob(double logit, bool want_real) {
    const double d = sigmoid(logit);
    const double p = want_real ? d : 1.0 - d;
    const double clamped = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
    const double value = -std::log(clamped);
    if (clamped != p) return {value, 0.0};
    return {value, want_real ? d - 1.0 : d};
}

void check_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw DataError("lambda must lie in [0,1]");
}

}  // namespace

void LossWeights::validate() const {
    if (!(w1 >= 0.0 && w2 >= 0.0 && w3 >= 0.0)) throw DataError("loss weights must be non-negative");
}

double total_loss(const LossParts& parts, const LossWeights& weights) {
    if (!std::isfinite(parts.style)) throw NumericError("total_loss: style component is non-finite");
    if (!std::isfinite(parts.gan)) throw NumericError("total_loss: gan component is non-finite");
    if (!std::isfinite(parts.recon)) throw NumericError("total_loss: recon component is non-finite");
    return weights.w1 * parts.style + weights.w2 * parts.gan + weights.w3 * parts.recon;
}

double style_matching_loss(const GenerationModel& model, std::span<const double> x_a, std::span<const double> x_b,
                           double lambda) {
    check_lambda(lambda);
    require_extent(x_a.size(), model.dims.pixel_count(), "style_matching_loss x_a");
    require_extent(x_b.size(), model.dims.pixel_count(), "style_matching_loss x_b");
    const auto a = encode(model, x_a);
    const auto s_b = encode_style(model, x_b);
    const auto s_g2 = interpolate_style(a.style, s_b, lambda);
    const auto x_g2 = mlp_apply(model.generator, join_latents(a.content, s_g2));
    const double to_a = style_distance(x_g2, x_a, model.bank);
    const double to_b = style_distance(x_g2, x_b, model.bank);
    return std::abs((1.0 - lambda) * to_a - lambda * to_b);
}

ReconstructionLosses reconstruction_losses(const GenerationModel& model, std::span<const double> x,
                                           std::span<const double> c, std::span<const double> s) {
    require_extent(x.size(), model.dims.pixel_count(), "reconstruction x");
    require_extent(c.size(), model.dims.content_dim, "reconstruction c");
    require_extent(s.size(), model.dims.style_dim, "reconstruction s");
    ReconstructionLosses out;
    const auto own = encode(model, x);
    out.image = mean_abs_diff(x, mlp_apply(model.generator, join_latents(own.content, own.style)));
    const auto generated = mlp_apply(model.generator, join_latents(c, s));
    out.content = mean_abs_diff(c, encode_content(model, generated));
    out.style = mean_abs_diff(s, encode_style(model, generated));
    return out;
}

double discriminator_probability(const GenerationModel& model, std::span<const double> patch) {
    return sigmoid(mlp_apply(model.discriminator, patch)[0]);
}

AdversarialLosses adversarial_losses(const GenerationModel& model, std::span<const std::vector<double>> real_batch,
                                     std::span<const LatentPair> latent_batch) {
    if (real_batch.size() < 2 || latent_batch.size() < 2) {
        throw DataError("adversarial_losses: batches need at least 2 entries");
    }
    AdversarialLosses out;
    for (const auto& x : real_batch) {
        out.discriminator += neg_log_prob(mlp_apply(model.discriminator, x)[0], true).first;
    }
    out.discriminator /= static_cast<double>(real_batch.size());
    double fake_d = 0.0;
    for (const auto& latent : latent_batch) {
        const auto fake = mlp_apply(model.generator, join_latents(latent.content, latent.style));
        const double logit = mlp_apply(model.discriminator, fake)[0];
        fake_d += neg_log_prob(logit, false).first;
        out.generator += neg_log_prob(logit, true).first;
    }
    out.discriminator += fake_d / static_cast<double>(latent_batch.size());
    out.generator /= static_cast<double>(latent_batch.size());
    return out;
}

std::vector<LatentPair> interpolated_latents(const GenerationModel& model,
                                             std::span<const std::vector<double>> real_batch,
                                             std::span<const std::size_t> partners, std::span<const double> lambdas) {
    require_extent(partners.size(), real_batch.size(), "interpolated_latents partners");
    require_extent(lambdas.size(), real_batch.size(), "interpolated_latents lambdas");
    std::vector<LatentPair> codes;
    codes.reserve(real_batch.size());
    for (const auto& x : real_batch) codes.push_back(encode(model, x));
    std::vector<LatentPair> out;
    for (std::size_t i = 0; i < real_batch.size(); ++i) {
        out.push_back({codes[i].content, interpolate_style(codes[i].style, codes.at(partners[i]).style, lambdas[i])});
    }
    return out;
}

std::vector<LatentPair> latent_targets(const GenerationModel& model, std::span<const PairSample> pairs) {
    std::vector<LatentPair> targets;
    targets.reserve(pairs.size());
    for (const auto& pair : pairs) {
        check_lambda(pair.lambda);
        const auto a = encode(model, pair.source);
        const auto s_b = encode_style(model, pair.target);
        targets.push_back({a.content, interpolate_style(a.style, s_b, pair.lambda)});
    }
    return targets;
}

GeneratorObjective generator_objective(const GenerationModel& model, std::span<const PairSample> pairs,
                                       const ObjectiveWeights& weights, GenerationModel* grads,
                                       const std::vector<LatentPair>* frozen_targets) {
    if (pairs.empty()) throw DataError("generator_objective: empty batch");
    if (frozen_targets) require_extent(frozen_targets->size(), pairs.size(), "generator_objective targets");
    const std::size_t pixels = model.dims.pixel_count();
    const std::size_t cdim = model.dims.content_dim;
    const std::size_t sdim = model.dims.style_dim;
    const double inv_batch = 1.0 / static_cast<double>(pairs.size());

    GeneratorObjective out;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& pair = pairs[p];
        check_lambda(pair.lambda);
        require_extent(pair.source.size(), pixels, "generator_objective x_a");
        require_extent(pair.target.size(), pixels, "generator_objective x_b");
        const double lambda = pair.lambda;

        MlpTrace t_ca, t_sa, t_sb, t_gen, t_rec, t_chat, t_shat, t_disc;
        const auto c_a = encode_content(model, pair.source, t_ca);
        const auto s_a = encode_style(model, pair.source, t_sa);
        const auto s_b = encode_style(model, pair.target, t_sb);
        const auto s_mix = interpolate_style(s_a, s_b, lambda);
        const auto x_g2 = mlp_forward(model.generator, join_latents(c_a, s_mix), t_gen);
        const auto x_rec = mlp_forward(model.generator, join_latents(c_a, s_a), t_rec);
        const double logit = mlp_forward(model.discriminator, x_g2, t_disc)[0];

        // Latent reconstruction on x_g2; targets (c, s) enter as constants.
        const auto c_hat = encode_content(model, x_g2, t_chat);
        const auto s_hat = encode_style(model, x_g2, t_shat);
        std::span<const double> c_target = c_a;
        std::span<const double> s_target = s_mix;
        if (frozen_targets) {
            c_target = (*frozen_targets)[p].content;
            s_target = (*frozen_targets)[p].style;
        }

        const double recon_image = mean_abs_diff(pair.source, x_rec);
        const double recon_content = mean_abs_diff(c_target, c_hat);
        const double recon_style = mean_abs_diff(s_target, s_hat);
        const auto [gan, dgan_dlogit] = neg_log_prob(logit, true);

        std::vector<double> d_xg2(pixels, 0.0);

        // Style matching.
        double style = 0.0;
        {
            const auto acts = model.bank.extract(x_g2);
            const double to_a = style_distance(acts, style_target(pair.source, model.bank), model.bank);
            const double to_b = style_distance(acts, style_target(pair.target, model.bank), model.bank);
            const double inner = (1.0 - lambda) * to_a - lambda * to_b;
            style = std::abs(inner);
            if (grads && weights.style != 0.0 && inner != 0.0) {
                const double scale = weights.style * inv_batch * sign(inner);
                style_distance_grad(x_g2, pair.source, model.bank, scale * (1.0 - lambda), d_xg2);
                style_distance_grad(x_g2, pair.target, model.bank, -scale * lambda, d_xg2);
            }
        }

        out.style += style * inv_batch;
        out.gan += gan * inv_batch;
        out.recon.image += recon_image * inv_batch;
        out.recon.content += recon_content * inv_batch;
        out.recon.style += recon_style * inv_batch;
        out.value += inv_batch * (weights.style * style + weights.gan * gan + weights.recon_image * recon_image +
                                  weights.recon_content * recon_content + weights.recon_style * recon_style);

        if (!grads) continue;

        std::vector<double> d_ca(cdim, 0.0), d_sa(sdim, 0.0), d_sb(sdim, 0.0), d_smix(sdim, 0.0);

        // Adversarial term through the frozen discriminator.
        if (weights.gan != 0.0 && dgan_dlogit != 0.0) {
            const std::vector<double> d_logit{weights.gan * inv_batch * dgan_dlogit};
            const auto dx = mlp_backward(model.discriminator, t_disc, d_logit, nullptr);
            for (std::size_t i = 0; i < pixels; ++i) d_xg2[i] += dx[i];
        }
        // Content reconstruction.
        if (weights.recon_content != 0.0) {
            const double k = weights.recon_content * inv_batch / static_cast<double>(cdim);
            std::vector<double> d_chat(cdim);
            for (std::size_t i = 0; i < cdim; ++i) d_chat[i] = k * sign(c_hat[i] - c_target[i]);
            const auto dx = encode_content_backward(model, x_g2, t_chat, d_chat, &grads->content_encoder);
            for (std::size_t i = 0; i < pixels; ++i) d_xg2[i] += dx[i];
        }
        // Style reconstruction.
        if (weights.recon_style != 0.0) {
            const double k = weights.recon_style * inv_batch / static_cast<double>(sdim);
            std::vector<double> d_shat(sdim);
            for (std::size_t i = 0; i < sdim; ++i) d_shat[i] = k * sign(s_hat[i] - s_target[i]);
            const auto dx = encode_style_backward(model, x_g2, t_shat, d_shat, &grads->style_encoder);
            for (std::size_t i = 0; i < pixels; ++i) d_xg2[i] += dx[i];
        }
        // Generator on the interpolated sample.
        {
            const auto d_in = mlp_backward(model.generator, t_gen, d_xg2, &grads->generator);
            for (std::size_t i = 0; i < cdim; ++i) d_ca[i] += d_in[i];
            for (std::size_t i = 0; i < sdim; ++i) d_smix[i] += d_in[cdim + i];
        }
        // Image reconstruction.
        if (weights.recon_image != 0.0) {
            const double k = weights.recon_image * inv_batch / static_cast<double>(pixels);
            std::vector<double> d_rec(pixels);
            for (std::size_t i = 0; i < pixels; ++i) d_rec[i] = k * sign(x_rec[i] - pair.source[i]);
            const auto d_in = mlp_backward(model.generator, t_rec, d_rec, &grads->generator);
            for (std::size_t i = 0; i < cdim; ++i) d_ca[i] += d_in[i];
            for (std::size_t i = 0; i < sdim; ++i) d_sa[i] += d_in[cdim + i];
        }
        for (std::size_t i = 0; i < sdim; ++i) {
            d_sa[i] += (1.0 - lambda) * d_smix[i];
            d_sb[i] += lambda * d_smix[i];
        }
        encode_content_backward(model, pair.source, t_ca, d_ca, &grads->content_encoder);
        mlp_backward(model.style_encoder, t_sa, d_sa, &grads->style_encoder);
        mlp_backward(model.style_encoder, t_sb, d_sb, &grads->style_encoder);  // x_b is data: no pixel gradient
    }
    return out;
}

double discriminator_objective(const GenerationModel& model, std::span<const std::vector<double>> reals,
                               std::span<const std::vector<double>> fakes, MlpParams* grads) {
    if (reals.empty() || fakes.empty()) throw DataError("discriminator_objective: empty batch");
    double total = 0.0;
    auto side = [&](std::span<const std::vector<double>> batch, bool real) {
        const double inv = 1.0 / static_cast<double>(batch.size());
        for (const auto& x : batch) {
            MlpTrace trace;
            const double logit = mlp_forward(model.discriminator, x, trace)[0];
            const auto [value, slope] = neg_log_prob(logit, real);
            total += value * inv;
            if (grads && slope != 0.0) {
                const std::vector<double> d{slope * inv};
                mlp_backward(model.discriminator, trace, d, grads);
            }
        }
    };
    side(reals, true);
    side(fakes, false);
    return total;
}

}  // namespace udgen
