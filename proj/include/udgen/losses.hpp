#pragma once

#include "udgen/generation_model.hpp"

#include <span>
#include <vector>

namespace udgen {

/// Weights of the style-matching, adversarial, and reconstruction terms.
struct LossWeights {
    double w1 = 0.002;
    double w2 = 1.0;
    double w3 = 10.0;

    void validate() const;
};

struct LossParts {
    double style = 0.0;
    double gan = 0.0;
    double recon = 0.0;
};

/// w1*style + w2*gan + w3*recon. Throws NumericError naming the first
/// non-finite component.
double total_loss(const LossParts& parts, const LossWeights& weights);

/// |(1-lambda) L_s(x_g2, x_a) - lambda L_s(x_g2, x_b)| with
/// x_g2 = G(E^c(x_a), (1-lambda) E^s(x_a) + lambda E^s(x_b)).
double style_matching_loss(const GenerationModel& model, std::span<const double> x_a, std::span<const double> x_b,
                           double lambda);

struct ReconstructionLosses {
    double image = 0.0;    // mean |x - G(E^c(x), E^s(x))|
    double content = 0.0;  // mean |c - E^c(G(c, s))|
    double style = 0.0;    // mean |s - E^s(G(c, s))|

    double total() const { return image + content + style; }
};

ReconstructionLosses reconstruction_losses(const GenerationModel& model, std::span<const double> x,
                                           std::span<const double> c, std::span<const double> s);

struct AdversarialLosses {
    double discriminator = 0.0;  // -mean[log D(x) + log(1 - D(G(c,s)))]
    double generator = 0.0;      // -mean[log D(G(c,s))]
};

inline constexpr double kProbabilityClamp = 1e-7;

double discriminator_probability(const GenerationModel& model, std::span<const double> patch);

/// Real patches and latent codes of the generated side; both batches need at
/// least two entries.
AdversarialLosses adversarial_losses(const GenerationModel& model, std::span<const std::vector<double>> real_batch,
                                     std::span<const LatentPair> latent_batch);

/// Latents (E^c(x_a), (1-lambda) s_a + lambda s_b) with s_b from
/// real_batch[partners[i]].
std::vector<LatentPair> interpolated_latents(const GenerationModel& model,
                                             std::span<const std::vector<double>> real_batch,
                                             std::span<const std::size_t> partners, std::span<const double> lambdas);

// ---------------------------------------------------------------------------
// Differentiable objectives used by training and gradient checks.

/// One (x_a, x_b, lambda) draw.
struct PairSample {
    std::span<const double> source;
    std::span<const double> target;
    double lambda = 0.0;
};

/// Per-term weights of the generator-side objective; the reconstruction parts
/// can be weighted separately so that gradient checks can isolate them.
struct ObjectiveWeights {
    double style = 0.0;
    double gan = 0.0;
    double recon_image = 0.0;
    double recon_content = 0.0;
    double recon_style = 0.0;

    static ObjectiveWeights from(const LossWeights& w) { return {w.w1, w.w2, w.w3, w.w3, w.w3}; }
};

struct GeneratorObjective {
    double value = 0.0;  // weighted batch mean
    double style = 0.0;  // batch means of the unweighted terms
    double gan = 0.0;
    ReconstructionLosses recon;
};

/// Latent reconstruction targets (E^c(x_a), interpolated style) of each pair.
std::vector<LatentPair> latent_targets(const GenerationModel& model, std::span<const PairSample> pairs);

/// Batch mean of the weighted generator-side objective. For each pair the
/// interpolated sample x_g2 feeds the style-matching, adversarial, and latent
/// reconstruction terms; x_a feeds the image reconstruction term. Gradients
/// of the encoders and generator are accumulated into `grads` when non-null
/// (the discriminator is held fixed).
///
/// The latent reconstruction targets (c, s) are inputs of the loss, not
/// functions of the parameters: no gradient flows into them. They are taken
/// from `frozen_targets` when given, else recomputed from the current model
/// (same values, see latent_targets).
GeneratorObjective generator_objective(const GenerationModel& model, std::span<const PairSample> pairs,
                                       const ObjectiveWeights& weights, GenerationModel* grads,
                                       const std::vector<LatentPair>* frozen_targets = nullptr);

/// Discriminator loss on real and (detached) generated patches; accumulates
/// discriminator gradients into `grads` when non-null.
double discriminator_objective(const GenerationModel& model, std::span<const std::vector<double>> reals,
                               std::span<const std::vector<double>> fakes, MlpParams* grads);

}  // namespace udgen
