#include "udgen/trainer.hpp"

#include "udgen/errors.hpp"
#include "udgen/random.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace udgen {

void TrainConfig::validate() const {
    if (steps < 1) throw DataError("train: steps must be at least 1");
    if (batch_size < 2) throw DataError("train: batch size must be at least 2");
    if (!(lr_generator > 0.0) || !(lr_discriminator > 0.0)) throw DataError("train: learning rates must be positive");
    if (!(lr_final_fraction > 0.0 && lr_final_fraction <= 1.0)) {
        throw DataError("train: lr_final_fraction must lie in (0, 1]");
    }
    weights.validate();
}

void check_divergence(const StepRecord& r) {
    const std::pair<const char*, double> parts[] = {
        {"style", r.style},           {"gan_generator", r.gan_generator}, {"gan_discriminator", r.gan_discriminator},
        {"recon_image", r.recon_image}, {"recon_content", r.recon_content}, {"recon_style", r.recon_style},
    };
    for (const auto& [name, value] : parts) {
        if (!std::isfinite(value) || std::abs(value) > kDivergenceLimit) {
            std::ostringstream msg;
            msg << "training diverged at step " << r.step << ": " << name << " = " << value;
            throw NumericError(msg.str());
        }
    }
}

TrainResult train(GenerationModel model, const Dataset& dataset, const TrainConfig& config,
                  const std::function<void(const StepRecord&)>& on_step) {
    config.validate();
    if (dataset.patches.empty()) throw DataError("train: dataset is empty");
    model.validate();
    for (const auto& p : dataset.patches) require_extent(p.pixels.size(), model.dims.pixel_count(), "train patch");

    std::mt19937_64 rng(derive_seed(config.seed, 0x7a11));
    std::uniform_int_distribution<std::size_t> pick(0, dataset.patches.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    AdamConfig gen_cfg;
    gen_cfg.learning_rate = config.lr_generator;
    AdamConfig disc_cfg;
    disc_cfg.learning_rate = config.lr_discriminator;
    disc_cfg.beta1 = 0.5;
    auto opt_content = OptimizerState::fresh(model.content_encoder, gen_cfg);
    auto opt_style = OptimizerState::fresh(model.style_encoder, gen_cfg);
    auto opt_generator = OptimizerState::fresh(model.generator, gen_cfg);
    auto opt_disc = OptimizerState::fresh(model.discriminator, disc_cfg);
    const auto weights = ObjectiveWeights::from(config.weights);

    TrainResult result;
    result.history.reserve(config.steps);
    std::vector<PairSample> pairs(config.batch_size);
    std::vector<std::vector<double>> reals(config.batch_size), fakes(config.batch_size);

    for (std::size_t step = 0; step < config.steps; ++step) {
        const double progress = config.steps > 1 ? static_cast<double>(step) / static_cast<double>(config.steps - 1) : 0.0;
        const double lr_scale = 1.0 - (1.0 - config.lr_final_fraction) * progress;
        for (auto* opt : {&opt_content, &opt_style, &opt_generator}) opt->config.learning_rate = config.lr_generator * lr_scale;
        opt_disc.config.learning_rate = config.lr_discriminator * lr_scale;
        for (std::size_t i = 0; i < config.batch_size; ++i) {
            const auto& a = dataset.patches[pick(rng)].pixels;
            const auto& b = dataset.patches[pick(rng)].pixels;
            pairs[i] = {a, b, unit(rng)};
            reals[i] = a;
        }

        // Discriminator on interpolated-style samples from the current generator.
        for (std::size_t i = 0; i < config.batch_size; ++i) {
            const auto code_a = encode(model, pairs[i].source);
            const auto s_b = encode_style(model, pairs[i].target);
            fakes[i] = mlp_apply(model.generator,
                                 join_latents(code_a.content, interpolate_style(code_a.style, s_b, pairs[i].lambda)));
        }
        auto disc_grads = model.discriminator.zeros_like();
        const double disc_loss = discriminator_objective(model, reals, fakes, &disc_grads);
        adam_update(model.discriminator, disc_grads, opt_disc);

        auto grads = model.zero_grads();
        const auto objective = generator_objective(model, pairs, weights, &grads);
        adam_update(model.content_encoder, grads.content_encoder, opt_content);
        adam_update(model.style_encoder, grads.style_encoder, opt_style);
        adam_update(model.generator, grads.generator, opt_generator);

        StepRecord record{step,
                          objective.style,
                          objective.gan,
                          disc_loss,
                          objective.recon.image,
                          objective.recon.content,
                          objective.recon.style,
                          objective.value};
        check_divergence(record);
        result.history.push_back(record);
        if (on_step) on_step(record);
    }
    result.model = std::move(model);
    return result;
}

}  // namespace udgen
