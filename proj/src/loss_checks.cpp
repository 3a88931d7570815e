#include "udgen/loss_checks.hpp"

#include "udgen/losses.hpp"
#include "udgen/random.hpp"

#include <random>

namespace udgen {

namespace {

std::vector<std::span<double>> generator_side_spans(GenerationModel& model) {
    std::vector<std::span<double>> spans;
    for (MlpParams* net : {&model.content_encoder, &model.style_encoder, &model.generator}) {
        auto s = parameter_spans(*net);
        spans.insert(spans.end(), s.begin(), s.end());
    }
    return spans;
}

std::vector<std::span<const double>> generator_side_spans(const GenerationModel& model) {
    std::vector<std::span<const double>> spans;
    for (const MlpParams* net : {&model.content_encoder, &model.style_encoder, &model.generator}) {
        auto s = parameter_spans(*net);
        spans.insert(spans.end(), s.begin(), s.end());
    }
    return spans;
}

}  // namespace

GenerationModel micro_model(std::uint64_t seed) {
    ModelDims dims;
    dims.patch_size = 4;
    dims.channels = 3;
    dims.content_dim = 2;
    dims.style_dim = 2;
    dims.encoder_hidden = 5;
    dims.style_hidden = 4;
    dims.generator_hidden = 6;
    dims.discriminator_hidden = 4;
    FeatureBankConfig bank;
    bank.filters_per_layer = {2, 3};
    bank.seed = derive_seed(seed, 0xfb);
    return make_model(dims, seed, bank);
}

std::vector<LossCheck> check_loss_gradients(std::uint64_t seed, double eps) {
    GenerationModel model = micro_model(seed);
    std::mt19937_64 rng(derive_seed(seed, 0x9c));
    std::uniform_real_distribution<double> pixel(0.05, 0.95);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t pixels = model.dims.pixel_count();
    std::vector<std::vector<double>> patches(4, std::vector<double>(pixels));
    for (auto& p : patches) {
        for (auto& v : p) v = pixel(rng);
    }
    std::vector<PairSample> pairs{{patches[0], patches[1], unit(rng)}, {patches[2], patches[3], unit(rng)}};
    std::vector<PairSample> pairs_at_one{{patches[0], patches[1], 1.0}, {patches[2], patches[3], 1.0}};

    std::vector<LossCheck> out;
    auto check_generator_side = [&](const std::string& name, const std::vector<PairSample>& batch,
                                    const ObjectiveWeights& weights) {
        const auto targets = latent_targets(model, batch);
        auto grads = model.zero_grads();
        generator_objective(model, batch, weights, &grads, &targets);
        const auto params = generator_side_spans(model);
        const auto analytic = generator_side_spans(static_cast<const GenerationModel&>(grads));
        auto loss = [&] { return generator_objective(model, batch, weights, nullptr, &targets).value; };
        out.push_back({name, grad_check(loss, params, analytic, eps)});
    };
    // Reductions of the objective to single terms.
    check_generator_side("style_distance", pairs_at_one, {1.0, 0, 0, 0, 0});
    check_generator_side("style_matching", pairs, {1.0, 0, 0, 0, 0});
    check_generator_side("recon_image", pairs, {0, 0, 1.0, 0, 0});
    check_generator_side("recon_content", pairs, {0, 0, 0, 1.0, 0});
    check_generator_side("recon_style", pairs, {0, 0, 0, 0, 1.0});
    check_generator_side("gan_generator", pairs, {0, 1.0, 0, 0, 0});
    check_generator_side("total", pairs, ObjectiveWeights::from(LossWeights{}));

    {
        std::vector<std::vector<double>> reals{patches[0], patches[1]};
        std::vector<std::vector<double>> fakes{patches[2], patches[3]};
        auto grads = model.discriminator.zeros_like();
        discriminator_objective(model, reals, fakes, &grads);
        const auto params = parameter_spans(model.discriminator);
        const auto analytic = parameter_spans(static_cast<const MlpParams&>(grads));
        auto loss = [&] { return discriminator_objective(model, reals, fakes, nullptr); };
        out.push_back({"gan_discriminator", grad_check(loss, params, analytic, eps)});
    }
    return out;
}

}  // namespace udgen
