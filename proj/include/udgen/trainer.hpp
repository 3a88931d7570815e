#pragma once

#include "udgen/adam.hpp"
#include "udgen/generation_model.hpp"
#include "udgen/losses.hpp"
#include "udgen/synth.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace udgen {

struct TrainConfig {
    std::size_t steps = 2000;
    std::size_t batch_size = 8;
    double lr_generator = 2e-3;
    double lr_discriminator = 1e-4;
    // Both learning rates decay linearly to this fraction of their start
    // value over the run.
    double lr_final_fraction = 0.1;
    std::uint64_t seed = 7;
    LossWeights weights;

    void validate() const;
};

struct StepRecord {
    std::size_t step = 0;
    double style = 0.0;
    double gan_generator = 0.0;
    double gan_discriminator = 0.0;
    double recon_image = 0.0;
    double recon_content = 0.0;
    double recon_style = 0.0;
    double total = 0.0;  // generator-side objective

    double recon() const { return recon_image + recon_content + recon_style; }
    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct TrainResult {
    GenerationModel model;
    std::vector<StepRecord> history;
};

inline constexpr double kDivergenceLimit = 1e6;

/// Throws NumericError naming the first component that is non-finite or
/// exceeds kDivergenceLimit in magnitude.
void check_divergence(const StepRecord& record);

/// Alternating discriminator / generator-side Adam updates. Each step draws a
/// batch of sources, a partner for each, and a fresh lambda ~ U[0,1] per pair.
/// Throws NumericError when any loss exceeds kDivergenceLimit or turns
/// non-finite.
TrainResult train(GenerationModel model, const Dataset& dataset, const TrainConfig& config,
                  const std::function<void(const StepRecord&)>& on_step = {});

}  // namespace udgen
