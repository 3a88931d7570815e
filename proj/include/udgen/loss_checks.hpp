#pragma once

#include "udgen/generation_model.hpp"
#include "udgen/gradcheck.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace udgen {

struct LossCheck {
    std::string name;
    GradCheckResult result;
};

/// 4x4 patches, 2-unit content and style codes, small hidden layers, and a
/// two-layer feature bank of 2 and 3 filters.
GenerationModel micro_model(std::uint64_t seed);

/// Finite-difference checks of every loss on a micro-model: style distance,
/// style matching, image/content/style reconstruction, both adversarial
/// sides, and the weighted total. Generator-side losses are checked against
/// the encoder and generator parameters with the discriminator held fixed;
/// the discriminator loss against the discriminator parameters.
std::vector<LossCheck> check_loss_gradients(std::uint64_t seed, double eps = 1e-5);

}  // namespace udgen
