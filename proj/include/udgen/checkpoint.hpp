#pragma once

#include "udgen/generation_model.hpp"
#include "udgen/losses.hpp"

#include <filesystem>

namespace udgen {

struct Checkpoint {
    GenerationModel model;
    LossWeights weights;
};

/// Writes `dir/checkpoint.json` (dims, seeds, feature-bank config, loss
/// weights, tensor shapes) and one little-endian float64 file per tensor.
/// The feature bank is rebuilt from its seed on load.
void save_checkpoint(const std::filesystem::path& dir, const GenerationModel& model, const LossWeights& weights = {});

/// Throws CorruptionError naming the tensor when a shape disagrees with the
/// manifest dims or a binary file has the wrong length.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace udgen
