#pragma once

#include "udgen/synth.hpp"

#include <filesystem>
#include <span>

namespace udgen {

/// Binary PPM (P6, maxval 255) of a channel-last RGB grid.
void write_ppm(const std::filesystem::path& path, std::size_t height, std::size_t width,
               std::span<const double> rgb);
/// Binary PGM (P5, maxval 255) of a {0,1} mask, stored as 0/255.
void write_pgm(const std::filesystem::path& path, std::size_t height, std::size_t width, const Mask& mask);

Image read_ppm(const std::filesystem::path& path);
Mask read_pgm(const std::filesystem::path& path, std::size_t& height, std::size_t& width);

/// Writes manifest.json plus one PPM per patch and one PGM per visible mask.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace udgen
