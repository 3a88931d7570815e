#include "udgen/synth.hpp"

#include "udgen/errors.hpp"
#include "udgen/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace udgen {

void SynthSpec::validate() const {
    if (patch_size < 8) throw DataError("synth: patch_size must be at least 8");
    if (n_content_factors < 2) throw DataError("synth: need at least 2 content factors");
    if (n_style_factors < 2) throw DataError("synth: need at least 2 style factors");
    if (images_per_combination < 1) throw DataError("synth: images_per_combination must be at least 1");
    if (!(noise_sigma >= 0.0)) throw DataError("synth: noise_sigma must be non-negative");
}

void Dataset::validate() const {
    std::vector<int> seen(patches.size(), 0);
    auto mark = [&](const std::vector<std::size_t>& ids, bool labeled) {
        for (auto id : ids) {
            if (id >= patches.size()) throw DataError("dataset: id " + std::to_string(id) + " out of range");
            if (seen[id]++) throw DataError("dataset: patch " + std::to_string(id) + " listed twice");
            if (patches[id].labeled != labeled || patches[id].mask.has_value() != labeled) {
                throw DataError("dataset: patch " + std::to_string(id) + " labeled flag/mask disagree with its set");
            }
        }
    };
    mark(labeled_ids, true);
    mark(unlabeled_ids, false);
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) throw DataError("dataset: patch " + std::to_string(i) + " in neither set");
    }
}

std::array<double, 3> StyleTransform::apply(double gray) const {
    const double g = std::pow(std::clamp(gray, 0.0, 1.0), gamma);
    return {low[0] + (high[0] - low[0]) * g, low[1] + (high[1] - low[1]) * g, low[2] + (high[2] - low[2]) * g};
}

StyleTransform style_transform(const SynthSpec& spec, std::size_t style_factor) {
    // Stain-like palette for the first factors; further factors are drawn from the seed.
    static const StyleTransform kPalette[] = {
        {{0.45, 0.10, 0.40}, {0.95, 0.70, 0.85}, 1.0},
        {{0.10, 0.15, 0.45}, {0.75, 0.80, 0.95}, 1.6},
        {{0.40, 0.25, 0.05}, {0.95, 0.90, 0.60}, 0.6},
        {{0.20, 0.20, 0.20}, {0.60, 0.60, 0.60}, 1.0},
    };
    if (style_factor < std::size(kPalette)) return kPalette[style_factor];
    std::mt19937_64 rng(derive_seed(spec.seed, 0x5717e000 + style_factor));
    std::uniform_real_distribution<double> low(0.0, 0.45), span(0.3, 0.55), gamma(0.6, 1.8);
    StyleTransform t;
    for (std::size_t c = 0; c < 3; ++c) {
        t.low[c] = low(rng);
        t.high[c] = std::min(1.0, t.low[c] + span(rng));
    }
    t.gamma = gamma(rng);
    return t;
}

std::vector<Blob> content_layout(const SynthSpec& spec, std::size_t content_factor) {
    const double p = static_cast<double>(spec.patch_size);
    const std::size_t count = 1 + 2 * content_factor;
    const double radius = 0.30 * p / std::sqrt(static_cast<double>(count));
    const double center = p / 2.0;
    std::vector<Blob> blobs;
    if (count == 1) {
        blobs.push_back({center, center, radius});
        return blobs;
    }
    const double ring = 0.28 * p;
    const double phase = 0.7 * static_cast<double>(content_factor);
    for (std::size_t b = 0; b < count; ++b) {
        const double angle = phase + 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(count);
        blobs.push_back({center + ring * std::sin(angle), center + ring * std::cos(angle), radius});
    }
    return blobs;
}

double luminance(const std::array<double, 3>& rgb) { return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]; }

double expected_luminance(const StyleTransform& style, double foreground_fraction) {
    return foreground_fraction * luminance(style.apply(kForegroundLevel)) +
           (1.0 - foreground_fraction) * luminance(style.apply(kBackgroundLevel));
}

Patch render_patch(const SynthSpec& spec, std::size_t content_factor, std::size_t style_factor,
                   std::uint64_t image_seed) {
    std::mt19937_64 rng(image_seed);
    std::uniform_real_distribution<double> shift(-1.0, 1.0), wobble(-0.5, 0.5), scale(0.9, 1.1);
    std::normal_distribution<double> noise(0.0, 1.0);

    const std::size_t n = spec.patch_size;
    auto blobs = content_layout(spec, content_factor);
    const double dr = shift(rng), dc = shift(rng);
    for (auto& blob : blobs) {
        blob.row += dr + wobble(rng);
        blob.col += dc + wobble(rng);
        blob.radius *= scale(rng);
    }

    const StyleTransform style = style_transform(spec, style_factor);
    const auto fg = style.apply(kForegroundLevel);
    const auto bg = style.apply(kBackgroundLevel);

    Patch patch;
    patch.size = n;
    patch.pixels.resize(n * n * kChannels);
    Mask mask(n * n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double y = static_cast<double>(r) + 0.5, x = static_cast<double>(c) + 0.5;
            const bool inside = std::any_of(blobs.begin(), blobs.end(), [&](const Blob& b) {
                return (y - b.row) * (y - b.row) + (x - b.col) * (x - b.col) <= b.radius * b.radius;
            });
            mask[r * n + c] = inside ? 1 : 0;
            const auto& color = inside ? fg : bg;
            for (std::size_t ch = 0; ch < kChannels; ++ch) {
                double v = color[ch];
                if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise(rng);
                patch.pixels[(r * n + c) * kChannels + ch] = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    patch.labeled = true;
    patch.mask = mask;
    patch.hidden_mask = std::move(mask);
    patch.true_content = static_cast<int>(content_factor);
    patch.true_style = static_cast<int>(style_factor);
    return patch;
}

Dataset make_synth_dataset(const SynthSpec& spec) {
    spec.validate();
    Dataset dataset;
    dataset.patch_size = spec.patch_size;
    std::size_t image_id = 0;
    for (std::size_t k = 0; k < spec.images_per_combination; ++k) {
        for (std::size_t content = 0; content < spec.n_content_factors; ++content) {
            for (std::size_t style = 0; style < spec.n_style_factors; ++style) {
                Patch patch = render_patch(spec, content, style, derive_seed(spec.seed, image_id));
                patch.source_id = image_id++;
                dataset.labeled_ids.push_back(dataset.patches.size());
                dataset.patches.push_back(std::move(patch));
            }
        }
    }
    return dataset;
}

std::size_t crop_count(std::size_t extent, std::size_t size, std::size_t step) {
    if (extent < size || step == 0) return 0;
    return (extent - size) / step + 1;
}

std::vector<Patch> crop_patches(const Image& image, std::size_t size, std::size_t step, std::size_t source_id) {
    if (step < 1) throw DataError("crop_patches: step must be at least 1");
    if (size < 1) throw DataError("crop_patches: size must be at least 1");
    if (image.height < size || image.width < size) {
        throw DataError("crop_patches: image " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                        " is smaller than patch size " + std::to_string(size) + "; no patches");
    }
    const std::size_t rows = crop_count(image.height, size, step);
    const std::size_t cols = crop_count(image.width, size, step);
    std::vector<Patch> patches;
    patches.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            Patch patch;
            patch.size = size;
            patch.source_id = source_id;
            patch.offset = {i * step, j * step};
            patch.pixels.resize(size * size * kChannels);
            for (std::size_t r = 0; r < size; ++r) {
                for (std::size_t c = 0; c < size; ++c) {
                    for (std::size_t ch = 0; ch < kChannels; ++ch) {
                        patch.pixels[(r * size + c) * kChannels + ch] =
                            image.at(patch.offset[0] + r, patch.offset[1] + c, ch);
                    }
                }
            }
            patches.push_back(std::move(patch));
        }
    }
    return patches;
}

void reindex_labels(Dataset& dataset) {
    dataset.labeled_ids.clear();
    dataset.unlabeled_ids.clear();
    for (std::size_t i = 0; i < dataset.patches.size(); ++i) {
        (dataset.patches[i].labeled ? dataset.labeled_ids : dataset.unlabeled_ids).push_back(i);
    }
}

Dataset split_labeled(const Dataset& dataset, double fraction, std::uint64_t seed) {
    if (dataset.patches.empty()) throw DataError("split_labeled: dataset is empty");
    if (!(fraction > 0.0 && fraction <= 1.0)) throw DataError("split_labeled: fraction must be in (0, 1]");

    const std::size_t total = dataset.patches.size();
    const auto wanted = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(total) + 1e-9)));
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    Dataset out = dataset;
    for (auto& patch : out.patches) {
        if (!patch.hidden_mask && patch.mask) patch.hidden_mask = patch.mask;
        patch.labeled = false;
        patch.mask.reset();
    }
    for (std::size_t k = 0; k < wanted; ++k) {
        auto& patch = out.patches[order[k]];
        if (!patch.hidden_mask) throw DataError("split_labeled: patch " + std::to_string(order[k]) + " has no mask");
        patch.labeled = true;
        patch.mask = patch.hidden_mask;
    }
    reindex_labels(out);
    return out;
}

}  // namespace udgen
