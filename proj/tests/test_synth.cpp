#include "udgen/dataset_io.hpp"
#include "udgen/errors.hpp"
#include "udgen/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <utility>

using namespace udgen;
namespace fs = std::filesystem;

namespace {

SynthSpec small_spec(std::size_t per_combo = 10) {
    SynthSpec spec;
    spec.images_per_combination = per_combo;
    return spec;
}

Image gradient_image(std::size_t height, std::size_t width) {
    Image image{height, width, std::vector<double>(height * width * kChannels)};
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c)
            for (std::size_t ch = 0; ch < kChannels; ++ch)
                image.at(r, c, ch) = static_cast<double>((r * 31 + c * 7 + ch) % 256) / 255.0;
    return image;
}

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("udgen_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("make_synth_dataset: 3 content x 4 style x 10 gives 120 patches over 12 pairs") {
    const auto ds = make_synth_dataset(small_spec());
    CHECK(ds.size() == 120);
    std::set<std::pair<int, int>> pairs;
    for (const auto& p : ds.patches) {
        REQUIRE(p.true_content.has_value());
        REQUIRE(p.true_style.has_value());
        pairs.insert({*p.true_content, *p.true_style});
        CHECK(p.mask.has_value());
        CHECK(p.pixels.size() == 16 * 16 * 3);
        for (double v : p.pixels) REQUIRE((v >= 0.0 && v <= 1.0));
    }
    CHECK(pairs.size() == 12);
    CHECK_NOTHROW(ds.validate());
}

TEST_CASE("make_synth_dataset: masks mark the darker foreground blobs") {
    auto spec = small_spec(2);
    spec.noise_sigma = 0.0;
    const auto ds = make_synth_dataset(spec);
    for (const auto& p : ds.patches) {
        const auto style = style_transform(spec, static_cast<std::size_t>(*p.true_style));
        const auto fg = style.apply(kForegroundLevel);
        const auto bg = style.apply(kBackgroundLevel);
        std::size_t fg_pixels = 0;
        for (std::size_t i = 0; i < p.pixel_count(); ++i) {
            const auto& want = (*p.mask)[i] ? fg : bg;
            fg_pixels += (*p.mask)[i];
            for (std::size_t ch = 0; ch < 3; ++ch) REQUIRE(p.pixels[i * 3 + ch] == want[ch]);
        }
        CHECK(fg_pixels > 0);
        CHECK(fg_pixels < p.pixel_count());
    }
}

TEST_CASE("make_synth_dataset: deterministic, and noise-free patches depend only on factors and image seed") {
    auto spec = small_spec(3);
    CHECK(make_synth_dataset(spec).patches[17].pixels == make_synth_dataset(spec).patches[17].pixels);
    spec.noise_sigma = 0.0;
    const auto a = render_patch(spec, 1, 2, 99);
    const auto b = render_patch(spec, 1, 2, 99);
    CHECK(a.pixels == b.pixels);
    CHECK(a.mask == b.mask);
    const auto c = render_patch(spec, 1, 3, 99);
    CHECK(a.mask == c.mask);
    CHECK(a.pixels != c.pixels);
}

TEST_CASE("make_synth_dataset: invalid specs are rejected") {
    auto bad = small_spec();
    bad.patch_size = 7;
    CHECK_THROWS_AS(make_synth_dataset(bad), DataError);
    bad = small_spec();
    bad.n_content_factors = 1;
    CHECK_THROWS_AS(make_synth_dataset(bad), DataError);
    bad = small_spec();
    bad.n_style_factors = 1;
    CHECK_THROWS_AS(make_synth_dataset(bad), DataError);
    bad = small_spec();
    bad.noise_sigma = -0.1;
    CHECK_THROWS_AS(make_synth_dataset(bad), DataError);
}

TEST_CASE("make_synth_dataset: style mean luminance matches the analytic transform within 0.02") {
    auto spec = small_spec(40);
    spec.n_style_factors = 6;  // includes seeded factors beyond the fixed palette
    const auto ds = make_synth_dataset(spec);
    for (std::size_t k = 0; k < spec.n_style_factors; ++k) {
        const auto t = style_transform(spec, k);
        // Transform evaluated independently: low + (high - low) * level^gamma, Rec. 601 weights.
        auto lum = [&](double level) {
            const double g = std::pow(level, t.gamma);
            double rgb[3];
            for (int c = 0; c < 3; ++c) rgb[c] = t.low[c] + (t.high[c] - t.low[c]) * g;
            return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
        };
        double sample = 0.0, target = 0.0;
        std::size_t count = 0;
        for (const auto& p : ds.patches) {
            if (*p.true_style != static_cast<int>(k)) continue;
            double fg = 0.0;
            for (auto m : *p.mask) fg += m;
            fg /= static_cast<double>(p.pixel_count());
            target += fg * lum(0.25) + (1.0 - fg) * lum(0.85);
            for (std::size_t i = 0; i < p.pixel_count(); ++i)
                sample += 0.299 * p.pixels[i * 3] + 0.587 * p.pixels[i * 3 + 1] + 0.114 * p.pixels[i * 3 + 2];
            ++count;
        }
        REQUIRE(count >= 100);
        sample /= static_cast<double>(count * spec.patch_size * spec.patch_size);
        target /= static_cast<double>(count);
        CHECK(std::abs(sample - target) < 0.02);
    }
}

TEST_CASE("make_synth_dataset: content factors are pixel-separable by nearest centroid") {
    auto spec = small_spec(40);
    const auto ds = make_synth_dataset(spec);
    const std::size_t dim = ds.patches[0].pixels.size();
    // Even source ids train the centroids, odd ones are classified.
    std::vector<std::vector<double>> centroid(spec.n_content_factors, std::vector<double>(dim, 0.0));
    std::vector<double> counts(spec.n_content_factors, 0.0);
    for (const auto& p : ds.patches) {
        if (p.source_id % 2) continue;
        auto& mu = centroid[*p.true_content];
        for (std::size_t i = 0; i < dim; ++i) mu[i] += p.pixels[i];
        counts[*p.true_content] += 1.0;
    }
    for (std::size_t c = 0; c < centroid.size(); ++c)
        for (auto& v : centroid[c]) v /= counts[c];
    std::size_t right = 0, total = 0;
    for (const auto& p : ds.patches) {
        if (!(p.source_id % 2)) continue;
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centroid.size(); ++c) {
            double d = 0.0;
            for (std::size_t i = 0; i < dim; ++i) d += (p.pixels[i] - centroid[c][i]) * (p.pixels[i] - centroid[c][i]);
            if (d < best_d) best_d = d, best = c;
        }
        right += static_cast<int>(best) == *p.true_content;
        ++total;
    }
    CHECK(static_cast<double>(right) / static_cast<double>(total) >= 0.95);
}

TEST_CASE("crop_patches: window counts and offsets") {
    SUBCASE("32x32, size 16, step 8 gives offsets {0,8,16} squared") {
        const auto patches = crop_patches(gradient_image(32, 32), 16, 8);
        REQUIRE(patches.size() == 9);
        std::size_t k = 0;
        for (std::size_t r : {0, 8, 16})
            for (std::size_t c : {0, 8, 16}) {
                CHECK(patches[k].offset == std::array<std::size_t, 2>{r, c});
                ++k;
            }
    }
    SUBCASE("16x16, size 16, step 8 gives a single patch at the origin") {
        const auto patches = crop_patches(gradient_image(16, 16), 16, 8);
        REQUIRE(patches.size() == 1);
        CHECK(patches[0].offset == std::array<std::size_t, 2>{0, 0});
    }
    SUBCASE("48x40, size 16, step 8 gives 5x4") {
        CHECK(crop_patches(gradient_image(48, 40), 16, 8).size() == 20);
    }
}

TEST_CASE("crop_patches: count equals the closed form over a grid of triples") {
    for (std::size_t h : {16, 17, 23, 40, 57})
        for (std::size_t w : {16, 20, 33})
            for (std::size_t size : {8, 16})
                for (std::size_t step : {1, 3, 8, 16}) {
                    const std::size_t rows = (h - size) / step + 1, cols = (w - size) / step + 1;
                    const auto patches = crop_patches(gradient_image(h, w), size, step);
                    REQUIRE(patches.size() == rows * cols);
                    const auto& last = patches.back();
                    CHECK(last.offset[0] + size <= h);
                    CHECK(last.offset[1] + size <= w);
                }
}

TEST_CASE("crop_patches: pixels are copied from the window") {
    const auto image = gradient_image(40, 40);
    const auto patches = crop_patches(image, 16, 8, 5);
    const auto& p = patches[7];
    CHECK(p.source_id == 5);
    for (std::size_t r = 0; r < 16; ++r)
        for (std::size_t c = 0; c < 16; ++c)
            for (std::size_t ch = 0; ch < 3; ++ch)
                REQUIRE(p.pixels[(r * 16 + c) * 3 + ch] == image.at(p.offset[0] + r, p.offset[1] + c, ch));
}

TEST_CASE("crop_patches: image smaller than the window is an error") {
    CHECK_THROWS_AS(crop_patches(gradient_image(15, 40), 16, 8), DataError);
    CHECK_THROWS_AS(crop_patches(gradient_image(40, 40), 16, 0), DataError);
}

TEST_CASE("split_labeled: fractions, partition, and hidden masks") {
    const auto ds = make_synth_dataset(small_spec());
    SUBCASE("half") {
        const auto split = split_labeled(ds, 0.5, 3);
        CHECK(split.labeled_ids.size() == 60);
        CHECK(split.unlabeled_ids.size() == 60);
        CHECK_NOTHROW(split.validate());
        for (auto id : split.unlabeled_ids) {
            CHECK_FALSE(split.patches[id].mask.has_value());
            CHECK(split.patches[id].hidden_mask == ds.patches[id].mask);
        }
        for (auto id : split.labeled_ids) CHECK(split.patches[id].mask == ds.patches[id].mask);
    }
    SUBCASE("all") {
        const auto split = split_labeled(ds, 1.0, 3);
        CHECK(split.labeled_ids.size() == 120);
        CHECK(split.unlabeled_ids.empty());
    }
    SUBCASE("tiny fraction keeps one") {
        CHECK(split_labeled(ds, 1e-6, 3).labeled_ids.size() == 1);
    }
    SUBCASE("rounds down") {
        CHECK(split_labeled(ds, 0.333, 3).labeled_ids.size() == 39);
    }
    SUBCASE("seeded") {
        CHECK(split_labeled(ds, 0.5, 11).labeled_ids == split_labeled(ds, 0.5, 11).labeled_ids);
        CHECK(split_labeled(ds, 0.5, 11).labeled_ids != split_labeled(ds, 0.5, 12).labeled_ids);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(split_labeled(Dataset{}, 0.5, 1), DataError);
        CHECK_THROWS_AS(split_labeled(ds, 0.0, 1), DataError);
        CHECK_THROWS_AS(split_labeled(ds, 1.5, 1), DataError);
    }
}

TEST_CASE("split_labeled: labeled subset is roughly uniform over patches") {
    const auto ds = make_synth_dataset(small_spec());
    std::vector<int> hits(ds.size(), 0);
    const int trials = 2000;
    for (int t = 0; t < trials; ++t)
        for (auto id : split_labeled(ds, 0.25, 1000 + t).labeled_ids) ++hits[id];
    // Each patch is labeled with probability 30/120; binomial sd is about 19.4.
    for (int h : hits) CHECK(std::abs(h - 500) < 100);
}

TEST_CASE("dataset io: round trip through PPM/PGM and manifest") {
    const auto ds = split_labeled(make_synth_dataset(small_spec(2)), 0.5, 4);
    const auto dir = scratch_dir("dataset_roundtrip");
    save_dataset(ds, dir);
    CHECK(fs::exists(dir / "manifest.json"));
    const auto back = load_dataset(dir);
    REQUIRE(back.size() == ds.size());
    CHECK(back.labeled_ids == ds.labeled_ids);
    CHECK(back.unlabeled_ids == ds.unlabeled_ids);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& a = ds.patches[i];
        const auto& b = back.patches[i];
        CHECK(a.true_content == b.true_content);
        CHECK(a.true_style == b.true_style);
        CHECK(a.source_id == b.source_id);
        CHECK(a.mask == b.mask);
        for (std::size_t k = 0; k < a.pixels.size(); ++k)
            REQUIRE(std::abs(a.pixels[k] - b.pixels[k]) <= 0.5 / 255.0 + 1e-12);
    }
    // Second save of the loaded set is byte-identical to the first.
    const auto again = scratch_dir("dataset_roundtrip2");
    save_dataset(back, again);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(slurp(dir / "manifest.json") == slurp(again / "manifest.json"));
    CHECK(slurp(dir / "patch_00003.ppm") == slurp(again / "patch_00003.ppm"));
}

TEST_CASE("dataset io: truncated image and missing manifest are reported") {
    const auto ds = make_synth_dataset(small_spec(1));
    const auto dir = scratch_dir("dataset_truncated");
    save_dataset(ds, dir);
    const auto victim = dir / "patch_00002.ppm";
    fs::resize_file(victim, fs::file_size(victim) - 10);
    CHECK_THROWS_AS(load_dataset(dir), CorruptionError);
    CHECK_THROWS_AS(load_dataset(dir / "nowhere"), DataError);
}
