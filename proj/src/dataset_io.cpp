#include "udgen/dataset_io.hpp"

#include "udgen/errors.hpp"
#include "udgen/tensor.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace udgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_netpbm(const fs::path& path, const char* magic, std::size_t height, std::size_t width,
                  const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << magic << '\n' << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing " + path.string());
}

std::vector<std::uint8_t> read_netpbm(const fs::path& path, const std::string& magic, std::size_t channels,
                                      std::size_t& height, std::size_t& width) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    auto token = [&]() {
        std::string t;
        char c;
        while (in.get(c)) {
            if (c == '#') {
                std::string skip;
                std::getline(in, skip);
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                t.push_back(c);
                break;
            }
        }
        while (in.get(c) && !std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
        return t;
    };
    if (token() != magic) throw CorruptionError(path.string() + ": expected " + magic + " header");
    try {
        width = std::stoul(token());
        height = std::stoul(token());
        if (std::stoul(token()) != 255) throw CorruptionError(path.string() + ": only maxval 255 supported");
    } catch (const std::logic_error&) {
        throw CorruptionError(path.string() + ": malformed header");
    }
    std::vector<std::uint8_t> bytes(height * width * channels);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
        throw CorruptionError(path.string() + ": truncated pixel data");
    }
    return bytes;
}

std::string numbered(const char* prefix, std::size_t i, const char* ext) {
    std::ostringstream name;
    name << prefix << std::setw(5) << std::setfill('0') << i << ext;
    return name.str();
}

}  // namespace

void write_ppm(const fs::path& path, std::size_t height, std::size_t width, std::span<const double> rgb) {
    require_extent(rgb.size(), height * width * kChannels, "ppm pixels");
    std::vector<std::uint8_t> bytes(rgb.size());
    std::transform(rgb.begin(), rgb.end(), bytes.begin(), quantize);
    write_netpbm(path, "P6", height, width, bytes);
}

void write_pgm(const fs::path& path, std::size_t height, std::size_t width, const Mask& mask) {
    require_extent(mask.size(), height * width, "pgm mask");
    std::vector<std::uint8_t> bytes(mask.size());
    std::transform(mask.begin(), mask.end(), bytes.begin(), [](std::uint8_t m) { return m ? 255 : 0; });
    write_netpbm(path, "P5", height, width, bytes);
}

Image read_ppm(const fs::path& path) {
    Image image;
    const auto bytes = read_netpbm(path, "P6", kChannels, image.height, image.width);
    image.rgb.resize(bytes.size());
    std::transform(bytes.begin(), bytes.end(), image.rgb.begin(), [](std::uint8_t b) { return b / 255.0; });
    return image;
}

Mask read_pgm(const fs::path& path, std::size_t& height, std::size_t& width) {
    auto bytes = read_netpbm(path, "P5", 1, height, width);
    for (auto& b : bytes) b = b >= 128 ? 1 : 0;
    return bytes;
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
    fs::create_directories(dir);
    json manifest;
    manifest["patch_size"] = dataset.patch_size;
    manifest["patches"] = json::array();
    for (std::size_t i = 0; i < dataset.patches.size(); ++i) {
        const auto& p = dataset.patches[i];
        json entry;
        entry["file"] = numbered("patch_", i, ".ppm");
        write_ppm(dir / entry["file"].get<std::string>(), p.size, p.size, p.pixels);
        if (p.mask) {
            entry["mask"] = numbered("mask_", i, ".pgm");
            write_pgm(dir / entry["mask"].get<std::string>(), p.size, p.size, *p.mask);
        }
        entry["source_id"] = p.source_id;
        entry["offset"] = {p.offset[0], p.offset[1]};
        entry["labeled"] = p.labeled;
        entry["true_content"] = p.true_content ? json(*p.true_content) : json(nullptr);
        entry["true_style"] = p.true_style ? json(*p.true_style) : json(nullptr);
        manifest["patches"].push_back(std::move(entry));
    }
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) throw DataError("failed writing manifest in " + dir.string());
}

Dataset load_dataset(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw DataError("no dataset manifest at " + (dir / "manifest.json").string());
    json manifest;
    try {
        in >> manifest;
        Dataset dataset;
        dataset.patch_size = manifest.at("patch_size").get<std::size_t>();
        for (const auto& entry : manifest.at("patches")) {
            Patch p;
            const Image image = read_ppm(dir / entry.at("file").get<std::string>());
            if (image.height != dataset.patch_size || image.width != dataset.patch_size) {
                throw CorruptionError(entry.at("file").get<std::string>() + ": extent does not match patch_size");
            }
            p.size = dataset.patch_size;
            p.pixels = image.rgb;
            p.source_id = entry.at("source_id").get<std::size_t>();
            p.offset = {entry.at("offset").at(0).get<std::size_t>(), entry.at("offset").at(1).get<std::size_t>()};
            p.labeled = entry.at("labeled").get<bool>();
            if (entry.contains("mask")) {
                std::size_t h = 0, w = 0;
                p.mask = read_pgm(dir / entry.at("mask").get<std::string>(), h, w);
                if (h != p.size || w != p.size) throw CorruptionError("mask extent does not match patch_size");
            }
            if (!entry.at("true_content").is_null()) p.true_content = entry.at("true_content").get<int>();
            if (!entry.at("true_style").is_null()) p.true_style = entry.at("true_style").get<int>();
            dataset.patches.push_back(std::move(p));
        }
        reindex_labels(dataset);
        dataset.validate();
        return dataset;
    } catch (const json::exception& e) {
        throw CorruptionError("dataset manifest " + (dir / "manifest.json").string() + ": " + e.what());
    }
}

}  // namespace udgen
