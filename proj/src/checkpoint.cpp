#include "udgen/checkpoint.hpp"

#include "udgen/errors.hpp"

#include <json.hpp>

#include <bit>
#include <fstream>

namespace udgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifest = "checkpoint.json";
constexpr int kFormatVersion = 1;

struct NamedNet {
    const char* name;
    MlpParams GenerationModel::*member;
};

constexpr NamedNet kNets[] = {
    {"content_encoder", &GenerationModel::content_encoder},
    {"style_encoder", &GenerationModel::style_encoder},
    {"generator", &GenerationModel::generator},
    {"discriminator", &GenerationModel::discriminator},
};

void write_tensor(const fs::path& path, const Tensor& t) {
    std::vector<unsigned char> bytes;
    bytes.reserve(t.size() * 8);
    for (double v : t.values()) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<unsigned char>(bits >> (8 * b)));
    }
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing " + path.string());
}

void read_tensor(const fs::path& path, const std::string& name, Tensor& t) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorruptionError(name + ": missing tensor file " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() != t.size() * 8) {
        throw CorruptionError(name + ": expected " + std::to_string(t.size() * 8) + " bytes in " + path.string() +
                              ", found " + std::to_string(bytes.size()));
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
        t[i] = std::bit_cast<double>(bits);
    }
    if (!t.all_finite()) throw CorruptionError(name + ": non-finite value in " + path.string());
}

json dims_json(const ModelDims& d) {
    return {{"patch_size", d.patch_size},
            {"channels", d.channels},
            {"content_dim", d.content_dim},
            {"style_dim", d.style_dim},
            {"encoder_hidden", d.encoder_hidden},
            {"style_hidden", d.style_hidden},
            {"generator_hidden", d.generator_hidden},
            {"discriminator_hidden", d.discriminator_hidden}};
}

ModelDims dims_from(const json& j) {
    ModelDims d;
    d.patch_size = j.at("patch_size").get<std::size_t>();
    d.channels = j.at("channels").get<std::size_t>();
    d.content_dim = j.at("content_dim").get<std::size_t>();
    d.style_dim = j.at("style_dim").get<std::size_t>();
    d.encoder_hidden = j.at("encoder_hidden").get<std::size_t>();
    d.style_hidden = j.at("style_hidden").get<std::size_t>();
    d.generator_hidden = j.at("generator_hidden").get<std::size_t>();
    d.discriminator_hidden = j.at("discriminator_hidden").get<std::size_t>();
    return d;
}

std::string tensor_name(const char* net, std::size_t layer, const char* part) {
    return std::string(net) + ".layer" + std::to_string(layer) + "." + part;
}

}  // namespace

void save_checkpoint(const fs::path& dir, const GenerationModel& model, const LossWeights& weights) {
    model.validate();
    fs::create_directories(dir);
    const auto& bank = model.bank.config();
    json manifest{{"format_version", kFormatVersion},
                  {"dims", dims_json(model.dims)},
                  {"seed", model.seed},
                  {"feature_bank",
                   {{"filters_per_layer", bank.filters_per_layer},
                    {"filter_scale", bank.filter_scale},
                    {"seed", bank.seed}}},
                  {"loss_weights", {{"w1", weights.w1}, {"w2", weights.w2}, {"w3", weights.w3}}}};
    json nets = json::object();
    for (const auto& net : kNets) {
        json layers = json::array();
        const auto& params = model.*net.member;
        for (std::size_t l = 0; l < params.layers.size(); ++l) {
            const auto& layer = params.layers[l];
            json entry{{"activation", std::string(to_string(layer.activation))}};
            for (const auto& [part, tensor] : {std::pair<const char*, const Tensor*>{"weight", &layer.weight},
                                               std::pair<const char*, const Tensor*>{"bias", &layer.bias}}) {
                const auto name = tensor_name(net.name, l, part);
                const auto file = name + ".bin";
                write_tensor(dir / file, *tensor);
                entry[part] = {{"file", file}, {"shape", tensor->shape()}};
            }
            layers.push_back(std::move(entry));
        }
        nets[net.name] = std::move(layers);
    }
    manifest["networks"] = std::move(nets);
    std::ofstream out(dir / kManifest);
    out << manifest.dump(2) << '\n';
    if (!out) throw DataError("failed writing " + (dir / kManifest).string());
}

Checkpoint load_checkpoint(const fs::path& dir) {
    const auto manifest_path = dir / kManifest;
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot read " + manifest_path.string());
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw CorruptionError(manifest_path.string() + ": " + e.what());
    }
    Checkpoint ckpt;
    try {
        if (manifest.at("format_version").get<int>() != kFormatVersion) {
            throw CorruptionError(manifest_path.string() + ": unsupported format_version");
        }
        const auto dims = dims_from(manifest.at("dims"));
        FeatureBankConfig bank;
        const auto& jb = manifest.at("feature_bank");
        bank.filters_per_layer = jb.at("filters_per_layer").get<std::vector<std::size_t>>();
        bank.filter_scale = jb.at("filter_scale").get<double>();
        bank.seed = jb.at("seed").get<std::uint64_t>();
        const auto& jw = manifest.at("loss_weights");
        ckpt.weights = {jw.at("w1").get<double>(), jw.at("w2").get<double>(), jw.at("w3").get<double>()};
        // The reference topology fixes every expected shape; parameters are
        // then overwritten from the tensor files.
        ckpt.model = make_model(dims, manifest.at("seed").get<std::uint64_t>(), bank);
        const auto& nets = manifest.at("networks");
        for (const auto& net : kNets) {
            auto& params = ckpt.model.*net.member;
            const auto& layers = nets.at(net.name);
            if (layers.size() != params.layers.size()) {
                throw CorruptionError(std::string(net.name) + ": expected " + std::to_string(params.layers.size()) +
                                      " layers, manifest lists " + std::to_string(layers.size()));
            }
            for (std::size_t l = 0; l < params.layers.size(); ++l) {
                auto& layer = params.layers[l];
                const auto& entry = layers[l];
                const auto act = entry.at("activation").get<std::string>();
                if (act != to_string(layer.activation)) {
                    throw CorruptionError(tensor_name(net.name, l, "activation") + ": expected " +
                                          std::string(to_string(layer.activation)) + ", found " + act);
                }
                for (const auto& [part, tensor] : {std::pair<const char*, Tensor*>{"weight", &layer.weight},
                                                   std::pair<const char*, Tensor*>{"bias", &layer.bias}}) {
                    const auto name = tensor_name(net.name, l, part);
                    const auto shape = entry.at(part).at("shape").get<Shape>();
                    if (shape != tensor->shape()) {
                        throw CorruptionError(name + ": manifest shape " + shape_string(shape) +
                                              " does not match dims (expected " + shape_string(tensor->shape()) +
                                              ")");
                    }
                    read_tensor(dir / entry.at(part).at("file").get<std::string>(), name, *tensor);
                }
            }
        }
    } catch (const json::exception& e) {
        throw CorruptionError(manifest_path.string() + ": " + e.what());
    } catch (const ShapeError& e) {
        throw CorruptionError(manifest_path.string() + ": " + e.what());
    }
    ckpt.weights.validate();
    return ckpt;
}

}  // namespace udgen
