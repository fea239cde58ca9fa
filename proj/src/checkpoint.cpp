#include "degm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace degm {

namespace {

constexpr char kMagic[8] = {'D', 'E', 'G', 'M', 'C', 'K', 'P', 'T'};
constexpr int kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

}  // namespace

nlohmann::json model_config_to_json(const ModelConfig& c) {
    return {{"d", c.d},
            {"layers", c.layers},
            {"m", c.m},
            {"num_types", c.num_types},
            {"T", c.T},
            {"residual", c.residual},
            {"activation", c.activation == Activation::elu ? "elu" : "identity"}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.d = j.value("d", c.d);
    c.layers = j.value("layers", c.layers);
    c.m = j.value("m", c.m);
    c.num_types = j.value("num_types", c.num_types);
    c.T = j.value("T", c.T);
    c.residual = j.value("residual", c.residual);
    const std::string act = j.value("activation", std::string("elu"));
    if (act == "elu") c.activation = Activation::elu;
    else if (act == "identity") c.activation = Activation::identity;
    else throw ConfigError("unknown activation '" + act + "'");
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    const auto arrays = checkpoint.params.arrays();
    nlohmann::json header;
    header["format_version"] = kFormatVersion;
    header["model"] = model_config_to_json(checkpoint.params.config);
    header["ontology"] = checkpoint.ontology;
    header["metadata"] = checkpoint.metadata;
    auto& index = header["arrays"] = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, a] : arrays) {
        index.push_back({{"name", name}, {"shape", {a->rows(), a->cols()}}, {"offset", offset}});
        offset += static_cast<std::uint64_t>(a->size());
    }
    const std::string text = header.dump();
    const std::uint64_t len = text.size();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, a] : arrays)
        out.write(reinterpret_cast<const char*>(a->data()), static_cast<std::streamsize>(a->size() * sizeof(double)));
    if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    char magic[8];
    std::uint64_t len = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw DataError(path.string() + " is not a checkpoint file");
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) throw DataError("truncated checkpoint header in " + path.string());

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("checkpoint header: " + std::string(e.what()));
    }
    if (header.value("format_version", 0) != kFormatVersion)
        throw DataError("unsupported checkpoint format version in " + path.string());

    Checkpoint ck;
    ModelConfig config = model_config_from_json(header.at("model"));
    ck.params = DenoiserParams::initialize(config, 0);
    ck.ontology = header.at("ontology").get<std::vector<std::string>>();
    ck.metadata = header.value("metadata", nlohmann::json::object());
    if (static_cast<int>(ck.ontology.size()) != config.num_types)
        throw DataError("checkpoint ontology size disagrees with num_types");

    const auto data_start = in.tellg();
    auto arrays = ck.params.arrays();
    const auto& index = header.at("arrays");
    if (index.size() != arrays.size()) throw DataError("checkpoint array count mismatch");
    for (std::size_t k = 0; k < arrays.size(); ++k) {
        auto& [name, a] = arrays[k];
        const auto& entry = index[k];
        if (entry.at("name").get<std::string>() != name) throw DataError("checkpoint array order mismatch at " + name);
        auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
        if (shape.size() != 2 || shape[0] != a->rows() || shape[1] != a->cols())
            throw DataError("checkpoint array " + name + " has unexpected shape");
        auto offset = entry.at("offset").get<std::uint64_t>();
        in.seekg(data_start + static_cast<std::streamoff>(offset * sizeof(double)));
        in.read(reinterpret_cast<char*>(a->data()), static_cast<std::streamsize>(a->size() * sizeof(double)));
        if (!in) throw DataError("truncated checkpoint payload for " + name);
    }
    return ck;
}

}  // namespace degm
