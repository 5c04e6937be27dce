#pragma once
// Run manifest: everything needed to reproduce a run bit-exactly. The model
// file text is embedded, so a manifest is self-contained.

#include <fstream>
#include <stdexcept>
#include <string>

#include "../../vendor/json.hpp"
#include "hash.hpp"

namespace reglab {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
    std::string model_hash;   // fnv1a64 of the model file text
    std::string model_text;   // embedded copy
    std::string subcommand;
    nlohmann::json params;    // fully resolved flags, defaults included
    std::uint64_t seed = 0;
    std::string scheme;
    std::string tool_version = kToolVersion;
    double duration_seconds = 0.0;

    nlohmann::json to_json() const {
        return {{"model_hash", model_hash},   {"model_text", model_text},
                {"subcommand", subcommand},   {"params", params},
                {"seed", seed},               {"scheme", scheme},
                {"tool_version", tool_version}, {"duration_seconds", duration_seconds}};
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.model_hash = j.at("model_hash").get<std::string>();
        m.model_text = j.at("model_text").get<std::string>();
        m.subcommand = j.at("subcommand").get<std::string>();
        m.params = j.at("params");
        m.seed = j.at("seed").get<std::uint64_t>();
        m.scheme = j.at("scheme").get<std::string>();
        m.tool_version = j.at("tool_version").get<std::string>();
        m.duration_seconds = j.at("duration_seconds").get<double>();
        if (m.model_hash != fnv1a64_hex(m.model_text))
            throw std::runtime_error("manifest: model hash does not match embedded text");
        return m;
    }
};

inline void write_manifest(const std::string& path, const RunManifest& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << m.to_json().dump(2) << "\n";
}

inline RunManifest load_manifest(const std::string& path) {
    return RunManifest::from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace reglab
