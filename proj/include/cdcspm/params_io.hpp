#pragma once

#include <array>
#include <fstream>
#include <string>

#include "json.hpp"

#include "cdcspm/angles.hpp"
#include "cdcspm/errors.hpp"
#include "cdcspm/geometry.hpp"

namespace cdcspm {

/// Unreadable or structurally malformed parameter file.
class ParamsFileError : public Error {
public:
    using Error::Error;
};

/**
 * Reads MechanismParams from JSON. Keys match the field names; angles are in
 * degrees and lengths in millimetres. Keys starting with '_' are ignored as
 * annotations; any other unknown key is an error.
 */
inline MechanismParams params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParamsFileError("parameter document must be a JSON object");
    static const std::array<const char*, 8> keys{"alpha1", "alpha2", "beta", "l_tool",
                                                 "z_cor",  "r1",     "r2",   "base_offsets"};
    for (const auto& [key, value] : j.items()) {
        if (!key.empty() && key[0] == '_') continue;
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) throw ParamsFileError("unknown parameter key '" + key + "'");
    }
    auto number = [&](const char* key) {
        if (!j.contains(key)) throw ParamsFileError(std::string("missing parameter '") + key + "'");
        const auto& v = j.at(key);
        if (!v.is_number()) throw ParamsFileError(std::string("parameter '") + key + "' must be a number");
        return v.get<double>();
    };
    MechanismParams p;
    p.alpha1 = deg2rad(number("alpha1"));
    p.alpha2 = deg2rad(number("alpha2"));
    p.beta = deg2rad(number("beta"));
    p.l_tool = number("l_tool");
    p.z_cor = number("z_cor");
    p.r1 = number("r1");
    p.r2 = number("r2");
    if (!j.contains("base_offsets")) throw ParamsFileError("missing parameter 'base_offsets'");
    const auto& offsets = j.at("base_offsets");
    if (!offsets.is_array() || offsets.size() != kLegCount)
        throw ParamsFileError("base_offsets must be an array of three numbers");
    for (std::size_t i = 0; i < kLegCount; ++i) {
        if (!offsets[i].is_number()) throw ParamsFileError("base_offsets must be an array of three numbers");
        p.base_offsets[i] = offsets[i].get<double>();
    }
    validate(p);
    return p;
}

inline nlohmann::json params_to_json(const MechanismParams& p) {
    return {{"alpha1", rad2deg(p.alpha1)},
            {"alpha2", rad2deg(p.alpha2)},
            {"beta", rad2deg(p.beta)},
            {"l_tool", p.l_tool},
            {"z_cor", p.z_cor},
            {"r1", p.r1},
            {"r2", p.r2},
            {"base_offsets", {p.base_offsets[0], p.base_offsets[1], p.base_offsets[2]}}};
}

inline MechanismParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParamsFileError("cannot open parameter file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParamsFileError("malformed parameter file '" + path + "': " + e.what());
    }
    return params_from_json(j);
}

}  // namespace cdcspm
