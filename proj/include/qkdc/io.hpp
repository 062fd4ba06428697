#pragma once

#include "qkdc/gaussian.hpp"
#include "qkdc/qcore.hpp"
#include "qkdc/simulate.hpp"

#include <json.hpp>

#include <string>

namespace qkdc {

// {"dims":[...],"re":[[...]],"im":[[...]]}, row-major; "im" may be omitted.
Mat matrix_from_json(const nlohmann::json& j, Dims* dims = nullptr);
nlohmann::json matrix_to_json(const Mat& m, const Dims& dims, int digits = 17);

DensityOperator read_state(const std::string& path);
void write_state(const std::string& path, const DensityOperator& rho);

// {"kind":"dephasing","gamma":0.3}, {"kind":"erasure","p":0.2,"d":2},
// {"kind":"measure-prepare","vectors":[[1,0],[0,1]]}, ...
ChannelFamily channel_from_json(const nlohmann::json& j);
// {"kind":"thermal","eta":0.6,"nb":0.5}; also pure-loss, amplifier, ql-amplifier, additive.
BosonicChannelParams bosonic_from_json(const nlohmann::json& j);

// Accepts inline JSON text or a path to a JSON file.
nlohmann::json load_json(const std::string& text_or_path);

} // namespace qkdc
