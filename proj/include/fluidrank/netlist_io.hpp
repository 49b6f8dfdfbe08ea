#pragma once

#include "fluidrank/netlist.hpp"

#include <json.hpp>

#include <string>

namespace fluidrank {

nlohmann::json to_json(const ValveParams& v);
ValveParams valve_params_from_json(const nlohmann::json& j, const std::string& path = "params");

/// Netlist document: `nodes`, `valves`, `edges` and optional `inputs`.
/// Pressures are kPa, volumes mL, flows slm.
nlohmann::json to_json(const Netlist& n);
Netlist netlist_from_json(const nlohmann::json& j);

Netlist load_netlist(const std::string& path);
void save_netlist(const Netlist& n, const std::string& path);

} // namespace fluidrank
