#pragma once

#include "fluidrank/units.hpp"

#include <string>
#include <vector>

namespace fluidrank {

/// Lumped model of one elastomeric snap-through valve.
struct ValveParams {
    Pressure snap_up;          // control pressure that snaps the membrane
    Pressure snap_down;        // release threshold (hysteresis)
    FlowRate open_flow;        // channel flow once open, at the reference differential
    Volume control_volume;     // upper chamber at rest
    Volume snap_fill_volume;   // air needed to go from atmospheric to snap_up
    bool bistable = false;

    bool operator==(const ValveParams&) const = default;
};

/// One-sigma spread of the characterized valves; only the study harness's
/// jitter mode draws from it.
struct ValveVariability {
    double snap_up_sd_kpa = 2.29;
    double open_flow_sd_slm = 0.28;
};

inline constexpr double kDefaultSnapDownRatio = 0.6;
inline constexpr double kLogicHighKpa = 20.68;

ValveParams default_valve_params();
ValveVariability default_valve_variability();

/// Empty when the parameters are physically consistent; otherwise one message
/// per broken rule.
std::vector<std::string> check_valve_params(const ValveParams& v);

/// Effective elastic stiffness of a chamber wall, in kPa per unit volumetric
/// strain, such that pushing snap_fill_volume into control_volume reaches
/// snap_up. A chamber of volume V then has compliance V / stiffness (mL/kPa).
double chamber_stiffness_kpa(const ValveParams& v);

} // namespace fluidrank
