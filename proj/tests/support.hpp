#pragma once

#include "fluidrank/netlist.hpp"
#include "fluidrank/simulator.hpp"
#include "fluidrank/valve.hpp"

#include <optional>
#include <string>

namespace fluidrank::testing {

// Single valve rig: a regulated source charges the control chamber through a
// tube; the valve vents a second regulated source to atmosphere once snapped.
inline Netlist single_valve_rig(const ValveParams& v = default_valve_params(), double control_kpa = kLogicHighKpa) {
    Netlist n;
    n.nodes.push_back(Node{"atm", NodeKind::Atmosphere, {}, {}});
    n.nodes.push_back(Node{"ctl", NodeKind::Source, Pressure{control_kpa}, {}});
    n.nodes.push_back(Node{"sup", NodeKind::Source, Pressure{kLogicHighKpa}, {}});
    n.nodes.push_back(Node{"cc", NodeKind::Chamber, {}, v.control_volume});
    n.edges.push_back(Edge{"feed", "ctl", "cc", ConductanceClass::Tube});
    n.valves.push_back(Valve{"v", v, "cc", "sup", "atm", Polarity::PassWhenSnapped});
    return n;
}

inline Schedule control_step(double control_kpa = kLogicHighKpa) {
    return {SourceEvent{"ctl", 0.0, 0.0}, SourceEvent{"ctl", 0.05, control_kpa}};
}

struct RiseTiming {
    double snap_time = 0.0;
    double rise_time = 0.0;  // snap to 90% of the target flow
};

inline std::optional<RiseTiming> measure_rise(const Trace& t, const std::string& valve, double target_slm,
                                              double fraction = 0.9) {
    const auto& state = t.valve_state(valve).values;
    const auto& flow = t.valve_flow(valve).values;
    std::optional<std::size_t> snap;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (state[i]) {
            snap = i;
            break;
        }
    }
    if (!snap) return std::nullopt;
    for (std::size_t i = *snap; i < flow.size(); ++i) {
        if (flow[i] >= fraction * target_slm) return RiseTiming{t.times[*snap], t.times[i] - t.times[*snap]};
    }
    return std::nullopt;
}

} // namespace fluidrank::testing
