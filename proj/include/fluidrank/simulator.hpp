#pragma once

#include "fluidrank/netlist.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fluidrank {

/// Fixed-step integration settings. The class flows (tube, bleed, channel) are
/// the flows each conductance class carries at `reference_pressure_kpa` of
/// differential pressure; conductances are linear in between.
struct SimConfig {
    double dt = 1e-3;
    double duration = 1.0;
    double rise_time_constant = 0.232;
    double loss_multiplier = 1.0;

    double reference_pressure_kpa = 20.68;
    double tube_flow_slm = 10.0;
    double bleed_flow_slm = 0.3;
    double channel_flow_slm = 2.76;
    double probe_volume_ml = 1.0;
    /// Chamber wall stiffness; a chamber of volume V has compliance V/stiffness.
    /// Defaults to the value implied by default_valve_params().
    std::optional<double> chamber_stiffness_kpa;
    double fault_pressure_kpa = 200.0;
};

/// Throws Error(InvalidArgument) if any SimConfig field is out of range.
void check_sim_config(const SimConfig& cfg);

/// Step change of a source node's pressure.
struct SourceEvent {
    std::string node_id;
    double time_s = 0.0;
    double pressure_kpa = 0.0;

    bool operator==(const SourceEvent&) const = default;
};

using Schedule = std::vector<SourceEvent>;

nlohmann::json to_json(const Schedule& s);
Schedule schedule_from_json(const nlohmann::json& j);

struct Series {
    std::string id;
    std::vector<double> values;
};

struct StateSeries {
    std::string id;
    std::vector<std::uint8_t> values;  // 1 = snapped
};

/// Sampled simulation output. Sample k is taken at k*dt; flows at sample k are
/// the flows used to advance from sample k to k+1.
struct Trace {
    std::vector<double> times;
    std::vector<Series> probes;        // kPa, sorted by id
    std::vector<StateSeries> valves;   // sorted by id
    std::vector<Series> valve_flows;   // slm through each valve channel, sorted by id
    std::vector<Series> chambers;      // kPa, sorted by id

    const Series& probe(const std::string& id) const;
    const StateSeries& valve_state(const std::string& id) const;
    const Series& valve_flow(const std::string& id) const;
    const Series& chamber(const std::string& id) const;
};

/// Explicit-Euler network simulation.
///
/// Every chamber and probe integrates its net inflow through a linear
/// compliance. Valve channels carry open_flow at the reference differential,
/// scaled by an opening fraction and divided by loss_multiplier. The opening
/// fraction rises toward 1 with a first-order lag (rise_time_constant) and
/// drops to 0 at once when the channel shuts. A valve snaps when its control pressure reaches snap_up;
/// monostable valves release below snap_down, bistable ones latch.
///
/// Sources not mentioned in the schedule hold their nominal pressure. A source
/// that is scheduled must have an event at t = 0, otherwise the interval before
/// its first event is a gap and InvalidSchedule is thrown.
Trace simulate(const Netlist& n, const Schedule& schedule, const SimConfig& cfg);

/// CSV with header `time_s,<probe>_kPa...,<valve>_state...`.
void write_trace_csv(const Trace& trace, std::ostream& out);

} // namespace fluidrank
