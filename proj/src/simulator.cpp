#include "fluidrank/simulator.hpp"

#include "fluidrank/error.hpp"
#include "fluidrank/json_fields.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace fluidrank {

namespace jf = json_fields;
using nlohmann::json;

void check_sim_config(const SimConfig& cfg) {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, "SimConfig: " + what); };
    if (!(cfg.dt > 0.0 && cfg.dt <= 0.01)) bad("dt must be in (0, 0.01]");
    if (!(cfg.duration > 0.0) || !std::isfinite(cfg.duration)) bad("duration must be > 0");
    if (!(cfg.rise_time_constant > 0.0)) bad("rise_time_constant must be > 0");
    if (!(cfg.loss_multiplier >= 1.0)) bad("loss_multiplier must be >= 1");
    if (!(cfg.reference_pressure_kpa > 0.0)) bad("reference_pressure_kpa must be > 0");
    if (!(cfg.tube_flow_slm > 0.0 && cfg.bleed_flow_slm > 0.0 && cfg.channel_flow_slm > 0.0)) {
        bad("class flows must be > 0");
    }
    if (!(cfg.probe_volume_ml > 0.0)) bad("probe_volume_ml must be > 0");
    if (cfg.chamber_stiffness_kpa && !(*cfg.chamber_stiffness_kpa > 0.0)) bad("chamber_stiffness_kpa must be > 0");
}

json to_json(const Schedule& s) {
    json out = json::array();
    for (const auto& e : s) {
        out.push_back(json{{"node_id", e.node_id}, {"time_s", e.time_s}, {"pressure_kPa", e.pressure_kpa}});
    }
    return out;
}

Schedule schedule_from_json(const json& j) {
    if (!j.is_array()) jf::fail("$", "schedule must be an array of step events");
    Schedule s;
    for (std::size_t i = 0; i < j.size(); ++i) {
        auto path = jf::index("", i);
        s.push_back(SourceEvent{jf::string(j[i], "node_id", path), jf::number(j[i], "time_s", path),
                                jf::number(j[i], "pressure_kPa", path)});
    }
    return s;
}

namespace {

template <class S>
const S& find_series(const std::vector<S>& list, const std::string& id, const char* what) {
    auto it = std::find_if(list.begin(), list.end(), [&](const S& s) { return s.id == id; });
    if (it == list.end()) throw Error(ErrorCode::InvalidArgument, std::string("trace has no ") + what + " '" + id + "'");
    return *it;
}

struct Link {
    std::size_t a;
    std::size_t b;
    double conductance;  // mL/s per kPa
};

struct SourceTrack {
    std::vector<std::pair<double, double>> steps;  // (time, pressure), sorted
    std::size_t cursor = 0;
};

} // namespace

const Series& Trace::probe(const std::string& id) const { return find_series(probes, id, "probe"); }
const StateSeries& Trace::valve_state(const std::string& id) const { return find_series(valves, id, "valve"); }
const Series& Trace::valve_flow(const std::string& id) const { return find_series(valve_flows, id, "valve flow"); }
const Series& Trace::chamber(const std::string& id) const { return find_series(chambers, id, "chamber"); }

Trace simulate(const Netlist& n, const Schedule& schedule, const SimConfig& cfg) {
    check_sim_config(cfg);
    if (auto violations = validate_netlist(n); !violations.empty()) {
        throw Error(ErrorCode::InvalidArgument,
                    "netlist is invalid: " + std::string(to_string(violations.front().rule)) + " " +
                        violations.front().element + " (" + violations.front().message + ")");
    }

    const std::size_t node_count = n.nodes.size();
    const double stiffness = cfg.chamber_stiffness_kpa.value_or(chamber_stiffness_kpa(default_valve_params()));
    const double ml_per_s_per_slm = 1000.0 / 60.0;
    auto class_conductance = [&](double flow_slm) { return flow_slm * ml_per_s_per_slm / cfg.reference_pressure_kpa; };

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < node_count; ++i) index.emplace(n.nodes[i].id, i);

    // Compliance (mL/kPa); zero marks a fixed-pressure node.
    std::vector<double> compliance(node_count, 0.0);
    for (std::size_t i = 0; i < node_count; ++i) {
        const auto& node = n.nodes[i];
        if (node.kind == NodeKind::Chamber) compliance[i] = node.volume.ml / stiffness;
        if (node.kind == NodeKind::Probe) compliance[i] = cfg.probe_volume_ml / stiffness;
    }

    // Schedule.
    std::vector<SourceTrack> tracks(node_count);
    std::vector<bool> scheduled(node_count, false);
    for (const auto& e : schedule) {
        auto it = index.find(e.node_id);
        if (it == index.end() || n.nodes[it->second].kind != NodeKind::Source) {
            throw Error(ErrorCode::InvalidSchedule, "schedule event targets '" + e.node_id + "', which is not a source");
        }
        if (!std::isfinite(e.time_s) || e.time_s < 0.0 || !std::isfinite(e.pressure_kpa) || e.pressure_kpa < 0.0) {
            throw Error(ErrorCode::InvalidSchedule, "schedule event for '" + e.node_id + "' has negative or non-finite values");
        }
        tracks[it->second].steps.emplace_back(e.time_s, e.pressure_kpa);
        scheduled[it->second] = true;
    }
    const double time_eps = 1e-9 * cfg.dt;
    for (std::size_t i = 0; i < node_count; ++i) {
        if (!scheduled[i]) continue;
        auto& steps = tracks[i].steps;
        std::stable_sort(steps.begin(), steps.end(), [](auto& a, auto& b) { return a.first < b.first; });
        if (steps.front().first > time_eps) {
            throw Error(ErrorCode::InvalidSchedule, "source '" + n.nodes[i].id + "' has no schedule event at t = 0");
        }
    }

    std::vector<double> pressure(node_count, 0.0);
    auto update_sources = [&](double t) {
        for (std::size_t i = 0; i < node_count; ++i) {
            if (n.nodes[i].kind != NodeKind::Source) continue;
            if (!scheduled[i]) {
                pressure[i] = n.nodes[i].pressure.kpa;
                continue;
            }
            auto& track = tracks[i];
            while (track.cursor + 1 < track.steps.size() && track.steps[track.cursor + 1].first <= t + time_eps) {
                ++track.cursor;
            }
            pressure[i] = track.steps[track.cursor].second;
        }
    };

    std::vector<Link> links;
    for (const auto& e : n.edges) {
        double flow = cfg.tube_flow_slm;
        if (e.conductance == ConductanceClass::Bleed) flow = cfg.bleed_flow_slm;
        if (e.conductance == ConductanceClass::OpenValveChannel) flow = cfg.channel_flow_slm / cfg.loss_multiplier;
        links.push_back(Link{index.at(e.from_node), index.at(e.to_node), class_conductance(flow)});
    }

    struct ValveState {
        std::size_t control, inlet, outlet;
        double conductance;
        bool snapped = false;
        double opening = 0.0;
    };
    std::vector<ValveState> valves;
    for (const auto& v : n.valves) {
        valves.push_back(ValveState{index.at(v.control_node), index.at(v.inlet_node), index.at(v.outlet_node),
                                    class_conductance(v.params.open_flow.slm / cfg.loss_multiplier)});
    }
    auto conducting = [&](std::size_t k) {
        bool snapped = valves[k].snapped;
        return n.valves[k].polarity == Polarity::PassWhenSnapped ? snapped : !snapped;
    };

    // Explicit Euler is only monotone while each node's total conductance times
    // dt stays below its compliance.
    {
        std::vector<double> load(node_count, 0.0);
        for (const auto& l : links) {
            load[l.a] += l.conductance;
            load[l.b] += l.conductance;
        }
        for (const auto& v : valves) {
            load[v.inlet] += v.conductance;
            load[v.outlet] += v.conductance;
        }
        for (std::size_t i = 0; i < node_count; ++i) {
            if (compliance[i] > 0.0 && load[i] * cfg.dt > compliance[i]) {
                throw Error(ErrorCode::UnstableTimestep,
                            "dt too large for node '" + n.nodes[i].id + "': reduce dt or enlarge the node volume");
            }
        }
    }

    const auto steps = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));

    // Output layout, sorted by id.
    auto sorted_indices = [](std::size_t count, auto id_of, auto keep) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < count; ++i) {
            if (keep(i)) idx.push_back(i);
        }
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return id_of(a) < id_of(b); });
        return idx;
    };
    auto node_id = [&](std::size_t i) { return n.nodes[i].id; };
    auto valve_id = [&](std::size_t i) { return n.valves[i].id; };
    const auto probe_idx = sorted_indices(node_count, node_id, [&](std::size_t i) { return n.nodes[i].kind == NodeKind::Probe; });
    const auto chamber_idx = sorted_indices(node_count, node_id, [&](std::size_t i) { return n.nodes[i].kind == NodeKind::Chamber; });
    const auto valve_idx = sorted_indices(valves.size(), valve_id, [](std::size_t) { return true; });

    Trace trace;
    trace.times.reserve(steps + 1);
    for (auto i : probe_idx) trace.probes.push_back(Series{n.nodes[i].id, {}});
    for (auto i : chamber_idx) trace.chambers.push_back(Series{n.nodes[i].id, {}});
    for (auto i : valve_idx) {
        trace.valves.push_back(StateSeries{n.valves[i].id, {}});
        trace.valve_flows.push_back(Series{n.valves[i].id, {}});
    }
    for (auto& s : trace.probes) s.values.reserve(steps + 1);
    for (auto& s : trace.chambers) s.values.reserve(steps + 1);
    for (auto& s : trace.valves) s.values.reserve(steps + 1);
    for (auto& s : trace.valve_flows) s.values.reserve(steps + 1);

    // Initial condition: vented network, valves already in the state their
    // t = 0 control pressures dictate, channels settled in that state.
    update_sources(0.0);
    for (std::size_t k = 0; k < valves.size(); ++k) {
        valves[k].snapped = pressure[valves[k].control] >= n.valves[k].params.snap_up.kpa;
        valves[k].opening = conducting(k) ? 1.0 : 0.0;
    }

    std::vector<double> valve_flow(valves.size(), 0.0);
    std::vector<double> inflow(node_count, 0.0);
    const double lag = cfg.dt / cfg.rise_time_constant;
    const double to_slm = 1.0 / ml_per_s_per_slm;

    auto record = [&](double t) {
        trace.times.push_back(t);
        for (std::size_t j = 0; j < probe_idx.size(); ++j) trace.probes[j].values.push_back(pressure[probe_idx[j]]);
        for (std::size_t j = 0; j < chamber_idx.size(); ++j) trace.chambers[j].values.push_back(pressure[chamber_idx[j]]);
        for (std::size_t j = 0; j < valve_idx.size(); ++j) {
            trace.valves[j].values.push_back(valves[valve_idx[j]].snapped ? 1 : 0);
            trace.valve_flows[j].values.push_back(valve_flow[valve_idx[j]] * to_slm);
        }
    };

    auto compute_flows = [&] {
        std::fill(inflow.begin(), inflow.end(), 0.0);
        for (const auto& l : links) {
            double q = l.conductance * (pressure[l.a] - pressure[l.b]);
            inflow[l.a] -= q;
            inflow[l.b] += q;
        }
        for (std::size_t k = 0; k < valves.size(); ++k) {
            const auto& v = valves[k];
            double q = v.opening * v.conductance * (pressure[v.inlet] - pressure[v.outlet]);
            valve_flow[k] = q;
            inflow[v.inlet] -= q;
            inflow[v.outlet] += q;
        }
    };

    for (std::size_t step = 0;; ++step) {
        const double t = static_cast<double>(step) * cfg.dt;
        compute_flows();
        record(t);
        if (step == steps) break;

        for (std::size_t i = 0; i < node_count; ++i) {
            if (compliance[i] > 0.0) pressure[i] += cfg.dt * inflow[i] / compliance[i];
        }
        // Snap-through shuts a channel at once; only the opening flow rises
        // through the first-order lag.
        for (std::size_t k = 0; k < valves.size(); ++k) {
            if (conducting(k)) {
                valves[k].opening += lag * (1.0 - valves[k].opening);
            } else {
                valves[k].opening = 0.0;
            }
        }
        update_sources(static_cast<double>(step + 1) * cfg.dt);
        for (std::size_t i = 0; i < node_count; ++i) {
            if (!std::isfinite(pressure[i]) || pressure[i] > cfg.fault_pressure_kpa) {
                throw Error(ErrorCode::NonConvergence, "pressure at '" + n.nodes[i].id + "' exceeded " +
                                                           std::to_string(cfg.fault_pressure_kpa) + " kPa");
            }
        }
        for (std::size_t k = 0; k < valves.size(); ++k) {
            const auto& p = n.valves[k].params;
            double control = pressure[valves[k].control];
            if (!valves[k].snapped && control >= p.snap_up.kpa) {
                valves[k].snapped = true;
            } else if (valves[k].snapped && !p.bistable && control < p.snap_down.kpa) {
                valves[k].snapped = false;
            }
        }
    }
    return trace;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
    out << "time_s";
    for (const auto& p : trace.probes) out << ',' << p.id << "_kPa";
    for (const auto& v : trace.valves) out << ',' << v.id << "_state";
    out << '\n';
    std::ostringstream row;
    row << std::setprecision(10);
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        row.str("");
        row << trace.times[k];
        for (const auto& p : trace.probes) row << ',' << p.values[k];
        for (const auto& v : trace.valves) row << ',' << static_cast<int>(v.values[k]);
        out << row.str() << '\n';
    }
}

} // namespace fluidrank
