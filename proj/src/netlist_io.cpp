#include "fluidrank/netlist_io.hpp"

#include "fluidrank/json_fields.hpp"

#include <fstream>

namespace fluidrank {

namespace jf = json_fields;
using nlohmann::json;

json to_json(const ValveParams& v) {
    return json{{"snap_up_kPa", v.snap_up.kpa},
                {"snap_down_kPa", v.snap_down.kpa},
                {"open_flow_slm", v.open_flow.slm},
                {"control_volume_mL", v.control_volume.ml},
                {"snap_fill_volume_mL", v.snap_fill_volume.ml},
                {"bistable", v.bistable}};
}

ValveParams valve_params_from_json(const json& j, const std::string& path) {
    ValveParams v;
    v.snap_up = Pressure{jf::number(j, "snap_up_kPa", path)};
    v.snap_down = Pressure{jf::number_or(j, "snap_down_kPa", path, kDefaultSnapDownRatio * v.snap_up.kpa)};
    v.open_flow = FlowRate{jf::number(j, "open_flow_slm", path)};
    v.control_volume = Volume{jf::number(j, "control_volume_mL", path)};
    v.snap_fill_volume = Volume{jf::number(j, "snap_fill_volume_mL", path)};
    v.bistable = jf::boolean_or(j, "bistable", path, false);
    return v;
}

json to_json(const Netlist& n) {
    json nodes = json::array();
    for (const auto& node : n.nodes) {
        json jn{{"id", node.id}, {"kind", to_string(node.kind)}};
        if (node.kind == NodeKind::Source) jn["pressure_kPa"] = node.pressure.kpa;
        if (node.kind == NodeKind::Chamber) jn["volume_mL"] = node.volume.ml;
        nodes.push_back(std::move(jn));
    }
    json valves = json::array();
    for (const auto& v : n.valves) {
        valves.push_back(json{{"id", v.id},
                              {"control", v.control_node},
                              {"inlet", v.inlet_node},
                              {"outlet", v.outlet_node},
                              {"polarity", to_string(v.polarity)},
                              {"params", to_json(v.params)}});
    }
    json edges = json::array();
    for (const auto& e : n.edges) {
        edges.push_back(json{{"id", e.id}, {"from", e.from_node}, {"to", e.to_node},
                             {"conductance", to_string(e.conductance)}});
    }
    json out{{"nodes", nodes}, {"valves", valves}, {"edges", edges}};
    if (!n.inputs.empty()) out["inputs"] = n.inputs;
    return out;
}

namespace {

NodeKind parse_kind(const std::string& s, const std::string& field) {
    if (s == "source") return NodeKind::Source;
    if (s == "chamber") return NodeKind::Chamber;
    if (s == "atmosphere") return NodeKind::Atmosphere;
    if (s == "probe") return NodeKind::Probe;
    jf::fail(field, "unknown node kind '" + s + "'");
}

Polarity parse_polarity(const std::string& s, const std::string& field) {
    if (s == "pass-when-snapped") return Polarity::PassWhenSnapped;
    if (s == "block-when-snapped") return Polarity::BlockWhenSnapped;
    jf::fail(field, "unknown polarity '" + s + "'");
}

ConductanceClass parse_conductance(const std::string& s, const std::string& field) {
    if (s == "tube") return ConductanceClass::Tube;
    if (s == "open-valve-channel") return ConductanceClass::OpenValveChannel;
    if (s == "bleed") return ConductanceClass::Bleed;
    jf::fail(field, "unknown conductance class '" + s + "'");
}

} // namespace

Netlist netlist_from_json(const json& j) {
    Netlist n;
    const auto& nodes = jf::array(j, "nodes", "");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        auto path = jf::index("nodes", i);
        Node node;
        node.id = jf::string(nodes[i], "id", path);
        node.kind = parse_kind(jf::string(nodes[i], "kind", path), jf::join(path, "kind"));
        if (node.kind == NodeKind::Source) node.pressure = Pressure{jf::number(nodes[i], "pressure_kPa", path)};
        if (node.kind == NodeKind::Chamber) node.volume = Volume{jf::number(nodes[i], "volume_mL", path)};
        n.nodes.push_back(std::move(node));
    }
    const auto& valves = jf::array(j, "valves", "");
    for (std::size_t i = 0; i < valves.size(); ++i) {
        auto path = jf::index("valves", i);
        Valve v;
        v.id = jf::string(valves[i], "id", path);
        v.control_node = jf::string(valves[i], "control", path);
        v.inlet_node = jf::string(valves[i], "inlet", path);
        v.outlet_node = jf::string(valves[i], "outlet", path);
        v.polarity = parse_polarity(jf::string(valves[i], "polarity", path), jf::join(path, "polarity"));
        v.params = valve_params_from_json(jf::require(valves[i], "params", path), jf::join(path, "params"));
        n.valves.push_back(std::move(v));
    }
    const auto& edges = jf::array(j, "edges", "");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto path = jf::index("edges", i);
        Edge e;
        e.id = jf::string(edges[i], "id", path);
        e.from_node = jf::string(edges[i], "from", path);
        e.to_node = jf::string(edges[i], "to", path);
        e.conductance = parse_conductance(jf::string(edges[i], "conductance", path), jf::join(path, "conductance"));
        n.edges.push_back(std::move(e));
    }
    if (j.contains("inputs")) {
        const auto& inputs = jf::array(j, "inputs", "");
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            if (!inputs[i].is_string()) jf::fail(jf::index("inputs", i), "expected a string");
            n.inputs.push_back(inputs[i].get<std::string>());
        }
    }
    return n;
}

Netlist load_netlist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open netlist file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    return netlist_from_json(j);
}

void save_netlist(const Netlist& n, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write netlist file '" + path + "'");
    out << to_json(n).dump(2) << '\n';
}

} // namespace fluidrank
