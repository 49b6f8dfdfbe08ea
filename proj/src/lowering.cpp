#include "fluidrank/lowering.hpp"

#include "fluidrank/error.hpp"

namespace fluidrank {

int valves_per_gate(GateKind kind) { return kind == GateKind::Not ? 1 : 2; }

Netlist compile_to_netlist(const GateCircuit& c, const ValveParams& v, Pressure supply) {
    check_circuit(c);
    if (auto problems = check_valve_params(v); !problems.empty()) {
        throw Error(ErrorCode::InvalidArgument, "valve parameters: " + problems.front());
    }
    if (!(supply.kpa > v.snap_up.kpa)) {
        throw Error(ErrorCode::SupplyTooLow, "logic supply " + std::to_string(supply.kpa) +
                                                 " kPa must exceed the snap-through pressure " +
                                                 std::to_string(v.snap_up.kpa) + " kPa");
    }

    Netlist n;
    n.nodes.push_back(Node{"atm", NodeKind::Atmosphere, {}, {}});
    n.nodes.push_back(Node{kLogicSupplyNode, NodeKind::Source, supply, {}});
    for (const auto& in : c.inputs) n.nodes.push_back(Node{in, NodeKind::Source, Pressure{0.0}, {}});
    n.inputs = c.inputs;

    auto node_for = [](const std::string& ref) -> std::string {
        if (ref == kConstHigh) return kLogicSupplyNode;
        if (ref == kConstLow) return "atm";
        return ref;
    };
    auto bled_chamber = [&](const std::string& id) {
        n.nodes.push_back(Node{id, NodeKind::Chamber, {}, v.control_volume});
        n.edges.push_back(Edge{id + ".bleed", id, "atm", ConductanceClass::Bleed});
    };

    for (const auto& g : c.gates) {
        bled_chamber(g.id);
        switch (g.kind) {
        case GateKind::Not:
            n.valves.push_back(Valve{g.id + ".v", v, node_for(g.inputs[0]), kLogicSupplyNode, g.id, Polarity::BlockWhenSnapped});
            break;
        case GateKind::And: {
            const auto mid = g.id + ".mid";
            bled_chamber(mid);
            n.valves.push_back(Valve{g.id + ".va", v, node_for(g.inputs[0]), kLogicSupplyNode, mid, Polarity::PassWhenSnapped});
            n.valves.push_back(Valve{g.id + ".vb", v, node_for(g.inputs[1]), mid, g.id, Polarity::PassWhenSnapped});
            break;
        }
        case GateKind::Or:
            n.valves.push_back(Valve{g.id + ".va", v, node_for(g.inputs[0]), kLogicSupplyNode, g.id, Polarity::PassWhenSnapped});
            n.valves.push_back(Valve{g.id + ".vb", v, node_for(g.inputs[1]), kLogicSupplyNode, g.id, Polarity::PassWhenSnapped});
            break;
        }
    }
    for (const auto& o : c.outputs) {
        n.nodes.push_back(Node{o.name, NodeKind::Probe, {}, {}});
        n.edges.push_back(Edge{o.name + ".tap", node_for(o.ref), o.name, ConductanceClass::Tube});
    }

    if (auto violations = validate_netlist(n); !violations.empty()) {
        throw Error(ErrorCode::InvalidArgument, "lowered netlist is invalid: " + violations.front().message);
    }
    return n;
}

Schedule code_schedule(const Netlist& n, const Bits& code, Pressure high) {
    if (code.size() != n.inputs.size()) {
        throw Error(ErrorCode::WidthMismatch, "code has " + std::to_string(code.size()) + " bits but the netlist has " +
                                                  std::to_string(n.inputs.size()) + " inputs");
    }
    Schedule s;
    for (std::size_t i = 0; i < code.size(); ++i) {
        s.push_back(SourceEvent{n.inputs[i], 0.0, code[i] ? high.kpa : 0.0});
    }
    return s;
}

Bits steady_outputs(const Trace& trace, const std::vector<std::string>& probes, double threshold_kpa) {
    Bits out;
    for (const auto& id : probes) out.push_back(trace.probe(id).values.back() > threshold_kpa);
    return out;
}

std::vector<std::string> output_names(const GateCircuit& c) {
    std::vector<std::string> names;
    for (const auto& o : c.outputs) names.push_back(o.name);
    return names;
}

} // namespace fluidrank
