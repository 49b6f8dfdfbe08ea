#include "fluidrank/netlist.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <set>

namespace fluidrank {

std::optional<std::size_t> Netlist::node_index(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id == id) return i;
    }
    return std::nullopt;
}

const char* to_string(Rule rule) {
    switch (rule) {
    case Rule::UnresolvedReference: return "UnresolvedReference";
    case Rule::DuplicateId: return "DuplicateId";
    case Rule::MultipleAtmosphere: return "MultipleAtmosphere";
    case Rule::MissingAtmosphere: return "MissingAtmosphere";
    case Rule::NegativePressure: return "NegativePressure";
    case Rule::NonPositiveVolume: return "NonPositiveVolume";
    case Rule::InvalidValveParams: return "InvalidValveParams";
    case Rule::SelfLoop: return "SelfLoop";
    case Rule::NotASource: return "NotASource";
    case Rule::SelfControlWithoutChamber: return "SelfControlWithoutChamber";
    }
    return "Unknown";
}

const char* to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::Source: return "source";
    case NodeKind::Chamber: return "chamber";
    case NodeKind::Atmosphere: return "atmosphere";
    case NodeKind::Probe: return "probe";
    }
    return "unknown";
}

const char* to_string(Polarity polarity) {
    return polarity == Polarity::PassWhenSnapped ? "pass-when-snapped" : "block-when-snapped";
}

const char* to_string(ConductanceClass c) {
    switch (c) {
    case ConductanceClass::Tube: return "tube";
    case ConductanceClass::OpenValveChannel: return "open-valve-channel";
    case ConductanceClass::Bleed: return "bleed";
    }
    return "unknown";
}

std::vector<Violation> validate_netlist(const Netlist& n) {
    std::vector<Violation> out;
    std::map<std::string, NodeKind> kinds;

    std::set<std::string> seen;
    auto claim = [&](const std::string& id) {
        if (!seen.insert(id).second) {
            out.push_back({Rule::DuplicateId, id, "id '" + id + "' is used more than once"});
        }
    };

    int atmospheres = 0;
    for (const auto& node : n.nodes) {
        claim(node.id);
        kinds.emplace(node.id, node.kind);
        switch (node.kind) {
        case NodeKind::Atmosphere:
            ++atmospheres;
            break;
        case NodeKind::Source:
            if (!std::isfinite(node.pressure.kpa) || node.pressure.kpa < 0.0) {
                out.push_back({Rule::NegativePressure, node.id, "source pressure must be finite and >= 0"});
            }
            break;
        case NodeKind::Chamber:
            if (!std::isfinite(node.volume.ml) || node.volume.ml <= 0.0) {
                out.push_back({Rule::NonPositiveVolume, node.id, "chamber volume must be > 0"});
            }
            break;
        case NodeKind::Probe:
            break;
        }
    }
    if (atmospheres > 1) {
        out.push_back({Rule::MultipleAtmosphere, "", "exactly one atmosphere node is allowed"});
    } else if (atmospheres == 0) {
        out.push_back({Rule::MissingAtmosphere, "", "an atmosphere node is required"});
    }

    auto resolve = [&](const std::string& ref, const std::string& owner) {
        if (kinds.count(ref) != 0) return true;
        out.push_back({Rule::UnresolvedReference, ref, "'" + owner + "' references missing node '" + ref + "'"});
        return false;
    };

    for (const auto& v : n.valves) {
        claim(v.id);
        bool ok = resolve(v.control_node, v.id);
        ok = resolve(v.inlet_node, v.id) && ok;
        ok = resolve(v.outlet_node, v.id) && ok;
        for (const auto& problem : check_valve_params(v.params)) {
            out.push_back({Rule::InvalidValveParams, v.id, problem});
        }
        if (ok && v.inlet_node == v.outlet_node) {
            out.push_back({Rule::SelfLoop, v.id, "valve inlet and outlet are the same node"});
        }
    }
    for (const auto& e : n.edges) {
        claim(e.id);
        bool ok = resolve(e.from_node, e.id);
        ok = resolve(e.to_node, e.id) && ok;
        if (ok && e.from_node == e.to_node) {
            out.push_back({Rule::SelfLoop, e.id, "edge connects a node to itself"});
        }
    }
    for (const auto& input : n.inputs) {
        if (!resolve(input, "inputs")) continue;
        if (kinds.at(input) != NodeKind::Source) {
            out.push_back({Rule::NotASource, input, "logic input '" + input + "' must be a source node"});
        }
    }

    // A valve whose outlet reaches its own control node purely through probe
    // nodes has no chamber to integrate the feedback.
    std::map<std::string, std::vector<std::string>> adjacency;
    for (const auto& e : n.edges) {
        adjacency[e.from_node].push_back(e.to_node);
        adjacency[e.to_node].push_back(e.from_node);
    }
    for (const auto& v : n.valves) {
        if (!kinds.count(v.control_node) || !kinds.count(v.outlet_node)) continue;
        if (kinds.at(v.control_node) != NodeKind::Probe || kinds.at(v.outlet_node) != NodeKind::Probe) continue;
        std::set<std::string> visited{v.outlet_node};
        std::deque<std::string> frontier{v.outlet_node};
        bool reached = false;
        while (!frontier.empty() && !reached) {
            auto current = frontier.front();
            frontier.pop_front();
            if (current == v.control_node) {
                reached = true;
                break;
            }
            for (const auto& next : adjacency[current]) {
                auto it = kinds.find(next);
                if (it == kinds.end() || it->second != NodeKind::Probe) continue;
                if (visited.insert(next).second) frontier.push_back(next);
            }
        }
        if (reached) {
            out.push_back({Rule::SelfControlWithoutChamber, v.id,
                           "valve controls itself without passing through a chamber"});
        }
    }
    return out;
}

} // namespace fluidrank
