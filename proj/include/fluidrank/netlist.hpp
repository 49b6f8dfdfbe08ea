#pragma once

#include "fluidrank/units.hpp"
#include "fluidrank/valve.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fluidrank {

enum class NodeKind { Source, Chamber, Atmosphere, Probe };

struct Node {
    std::string id;
    NodeKind kind = NodeKind::Chamber;
    Pressure pressure;  // nominal source pressure; ignored for other kinds
    Volume volume;      // chamber volume; ignored for other kinds

    bool operator==(const Node&) const = default;
};

enum class Polarity { PassWhenSnapped, BlockWhenSnapped };

struct Valve {
    std::string id;
    ValveParams params;
    std::string control_node;
    std::string inlet_node;
    std::string outlet_node;
    Polarity polarity = Polarity::PassWhenSnapped;

    bool operator==(const Valve&) const = default;
};

/// Tubes are low-resistance links, open channels are permanently open
/// valve-sized restrictions, bleeds are the small vents that pull gate outputs
/// back to atmosphere.
enum class ConductanceClass { Tube, OpenValveChannel, Bleed };

struct Edge {
    std::string id;
    std::string from_node;
    std::string to_node;
    ConductanceClass conductance = ConductanceClass::Tube;

    bool operator==(const Edge&) const = default;
};

struct Netlist {
    std::vector<Node> nodes;
    std::vector<Valve> valves;
    std::vector<Edge> edges;
    /// Logic input source ids, most significant bit first. Empty for netlists
    /// that are not driven by a binary code.
    std::vector<std::string> inputs;

    std::optional<std::size_t> node_index(const std::string& id) const;
    bool operator==(const Netlist&) const = default;
};

enum class Rule {
    UnresolvedReference,
    DuplicateId,
    MultipleAtmosphere,
    MissingAtmosphere,
    NegativePressure,
    NonPositiveVolume,
    InvalidValveParams,
    SelfLoop,
    NotASource,
    SelfControlWithoutChamber,
};

const char* to_string(Rule rule);

struct Violation {
    Rule rule;
    std::string element;
    std::string message;

    bool operator==(const Violation&) const = default;
};

/// Returns every broken structural rule, in a fixed order (nodes, valves,
/// edges, inputs, feedback). An empty result means the netlist is simulable.
std::vector<Violation> validate_netlist(const Netlist& n);

const char* to_string(NodeKind kind);
const char* to_string(Polarity polarity);
const char* to_string(ConductanceClass c);

} // namespace fluidrank
