#pragma once

#include "fluidrank/gate_circuit.hpp"
#include "fluidrank/netlist.hpp"
#include "fluidrank/simulator.hpp"

#include <string>
#include <vector>

namespace fluidrank {

inline constexpr const char* kLogicSupplyNode = "Pz";
inline constexpr double kProbeThresholdKpa = 10.0;

/// Valve cost of each gate kind under the lowering rules.
int valves_per_gate(GateKind kind);

/// Lowers a gate circuit to a valve netlist fed by a constant logic-high
/// source Pz:
///   NOT -> one block-when-snapped valve from Pz;
///   AND -> two pass-when-snapped valves in series through a bled chamber;
///   OR  -> two pass-when-snapped valves in parallel from Pz.
/// Every gate output is a bled chamber; every circuit output gets a probe.
/// Throws Error(SupplyTooLow) unless supply > v.snap_up.
Netlist compile_to_netlist(const GateCircuit& c, const ValveParams& v, Pressure supply = Pressure{kLogicHighKpa});

/// Step events at t = 0 that drive the netlist's logic inputs with `code`.
Schedule code_schedule(const Netlist& n, const Bits& code, Pressure high = Pressure{kLogicHighKpa});

/// Thresholds each named probe at the final sample of the trace.
Bits steady_outputs(const Trace& trace, const std::vector<std::string>& probes,
                    double threshold_kpa = kProbeThresholdKpa);

std::vector<std::string> output_names(const GateCircuit& c);

} // namespace fluidrank
