#pragma once

#include "fluidrank/netlist.hpp"
#include "fluidrank/simulator.hpp"

#include <optional>
#include <string>

namespace fluidrank {

inline constexpr const char* kRingSupplyNode = "Pin";
inline constexpr const char* kRingProbe = "out";

/// Three inverting stages in a ring. Each stage is a block-when-snapped valve
/// feeding a bled chamber from the supply; that chamber is the control of the
/// next stage.
Netlist build_ring_oscillator(const ValveParams& v, Pressure supply = Pressure{30.0});

/// Period statistics of a sampled waveform, from upward crossings of the
/// midpoint between its minimum and maximum after `settle_s`.
struct OscillationStats {
    int crossings = 0;
    double mean_period_s = 0.0;
    double period_cv = 0.0;  // coefficient of variation of the periods
    double frequency_hz = 0.0;
};

std::optional<OscillationStats> measure_oscillation(const Trace& trace, const std::string& probe, double settle_s = 0.0);

} // namespace fluidrank
