#pragma once

#include "fluidrank/simulator.hpp"
#include "fluidrank/valve.hpp"

#include <optional>
#include <vector>

namespace fluidrank {

/// Cumulative onset time of each stage of a cascaded inflation chain: every
/// stage fills its valve's snap volume plus one pouch at the valve's open flow.
std::vector<double> cascade_delay(int stage_count, const ValveParams& v, Volume pouch_volume, const SimConfig& cfg);

/// Measured operating envelope of the soft ring oscillator.
struct OscillatorSpec {
    double onset_pressure_kpa = 22.41;
    double max_pressure_kpa = 75.84;
    double onset_freq_hz = 1.8;
    double max_freq_hz = 7.41;
    double amplitude_low_kpa = 3.48;
    double amplitude_high_kpa = 13.79;
};

void check_oscillator_spec(const OscillatorSpec& spec);

/// Frequency at the given supply, linear between the onset and maximum points.
/// Empty (no oscillation) outside [onset_pressure, max_pressure].
std::optional<double> oscillator_frequency(Pressure supply, const OscillatorSpec& spec = {});

/// Supply pressure that yields `freq_hz`, the inverse of oscillator_frequency.
std::optional<double> oscillator_supply_for(double freq_hz, const OscillatorSpec& spec = {});

} // namespace fluidrank
