#pragma once

#include "fluidrank/behavioral.hpp"
#include "fluidrank/modality.hpp"
#include "fluidrank/simulator.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fluidrank {

inline constexpr double kDisplaySafeLimitKpa = 34.47;

struct RenderOptions {
    double dt = 1e-3;
    OscillatorSpec oscillator;
    ValveParams valve = default_valve_params();
    Volume pouch_volume{1.25};
    /// Only loss_multiplier is used, for the cascade onsets.
    SimConfig sim;
    double area_pressure_kpa = 27.58;
};

/// Pressure tracks of every display over the consecutive channel windows.
/// Track ids are `ch<k>.<modality>` for single-pouch displays and
/// `ch<k>.<modality>.pouch<j>` for the area display; tracks are sorted by id.
struct Timeline {
    double seconds_per_channel = 3.0;
    std::vector<double> times;
    std::vector<Series> tracks;
    /// Onset of each inflated pouch per area channel, seconds from window start.
    std::vector<std::vector<double>> area_onsets;

    const Series& track(const std::string& id) const;
};

/// Renders signal point `s`: channel k occupies [k*T, (k+1)*T). Pressure holds
/// its level; frequency is a square wave between the oscillator amplitude
/// bounds at the level's rate; area inflates its pouches in cascade.
Timeline render_timeline(const Configuration& c, const SignalPoint& s, double seconds_per_channel = 3.0,
                         const RenderOptions& options = {});

/// Same CSV shape as write_trace_csv: `time_s,<track>_kPa...`.
void write_timeline_csv(const Timeline& t, std::ostream& out);

} // namespace fluidrank
