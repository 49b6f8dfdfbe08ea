#include "fluidrank/behavioral.hpp"

#include "fluidrank/error.hpp"

#include <cmath>

namespace fluidrank {

std::vector<double> cascade_delay(int stage_count, const ValveParams& v, Volume pouch_volume, const SimConfig& cfg) {
    if (stage_count < 1) throw Error(ErrorCode::InvalidArgument, "cascade_delay: stage_count must be >= 1");
    if (!(pouch_volume.ml >= 0.0)) throw Error(ErrorCode::InvalidArgument, "cascade_delay: pouch volume must be >= 0");
    if (!(cfg.loss_multiplier >= 1.0)) throw Error(ErrorCode::InvalidArgument, "cascade_delay: loss_multiplier must be >= 1");
    if (!(v.open_flow.slm > 0.0)) throw Error(ErrorCode::InvalidArgument, "cascade_delay: open_flow must be > 0");

    const double flow = slm_to_ml_per_s(v.open_flow) / cfg.loss_multiplier;
    const double stage = (v.snap_fill_volume.ml + pouch_volume.ml) / flow;
    std::vector<double> onsets;
    onsets.reserve(static_cast<std::size_t>(stage_count));
    for (int k = 1; k <= stage_count; ++k) onsets.push_back(stage * k);
    return onsets;
}

void check_oscillator_spec(const OscillatorSpec& s) {
    if (!(s.onset_pressure_kpa < s.max_pressure_kpa) || !(s.onset_freq_hz < s.max_freq_hz) ||
        !(s.amplitude_low_kpa < s.amplitude_high_kpa) || !(s.onset_freq_hz > 0.0) || !(s.amplitude_low_kpa >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "OscillatorSpec: require onset < max for pressure, frequency and amplitude");
    }
}

std::optional<double> oscillator_frequency(Pressure supply, const OscillatorSpec& spec) {
    check_oscillator_spec(spec);
    if (!(supply.kpa >= 0.0)) throw Error(ErrorCode::InvalidArgument, "oscillator_frequency: supply must be >= 0");
    if (supply.kpa < spec.onset_pressure_kpa || supply.kpa > spec.max_pressure_kpa) return std::nullopt;
    if (supply.kpa == spec.max_pressure_kpa) return spec.max_freq_hz;
    const double u = (supply.kpa - spec.onset_pressure_kpa) / (spec.max_pressure_kpa - spec.onset_pressure_kpa);
    return spec.onset_freq_hz + u * (spec.max_freq_hz - spec.onset_freq_hz);
}

std::optional<double> oscillator_supply_for(double freq_hz, const OscillatorSpec& spec) {
    check_oscillator_spec(spec);
    if (freq_hz < spec.onset_freq_hz || freq_hz > spec.max_freq_hz) return std::nullopt;
    const double u = (freq_hz - spec.onset_freq_hz) / (spec.max_freq_hz - spec.onset_freq_hz);
    return spec.onset_pressure_kpa + u * (spec.max_pressure_kpa - spec.onset_pressure_kpa);
}

} // namespace fluidrank
