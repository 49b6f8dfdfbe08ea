#pragma once

#include <compare>

namespace fluidrank {

/// Gauge pressure in kPa. Atmosphere is 0.
struct Pressure {
    double kpa = 0.0;
    auto operator<=>(const Pressure&) const = default;
};

/// Volumetric flow in standard liters per minute.
struct FlowRate {
    double slm = 0.0;
    auto operator<=>(const FlowRate&) const = default;
};

/// Volume in milliliters.
struct Volume {
    double ml = 0.0;
    auto operator<=>(const Volume&) const = default;
};

inline constexpr double kMlPerSecondPerSlm = 1000.0 / 60.0;

constexpr double slm_to_ml_per_s(FlowRate f) { return f.slm * 1000.0 / 60.0; }
constexpr FlowRate ml_per_s_to_slm(double ml_per_s) { return FlowRate{ml_per_s * 60.0 / 1000.0}; }

} // namespace fluidrank
