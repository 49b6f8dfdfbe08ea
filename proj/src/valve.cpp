#include "fluidrank/valve.hpp"

#include <cmath>

namespace fluidrank {

ValveParams default_valve_params() {
    ValveParams v;
    v.snap_up = Pressure{11.44};
    v.snap_down = Pressure{kDefaultSnapDownRatio * 11.44};
    v.open_flow = FlowRate{2.76};
    v.control_volume = Volume{8.58};
    v.snap_fill_volume = Volume{1.75};
    v.bistable = false;
    return v;
}

ValveVariability default_valve_variability() { return ValveVariability{}; }

std::vector<std::string> check_valve_params(const ValveParams& v) {
    std::vector<std::string> problems;
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(v.snap_up.kpa) || !finite(v.snap_down.kpa) || !finite(v.open_flow.slm) ||
        !finite(v.control_volume.ml) || !finite(v.snap_fill_volume.ml)) {
        problems.emplace_back("all valve parameters must be finite");
        return problems;
    }
    if (!(v.snap_down.kpa > 0.0)) problems.emplace_back("snap_down must be > 0");
    if (v.snap_down.kpa > v.snap_up.kpa) problems.emplace_back("snap_down must be <= snap_up");
    if (!(v.open_flow.slm > 0.0)) problems.emplace_back("open_flow must be > 0");
    if (!(v.control_volume.ml > 0.0)) problems.emplace_back("control_volume must be > 0");
    if (!(v.snap_fill_volume.ml > 0.0)) problems.emplace_back("snap_fill_volume must be > 0");
    return problems;
}

double chamber_stiffness_kpa(const ValveParams& v) {
    return v.control_volume.ml * v.snap_up.kpa / v.snap_fill_volume.ml;
}

} // namespace fluidrank
