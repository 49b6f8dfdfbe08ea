#include "fluidrank/ring_oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fluidrank {

Netlist build_ring_oscillator(const ValveParams& v, Pressure supply) {
    constexpr int stages = 3;
    Netlist n;
    n.nodes.push_back(Node{"atm", NodeKind::Atmosphere, {}, {}});
    n.nodes.push_back(Node{kRingSupplyNode, NodeKind::Source, supply, {}});
    for (int k = 0; k < stages; ++k) {
        n.nodes.push_back(Node{"c" + std::to_string(k), NodeKind::Chamber, {}, v.control_volume});
    }
    n.nodes.push_back(Node{kRingProbe, NodeKind::Probe, {}, {}});
    for (int k = 0; k < stages; ++k) {
        const auto stage = std::to_string(k);
        const auto previous = std::to_string((k + stages - 1) % stages);
        n.valves.push_back(Valve{"v" + stage, v, "c" + previous, kRingSupplyNode, "c" + stage, Polarity::BlockWhenSnapped});
        n.edges.push_back(Edge{"vent" + stage, "c" + stage, "atm", ConductanceClass::OpenValveChannel});
    }
    n.edges.push_back(Edge{"tap", "c" + std::to_string(stages - 1), kRingProbe, ConductanceClass::Tube});
    return n;
}

std::optional<OscillationStats> measure_oscillation(const Trace& trace, const std::string& probe, double settle_s) {
    const auto& values = trace.probe(probe).values;
    const auto& times = trace.times;
    auto first = std::lower_bound(times.begin(), times.end(), settle_s);
    const auto start = static_cast<std::size_t>(first - times.begin());
    if (start + 2 >= values.size()) return std::nullopt;

    auto [lo, hi] = std::minmax_element(values.begin() + static_cast<std::ptrdiff_t>(start), values.end());
    if (*hi - *lo < 1e-6) return std::nullopt;
    const double mid = 0.5 * (*lo + *hi);

    std::vector<double> ups;
    for (std::size_t k = start + 1; k < values.size(); ++k) {
        if (values[k - 1] < mid && values[k] >= mid) {
            const double frac = (mid - values[k - 1]) / (values[k] - values[k - 1]);
            ups.push_back(times[k - 1] + frac * (times[k] - times[k - 1]));
        }
    }
    if (ups.size() < 2) return std::nullopt;

    std::vector<double> periods;
    for (std::size_t k = 1; k < ups.size(); ++k) periods.push_back(ups[k] - ups[k - 1]);
    const double mean = std::accumulate(periods.begin(), periods.end(), 0.0) / static_cast<double>(periods.size());
    double var = 0.0;
    for (double p : periods) var += (p - mean) * (p - mean);
    var /= static_cast<double>(periods.size());

    OscillationStats stats;
    stats.crossings = static_cast<int>(ups.size());
    stats.mean_period_s = mean;
    stats.period_cv = std::sqrt(var) / mean;
    stats.frequency_hz = 1.0 / mean;
    return stats;
}

} // namespace fluidrank
