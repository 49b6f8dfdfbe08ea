#include "fluidrank/timeline.hpp"

#include "fluidrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace fluidrank {

const Series& Timeline::track(const std::string& id) const {
    auto it = std::find_if(tracks.begin(), tracks.end(), [&](const Series& s) { return s.id == id; });
    if (it == tracks.end()) throw Error(ErrorCode::InvalidArgument, "timeline has no track '" + id + "'");
    return *it;
}

Timeline render_timeline(const Configuration& c, const SignalPoint& s, double seconds_per_channel,
                         const RenderOptions& options) {
    check_configuration(c);
    if (!(seconds_per_channel > 0.0) || !std::isfinite(seconds_per_channel)) {
        throw Error(ErrorCode::InvalidArgument, "seconds_per_channel must be > 0");
    }
    if (!(options.dt > 0.0) || options.dt > seconds_per_channel) {
        throw Error(ErrorCode::InvalidArgument, "render dt must be in (0, seconds_per_channel]");
    }
    if (s.indices.size() != c.channels.size()) {
        throw Error(ErrorCode::WidthMismatch, "signal point width does not match the configuration");
    }
    check_oscillator_spec(options.oscillator);

    const auto per_window = static_cast<std::size_t>(std::llround(seconds_per_channel / options.dt));
    const std::size_t total = per_window * c.channels.size();

    Timeline t;
    t.seconds_per_channel = seconds_per_channel;
    t.times.resize(total);
    for (std::size_t k = 0; k < total; ++k) t.times[k] = static_cast<double>(k) * options.dt;

    for (std::size_t ch = 0; ch < c.channels.size(); ++ch) {
        const auto& m = c.channels[ch];
        const int level = s.indices[ch];
        if (level < 0 || level >= m.level_count()) {
            throw Error(ErrorCode::InvalidArgument, "level index out of range for channel " + std::to_string(ch));
        }
        const double value = m.levels[static_cast<std::size_t>(level)];
        const std::size_t begin = ch * per_window;
        const std::string prefix = "ch" + std::to_string(ch) + "." + m.name;

        switch (m.kind) {
        case ModalityKind::Pressure: {
            if (value > kDisplaySafeLimitKpa) {
                throw Error(ErrorCode::InvalidArgument, "pressure level exceeds the display limit of 34.47 kPa");
            }
            Series track{prefix, std::vector<double>(total, 0.0)};
            std::fill_n(track.values.begin() + static_cast<std::ptrdiff_t>(begin), per_window, value);
            t.tracks.push_back(std::move(track));
            t.area_onsets.emplace_back();
            break;
        }
        case ModalityKind::Frequency: {
            if (!oscillator_supply_for(value, options.oscillator)) {
                throw Error(ErrorCode::InvalidArgument, "frequency " + std::to_string(value) +
                                                            " Hz is outside the oscillator's stable range");
            }
            Series track{prefix, std::vector<double>(total, 0.0)};
            for (std::size_t m_idx = 0; m_idx < per_window; ++m_idx) {
                const double phase = std::fmod(static_cast<double>(m_idx) * options.dt * value, 1.0);
                track.values[begin + m_idx] =
                    phase < 0.5 ? options.oscillator.amplitude_high_kpa : options.oscillator.amplitude_low_kpa;
            }
            t.tracks.push_back(std::move(track));
            t.area_onsets.emplace_back();
            break;
        }
        case ModalityKind::Area: {
            if (options.area_pressure_kpa > kDisplaySafeLimitKpa || options.area_pressure_kpa < 0.0) {
                throw Error(ErrorCode::InvalidArgument, "area pressure must be within the display limit");
            }
            const int pouches = static_cast<int>(m.levels.back());
            const int inflated = static_cast<int>(value);
            std::vector<double> onsets{0.0};
            if (inflated > 1) {
                auto later = cascade_delay(inflated - 1, options.valve, options.pouch_volume, options.sim);
                onsets.insert(onsets.end(), later.begin(), later.end());
            }
            for (int j = 0; j < pouches; ++j) {
                Series track{prefix + ".pouch" + std::to_string(j), std::vector<double>(total, 0.0)};
                if (j < inflated) {
                    const auto offset = static_cast<std::size_t>(std::ceil(onsets[static_cast<std::size_t>(j)] / options.dt - 1e-9));
                    for (std::size_t m_idx = std::min(offset, per_window); m_idx < per_window; ++m_idx) {
                        track.values[begin + m_idx] = options.area_pressure_kpa;
                    }
                }
                t.tracks.push_back(std::move(track));
            }
            t.area_onsets.push_back(onsets);
            break;
        }
        }
    }
    std::sort(t.tracks.begin(), t.tracks.end(), [](const Series& a, const Series& b) { return a.id < b.id; });
    return t;
}

void write_timeline_csv(const Timeline& t, std::ostream& out) {
    out << "time_s";
    for (const auto& track : t.tracks) out << ',' << track.id << "_kPa";
    out << '\n';
    std::ostringstream row;
    row << std::setprecision(10);
    for (std::size_t k = 0; k < t.times.size(); ++k) {
        row.str("");
        row << t.times[k];
        for (const auto& track : t.tracks) row << ',' << track.values[k];
        out << row.str() << '\n';
    }
}

} // namespace fluidrank
