#include "fluidrank/perception.hpp"

#include "fluidrank/error.hpp"
#include "fluidrank/json_fields.hpp"
#include "fluidrank/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace fluidrank {

namespace jf = json_fields;
using nlohmann::json;

void check_profile(const PerceptionProfile& p) {
    std::vector<FieldIssue> issues;
    if (!(p.beta >= 0.0) || !std::isfinite(p.beta)) issues.push_back({"beta", "must be a finite number >= 0"});
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) issues.push_back({"alpha", "must lie strictly between 0 and 1"});
    if (!(p.saliency_scale > 0.0) || !std::isfinite(p.saliency_scale)) {
        issues.push_back({"saliency_scale", "must be a finite number > 0"});
    }
    for (const auto& [name, value] : p.preferences) {
        if (!(value >= 0.0 && value <= 1.0)) issues.push_back({"preferences." + name, "must lie in [0, 1]"});
    }
    if (!issues.empty()) throw FieldError(ErrorCode::InvalidArgument, std::move(issues));
}

PerceptionProfile uniform_profile(const std::vector<Modality>& catalog, double preference, double beta) {
    PerceptionProfile p;
    p.beta = beta;
    for (const auto& m : catalog) p.preferences[m.name] = preference;
    check_profile(p);
    return p;
}

std::vector<double> saliency_matrix(const PerceptionProfile& p, const Configuration& c) {
    check_profile(p);
    std::vector<double> w;
    w.reserve(c.channels.size());
    for (const auto& m : c.channels) {
        auto it = p.preferences.find(m.name);
        if (it == p.preferences.end()) {
            throw Error(ErrorCode::MissingPreference, "no preference given for modality '" + m.name + "'");
        }
        w.push_back((it->second + p.alpha) / (1.0 + p.alpha) * p.saliency_scale);
    }
    return w;
}

void check_binding(const Configuration& c, const TaskSpec& t) {
    check_configuration(c);
    if (c.channels.size() != t.axes.size()) {
        throw Error(ErrorCode::ConfigurationMismatch, "configuration '" + c.id + "' has " +
                                                          std::to_string(c.channels.size()) + " channels but task '" +
                                                          t.id + "' has " + std::to_string(t.axes.size()) + " axes");
    }
}

std::vector<double> expectation(const Configuration& c, const TaskSpec& t, std::size_t theta) {
    const auto values = t.unflatten(theta);
    std::vector<double> h(c.channels.size());
    for (std::size_t k = 0; k < c.channels.size(); ++k) {
        const auto axis = static_cast<std::size_t>(c.assignment[k]);
        const int last = t.axes[axis] - 1;
        const int v = values[axis];
        h[k] = v == last ? 1.0 : static_cast<double>(v) / static_cast<double>(last);
    }
    return h;
}

LikelihoodTable likelihood_table(const Configuration& c, const TaskSpec& t, const PerceptionProfile& p) {
    check_binding(c, t);
    check_task(t);
    const auto weights = saliency_matrix(p, c);
    std::vector<double> gain(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) gain[k] = p.beta * weights[k];

    LikelihoodTable table;
    table.signals = signal_space(c, p.normalization);
    table.theta_count = t.size();
    table.signal_count = table.signals.size();
    table.values.assign(table.theta_count * table.signal_count, 0.0);

    std::vector<double> energy(table.signal_count);
    for (std::size_t theta = 0; theta < table.theta_count; ++theta) {
        const auto h = expectation(c, t, theta);
        double lowest = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < table.signal_count; ++s) {
            double e = 0.0;
            for (std::size_t k = 0; k < h.size(); ++k) {
                const double d = h[k] - table.signals[s].coords[k];
                e += gain[k] * d * d;
            }
            energy[s] = e;
            lowest = std::min(lowest, e);
        }
        double z = 0.0;
        auto row = table.values.begin() + static_cast<std::ptrdiff_t>(theta * table.signal_count);
        for (std::size_t s = 0; s < table.signal_count; ++s) {
            row[static_cast<std::ptrdiff_t>(s)] = std::exp(-(energy[s] - lowest));
            z += row[static_cast<std::ptrdiff_t>(s)];
        }
        for (std::size_t s = 0; s < table.signal_count; ++s) row[static_cast<std::ptrdiff_t>(s)] /= z;
    }
    return table;
}

std::size_t signal_index(const Configuration& c, const SignalPoint& s) {
    if (s.indices.size() != c.channels.size()) throw Error(ErrorCode::WidthMismatch, "signal point width mismatch");
    std::size_t index = 0;
    for (std::size_t k = 0; k < c.channels.size(); ++k) {
        const int levels = c.channels[k].level_count();
        if (s.indices[k] < 0 || s.indices[k] >= levels) {
            throw Error(ErrorCode::InvalidArgument, "signal point is outside the configuration's signal space");
        }
        index = index * static_cast<std::size_t>(levels) + static_cast<std::size_t>(s.indices[k]);
    }
    return index;
}

double likelihood(const SignalPoint& s, std::size_t theta, const Configuration& c, const TaskSpec& t,
                  const PerceptionProfile& p) {
    if (theta >= t.size()) throw Error(ErrorCode::InvalidArgument, "task value out of range");
    const auto table = likelihood_table(c, t, p);
    return table.at(theta, signal_index(c, s));
}

SignalPoint nearest_signal(const Configuration& c, const TaskSpec& t, std::size_t theta, Normalization mode) {
    check_binding(c, t);
    if (theta >= t.size()) throw Error(ErrorCode::InvalidArgument, "task value out of range");
    const auto values = t.unflatten(theta);
    std::vector<int> indices(c.channels.size());
    for (std::size_t k = 0; k < c.channels.size(); ++k) {
        const auto axis = static_cast<std::size_t>(c.assignment[k]);
        const long long axis_last = t.axes[axis] - 1;
        const long long level_last = c.channels[k].level_count() - 1;
        const long long v = values[axis];
        int best = 0;
        if (mode == Normalization::Index) {
            // |v/axis_last - i/level_last| compared exactly on a common denominator.
            long long best_gap = std::llabs(v * level_last);
            for (int i = 1; i <= level_last; ++i) {
                long long gap = std::llabs(v * level_last - i * axis_last);
                if (gap < best_gap) {
                    best_gap = gap;
                    best = i;
                }
            }
        } else {
            const double target = axis_last == v ? 1.0 : static_cast<double>(v) / static_cast<double>(axis_last);
            double best_gap = std::abs(target);
            for (int i = 1; i <= level_last; ++i) {
                double gap = std::abs(target - normalized_level(c.channels[k], i, mode));
                if (gap < best_gap) {
                    best_gap = gap;
                    best = i;
                }
            }
        }
        indices[k] = best;
    }
    return make_signal_point(c, std::move(indices), mode);
}

const char* to_string(DecodeMode m) { return m == DecodeMode::Map ? "map" : "sample"; }

Decoded decode(const LikelihoodTable& table, const TaskSpec& t, std::size_t signal, DecodeMode mode,
               std::uint64_t seed) {
    if (signal >= table.signal_count) throw Error(ErrorCode::InvalidArgument, "signal index out of range");
    if (t.prior.size() != table.theta_count) throw Error(ErrorCode::ConfigurationMismatch, "prior does not match table");
    Decoded out;
    out.posterior.resize(table.theta_count);
    double z = 0.0;
    for (std::size_t theta = 0; theta < table.theta_count; ++theta) {
        out.posterior[theta] = t.prior[theta] * table.at(theta, signal);
        z += out.posterior[theta];
    }
    for (double& v : out.posterior) v /= z;

    if (mode == DecodeMode::Map) {
        std::size_t best = 0;
        for (std::size_t theta = 1; theta < out.posterior.size(); ++theta) {
            if (out.posterior[theta] > out.posterior[best]) best = theta;
        }
        out.theta = best;
    } else {
        Rng rng(seed);
        out.theta = rng.categorical(out.posterior);
    }
    return out;
}

Decoded decode(const SignalPoint& s, const Configuration& c, const TaskSpec& t, const PerceptionProfile& p,
               DecodeMode mode, std::uint64_t seed) {
    const auto table = likelihood_table(c, t, p);
    return decode(table, t, signal_index(c, s), mode, seed);
}

PerceptionProfile profile_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) jf::fail(path.empty() ? "$" : path, "expected an object");
    PerceptionProfile p;
    std::vector<FieldIssue> shape;
    for (const auto& [key, value] : j.items()) {
        const auto field = jf::join(path, key);
        if (key == "normalization") {
            if (value == "index") p.normalization = Normalization::Index;
            else if (value == "physical") p.normalization = Normalization::Physical;
            else shape.push_back({field, "expected \"index\" or \"physical\""});
            continue;
        }
        if (!value.is_number()) {
            shape.push_back({field, "expected a number"});
            continue;
        }
        const double x = value.get<double>();
        if (key == "alpha") p.alpha = x;
        else if (key == "beta") p.beta = x;
        else if (key == "saliency_scale") p.saliency_scale = x;
        else p.preferences[key] = x;
    }
    if (!shape.empty()) throw FieldError(ErrorCode::ParseError, std::move(shape));
    try {
        check_profile(p);
    } catch (const FieldError& e) {
        auto issues = e.issues();
        for (auto& issue : issues) {
            // check_profile reports preferences as preferences.<name>; in this flat
            // document the slider keys sit at top level.
            if (issue.field.rfind("preferences.", 0) == 0) issue.field = issue.field.substr(12);
            issue.field = jf::join(path, issue.field);
        }
        throw FieldError(ErrorCode::InvalidArgument, std::move(issues));
    }
    return p;
}

json to_json(const PerceptionProfile& p) {
    json j = json::object();
    for (const auto& [name, value] : p.preferences) j[name] = value;
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
    if (p.saliency_scale != 1.0) j["saliency_scale"] = p.saliency_scale;
    if (p.normalization != Normalization::Index) j["normalization"] = to_string(p.normalization);
    return j;
}

} // namespace fluidrank
