#include "fluidrank/task.hpp"

#include "fluidrank/error.hpp"
#include "fluidrank/json_fields.hpp"

#include <cmath>
#include <numeric>

namespace fluidrank {

namespace jf = json_fields;
using nlohmann::json;

std::size_t TaskSpec::size() const {
    std::size_t n = 1;
    for (int k : axes) n *= static_cast<std::size_t>(k);
    return n;
}

std::vector<int> TaskSpec::unflatten(std::size_t theta) const {
    std::vector<int> values(axes.size());
    for (std::size_t j = axes.size(); j-- > 0;) {
        const auto k = static_cast<std::size_t>(axes[j]);
        values[j] = static_cast<int>(theta % k);
        theta /= k;
    }
    return values;
}

std::size_t TaskSpec::flatten(const std::vector<int>& values) const {
    std::size_t theta = 0;
    for (std::size_t j = 0; j < axes.size(); ++j) theta = theta * static_cast<std::size_t>(axes[j]) + static_cast<std::size_t>(values[j]);
    return theta;
}

double TaskSpec::entropy() const {
    double h = 0.0;
    for (double p : prior) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

void check_task(const TaskSpec& t) {
    std::vector<FieldIssue> issues;
    if (t.axes.empty()) issues.push_back({"axes", "task needs at least one axis"});
    for (std::size_t j = 0; j < t.axes.size(); ++j) {
        if (t.axes[j] < 2) issues.push_back({"axes[" + std::to_string(j) + "]", "axis cardinality must be >= 2"});
    }
    if (!t.axis_names.empty() && t.axis_names.size() != t.axes.size()) {
        issues.push_back({"axis_names", "must name every axis"});
    }
    if (issues.empty()) {
        if (t.prior.size() != t.size()) {
            issues.push_back({"prior", "needs " + std::to_string(t.size()) + " entries"});
        } else {
            double sum = 0.0;
            bool negative = false;
            for (double p : t.prior) {
                negative = negative || !(p >= 0.0) || !std::isfinite(p);
                sum += p;
            }
            if (negative) issues.push_back({"prior", "entries must be finite and non-negative"});
            else if (std::abs(sum - 1.0) > 1e-12) issues.push_back({"prior", "must sum to 1"});
        }
    }
    if (!issues.empty()) throw FieldError(ErrorCode::InvalidArgument, std::move(issues));
}

TaskSpec make_uniform_task(std::string id, std::vector<int> axes, std::vector<std::string> axis_names) {
    TaskSpec t;
    t.id = std::move(id);
    t.axes = std::move(axes);
    t.axis_names = std::move(axis_names);
    if (t.axis_names.empty()) {
        for (std::size_t j = 0; j < t.axes.size(); ++j) t.axis_names.push_back("axis" + std::to_string(j));
    }
    for (int k : t.axes) {
        if (k < 2) throw Error(ErrorCode::InvalidArgument, "axis cardinality must be >= 2");
    }
    const auto n = t.size();
    t.prior.assign(n, 1.0 / static_cast<double>(n));
    check_task(t);
    return t;
}

json to_json(const TaskSpec& t) {
    return json{{"id", t.id}, {"axes", t.axes}, {"axis_names", t.axis_names}, {"prior", t.prior}};
}

TaskSpec task_from_json(const json& j, const std::string& path) {
    TaskSpec t;
    t.id = jf::string(j, "id", path);
    const auto& axes = jf::array(j, "axes", path);
    for (std::size_t i = 0; i < axes.size(); ++i) {
        if (!axes[i].is_number_integer()) jf::fail(jf::index(jf::join(path, "axes"), i), "expected an integer");
        t.axes.push_back(axes[i].get<int>());
    }
    if (j.contains("axis_names")) {
        for (const auto& n : jf::array(j, "axis_names", path)) {
            if (!n.is_string()) jf::fail(jf::join(path, "axis_names"), "expected strings");
            t.axis_names.push_back(n.get<std::string>());
        }
    } else {
        for (std::size_t k = 0; k < t.axes.size(); ++k) t.axis_names.push_back("axis" + std::to_string(k));
    }
    if (j.contains("prior")) {
        for (const auto& p : jf::array(j, "prior", path)) {
            if (!p.is_number()) jf::fail(jf::join(path, "prior"), "expected numbers");
            t.prior.push_back(p.get<double>());
        }
    } else {
        for (int k : t.axes) {
            if (k < 2) jf::fail(jf::join(path, "axes"), "axis cardinality must be >= 2");
        }
        t.prior.assign(t.size(), 1.0 / static_cast<double>(t.size()));
    }
    check_task(t);
    return t;
}

} // namespace fluidrank
