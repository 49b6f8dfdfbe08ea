#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace fluidrank {

/// Latent task information: a product of discrete axes and a prior over it.
/// Task values are indexed with axis 0 most significant.
struct TaskSpec {
    std::string id;
    std::vector<int> axes;
    std::vector<std::string> axis_names;
    std::vector<double> prior;

    std::size_t size() const;
    std::vector<int> unflatten(std::size_t theta) const;
    std::size_t flatten(const std::vector<int>& values) const;
    /// Entropy of the prior in nats.
    double entropy() const;
};

void check_task(const TaskSpec& t);

TaskSpec make_uniform_task(std::string id, std::vector<int> axes, std::vector<std::string> axis_names = {});

nlohmann::json to_json(const TaskSpec& t);
TaskSpec task_from_json(const nlohmann::json& j, const std::string& path = "task");

} // namespace fluidrank
