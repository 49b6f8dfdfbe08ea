#pragma once

#include "fluidrank/modality.hpp"
#include "fluidrank/perception.hpp"
#include "fluidrank/task.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fluidrank {

// All entropies are in nats.

double marginal_entropy(const LikelihoodTable& table, const TaskSpec& t);
double conditional_entropy(const LikelihoodTable& table, const TaskSpec& t);
/// Sum over (theta, s) of rho(theta) p(s|theta) log(p(s|theta) / p(s)).
double mutual_information_kl(const LikelihoodTable& table, const TaskSpec& t);

double marginal_entropy(const Configuration& c, const TaskSpec& t, const PerceptionProfile& p);
double conditional_entropy(const Configuration& c, const TaskSpec& t, const PerceptionProfile& p);

struct InformationBreakdown {
    double marginal_entropy = 0.0;
    double conditional_entropy = 0.0;
    double mutual_information = 0.0;  // H(s) - H(s|theta), clamped at 0
    double mutual_information_kl = 0.0;
};

InformationBreakdown information(const LikelihoodTable& table, const TaskSpec& t);

/// H(s) - H(s|theta), clamped at zero.
double mutual_information(const Configuration& c, const TaskSpec& t, const PerceptionProfile& p);

/// log(|S| * n_configs). The independence shortcut for the first term; shown
/// next to the exact H(s) and never used for ordering.
double first_term_approximation(const Configuration& c, std::size_t n_configs);

struct RankingRow {
    int rank = 0;
    std::string configuration_id;
    std::string family;
    std::vector<std::string> channels;       // modality per channel
    std::vector<std::string> assigned_axes;  // task axis per channel
    std::size_t signal_count = 0;
    InformationBreakdown info;
    double first_term_approximation = 0.0;
};

struct RankingReport {
    std::string task_id;
    double task_entropy = 0.0;
    std::vector<RankingRow> rows;  // ordered by rank
};

/// Values closer than this are treated as equal when ordering, so rounding
/// noise between mirror-image configurations cannot decide a rank.
inline constexpr double kRankTieTolerance = 1e-12;

/// Scores every configuration, sorts by mutual information (descending) and
/// breaks ties by configuration id. Throws Error(InvalidArgument) on an empty
/// list.
RankingReport rank_configurations(const std::vector<Configuration>& configs, const TaskSpec& t,
                                  const PerceptionProfile& p);

/// Row for a configuration id, or nullptr.
const RankingRow* find_row(const RankingReport& r, const std::string& configuration_id);

nlohmann::json to_json(const RankingReport& r);

/// Fixed-width table: configuration, MI in nats and bits, rank.
std::string format_ranking_table(const RankingReport& r);

} // namespace fluidrank
