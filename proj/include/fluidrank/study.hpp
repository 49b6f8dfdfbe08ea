#pragma once

#include "fluidrank/info_rank.hpp"
#include "fluidrank/modality.hpp"
#include "fluidrank/perception.hpp"
#include "fluidrank/task.hpp"
#include "fluidrank/valve.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fluidrank {

/// 4x4 goal grid, axes x and y.
TaskSpec build_search_task();
/// Seven ingredients by three plates.
TaskSpec build_assembly_task();
std::vector<TaskSpec> builtin_tasks();
/// Built-in task by id; throws Error(InvalidArgument) for an unknown id.
TaskSpec find_builtin_task(const std::string& id);

/// Valve parameters drawn for one trial in jitter mode, and the cascade stage
/// delay they imply. Timing only: decoding works on levels and is unaffected.
struct JitterSample {
    double snap_up_kpa = 0.0;
    double open_flow_slm = 0.0;
    double stage_delay_s = 0.0;
};

struct TrialRecord {
    std::size_t profile_index = 0;  // filled in by run_study
    int rank = 0;                   // likewise
    std::string task_id;
    std::string configuration_id;
    std::uint64_t seed = 0;
    std::size_t theta = 0;
    std::vector<int> theta_values;
    SignalPoint signal;
    std::size_t decoded = 0;
    std::vector<int> decoded_values;
    long squared_error = 0;  // per-axis squared index difference, summed
    long manhattan = 0;      // per-axis absolute index difference, summed
    std::optional<JitterSample> jitter;
};

/// Precomputed encoder and decoder for one (task, configuration, profile), so
/// repeated trials only draw theta and look things up.
class TrialRunner {
public:
    TrialRunner(TaskSpec task, Configuration config, const PerceptionProfile& profile, DecodeMode mode,
                bool jitter = false);

    TrialRecord run(std::uint64_t seed) const;

    const LikelihoodTable& table() const { return table_; }

private:
    TaskSpec task_;
    Configuration config_;
    DecodeMode mode_;
    bool jitter_;
    LikelihoodTable table_;
    std::vector<std::size_t> encoded_;     // theta -> presented signal index
    std::vector<std::size_t> map_decoded_; // signal -> MAP theta
};

/// One simulated trial: theta drawn from the prior with `seed`, presented as
/// the nearest grid point, decoded by the perception model.
TrialRecord run_trial(const TaskSpec& t, const Configuration& c, const PerceptionProfile& profile,
                      std::uint64_t seed, DecodeMode mode = DecodeMode::Map, bool jitter = false);

struct StudyConfig {
    std::vector<TaskSpec> tasks;
    std::vector<PerceptionProfile> profiles;
    int trials_per_config = 1000;
    DecodeMode decode_mode = DecodeMode::Map;
    bool jitter = false;
    std::uint64_t seed = 1;
    /// Rank families (PA, PF, AF) rather than every assignment variant; each
    /// family is represented by its best-scoring variant.
    bool collapse_variants = true;
    bool record_trials = true;
    unsigned threads = 0;  // 0 picks the hardware concurrency
};

/// Throws FieldError(InvalidStudyConfig) naming each broken field.
void check_study_config(const StudyConfig& sc);

/// Profiles with i.i.d. uniform [0, 1] preferences for every catalog modality.
std::vector<PerceptionProfile> synthetic_population(const std::vector<Modality>& catalog, int count,
                                                    std::uint64_t seed, double beta = 8.0, double alpha = 0.25);

struct RankResult {
    int rank = 0;
    std::string configuration_id;
    std::string family;
    double mutual_information = 0.0;
    std::size_t trials = 0;
    double mean_squared_error = 0.0;
    double sd_squared_error = 0.0;
    double mean_manhattan = 0.0;
    double sd_manhattan = 0.0;
};

struct ProfileTaskResult {
    std::size_t profile_index = 0;
    std::string task_id;
    std::vector<RankResult> ranks;  // rank 1 first
};

struct StudyReport {
    StudyConfig config;
    std::vector<ProfileTaskResult> results;  // profile-major, then task
    std::vector<TrialRecord> trials;         // empty unless record_trials
};

StudyReport run_study(const StudyConfig& sc, const std::vector<Configuration>& configs);

/// Share of profiles (for one task) whose rank-1 mean squared error is no
/// larger than their last-rank mean squared error.
double rank1_not_worse_fraction(const StudyReport& r, const std::string& task_id);

/// Study config document. Profiles come either as an explicit "profiles" list
/// or as {"population": {"count", "beta", "alpha"}} expanded with the seed.
/// Tasks are built-in ids or full task objects.
StudyConfig study_config_from_json(const nlohmann::json& j, const std::vector<Modality>& catalog);
nlohmann::json to_json(const StudyConfig& sc);

nlohmann::json to_json(const TrialRecord& r);
nlohmann::json to_json(const StudyReport& r);
void write_trials_csv(std::ostream& out, const StudyReport& r);

} // namespace fluidrank
