#include "fluidrank/study.hpp"

#include "fluidrank/behavioral.hpp"
#include "fluidrank/error.hpp"
#include "fluidrank/json_fields.hpp"
#include "fluidrank/random.hpp"
#include "fluidrank/timeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

namespace fluidrank {

namespace jf = json_fields;
using nlohmann::json;

TaskSpec build_search_task() { return make_uniform_task("search", {4, 4}, {"x", "y"}); }

TaskSpec build_assembly_task() { return make_uniform_task("assembly", {7, 3}, {"ingredient", "plate"}); }

std::vector<TaskSpec> builtin_tasks() { return {build_search_task(), build_assembly_task()}; }

TaskSpec find_builtin_task(const std::string& id) {
    for (auto& t : builtin_tasks()) {
        if (t.id == id) return t;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown task '" + id + "' (expected search or assembly)");
}

TrialRunner::TrialRunner(TaskSpec task, Configuration config, const PerceptionProfile& profile, DecodeMode mode,
                         bool jitter)
    : task_(std::move(task)), config_(std::move(config)), mode_(mode), jitter_(jitter) {
    table_ = likelihood_table(config_, task_, profile);
    encoded_.resize(task_.size());
    for (std::size_t theta = 0; theta < task_.size(); ++theta) {
        encoded_[theta] = signal_index(config_, nearest_signal(config_, task_, theta, profile.normalization));
    }
    if (mode_ == DecodeMode::Map) {
        map_decoded_.resize(table_.signal_count);
        for (std::size_t s = 0; s < table_.signal_count; ++s) {
            map_decoded_[s] = decode(table_, task_, s, DecodeMode::Map).theta;
        }
    }
}

TrialRecord TrialRunner::run(std::uint64_t seed) const {
    Rng rng(seed);
    TrialRecord r;
    r.task_id = task_.id;
    r.configuration_id = config_.id;
    r.seed = seed;
    r.theta = rng.categorical(task_.prior);
    r.theta_values = task_.unflatten(r.theta);
    const std::size_t s = encoded_[r.theta];
    r.signal = table_.signals[s];
    r.decoded = mode_ == DecodeMode::Map ? map_decoded_[s] : decode(table_, task_, s, DecodeMode::Sample, rng.next()).theta;
    r.decoded_values = task_.unflatten(r.decoded);
    for (std::size_t j = 0; j < r.theta_values.size(); ++j) {
        const long d = r.decoded_values[j] - r.theta_values[j];
        r.squared_error += d * d;
        r.manhattan += std::labs(d);
    }
    if (jitter_) {
        const RenderOptions render;
        const auto spread = default_valve_variability();
        ValveParams v = render.valve;
        // Truncate far tails so a draw can never produce a non-physical valve.
        v.snap_up.kpa = std::max(0.25 * v.snap_up.kpa, rng.normal(v.snap_up.kpa, spread.snap_up_sd_kpa));
        v.snap_down.kpa = kDefaultSnapDownRatio * v.snap_up.kpa;
        v.open_flow.slm = std::max(0.25 * v.open_flow.slm, rng.normal(v.open_flow.slm, spread.open_flow_sd_slm));
        r.jitter = JitterSample{v.snap_up.kpa, v.open_flow.slm,
                                cascade_delay(1, v, render.pouch_volume, render.sim).front()};
    }
    return r;
}

TrialRecord run_trial(const TaskSpec& t, const Configuration& c, const PerceptionProfile& profile,
                      std::uint64_t seed, DecodeMode mode, bool jitter) {
    return TrialRunner(t, c, profile, mode, jitter).run(seed);
}

void check_study_config(const StudyConfig& sc) {
    std::vector<FieldIssue> issues;
    if (sc.trials_per_config < 1) issues.push_back({"trials_per_config", "must be >= 1"});
    if (sc.tasks.empty()) issues.push_back({"tasks", "at least one task is required"});
    if (sc.profiles.empty()) issues.push_back({"profiles", "at least one profile is required"});
    for (std::size_t i = 0; i < sc.tasks.size(); ++i) {
        try {
            check_task(sc.tasks[i]);
        } catch (const FieldError& e) {
            for (const auto& issue : e.issues()) issues.push_back({jf::join(jf::index("tasks", i), issue.field), issue.message});
        }
    }
    for (std::size_t i = 0; i < sc.profiles.size(); ++i) {
        try {
            check_profile(sc.profiles[i]);
        } catch (const FieldError& e) {
            for (const auto& issue : e.issues()) {
                issues.push_back({jf::join(jf::index("profiles", i), issue.field), issue.message});
            }
        }
    }
    if (!issues.empty()) throw FieldError(ErrorCode::InvalidStudyConfig, std::move(issues));
}

std::vector<PerceptionProfile> synthetic_population(const std::vector<Modality>& catalog, int count,
                                                    std::uint64_t seed, double beta, double alpha) {
    if (count < 1) throw FieldError(ErrorCode::InvalidStudyConfig, {{"population.count", "must be >= 1"}});
    // Separate stream from the trial seeds, which use derive_seed(seed, n).
    Rng rng(derive_seed(seed ^ 0x70726f66696c6573ull, 0));
    std::vector<PerceptionProfile> out;
    for (int i = 0; i < count; ++i) {
        PerceptionProfile p;
        p.beta = beta;
        p.alpha = alpha;
        for (const auto& m : catalog) p.preferences[m.name] = rng.uniform();
        check_profile(p);
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

struct Ranked {
    Configuration config;
    double mi = 0.0;
};

std::vector<Ranked> ranked_configs(const std::vector<Configuration>& configs, const TaskSpec& t,
                                   const PerceptionProfile& p, bool collapse) {
    const auto report = rank_configurations(configs, t, p);
    std::vector<Ranked> out;
    std::vector<std::string> seen;
    for (const auto& row : report.rows) {
        if (collapse) {
            if (std::find(seen.begin(), seen.end(), row.family) != seen.end()) continue;
            seen.push_back(row.family);
        }
        out.push_back({find_configuration(configs, row.configuration_id), row.info.mutual_information});
    }
    return out;
}

void mean_sd(const std::vector<long>& xs, double& mean, double& sd) {
    double sum = 0.0;
    for (long x : xs) sum += static_cast<double>(x);
    mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (long x : xs) ss += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
    sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
}

struct Slot {
    ProfileTaskResult result;
    std::vector<TrialRecord> trials;
};

} // namespace

StudyReport run_study(const StudyConfig& sc, const std::vector<Configuration>& configs) {
    check_study_config(sc);
    if (configs.empty()) throw Error(ErrorCode::InvalidArgument, "no configurations to study");

    const std::size_t n_tasks = sc.tasks.size();
    const std::size_t n_slots = sc.profiles.size() * n_tasks;
    const auto trials = static_cast<std::size_t>(sc.trials_per_config);
    std::vector<Slot> slots(n_slots);

    // Each (profile, task) slot is independent and its trial seeds depend only
    // on indices, so the merge below is identical for any thread count.
    auto work = [&](std::size_t slot_index) {
        const std::size_t pi = slot_index / n_tasks;
        const std::size_t ti = slot_index % n_tasks;
        const auto& task = sc.tasks[ti];
        const auto& profile = sc.profiles[pi];
        Slot& slot = slots[slot_index];
        slot.result.profile_index = pi;
        slot.result.task_id = task.id;
        const auto ranked = ranked_configs(configs, task, profile, sc.collapse_variants);
        std::vector<long> sq(trials), mh(trials);
        for (std::size_t k = 0; k < ranked.size(); ++k) {
            const TrialRunner runner(task, ranked[k].config, profile, sc.decode_mode, sc.jitter);
            // Counter layout: slot, then configuration, then trial.
            const std::uint64_t base = (static_cast<std::uint64_t>(slot_index) * configs.size() + k) * trials;
            for (std::size_t i = 0; i < trials; ++i) {
                auto rec = runner.run(derive_seed(sc.seed, base + i));
                sq[i] = rec.squared_error;
                mh[i] = rec.manhattan;
                if (sc.record_trials) {
                    rec.profile_index = pi;
                    rec.rank = static_cast<int>(k + 1);
                    slot.trials.push_back(std::move(rec));
                }
            }
            RankResult rr;
            rr.rank = static_cast<int>(k + 1);
            rr.configuration_id = ranked[k].config.id;
            rr.family = ranked[k].config.family;
            rr.mutual_information = ranked[k].mi;
            rr.trials = trials;
            mean_sd(sq, rr.mean_squared_error, rr.sd_squared_error);
            mean_sd(mh, rr.mean_manhattan, rr.sd_manhattan);
            slot.result.ranks.push_back(rr);
        }
    };

    unsigned n_threads = sc.threads ? sc.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_slots));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n_slots; i = next++) {
            try {
                work(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    StudyReport report;
    report.config = sc;
    for (auto& slot : slots) {
        report.results.push_back(std::move(slot.result));
        for (auto& rec : slot.trials) report.trials.push_back(std::move(rec));
    }
    return report;
}

double rank1_not_worse_fraction(const StudyReport& r, const std::string& task_id) {
    std::size_t total = 0, good = 0;
    for (const auto& res : r.results) {
        if (res.task_id != task_id || res.ranks.empty()) continue;
        ++total;
        if (res.ranks.front().mean_squared_error <= res.ranks.back().mean_squared_error) ++good;
    }
    return total ? static_cast<double>(good) / static_cast<double>(total) : 0.0;
}

StudyConfig study_config_from_json(const json& j, const std::vector<Modality>& catalog) {
    if (!j.is_object()) jf::fail("$", "expected an object");
    StudyConfig sc;
    if (j.contains("trials_per_config")) sc.trials_per_config = static_cast<int>(jf::integer(j, "trials_per_config", ""));
    if (j.contains("seed")) {
        const auto& v = j.at("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            jf::fail("seed", "expected a non-negative integer");
        }
        sc.seed = v.get<std::uint64_t>();
    }
    if (j.contains("decode_mode")) {
        const auto mode = jf::string(j, "decode_mode", "");
        if (mode == "map") sc.decode_mode = DecodeMode::Map;
        else if (mode == "sample") sc.decode_mode = DecodeMode::Sample;
        else jf::fail("decode_mode", "expected \"map\" or \"sample\"");
    }
    sc.jitter = jf::boolean_or(j, "jitter", "", false);
    sc.collapse_variants = jf::boolean_or(j, "collapse_variants", "", true);
    sc.record_trials = jf::boolean_or(j, "record_trials", "", true);

    if (j.contains("tasks")) {
        const auto& tasks = jf::array(j, "tasks", "");
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const auto path = jf::index("tasks", i);
            if (tasks[i].is_string()) {
                try {
                    sc.tasks.push_back(find_builtin_task(tasks[i].get<std::string>()));
                } catch (const Error& e) {
                    throw FieldError(ErrorCode::InvalidStudyConfig, {{path, e.what()}});
                }
            } else {
                sc.tasks.push_back(task_from_json(tasks[i], path));
            }
        }
    } else {
        sc.tasks = builtin_tasks();
    }

    const bool has_profiles = j.contains("profiles");
    const bool has_population = j.contains("population");
    if (has_profiles && has_population) jf::fail("population", "give either profiles or population, not both");
    if (has_profiles) {
        const auto& list = jf::array(j, "profiles", "");
        for (std::size_t i = 0; i < list.size(); ++i) sc.profiles.push_back(profile_from_json(list[i], jf::index("profiles", i)));
    } else if (has_population) {
        const auto& pop = j.at("population");
        const int count = static_cast<int>(jf::integer(pop, "count", "population"));
        const double beta = jf::number_or(pop, "beta", "population", 8.0);
        const double alpha = jf::number_or(pop, "alpha", "population", 0.25);
        sc.profiles = synthetic_population(catalog, count, sc.seed, beta, alpha);
    } else {
        sc.profiles.push_back(uniform_profile(catalog));
    }
    check_study_config(sc);
    return sc;
}

json to_json(const StudyConfig& sc) {
    json tasks = json::array();
    for (const auto& t : sc.tasks) tasks.push_back(to_json(t));
    json profiles = json::array();
    for (const auto& p : sc.profiles) profiles.push_back(to_json(p));
    return json{{"tasks", tasks},
                {"profiles", profiles},
                {"trials_per_config", sc.trials_per_config},
                {"decode_mode", to_string(sc.decode_mode)},
                {"jitter", sc.jitter},
                {"seed", sc.seed},
                {"collapse_variants", sc.collapse_variants},
                {"record_trials", sc.record_trials}};
}

json to_json(const TrialRecord& r) {
    json j{{"profile_index", r.profile_index},
           {"rank", r.rank},
           {"task_id", r.task_id},
           {"configuration_id", r.configuration_id},
           {"seed", r.seed},
           {"theta", r.theta_values},
           {"signal", r.signal.indices},
           {"decoded", r.decoded_values},
           {"squared_error", r.squared_error},
           {"manhattan", r.manhattan},
           {"completion_time_s", nullptr}};
    if (r.jitter) {
        j["jitter"] = {{"snap_up_kPa", r.jitter->snap_up_kpa},
                       {"open_flow_slm", r.jitter->open_flow_slm},
                       {"stage_delay_s", r.jitter->stage_delay_s}};
    }
    return j;
}

json to_json(const StudyReport& r) {
    json results = json::array();
    for (const auto& res : r.results) {
        json ranks = json::array();
        for (const auto& rr : res.ranks) {
            ranks.push_back({{"rank", rr.rank},
                             {"configuration_id", rr.configuration_id},
                             {"family", rr.family},
                             {"mutual_information_nats", rr.mutual_information},
                             {"trials", rr.trials},
                             {"mean_squared_error", rr.mean_squared_error},
                             {"sd_squared_error", rr.sd_squared_error},
                             {"mean_manhattan", rr.mean_manhattan},
                             {"sd_manhattan", rr.sd_manhattan},
                             {"mean_completion_time_s", nullptr}});
        }
        results.push_back({{"profile_index", res.profile_index}, {"task_id", res.task_id}, {"ranks", ranks}});
    }

    json summary = json::object();
    for (const auto& task : r.config.tasks) {
        std::map<std::string, int> rank1_counts;
        std::map<int, std::pair<double, std::size_t>> per_rank;
        for (const auto& res : r.results) {
            if (res.task_id != task.id || res.ranks.empty()) continue;
            rank1_counts[res.ranks.front().configuration_id] += 1;
            for (const auto& rr : res.ranks) {
                per_rank[rr.rank].first += rr.mean_squared_error;
                per_rank[rr.rank].second += 1;
            }
        }
        json means = json::array();
        for (const auto& [rank, acc] : per_rank) {
            means.push_back({{"rank", rank}, {"mean_squared_error", acc.first / static_cast<double>(acc.second)}});
        }
        summary[task.id] = {{"rank1_counts", rank1_counts},
                            {"mean_squared_error_by_rank", means},
                            {"rank1_not_worse_than_last_fraction", rank1_not_worse_fraction(r, task.id)}};
    }
    return json{{"config", to_json(r.config)}, {"results", results}, {"summary", summary}};
}

namespace {

std::string joined(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(v[i]);
    }
    return out;
}

} // namespace

void write_trials_csv(std::ostream& out, const StudyReport& r) {
    out << "profile_index,task_id,rank,configuration_id,seed,theta,signal,decoded,squared_error,manhattan,"
           "completion_time_s,jitter_snap_up_kPa,jitter_open_flow_slm,jitter_stage_delay_s\n";
    const auto precision = out.precision(10);
    for (const auto& t : r.trials) {
        out << t.profile_index << ',' << t.task_id << ',' << t.rank << ',' << t.configuration_id << ',' << t.seed << ','
            << joined(t.theta_values) << ',' << joined(t.signal.indices) << ',' << joined(t.decoded_values) << ','
            << t.squared_error << ',' << t.manhattan << ',';
        if (t.jitter) out << ',' << t.jitter->snap_up_kpa << ',' << t.jitter->open_flow_slm << ',' << t.jitter->stage_delay_s;
        else out << ",,,";
        out << '\n';
    }
    out.precision(precision);
}

} // namespace fluidrank
