#include <catch2/catch_amalgamated.hpp>

#include "fluidrank/error.hpp"
#include "fluidrank/study.hpp"

#include <algorithm>
#include <set>
#include <sstream>

using namespace fluidrank;
using Catch::Approx;

namespace {

const std::vector<Configuration>& pairs() {
    static const auto cs = enumerate_configurations(default_modalities(), 2);
    return cs;
}

PerceptionProfile uniform(double beta = 8.0) { return uniform_profile(default_modalities(), 1.0, beta); }

StudyConfig small_study(unsigned threads = 1) {
    StudyConfig sc;
    sc.tasks = builtin_tasks();
    sc.profiles = synthetic_population(default_modalities(), 4, 9);
    sc.trials_per_config = 50;
    sc.seed = 42;
    sc.threads = threads;
    return sc;
}

} // namespace

TEST_CASE("built-in tasks", "[study][task]") {
    const auto s = build_search_task();
    CHECK(s.id == "search");
    CHECK(s.axes == std::vector<int>{4, 4});
    CHECK(s.axis_names == std::vector<std::string>{"x", "y"});
    const auto a = build_assembly_task();
    CHECK(a.axes == std::vector<int>{7, 3});
    CHECK(a.axis_names == std::vector<std::string>{"ingredient", "plate"});
    CHECK(builtin_tasks().size() == 2);
    CHECK(find_builtin_task("assembly").size() == 21);
    CHECK_THROWS_AS(find_builtin_task("juggling"), Error);
}

TEST_CASE("a trial on a one-to-one channel decodes exactly", "[study][trial]") {
    const auto t = make_uniform_task("grid", {4, 3});
    const auto& pa = find_configuration(pairs(), "PA");
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto r = run_trial(t, pa, uniform(1e6), seed);
        CHECK(r.decoded == r.theta);
        CHECK(r.squared_error == 0);
        CHECK(r.manhattan == 0);
    }
}

TEST_CASE("without sensitivity the decoder falls back to the first value", "[study][trial]") {
    const auto t = build_search_task();
    const auto& af = find_configuration(pairs(), "AF");
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto r = run_trial(t, af, uniform(0.0), seed);
        CHECK(r.decoded == 0);
        const long x = r.theta_values[0], y = r.theta_values[1];
        CHECK(r.squared_error == x * x + y * y);
        CHECK(r.manhattan == x + y);
    }
}

TEST_CASE("coarse channels lose the in-between values", "[study][trial]") {
    // Seven ingredients on four pressure levels: odd ingredients land on a
    // level shared with their lower neighbour and decode one below.
    const auto t = build_assembly_task();
    const auto& pa = find_configuration(pairs(), "PA");
    const TrialRunner runner(t, pa, uniform(1e6), DecodeMode::Map);
    std::set<std::size_t> seen;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const auto r = runner.run(seed);
        seen.insert(r.theta);
        const int ingredient = r.theta_values[0];
        CHECK(r.squared_error == (ingredient % 2 == 1 ? 1 : 0));
        CHECK(r.decoded_values[1] == r.theta_values[1]);
    }
    CHECK(seen.size() == 21);
}

TEST_CASE("trial runner and run_trial agree", "[study][trial]") {
    const auto t = build_search_task();
    const auto& pf = find_configuration(pairs(), "PF");
    const TrialRunner runner(t, pf, uniform(), DecodeMode::Sample);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto a = runner.run(seed);
        const auto b = run_trial(t, pf, uniform(), seed, DecodeMode::Sample);
        CHECK(a.theta == b.theta);
        CHECK(a.decoded == b.decoded);
    }
}

TEST_CASE("jitter annotates timing without touching decoding", "[study][trial]") {
    const auto t = build_search_task();
    const auto& af = find_configuration(pairs(), "AF");
    const auto plain = run_trial(t, af, uniform(), 7);
    const auto jittered = run_trial(t, af, uniform(), 7, DecodeMode::Map, true);
    REQUIRE(jittered.jitter);
    CHECK_FALSE(plain.jitter);
    CHECK(jittered.decoded == plain.decoded);
    CHECK(jittered.jitter->stage_delay_s > 0.0);
}

TEST_CASE("study configs are validated", "[study]") {
    auto sc = small_study();
    sc.trials_per_config = 0;
    try {
        check_study_config(sc);
        FAIL("expected InvalidStudyConfig");
    } catch (const FieldError& e) {
        CHECK(e.code() == ErrorCode::InvalidStudyConfig);
        CHECK(e.issues().front().field == "trials_per_config");
    }
    sc = small_study();
    sc.tasks.clear();
    CHECK_THROWS_AS(check_study_config(sc), FieldError);
    sc = small_study();
    sc.profiles.clear();
    CHECK_THROWS_AS(check_study_config(sc), FieldError);
}

TEST_CASE("synthetic population is seeded", "[study]") {
    const auto a = synthetic_population(default_modalities(), 10, 3);
    const auto b = synthetic_population(default_modalities(), 10, 3);
    const auto c = synthetic_population(default_modalities(), 10, 4);
    REQUIRE(a.size() == 10);
    CHECK(a[5].preferences == b[5].preferences);
    CHECK(a[5].preferences != c[5].preferences);
    for (const auto& p : a) {
        CHECK(p.preferences.size() == 3);
        for (const auto& [name, v] : p.preferences) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("study reports one collapsed ranking per profile and task", "[study]") {
    const auto sc = small_study();
    const auto r = run_study(sc, pairs());
    REQUIRE(r.results.size() == 8);
    CHECK(r.results[0].profile_index == 0);
    CHECK(r.results[1].task_id == "assembly");
    for (const auto& res : r.results) {
        REQUIRE(res.ranks.size() == 3);
        std::set<std::string> families;
        for (std::size_t i = 0; i < res.ranks.size(); ++i) {
            CHECK(res.ranks[i].rank == static_cast<int>(i + 1));
            CHECK(res.ranks[i].trials == 50);
            families.insert(res.ranks[i].family);
            if (i > 0) CHECK(res.ranks[i].mutual_information <= res.ranks[i - 1].mutual_information + 1e-12);
        }
        CHECK(families == std::set<std::string>{"PA", "PF", "AF"});
    }
    CHECK(r.trials.size() == 8u * 3u * 50u);
    const double f = rank1_not_worse_fraction(r, "search");
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
}

TEST_CASE("uncollapsed studies rank every variant", "[study]") {
    auto sc = small_study();
    sc.collapse_variants = false;
    sc.record_trials = false;
    const auto r = run_study(sc, pairs());
    CHECK(r.results[0].ranks.size() == 6);
    CHECK(r.trials.empty());
}

TEST_CASE("studies reproduce byte for byte across thread counts", "[study][property]") {
    const auto one = to_json(run_study(small_study(1), pairs())).dump();
    const auto again = to_json(run_study(small_study(1), pairs())).dump();
    const auto four = to_json(run_study(small_study(4), pairs())).dump();
    CHECK(one == again);
    CHECK(one == four);

    auto other = small_study(1);
    other.seed = 43;
    CHECK(to_json(run_study(other, pairs())).dump() != one);
}

TEST_CASE("study config JSON expands populations and task ids", "[study][io]") {
    const auto j = nlohmann::json{{"tasks", nlohmann::json::array({"search"})},
                                  {"population", {{"count", 3}, {"beta", 4.0}}},
                                  {"trials_per_config", 20},
                                  {"seed", 5},
                                  {"decode_mode", "sample"}};
    const auto sc = study_config_from_json(j, default_modalities());
    REQUIRE(sc.tasks.size() == 1);
    CHECK(sc.tasks[0].id == "search");
    REQUIRE(sc.profiles.size() == 3);
    CHECK(sc.profiles[0].beta == 4.0);
    CHECK(sc.trials_per_config == 20);
    CHECK(sc.decode_mode == DecodeMode::Sample);

    const auto defaults = study_config_from_json(nlohmann::json::object(), default_modalities());
    CHECK(defaults.tasks.size() == 2);
    CHECK(defaults.profiles.size() == 1);

    CHECK_THROWS_AS(study_config_from_json(nlohmann::json{{"tasks", {"juggling"}}}, default_modalities()), FieldError);
    CHECK_THROWS_AS(study_config_from_json(nlohmann::json{{"trials_per_config", "many"}}, default_modalities()), FieldError);
}

TEST_CASE("study report JSON and trial CSV", "[study][io]") {
    auto sc = small_study();
    sc.tasks = {build_search_task()};
    sc.profiles.resize(1);
    sc.trials_per_config = 5;
    const auto r = run_study(sc, pairs());
    const auto j = to_json(r);
    CHECK(j.contains("config"));
    CHECK(j["results"].size() == 1);
    CHECK(j["summary"]["search"].contains("rank1_not_worse_than_last_fraction"));

    std::ostringstream out;
    write_trials_csv(out, r);
    const auto text = out.str();
    CHECK(text.rfind("profile_index,task_id,rank,configuration_id,seed,theta,signal,decoded", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 15);
    CHECK(to_json(r.trials[0])["completion_time_s"].is_null());
}
