#include <catch2/catch_amalgamated.hpp>

#include "fluidrank/error.hpp"
#include "fluidrank/info_rank.hpp"
#include "fluidrank/study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

using namespace fluidrank;
using Catch::Approx;

namespace {

const std::vector<Configuration>& pairs() {
    static const auto cs = enumerate_configurations(default_modalities(), 2);
    return cs;
}

PerceptionProfile uniform(double beta = 8.0) { return uniform_profile(default_modalities(), 1.0, beta); }

std::vector<std::string> order(const RankingReport& r) {
    std::vector<std::string> ids;
    for (const auto& row : r.rows) ids.push_back(row.configuration_id);
    return ids;
}

} // namespace

TEST_CASE("information measures match the brute-force reference", "[info][oracle]") {
    std::ifstream in(std::string(FLUIDRANK_TEST_DATA) + "/mi_reference.json");
    const auto cases = nlohmann::json::parse(in)["cases"];
    REQUIRE(cases.size() == 60);
    for (const auto& k : cases) {
        auto p = uniform(k["beta"].get<double>());
        for (const auto& [name, v] : k["preferences"].items()) p.preferences[name] = v.get<double>();
        const auto t = find_builtin_task(k["task"].get<std::string>());
        const auto& c = find_configuration(pairs(), k["configuration"].get<std::string>());
        INFO(k["profile"].get<std::string>() << " " << t.id << " " << c.id);
        const auto info = information(likelihood_table(c, t, p), t);
        CHECK(info.marginal_entropy == Approx(k["marginal_entropy"].get<double>()).margin(1e-12));
        CHECK(info.conditional_entropy == Approx(k["conditional_entropy"].get<double>()).margin(1e-12));
        CHECK(info.mutual_information == Approx(k["mutual_information"].get<double>()).margin(1e-12));
        CHECK(info.mutual_information_kl == Approx(k["mutual_information_kl"].get<double>()).margin(1e-12));
    }
}

TEST_CASE("entropy difference and KL forms agree", "[info][property]") {
    for (double beta : {0.1, 1.0, 8.0, 50.0, 1e4}) {
        for (const auto& t : builtin_tasks()) {
            for (const auto& c : pairs()) {
                const auto info = information(likelihood_table(c, t, uniform(beta)), t);
                CHECK(std::abs(info.mutual_information - info.mutual_information_kl) < 1e-9);
            }
        }
    }
}

TEST_CASE("mutual information stays inside its bounds", "[info][property]") {
    for (double beta : {0.0, 2.0, 8.0, 1e6}) {
        for (const auto& t : builtin_tasks()) {
            for (const auto& c : pairs()) {
                const double mi = mutual_information(c, t, uniform(beta));
                CHECK(mi >= 0.0);
                CHECK(mi <= t.entropy() + 1e-12);
                CHECK(mi <= std::log(static_cast<double>(signal_space_size(c))) + 1e-12);
                CHECK(marginal_entropy(c, t, uniform(beta)) >= conditional_entropy(c, t, uniform(beta)) - 1e-12);
            }
        }
    }
}

TEST_CASE("no sensitivity carries no information", "[info]") {
    for (const auto& c : pairs()) CHECK(mutual_information(c, build_search_task(), uniform(0.0)) <= 1e-12);
}

TEST_CASE("an aligned noiseless channel carries the full task entropy", "[info]") {
    Modality x{"x", "X", ModalityKind::Pressure, {1, 2, 3, 4}};
    Modality y{"y", "Y", ModalityKind::Pressure, {1, 2, 3, 4}};
    const auto c = enumerate_configurations({x, y}, 2).front();
    PerceptionProfile p;
    p.beta = 1e6;
    p.preferences = {{"x", 1.0}, {"y", 1.0}};
    CHECK(mutual_information(c, make_uniform_task("grid", {4, 4}), p) == Approx(std::log(16.0)).margin(1e-4));
}

TEST_CASE("swapping the axes of a symmetric task changes nothing", "[info][property]") {
    const auto t = build_search_task();
    for (const auto& c : pairs()) {
        auto swapped = c;
        swapped.assignment = {1, 0};
        CHECK(mutual_information(swapped, t, uniform()) == Approx(mutual_information(c, t, uniform())).margin(1e-12));
    }
}

TEST_CASE("first term approximation is log of signals times configurations", "[info]") {
    const auto& af = find_configuration(pairs(), "AF");
    CHECK(first_term_approximation(af, 6) == Approx(std::log(36.0)));
    CHECK(first_term_approximation(af, 1) == Approx(std::log(6.0)));
    CHECK(first_term_approximation(find_configuration(pairs(), "PA"), 6) == Approx(std::log(72.0)));
}

TEST_CASE("ranking orders by information and breaks ties by id", "[info][rank]") {
    const auto r = rank_configurations(pairs(), build_search_task(), uniform());
    CHECK(r.task_id == "search");
    CHECK(r.task_entropy == Approx(std::log(16.0)));
    // Mirror variants score identically on the symmetric grid.
    CHECK(order(r) == std::vector<std::string>{"AF", "FA", "FP", "PF", "AP", "PA"});
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        CHECK(r.rows[i].rank == static_cast<int>(i + 1));
        if (i > 0) CHECK(r.rows[i].info.mutual_information <= r.rows[i - 1].info.mutual_information + kRankTieTolerance);
    }
    const auto* af = find_row(r, "AF");
    REQUIRE(af);
    CHECK(af->info.mutual_information == Approx(1.113095).margin(1e-6));
    CHECK(af->channels == std::vector<std::string>{"area", "frequency"});
    CHECK(af->assigned_axes == std::vector<std::string>{"x", "y"});
    CHECK(af->signal_count == 6);
    CHECK(find_row(r, "ZZ") == nullptr);
}

TEST_CASE("ranking is deterministic", "[info][rank]") {
    const auto t = build_assembly_task();
    const auto a = to_json(rank_configurations(pairs(), t, uniform())).dump();
    const auto b = to_json(rank_configurations(pairs(), t, uniform())).dump();
    CHECK(a == b);
}

TEST_CASE("a single configuration ranks first and an empty list is refused", "[info][rank]") {
    const auto r = rank_configurations({pairs()[0]}, build_search_task(), uniform());
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].rank == 1);
    CHECK_THROWS_AS(rank_configurations({}, build_search_task(), uniform()), Error);
}

TEST_CASE("ranking JSON carries nats, bits and diagnostics", "[info][io]") {
    const auto j = to_json(rank_configurations(pairs(), build_search_task(), uniform()));
    REQUIRE(j["rankings"].size() == 6);
    const auto& row = j["rankings"][0];
    CHECK(row["mutual_information_bits"].get<double>() ==
          Approx(row["mutual_information_nats"].get<double>() / std::numbers::ln2));
    CHECK(row.contains("diagnostics"));
    CHECK(row["diagnostics"].contains("first_term_approximation_nats"));
    CHECK(j["task_entropy_nats"].get<double>() == Approx(std::log(16.0)));
}

TEST_CASE("ranking table lists every configuration", "[info][io]") {
    const auto text = format_ranking_table(rank_configurations(pairs(), build_search_task(), uniform()));
    CHECK(text.find("MI (bits)") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);
}
