// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Lines starting with "info" are context only and never affect the verdict.

#include "fluidrank/behavioral.hpp"
#include "fluidrank/cli.hpp"
#include "fluidrank/gate_circuit.hpp"
#include "fluidrank/info_rank.hpp"
#include "fluidrank/lowering.hpp"
#include "fluidrank/ring_oscillator.hpp"
#include "fluidrank/service.hpp"
#include "fluidrank/study.hpp"
#include "support.hpp"

#include <httplib.h>

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

using namespace fluidrank;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void verdict(const char* id, bool ok, const std::string& what) {
    std::printf("%s %s  %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void info(const char* id, const std::string& what) {
    std::printf("info %s  %s\n", id, what.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Runs a criterion body; anything thrown counts as a failure of that criterion.
void guarded(const char* id, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        verdict(id, false, std::string("threw: ") + e.what());
    }
}

const std::vector<Configuration>& pairs() {
    static const auto cs = enumerate_configurations(default_modalities(), 2);
    return cs;
}

// Plain-loop mutual information straight from the model definition, sharing
// nothing with the library beyond the catalog levels.
double brute_force_mi(const Configuration& c, const std::vector<int>& axes, double beta,
                      const std::map<std::string, double>& prefs, double alpha = 0.25) {
    const int l0 = c.channels[0].level_count(), l1 = c.channels[1].level_count();
    const double w0 = (prefs.at(c.channels[0].name) + alpha) / (1 + alpha);
    const double w1 = (prefs.at(c.channels[1].name) + alpha) / (1 + alpha);
    const int n_theta = axes[0] * axes[1];
    std::vector<double> marginal(static_cast<std::size_t>(l0 * l1), 0.0);
    double h_cond = 0.0;
    for (int a = 0; a < axes[0]; ++a) {
        for (int b = 0; b < axes[1]; ++b) {
            const double e0 = static_cast<double>(a) / (axes[0] - 1), e1 = static_cast<double>(b) / (axes[1] - 1);
            std::vector<double> row;
            double lo = 1e300;
            for (int i = 0; i < l0; ++i) {
                for (int j = 0; j < l1; ++j) {
                    const double d0 = e0 - static_cast<double>(i) / (l0 - 1), d1 = e1 - static_cast<double>(j) / (l1 - 1);
                    row.push_back(beta * (w0 * d0 * d0 + w1 * d1 * d1));
                    lo = std::min(lo, row.back());
                }
            }
            double z = 0.0;
            for (double& e : row) z += (e = std::exp(-(e - lo)));
            for (std::size_t s = 0; s < row.size(); ++s) {
                const double p = row[s] / z;
                marginal[s] += p / n_theta;
                if (p > 0) h_cond -= p * std::log(p) / n_theta;
            }
        }
    }
    double h = 0.0;
    for (double p : marginal) if (p > 0) h -= p * std::log(p);
    return std::max(0.0, h - h_cond);
}

// Rank-1 configuration id by brute force (ties to the smaller id).
std::string brute_force_top(const std::vector<int>& axes, double beta, const std::map<std::string, double>& prefs) {
    std::string best;
    double best_mi = -1.0;
    for (const auto& c : pairs()) {
        const double mi = brute_force_mi(c, axes, beta, prefs);
        if (mi > best_mi + kRankTieTolerance || (std::abs(mi - best_mi) <= kRankTieTolerance && c.id < best)) {
            best = c.id;
            best_mi = mi;
        }
    }
    return best;
}

bool has_pressure(const std::string& id) { return id.find('P') != std::string::npos; }

// Sweeps the pressure slider from 1 down to 0 and reports the first value at
// which rank 1 stops carrying pressure, or -1 if pressure led at the start or
// never gave way.
double pressure_flip_point(double beta) {
    const std::vector<int> search{4, 4};
    std::map<std::string, double> prefs{{"pressure", 1.0}, {"area", 1.0}, {"frequency", 1.0}};
    if (!has_pressure(brute_force_top(search, beta, prefs))) return -1.0;
    for (int k = 100; k >= 0; --k) {
        prefs["pressure"] = k / 100.0;
        if (!has_pressure(brute_force_top(search, beta, prefs))) return prefs["pressure"];
    }
    return -1.0;
}

void p1() {
    const auto t0 = std::chrono::steady_clock::now();
    int cases = 0, good = 0;
    SimConfig cfg;
    cfg.duration = 3.0;
    for (int n = 2; n <= 4; ++n) {
        const auto circuit = synth_demux(n);
        const auto net = compile_to_netlist(circuit, default_valve_params());
        for (unsigned code = 0; code < (1u << n); ++code) {
            const auto bits = code_bits(code, n);
            const auto out = steady_outputs(simulate(net, code_schedule(net, bits), cfg), output_names(circuit));
            // Oracle: exactly output `code` is high.
            bool ok = static_cast<int>(out.size()) == (1 << n);
            for (std::size_t k = 0; ok && k < out.size(); ++k) ok = out[k] == (k == code);
            ok = ok && out == evaluate_logic(circuit, bits);
            ++cases;
            good += ok;
        }
    }
    const double elapsed = seconds_since(t0);
    verdict("P1", good == 28 && cases == 28 && elapsed < 20.0,
            "demux soundness: " + std::to_string(good) + "/" + std::to_string(cases) + " codes one-hot and equal to the oracle, " +
                fmt("%.2f s", elapsed));
}

void p2() {
    SimConfig cfg;
    cfg.duration = 2.0;
    const auto trace = simulate(testing::single_valve_rig(), testing::control_step(), cfg);
    const auto r = testing::measure_rise(trace, "v", 2.76);
    const bool ok = r && std::abs(r->rise_time - 0.51) <= 0.051;
    verdict("P2", ok,
            r ? "valve rise: 90% of 2.76 slm reached " + fmt("%.3f s", r->rise_time) + " after snap (target 0.51 s +/- 10%)"
              : std::string("valve rise: never reached 90% of 2.76 slm"));
}

void p3() {
    const auto v = default_valve_params();
    SimConfig cfg;
    const double ideal = cascade_delay(1, v, Volume{1.25}, cfg)[0];
    cfg.loss_multiplier = 3.85;
    const double lossy = cascade_delay(1, v, Volume{1.25}, cfg)[0];
    const bool ok = std::abs(ideal - 0.065) <= 0.001 && std::abs(lossy - 0.25) <= 0.005;
    verdict("P3", ok, "cascade delay: ideal " + fmt("%.4f s", ideal) + " (0.065 +/- 0.001), loss 3.85 " + fmt("%.4f s", lossy) +
                          " (0.25 +/- 0.005)");
}

void p4() {
    const bool endpoints = oscillator_frequency(Pressure{22.41}) == 1.8 && oscillator_frequency(Pressure{75.84}) == 7.41;
    const bool outside = !oscillator_frequency(Pressure{22.40}) && !oscillator_frequency(Pressure{75.85}) &&
                         !oscillator_frequency(Pressure{0.0}) && !oscillator_frequency(Pressure{100.0});
    SimConfig cfg;
    cfg.duration = 8.0;
    std::vector<double> freqs;
    bool sustained = true;
    for (double supply : {30.0, 45.0, 60.0}) {
        const auto stats = measure_oscillation(simulate(build_ring_oscillator(default_valve_params(), Pressure{supply}), {}, cfg),
                                               kRingProbe, 2.0);
        sustained = sustained && stats && stats->crossings >= 5 && stats->period_cv < 0.05;
        freqs.push_back(stats ? stats->frequency_hz : 0.0);
    }
    const bool increasing = freqs[0] < freqs[1] && freqs[1] < freqs[2];
    verdict("P4", endpoints && outside && sustained && increasing,
            "oscillator: map endpoints exact, no oscillation outside [22.41, 75.84] kPa, ring at 30/45/60 kPa = " +
                fmt("%.3f", freqs[0]) + "/" + fmt("%.3f", freqs[1]) + "/" + fmt("%.3f Hz", freqs[2]));
}

void p5() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto prefs = uniform_profile(default_modalities());
    double worst_gap = 0.0, worst_zero = 0.0, worst_bound = 0.0;
    for (const auto& t : builtin_tasks()) {
        for (const auto& c : pairs()) {
            for (double beta : {0.0, 1.0, 8.0, 64.0, 1e6}) {
                auto p = prefs;
                p.beta = beta;
                const auto info = information(likelihood_table(c, t, p), t);
                worst_gap = std::max(worst_gap, std::abs(info.mutual_information - info.mutual_information_kl));
                if (beta == 0.0) worst_zero = std::max(worst_zero, info.mutual_information);
                const double cap = std::min(t.entropy(), std::log(static_cast<double>(signal_space_size(c))));
                worst_bound = std::max({worst_bound, info.mutual_information - cap, -info.mutual_information});
            }
        }
    }
    Modality x{"x", "X", ModalityKind::Pressure, {1, 2, 3, 4}};
    Modality y{"y", "Y", ModalityKind::Pressure, {1, 2, 3, 4}};
    PerceptionProfile sharp;
    sharp.beta = 1e6;
    sharp.preferences = {{"x", 1.0}, {"y", 1.0}};
    const double aligned =
        mutual_information(enumerate_configurations({x, y}, 2).front(), make_uniform_task("grid", {4, 4}), sharp);
    const double elapsed = seconds_since(t0);
    const bool ok = worst_gap <= 1e-9 && worst_zero <= 1e-12 && std::abs(aligned - std::log(16.0)) <= 1e-4 &&
                    worst_bound <= 1e-9 && elapsed < 1.0;
    verdict("P5", ok, "MI: forms agree to " + fmt("%.1e", worst_gap) + ", beta=0 MI " + fmt("%.1e", worst_zero) +
                          ", aligned 4x4 " + fmt("%.6f", aligned) + " vs log 16 " + fmt("%.6f", std::log(16.0)) +
                          ", bound slack " + fmt("%.1e", worst_bound) + ", " + fmt("%.3f s", elapsed));
}

void p6() {
    PerceptionProfile p;
    p.alpha = 0.25;
    bool ok = true;
    std::string values;
    const std::vector<std::pair<double, double>> cases{{0.0, 0.2}, {0.5, 0.6}, {1.0, 1.0}};
    for (const auto& [slider, expected] : cases) {
        p.preferences = {{"pressure", slider}, {"area", slider}, {"frequency", slider}};
        const auto w = saliency_matrix(p, pairs().front());
        ok = ok && w[0] == expected && w[1] == expected;
        values += (values.empty() ? "" : ", ") + fmt("%.17g", w[0]);
    }
    verdict("P6", ok, "saliency: W for P = 0, 0.5, 1 at alpha 0.25 is " + values);
}

void p7() {
    const auto search = build_search_task();
    auto p = uniform_profile(default_modalities(), 1.0, 8.0);
    const auto report = rank_configurations(pairs(), search, p);
    const auto& top = report.rows.front();
    const bool pa_first = top.family == "PA";
    const std::string brute_top = brute_force_top({4, 4}, 8.0, p.preferences);

    const double flip = pressure_flip_point(8.0);

    // (c * beta, W / c) must reproduce the report exactly.
    auto scaled = p;
    scaled.beta = 8.0 * 4.0;
    scaled.saliency_scale = 0.25;
    const auto a = rank_configurations(pairs(), search, p);
    const auto b = rank_configurations(pairs(), search, scaled);
    bool invariant = a.rows.size() == b.rows.size();
    double worst = 0.0;
    for (std::size_t i = 0; invariant && i < a.rows.size(); ++i) {
        const auto& x = a.rows[i];
        const auto& y = b.rows[i];
        invariant = x.configuration_id == y.configuration_id && x.rank == y.rank && x.assigned_axes == y.assigned_axes;
        for (auto [u, v] : {std::pair{x.info.mutual_information, y.info.mutual_information},
                            std::pair{x.info.mutual_information_kl, y.info.mutual_information_kl},
                            std::pair{x.info.marginal_entropy, y.info.marginal_entropy},
                            std::pair{x.info.conditional_entropy, y.info.conditional_entropy},
                            std::pair{x.first_term_approximation, y.first_term_approximation}}) {
            worst = std::max(worst, std::abs(u - v));
        }
    }
    invariant = invariant && worst <= 1e-12;

    std::string detail = "ranking at beta 8: rank 1 is " + top.configuration_id + " (" +
                         fmt("%.6f nats", top.info.mutual_information) + ", brute force agrees: " + brute_top + ")";
    const auto* pa = find_row(report, "PA");
    detail += ", PA " + fmt("%.6f", pa->info.mutual_information) + "; PA variant first: " + (pa_first ? "yes" : "no");
    detail += "; pressure slider sweep flips rank 1 away from pressure: " +
              (flip >= 0 ? "yes at " + fmt("%.2f", flip) : std::string("no (pressure never ranks 1)"));
    detail += "; (beta, W) scaling invariant: " + std::string(invariant ? "yes" : "no") + fmt(" (max diff %.1e)", worst);
    verdict("P7", pa_first && brute_top == top.configuration_id && flip >= 0 && invariant, detail);

    auto sharp = uniform_profile(default_modalities(), 1.0, 16.0);
    const auto r16 = rank_configurations(pairs(), search, sharp);
    const double flip16 = pressure_flip_point(16.0);
    info("P7", "at beta 16 rank 1 is " + r16.rows.front().configuration_id + " and the pressure sweep flips at " +
                   (flip16 >= 0 ? fmt("%.2f", flip16) : std::string("none")) +
                   "; PA overtakes AF only for beta above about 11.2");
}

StudyConfig p8_config(double beta) {
    StudyConfig sc;
    sc.tasks = builtin_tasks();
    sc.profiles = synthetic_population(default_modalities(), 100, 1, beta);
    sc.trials_per_config = 1000;
    sc.decode_mode = DecodeMode::Map;
    sc.seed = 1;
    return sc;
}

void p8() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sc = p8_config(8.0);
    const auto first = run_study(sc, pairs());
    std::ostringstream csv_a, csv_b;
    write_trials_csv(csv_a, first);
    const auto json_a = to_json(first).dump();
    const auto second = run_study(sc, pairs());
    write_trials_csv(csv_b, second);
    const bool identical = json_a == to_json(second).dump() && csv_a.str() == csv_b.str();
    const double elapsed = seconds_since(t0);

    const double search = rank1_not_worse_fraction(first, "search");
    const double assembly = rank1_not_worse_fraction(first, "assembly");
    const bool ok = search >= 0.9 && assembly >= 0.9 && identical && elapsed < 60.0;
    verdict("P8", ok, "study (100 profiles, beta 8, 1000 trials): rank 1 MSE <= rank 3 MSE for " + fmt("%.0f%%", 100 * search) +
                          " of profiles on search and " + fmt("%.0f%%", 100 * assembly) + " on assembly (need 90%); rerun " +
                          (identical ? "byte-identical" : "DIFFERS") + ", " + fmt("%.1f s", elapsed));

    const auto sharp = run_study(p8_config(60.0), pairs());
    info("P8", "same study at beta 60: " + fmt("%.0f%%", 100 * rank1_not_worse_fraction(sharp, "search")) + " search, " +
                   fmt("%.0f%%", 100 * rank1_not_worse_fraction(sharp, "assembly")) + " assembly");
}

void p9() {
    const auto dir = fs::temp_directory_path() / ("fluidrank-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto prefs_path = (dir / "prefs.json").string();
    std::ofstream(prefs_path) << R"({"pressure": 0.7, "area": 0.2, "frequency": 0.9, "alpha": 0.25, "beta": 8})";

    std::ostringstream out, err;
    const int code = cli_dispatch({"rank", "--prefs", prefs_path, "--task", "assembly", "--quiet"}, out, err);

    Api api(ServiceCatalog::defaults(), std::make_shared<RunStore>(dir / "runs"));
    HttpServer server(api);
    const int port = server.bind("127.0.0.1", 0);
    std::thread serving([&] { server.serve(); });
    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(5);

    const std::string body =
        R"({"preferences": {"pressure": 0.7, "area": 0.2, "frequency": 0.9}, "alpha": 0.25, "beta": 8, "task_id": "assembly"})";
    auto good = client.Post("/api/rank", body, "application/json");
    const bool parity = code == kExitOk && good && good->status == 200 && good->body == out.str();

    // Malformed payloads: out of range, wrong type, missing slider.
    const std::vector<std::pair<std::string, std::string>> bad{
        {R"({"preferences": {"pressure": 1.5, "area": 0.2, "frequency": 0.9}, "task_id": "search"})", "preferences.pressure"},
        {R"({"preferences": {"pressure": "high", "area": 0.2, "frequency": 0.9}, "task_id": "search"})", "preferences.pressure"},
        {R"({"preferences": {"pressure": 0.5, "area": 0.2}, "task_id": "search"})", "preferences.frequency"},
        {R"({"preferences": {"pressure": 0.5, "area": 0.2, "frequency": 0.9}, "beta": -2, "task_id": "search"})", "beta"},
    };
    bool rejected = true;
    for (const auto& [payload, field] : bad) {
        auto res = client.Post("/api/rank", payload, "application/json");
        bool named = false;
        if (res && res->status == 422) {
            const auto reply = json::parse(res->body);
            for (const auto& f : reply["fields"]) named = named || f["field"] == field;
        }
        rejected = rejected && named;
    }
    server.stop();
    serving.join();
    fs::remove_all(dir);

    verdict("P9", parity && rejected,
            std::string("interface parity: CLI rank and POST /api/rank bytes ") + (parity ? "identical" : "DIFFER") +
                "; malformed preferences " + (rejected ? "rejected with 422 naming the field" : "NOT rejected as required"));
}

} // namespace

int main() {
    guarded("P1", p1);
    guarded("P2", p2);
    guarded("P3", p3);
    guarded("P4", p4);
    guarded("P5", p5);
    guarded("P6", p6);
    guarded("P7", p7);
    guarded("P8", p8);
    guarded("P9", p9);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
