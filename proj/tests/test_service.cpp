#include <catch2/catch_amalgamated.hpp>

#include "fluidrank/cli.hpp"
#include "fluidrank/run_store.hpp"
#include "fluidrank/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

using namespace fluidrank;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("fluidrank-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& content) const {
        const auto p = path / name;
        std::ofstream(p) << content;
        return p.string();
    }
};

struct Fixture {
    TempDir dir;
    Api api{ServiceCatalog::defaults(), std::make_shared<RunStore>(dir.path / "runs")};
};

json body_of(const ApiResponse& r) { return json::parse(r.body); }

std::vector<std::string> field_names(const json& body) {
    std::vector<std::string> out;
    for (const auto& f : body["fields"]) out.push_back(f["field"].get<std::string>());
    return out;
}

const std::string kRankBody =
    R"({"preferences": {"pressure": 0.8, "area": 0.1, "frequency": 0.5}, "alpha": 0.25, "beta": 8, "task_id": "search"})";

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli_dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

} // namespace

TEST_CASE("fnv1a64 matches published vectors", "[store]") {
    CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
    CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("run store writes manifests and outputs", "[store]") {
    TempDir dir;
    RunStore store(dir.path);
    const json inputs{{"x", 1}};
    const auto id = store.create_run("study", inputs);
    CHECK(id.find("-study-") != std::string::npos);
    CHECK(store.exists(id));
    store.write_output(id, "report.json", "{}\n");
    const auto m = store.manifest(id);
    REQUIRE(m);
    CHECK(m->at("kind") == "study");
    CHECK(m->at("inputs") == inputs);
    CHECK(m->at("outputs")["report.json"]["bytes"] == 3);
    CHECK(store.read_output(id, "report.json") == "{}\n");
    CHECK_FALSE(store.read_output(id, "missing.json"));
    CHECK_FALSE(store.exists("../etc"));

    const auto second = store.create_run("study", inputs);
    CHECK(second != id);
}

TEST_CASE("catalog endpoint lists modalities, configurations and tasks", "[api]") {
    Fixture f;
    const auto r = f.api.handle("GET", "/api/catalog", "");
    REQUIRE(r.status == 200);
    const auto j = body_of(r);
    CHECK(j["modalities"][0]["levels"] == json::array({6.89, 13.79, 20.68, 27.58}));
    CHECK(j["configurations"].size() == 6);
    CHECK(j["tasks"].size() == 2);
    CHECK(j["defaults"]["beta"] == 8.0);
}

TEST_CASE("rank endpoint returns the ranking payload", "[api]") {
    Fixture f;
    const auto r = f.api.handle("POST", "/api/rank", kRankBody);
    REQUIRE(r.status == 200);
    const auto j = body_of(r);
    CHECK(j["task_id"] == "search");
    CHECK(j["rankings"].size() == 6);
    CHECK(j["rankings"][0]["rank"] == 1);
}

TEST_CASE("rank endpoint maps failures to status codes", "[api]") {
    Fixture f;
    SECTION("out of range values are 422 with field names") {
        const auto r = f.api.rank(R"({"preferences": {"pressure": 1.5, "area": 0.1, "frequency": 0.5}, "beta": -1, "task_id": "search"})");
        CHECK(r.status == 422);
        const auto fields = field_names(body_of(r));
        CHECK(std::find(fields.begin(), fields.end(), "beta") != fields.end());
        CHECK(std::find(fields.begin(), fields.end(), "preferences.pressure") != fields.end());
    }
    SECTION("missing sliders are 422") {
        const auto r = f.api.rank(R"({"preferences": {"pressure": 0.5}, "task_id": "search"})");
        CHECK(r.status == 422);
        CHECK(body_of(r)["error"] == "MissingPreference");
        CHECK(field_names(body_of(r)) == std::vector<std::string>{"preferences.area", "preferences.frequency"});
    }
    SECTION("bodies that are not JSON are 400") {
        CHECK(f.api.rank("{not json").status == 400);
        CHECK(f.api.rank("").status == 400);
    }
    SECTION("wrongly typed or missing fields are 422 with field names") {
        const auto typed = f.api.rank(R"({"preferences": {"pressure": "lots"}, "task_id": "search"})");
        CHECK(typed.status == 422);
        CHECK(field_names(body_of(typed)) == std::vector<std::string>{"preferences.pressure"});
        const auto missing = f.api.rank(R"({"task_id": "search"})");
        CHECK(missing.status == 422);
        CHECK(field_names(body_of(missing)) == std::vector<std::string>{"preferences"});
    }
    SECTION("unknown tasks and endpoints are 404") {
        CHECK(f.api.rank(R"({"preferences": {"pressure": 1, "area": 1, "frequency": 1}, "task_id": "juggling"})").status == 404);
        CHECK(f.api.handle("GET", "/api/nothing", "").status == 404);
    }
}

TEST_CASE("preview endpoint renders the nearest signal", "[api]") {
    Fixture f;
    const auto r = f.api.preview(R"({"configuration_id": "PF", "task_id": "search", "theta": [3, 1], "seconds_per_channel": 1})");
    REQUIRE(r.status == 200);
    const auto j = body_of(r);
    // y = 1 sits at 1/3, nearer the low of the two frequency levels.
    CHECK(j["signal"]["indices"] == json::array({3, 0}));
    CHECK(j["times_s"].size() == 2000);
    CHECK(j["tracks"][0]["id"] == "ch0.pressure");
    CHECK(j["tracks"][0]["values_kPa"][10] == 27.58);

    CHECK(f.api.preview(R"({"configuration_id": "PF", "theta": [9, 1]})").status == 422);
    CHECK(f.api.preview(R"({"configuration_id": "PF", "theta": [1]})").status == 422);
    CHECK(f.api.preview(R"({"configuration_id": "QQ", "theta": 0})").status == 404);
}

TEST_CASE("simulate endpoint runs a lowered circuit", "[api]") {
    Fixture f;
    REQUIRE(cli({"lower", "--demux", "2"}).code == kExitOk);
    const auto netlist = json::parse(cli({"lower", "--demux", "2"}).out);
    const json body{{"netlist", netlist}, {"code", "10"}, {"duration_s", 2.0}};
    const auto r = f.api.simulate(body.dump());
    REQUIRE(r.status == 200);
    const auto j = body_of(r);
    CHECK(j["final_probe_kPa"]["S2"].get<double>() > 10.0);
    CHECK(j["final_probe_kPa"]["S0"].get<double>() < 10.0);

    CHECK(f.api.simulate(R"({"netlist": {"nodes": 3}})").status == 422);
    CHECK(f.api.simulate("[1, 2").status == 400);
}

TEST_CASE("study endpoint runs in the background and persists", "[api][study]") {
    Fixture f;
    const auto started = f.api.study_run(
        R"({"tasks": ["search"], "population": {"count": 2}, "trials_per_config": 10, "seed": 3})");
    REQUIRE(started.status == 202);
    const auto id = body_of(started)["id"].get<std::string>();
    f.api.wait_for_jobs();

    const auto done = f.api.handle("GET", "/api/study/" + id, "");
    REQUIRE(done.status == 200);
    const auto j = body_of(done);
    CHECK(j["status"] == "done");
    CHECK(j["report"]["results"].size() == 2);

    CHECK(verify_study_run(RunStore(f.dir.path / "runs"), id).empty());
    CHECK(f.api.study_get("20000101T000000Z-study-0000000000").status == 404);

    CHECK(f.api.study_run(R"({"trials_per_config": 0})").status == 422);
    CHECK(f.api.study_run(R"({"population": {"count": 1000}, "trials_per_config": 100000})").status == 422);
}

TEST_CASE("verification notices a tampered report", "[api][study]") {
    Fixture f;
    const auto started = f.api.study_run(R"({"tasks": ["assembly"], "trials_per_config": 5})");
    const auto id = body_of(started)["id"].get<std::string>();
    f.api.wait_for_jobs();
    RunStore store(f.dir.path / "runs");
    store.write_output(id, "report.json", "{}\n");
    CHECK_FALSE(verify_study_run(store, id).empty());
}

TEST_CASE("cli exit codes", "[cli]") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"rank"}).code == kExitUsage);
    CHECK(cli({"bogus"}).code == kExitUsage);
    CHECK(cli({"synth", "--inputs", "5"}).code == kExitDomain);
    const auto r = cli({"synth", "--inputs", "3"});
    CHECK(r.code == kExitOk);
    CHECK(json::parse(r.out)["outputs"].size() == 8);
}

TEST_CASE("cli rank and the rank endpoint emit identical bytes", "[cli][api]") {
    Fixture f;
    const auto prefs = f.dir.file("prefs.json", R"({"pressure": 0.8, "area": 0.1, "frequency": 0.5, "alpha": 0.25, "beta": 8})");
    const auto c = cli({"rank", "--prefs", prefs, "--task", "search", "--quiet"});
    REQUIRE(c.code == kExitOk);
    CHECK(c.err.empty());
    CHECK(c.out == f.api.rank(kRankBody).body);

    const auto bad = f.dir.file("bad.json", R"({"pressure": 1.5, "area": 0.1, "frequency": 0.5})");
    const auto e = cli({"rank", "--prefs", bad});
    CHECK(e.code == kExitDomain);
    CHECK(e.err.find("pressure") != std::string::npos);
    CHECK(cli({"rank", "--prefs", prefs, "--task", "juggling"}).code == kExitDomain);
}

TEST_CASE("cli study persists and verifies", "[cli][study]") {
    TempDir dir;
    const auto config = dir.file("study.json", R"({"tasks": ["search"], "population": {"count": 2}, "trials_per_config": 10})");
    const auto store = (dir.path / "runs").string();
    const auto r = cli({"study", "--config", config, "--store", store});
    REQUIRE(r.code == kExitOk);
    const auto id = json::parse(r.out)["run_id"].get<std::string>();
    CHECK(cli({"study", "--verify", id, "--store", store}).code == kExitOk);
}

TEST_CASE("http server answers over a socket", "[api][http]") {
    Fixture f;
    HttpServer server(f.api);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread t([&] { server.serve(); });

    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(5);
    auto res = client.Post("/api/rank", kRankBody, "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == f.api.rank(kRankBody).body);

    auto bad = client.Post("/api/rank", R"({"preferences": {"pressure": 2, "area": 0, "frequency": 0}, "task_id": "search"})",
                           "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 422);

    auto cat = client.Get("/api/catalog");
    REQUIRE(cat);
    CHECK(cat->status == 200);

    server.stop();
    t.join();
}
