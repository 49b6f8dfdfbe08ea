#include "fluidrank/service.hpp"

#include "fluidrank/info_rank.hpp"
#include "fluidrank/json_fields.hpp"
#include "fluidrank/lowering.hpp"
#include "fluidrank/netlist_io.hpp"
#include "fluidrank/simulator.hpp"
#include "fluidrank/timeline.hpp"

#include <httplib.h>

#include <cmath>
#include <sstream>

namespace fluidrank {

namespace jf = json_fields;
using nlohmann::json;

ServiceCatalog ServiceCatalog::defaults() { return from_modalities(default_modalities()); }

ServiceCatalog ServiceCatalog::from_modalities(std::vector<Modality> modalities) {
    ServiceCatalog c;
    c.configurations = enumerate_configurations(modalities, 2);
    c.modalities = std::move(modalities);
    c.tasks = builtin_tasks();
    return c;
}

const TaskSpec& ServiceCatalog::task(const std::string& id) const {
    for (const auto& t : tasks) {
        if (t.id == id) return t;
    }
    throw NotFound("task_id", "unknown task '" + id + "'");
}

const Configuration& ServiceCatalog::configuration(const std::string& id) const {
    for (const auto& c : configurations) {
        if (c.id == id) return c;
    }
    throw NotFound("configuration_id", "unknown configuration '" + id + "'");
}

void require_preferences(const ServiceCatalog& catalog, const PerceptionProfile& p) {
    std::vector<FieldIssue> issues;
    for (const auto& m : catalog.modalities) {
        if (!p.preferences.count(m.name)) issues.push_back({"preferences." + m.name, "missing slider value"});
    }
    if (!issues.empty()) throw FieldError(ErrorCode::MissingPreference, std::move(issues));
}

std::string ranking_payload(const ServiceCatalog& catalog, const TaskSpec& task, const PerceptionProfile& p) {
    require_preferences(catalog, p);
    return to_json(rank_configurations(catalog.configurations, task, p)).dump(2) + "\n";
}

PerceptionProfile rank_request_profile(const json& body) {
    if (!body.is_object()) jf::fail("$", "expected an object");
    const auto& prefs = jf::require(body, "preferences", "");
    if (!prefs.is_object()) jf::fail("preferences", "expected an object of slider values");
    std::vector<FieldIssue> shape;
    for (const auto& [key, value] : prefs.items()) {
        if (!value.is_number()) shape.push_back({"preferences." + key, "expected a number"});
    }
    for (const char* key : {"alpha", "beta"}) {
        if (body.contains(key) && !body.at(key).is_number()) shape.push_back({key, "expected a number"});
    }
    if (!shape.empty()) throw FieldError(ErrorCode::ParseError, std::move(shape));

    PerceptionProfile p;
    for (const auto& [key, value] : prefs.items()) p.preferences[key] = value.get<double>();
    p.alpha = jf::number_or(body, "alpha", "", p.alpha);
    p.beta = jf::number_or(body, "beta", "", p.beta);
    check_profile(p);
    return p;
}

json preview_json(const Configuration& c, const TaskSpec& t, std::size_t theta, double seconds_per_channel,
                  double dt) {
    const auto signal = nearest_signal(c, t, theta);
    RenderOptions options;
    options.dt = dt;
    const auto tl = render_timeline(c, signal, seconds_per_channel, options);
    json levels = json::array();
    for (std::size_t k = 0; k < c.channels.size(); ++k) {
        levels.push_back(c.channels[k].levels[static_cast<std::size_t>(signal.indices[k])]);
    }
    json tracks = json::array();
    for (const auto& s : tl.tracks) tracks.push_back({{"id", s.id}, {"values_kPa", s.values}});
    return json{{"configuration_id", c.id},
                {"task_id", t.id},
                {"theta", t.unflatten(theta)},
                {"signal", {{"indices", signal.indices}, {"coords", signal.coords}, {"levels", levels}}},
                {"seconds_per_channel", tl.seconds_per_channel},
                {"dt_s", dt},
                {"times_s", tl.times},
                {"tracks", tracks},
                {"area_onsets_s", tl.area_onsets}};
}

namespace {

std::string study_csv(const StudyReport& r) {
    std::ostringstream out;
    write_trials_csv(out, r);
    return out.str();
}

json error_body(const std::string& code, const std::string& message, const std::vector<FieldIssue>& issues = {}) {
    json fields = json::array();
    for (const auto& i : issues) fields.push_back({{"field", i.field}, {"message", i.message}});
    return json{{"error", code}, {"message", message}, {"fields", fields}};
}

ApiResponse respond(int status, const json& body) { return {status, body.dump(2) + "\n"}; }

// Runs a handler and maps failures: a body that is not JSON at all is 400,
// unknown ids 404, and any document the domain rejects (wrong types included)
// 422 with the offending fields.
template <typename F>
ApiResponse guarded(F&& f) {
    try {
        return f();
    } catch (const json::parse_error& e) {
        return respond(400, error_body("ParseError", std::string("malformed JSON: ") + e.what()));
    } catch (const json::exception& e) {
        return respond(422, error_body("ParseError", e.what()));
    } catch (const NotFound& e) {
        return respond(404, error_body("NotFound", e.what(), {{e.field(), e.what()}}));
    } catch (const FieldError& e) {
        return respond(422, error_body(to_string(e.code()), e.what(), e.issues()));
    } catch (const Error& e) {
        return respond(422, error_body(to_string(e.code()), e.what()));
    }
}

json parse_body(const std::string& body) {
    return json::parse(body);  // an empty body is a parse error too
}

Bits parse_code(const std::string& text, const std::string& field) {
    Bits bits;
    for (char ch : text) {
        if (ch != '0' && ch != '1') jf::fail(field, "expected a string of 0 and 1");
        bits.push_back(ch == '1');
    }
    if (bits.empty()) jf::fail(field, "expected a string of 0 and 1");
    return bits;
}

std::size_t theta_from_json(const json& body, const TaskSpec& t) {
    const auto& v = jf::require(body, "theta", "");
    if (v.is_number_integer()) {
        const auto flat = v.get<long long>();
        if (flat < 0 || static_cast<std::size_t>(flat) >= t.size()) {
            throw FieldError(ErrorCode::InvalidArgument, {{"theta", "index outside the task's " + std::to_string(t.size()) + " values"}});
        }
        return static_cast<std::size_t>(flat);
    }
    if (!v.is_array()) jf::fail("theta", "expected one integer per task axis, or a flat index");
    if (v.size() != t.axes.size()) {
        jf::fail("theta", "expected " + std::to_string(t.axes.size()) + " axis values");
    }
    std::vector<int> values;
    std::vector<FieldIssue> issues;
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (!v[j].is_number_integer()) jf::fail(jf::index("theta", j), "expected an integer");
        const int x = v[j].get<int>();
        if (x < 0 || x >= t.axes[j]) {
            issues.push_back({jf::index("theta", j), "must lie in 0.." + std::to_string(t.axes[j] - 1)});
        }
        values.push_back(x);
    }
    if (!issues.empty()) throw FieldError(ErrorCode::InvalidArgument, std::move(issues));
    return t.flatten(values);
}

} // namespace

std::string verify_study_run(const RunStore& store, const std::string& id) {
    const auto manifest = store.manifest(id);
    if (!manifest) return "no run '" + id + "'";
    if (manifest->value("kind", "") != "study") return "run '" + id + "' is not a study";
    const auto& inputs = manifest->at("inputs");
    const auto catalog = catalog_from_json(inputs.at("catalog"));
    const auto sc = study_config_from_json(inputs.at("config"), catalog);
    const auto report = run_study(sc, enumerate_configurations(catalog, 2));
    const auto stored = store.read_output(id, "report.json");
    if (!stored) return "run '" + id + "' has no report.json";
    if (*stored != to_json(report).dump(2) + "\n") return "report.json differs from a fresh run";
    if (sc.record_trials) {
        const auto csv = store.read_output(id, "trials.csv");
        if (!csv || *csv != study_csv(report)) return "trials.csv differs from a fresh run";
    }
    return "";
}

Api::Api(ServiceCatalog catalog, std::shared_ptr<RunStore> store)
    : catalog_(std::move(catalog)), store_(std::move(store)) {}

Api::~Api() { wait_for_jobs(); }

void Api::wait_for_jobs() {
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(jobs_mutex_);
        workers.swap(workers_);
    }
    for (auto& w : workers) w.join();
}

ApiResponse Api::handle(const std::string& method, const std::string& path, const std::string& body) {
    if (method == "GET" && path == "/api/catalog") return catalog();
    if (method == "POST" && path == "/api/rank") return rank(body);
    if (method == "POST" && path == "/api/preview") return preview(body);
    if (method == "POST" && path == "/api/simulate") return simulate(body);
    if (method == "POST" && path == "/api/study/run") return study_run(body);
    const std::string prefix = "/api/study/";
    if (method == "GET" && path.rfind(prefix, 0) == 0 && path.size() > prefix.size()) {
        return study_get(path.substr(prefix.size()));
    }
    return respond(404, error_body("NotFound", "no endpoint " + method + " " + path));
}

ApiResponse Api::catalog() const {
    json configs = json::array();
    for (const auto& c : catalog_.configurations) configs.push_back(to_json(c));
    json tasks = json::array();
    for (const auto& t : catalog_.tasks) tasks.push_back(to_json(t));
    auto body = catalog_to_json(catalog_.modalities);
    body["configurations"] = configs;
    body["tasks"] = tasks;
    body["defaults"] = {{"alpha", 0.25}, {"beta", 8.0}};
    return respond(200, body);
}

ApiResponse Api::rank(const std::string& body) const {
    return guarded([&] {
        const auto j = parse_body(body);
        const auto profile = rank_request_profile(j);
        const auto& task = catalog_.task(jf::string(j, "task_id", ""));
        return ApiResponse{200, ranking_payload(catalog_, task, profile)};
    });
}

ApiResponse Api::preview(const std::string& body) const {
    return guarded([&] {
        const auto j = parse_body(body);
        const auto& config = catalog_.configuration(jf::string(j, "configuration_id", ""));
        const auto& task = catalog_.task(j.contains("task_id") ? jf::string(j, "task_id", "") : "search");
        const double window = jf::number_or(j, "seconds_per_channel", "", 3.0);
        const double dt = jf::number_or(j, "dt_s", "", 1e-3);
        std::vector<FieldIssue> issues;
        if (!(window > 0.0 && window <= 60.0)) issues.push_back({"seconds_per_channel", "must lie in (0, 60]"});
        if (!(dt >= 1e-4 && dt <= 0.1)) issues.push_back({"dt_s", "must lie in [1e-4, 0.1]"});
        if (!issues.empty()) throw FieldError(ErrorCode::InvalidArgument, std::move(issues));
        return respond(200, preview_json(config, task, theta_from_json(j, task), window, dt));
    });
}

ApiResponse Api::simulate(const std::string& body) const {
    return guarded([&] {
        const auto j = parse_body(body);
        const auto netlist = netlist_from_json(jf::require(j, "netlist", ""));
        SimConfig cfg;
        cfg.duration = jf::number_or(j, "duration_s", "", 3.0);
        cfg.dt = jf::number_or(j, "dt_s", "", cfg.dt);
        cfg.loss_multiplier = jf::number_or(j, "loss_multiplier", "", cfg.loss_multiplier);
        if (!(cfg.duration > 0.0 && cfg.duration <= 60.0)) {
            throw FieldError(ErrorCode::InvalidArgument, {{"duration_s", "must lie in (0, 60]"}});
        }
        const auto every = j.contains("sample_every") ? jf::integer(j, "sample_every", "") : 10;
        if (every < 1) throw FieldError(ErrorCode::InvalidArgument, {{"sample_every", "must be >= 1"}});

        Schedule schedule;
        if (j.contains("schedule")) schedule = schedule_from_json(j.at("schedule"));
        if (j.contains("code")) schedule = code_schedule(netlist, parse_code(jf::string(j, "code", ""), "code"));
        const auto trace = fluidrank::simulate(netlist, schedule, cfg);

        const auto stride = static_cast<std::size_t>(every);
        auto thin = [&](const auto& values) {
            json out = json::array();
            for (std::size_t i = 0; i < values.size(); i += stride) out.push_back(values[i]);
            return out;
        };
        json probes = json::object(), valves = json::object(), final_values = json::object();
        for (const auto& s : trace.probes) {
            probes[s.id] = thin(s.values);
            final_values[s.id] = s.values.back();
        }
        for (const auto& s : trace.valves) valves[s.id] = thin(s.values);
        return respond(200, json{{"times_s", thin(trace.times)},
                                 {"probes_kPa", probes},
                                 {"valve_states", valves},
                                 {"final_probe_kPa", final_values}});
    });
}

ApiResponse Api::study_run(const std::string& body) {
    return guarded([&] {
        const auto j = parse_body(body);
        auto sc = study_config_from_json(j, catalog_.modalities);
        const double total = static_cast<double>(sc.trials_per_config) * static_cast<double>(sc.profiles.size()) *
                             static_cast<double>(sc.tasks.size()) * static_cast<double>(catalog_.configurations.size());
        if (total > 5e7) {
            throw FieldError(ErrorCode::InvalidStudyConfig,
                             {{"trials_per_config", "study too large for the service (more than 5e7 trials)"}});
        }
        const json inputs{{"config", to_json(sc)}, {"catalog", catalog_to_json(catalog_.modalities)}};
        const auto id = store_->create_run("study", inputs);
        std::lock_guard lock(jobs_mutex_);
        jobs_[id] = Job{"running", nullptr};
        workers_.emplace_back([this, id, sc = std::move(sc)] {
            Job done{"done", nullptr};
            try {
                const auto report = run_study(sc, catalog_.configurations);
                if (sc.record_trials) store_->write_output(id, "trials.csv", study_csv(report));
                store_->write_output(id, "report.json", to_json(report).dump(2) + "\n");
            } catch (const Error& e) {
                done = Job{"failed", error_body(to_string(e.code()), e.what())};
            } catch (const std::exception& e) {
                done = Job{"failed", error_body("Internal", e.what())};
            }
            std::lock_guard inner(jobs_mutex_);
            jobs_[id] = std::move(done);
        });
        return respond(202, json{{"id", id}, {"status", "running"}});
    });
}

ApiResponse Api::study_get(const std::string& id) const {
    {
        std::lock_guard lock(jobs_mutex_);
        auto it = jobs_.find(id);
        if (it != jobs_.end() && it->second.status != "done") {
            json body{{"id", id}, {"status", it->second.status}};
            if (!it->second.error.is_null()) body["error"] = it->second.error;
            return respond(200, body);
        }
    }
    // Finished jobs and runs from earlier sessions are served from the store.
    const auto report = store_->read_output(id, "report.json");
    if (!report) {
        if (store_->exists(id)) return respond(200, json{{"id", id}, {"status", "incomplete"}});
        return respond(404, error_body("NotFound", "unknown study '" + id + "'", {{"id", "unknown study"}}));
    }
    return respond(200, json{{"id", id}, {"status", "done"}, {"report", json::parse(*report)}});
}

struct HttpServer::Impl {
    Api& api;
    httplib::Server server;
    explicit Impl(Api& a) : api(a) {}
};

HttpServer::HttpServer(Api& api) : impl_(std::make_unique<Impl>(api)) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        const auto r = impl_->api.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    impl_->server.Get(R"(/api/.*)", forward);
    impl_->server.Post(R"(/api/.*)", forward);
    // The console is served from another origin during development.
    impl_->server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    impl_->server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

} // namespace fluidrank
