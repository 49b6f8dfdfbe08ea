#pragma once

#include "fluidrank/error.hpp"
#include "fluidrank/modality.hpp"
#include "fluidrank/perception.hpp"
#include "fluidrank/run_store.hpp"
#include "fluidrank/study.hpp"
#include "fluidrank/task.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fluidrank {

/// Immutable catalog shared by every request.
struct ServiceCatalog {
    std::vector<Modality> modalities;
    std::vector<Configuration> configurations;
    std::vector<TaskSpec> tasks;

    static ServiceCatalog defaults();
    static ServiceCatalog from_modalities(std::vector<Modality> modalities);

    /// Throws NotFound for an unknown id.
    const TaskSpec& task(const std::string& id) const;
    const Configuration& configuration(const std::string& id) const;
};

/// Unknown id; the service answers 404.
class NotFound : public std::runtime_error {
public:
    NotFound(std::string field, const std::string& message) : std::runtime_error(message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Throws FieldError(MissingPreference) naming every catalog modality that
/// has no slider value.
void require_preferences(const ServiceCatalog& catalog, const PerceptionProfile& p);

/// Ranking of every catalog configuration, serialized exactly as both the CLI
/// and POST /api/rank emit it.
std::string ranking_payload(const ServiceCatalog& catalog, const TaskSpec& task, const PerceptionProfile& p);

/// Parses the POST /api/rank body {preferences, alpha, beta, task_id}.
PerceptionProfile rank_request_profile(const nlohmann::json& body);

/// Timeline for task value `theta` rendered through its nearest signal point.
nlohmann::json preview_json(const Configuration& c, const TaskSpec& t, std::size_t theta,
                            double seconds_per_channel = 3.0, double dt = 1e-3);

/// Reruns a persisted study from its manifest and compares the fresh report
/// with the stored bytes. Returns an empty string on success, otherwise what
/// differed.
std::string verify_study_run(const RunStore& store, const std::string& id);

struct ApiResponse {
    int status = 200;
    std::string body;
};

/// Transport-independent request handling. All methods are safe to call from
/// concurrent threads.
class Api {
public:
    Api(ServiceCatalog catalog, std::shared_ptr<RunStore> store);
    ~Api();

    Api(const Api&) = delete;
    Api& operator=(const Api&) = delete;

    ApiResponse handle(const std::string& method, const std::string& path, const std::string& body);

    ApiResponse catalog() const;
    ApiResponse rank(const std::string& body) const;
    ApiResponse preview(const std::string& body) const;
    ApiResponse simulate(const std::string& body) const;
    ApiResponse study_run(const std::string& body);
    ApiResponse study_get(const std::string& id) const;

    /// Blocks until every background study has finished.
    void wait_for_jobs();

private:
    struct Job {
        std::string status;  // running, done, failed
        nlohmann::json error;
    };

    ServiceCatalog catalog_;
    std::shared_ptr<RunStore> store_;
    mutable std::mutex jobs_mutex_;
    std::map<std::string, Job> jobs_;
    std::vector<std::thread> workers_;
};

/// HTTP binding of Api.
class HttpServer {
public:
    explicit HttpServer(Api& api);
    ~HttpServer();

    /// Binds to `port` (0 picks a free port) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Call after bind().
    bool serve();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace fluidrank
