#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace fluidrank {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Persisted runs. Each run is a folder `<UTC timestamp>-<kind>-<hash>` where
/// the hash covers the inputs only, holding manifest.json and the outputs it
/// lists. Writes go through one mutex, so concurrent requests are safe.
class RunStore {
public:
    explicit RunStore(std::filesystem::path root);

    /// FLUIDRANK_STORE when set, otherwise ./runs.
    static std::filesystem::path default_root();

    const std::filesystem::path& root() const { return root_; }

    /// Creates the folder and a manifest recording `inputs`. Returns the run id.
    std::string create_run(const std::string& kind, const nlohmann::json& inputs);

    /// Writes an output file and lists it, with size and hash, in the manifest.
    void write_output(const std::string& id, const std::string& name, const std::string& content);

    bool exists(const std::string& id) const;
    std::optional<nlohmann::json> manifest(const std::string& id) const;
    std::optional<std::string> read_output(const std::string& id, const std::string& name) const;

private:
    std::filesystem::path dir(const std::string& id) const;
    void write_manifest(const std::string& id, const nlohmann::json& m);

    std::filesystem::path root_;
    mutable std::mutex mutex_;
};

} // namespace fluidrank
