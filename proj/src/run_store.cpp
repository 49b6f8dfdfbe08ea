#include "fluidrank/run_store.hpp"

#include "fluidrank/error.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace fluidrank {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return out;
}

namespace {

std::string utc_stamp(bool compact) {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, compact ? "%Y%m%dT%H%M%SZ" : "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool safe_name(const std::string& s) {
    if (s.empty() || s == "." || s == "..") return false;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        if (!ok) return false;
    }
    return true;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + p.string() + "'");
    out << content;
}

std::optional<std::string> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

RunStore::RunStore(fs::path root) : root_(std::move(root)) {}

fs::path RunStore::default_root() {
    if (const char* env = std::getenv("FLUIDRANK_STORE"); env && *env) return env;
    return "runs";
}

fs::path RunStore::dir(const std::string& id) const {
    if (!safe_name(id)) throw Error(ErrorCode::InvalidArgument, "invalid run id '" + id + "'");
    return root_ / id;
}

std::string RunStore::create_run(const std::string& kind, const json& inputs) {
    const std::string hash = hex64(fnv1a64(inputs.dump()));
    std::lock_guard lock(mutex_);
    fs::create_directories(root_);
    const std::string base = utc_stamp(true) + "-" + kind + "-" + hash.substr(0, 10);
    std::string id = base;
    for (int n = 2; fs::exists(root_ / id); ++n) id = base + "-" + std::to_string(n);
    fs::create_directories(root_ / id);
    json m{{"id", id},
           {"kind", kind},
           {"created_utc", utc_stamp(false)},
           {"inputs_fnv1a64", hash},
           {"inputs", inputs},
           {"outputs", json::object()}};
    write_manifest(id, m);
    return id;
}

void RunStore::write_manifest(const std::string& id, const json& m) {
    const auto d = dir(id);
    write_file(d / "manifest.json.tmp", m.dump(2) + "\n");
    fs::rename(d / "manifest.json.tmp", d / "manifest.json");
}

void RunStore::write_output(const std::string& id, const std::string& name, const std::string& content) {
    if (!safe_name(name) || name == "manifest.json") throw Error(ErrorCode::InvalidArgument, "invalid output name '" + name + "'");
    std::lock_guard lock(mutex_);
    const auto d = dir(id);
    auto text = read_file(d / "manifest.json");
    if (!text) throw Error(ErrorCode::InvalidArgument, "no run '" + id + "'");
    write_file(d / name, content);
    auto m = json::parse(*text);
    m["outputs"][name] = {{"bytes", content.size()}, {"fnv1a64", hex64(fnv1a64(content))}};
    write_manifest(id, m);
}

bool RunStore::exists(const std::string& id) const {
    if (!safe_name(id)) return false;
    std::lock_guard lock(mutex_);
    return fs::exists(root_ / id / "manifest.json");
}

std::optional<json> RunStore::manifest(const std::string& id) const {
    if (!safe_name(id)) return std::nullopt;
    std::lock_guard lock(mutex_);
    auto text = read_file(root_ / id / "manifest.json");
    if (!text) return std::nullopt;
    return json::parse(*text);
}

std::optional<std::string> RunStore::read_output(const std::string& id, const std::string& name) const {
    if (!safe_name(id) || !safe_name(name)) return std::nullopt;
    std::lock_guard lock(mutex_);
    return read_file(root_ / id / name);
}

} // namespace fluidrank
