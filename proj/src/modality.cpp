#include "fluidrank/modality.hpp"

#include "fluidrank/error.hpp"
#include "fluidrank/json_fields.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace fluidrank {

namespace jf = json_fields;
using nlohmann::json;

const char* to_string(ModalityKind kind) {
    switch (kind) {
    case ModalityKind::Pressure: return "pressure";
    case ModalityKind::Frequency: return "frequency";
    case ModalityKind::Area: return "area";
    }
    return "?";
}

const char* to_string(Normalization n) { return n == Normalization::Index ? "index" : "physical"; }

void check_modality(const Modality& m) {
    auto bad = [&](const std::string& what) { throw Error(ErrorCode::InvalidArgument, "modality '" + m.name + "': " + what); };
    if (m.name.empty()) bad("name must not be empty");
    if (m.code.empty()) bad("code must not be empty");
    if (m.levels.size() < 2) bad("needs at least two levels");
    for (std::size_t i = 0; i < m.levels.size(); ++i) {
        if (!std::isfinite(m.levels[i]) || m.levels[i] < 0.0) bad("levels must be finite and non-negative");
        if (i > 0 && !(m.levels[i] > m.levels[i - 1])) bad("levels must be strictly increasing");
    }
    if (m.kind == ModalityKind::Area) {
        for (double v : m.levels) {
            if (v < 1.0 || v != std::floor(v)) bad("area levels are whole pouch counts >= 1");
        }
    }
}

Modality default_pressure_modality() { return Modality{"pressure", "P", ModalityKind::Pressure, {6.89, 13.79, 20.68, 27.58}}; }
Modality default_frequency_modality() { return Modality{"frequency", "F", ModalityKind::Frequency, {4.0, 7.0}}; }
Modality default_area_modality() { return Modality{"area", "A", ModalityKind::Area, {1.0, 2.0, 3.0}}; }

std::vector<Modality> default_modalities() {
    return {default_pressure_modality(), default_area_modality(), default_frequency_modality()};
}

void check_configuration(const Configuration& c) {
    if (c.channels.empty()) throw Error(ErrorCode::InvalidArgument, "configuration '" + c.id + "' has no channels");
    for (const auto& m : c.channels) check_modality(m);
    if (c.assignment.size() != c.channels.size()) {
        throw Error(ErrorCode::InvalidArgument, "configuration '" + c.id + "' assignment must have one entry per channel");
    }
    std::vector<int> sorted = c.assignment;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] != static_cast<int>(i)) {
            throw Error(ErrorCode::InvalidArgument, "configuration '" + c.id + "' assignment is not a permutation");
        }
    }
}

std::vector<Configuration> enumerate_configurations(const std::vector<Modality>& modalities, int d) {
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "configuration dimension must be >= 1");
    if (static_cast<std::size_t>(d) > modalities.size()) {
        throw Error(ErrorCode::InsufficientModalities, "cannot build " + std::to_string(d) + "-channel configurations from " +
                                                           std::to_string(modalities.size()) + " modalities");
    }
    for (const auto& m : modalities) check_modality(m);

    std::vector<Configuration> out;
    std::vector<int> chosen;
    std::vector<bool> taken(modalities.size(), false);
    auto rec = [&](auto& self) -> void {
        if (static_cast<int>(chosen.size()) == d) {
            Configuration c;
            std::vector<int> catalog_order = chosen;
            std::sort(catalog_order.begin(), catalog_order.end());
            for (int i : chosen) {
                c.id += modalities[static_cast<std::size_t>(i)].code;
                c.channels.push_back(modalities[static_cast<std::size_t>(i)]);
            }
            for (int i : catalog_order) c.family += modalities[static_cast<std::size_t>(i)].code;
            c.assignment.resize(static_cast<std::size_t>(d));
            std::iota(c.assignment.begin(), c.assignment.end(), 0);
            out.push_back(std::move(c));
            return;
        }
        for (std::size_t i = 0; i < modalities.size(); ++i) {
            if (taken[i]) continue;
            taken[i] = true;
            chosen.push_back(static_cast<int>(i));
            self(self);
            chosen.pop_back();
            taken[i] = false;
        }
    };
    rec(rec);
    return out;
}

const Configuration& find_configuration(const std::vector<Configuration>& configs, const std::string& id) {
    auto it = std::find_if(configs.begin(), configs.end(), [&](const Configuration& c) { return c.id == id; });
    if (it == configs.end()) throw Error(ErrorCode::InvalidArgument, "unknown configuration '" + id + "'");
    return *it;
}

double normalized_level(const Modality& m, int index, Normalization mode) {
    const int last = m.level_count() - 1;
    if (index < 0 || index > last) {
        throw Error(ErrorCode::InvalidArgument, "level " + std::to_string(index) + " is outside modality '" + m.name + "'");
    }
    if (index == 0) return 0.0;
    if (index == last) return 1.0;
    if (mode == Normalization::Index) return static_cast<double>(index) / static_cast<double>(last);
    const auto i = static_cast<std::size_t>(index);
    return (m.levels[i] - m.levels.front()) / (m.levels.back() - m.levels.front());
}

SignalPoint make_signal_point(const Configuration& c, std::vector<int> indices, Normalization mode) {
    if (indices.size() != c.channels.size()) {
        throw Error(ErrorCode::WidthMismatch, "signal point needs one level index per channel");
    }
    SignalPoint s;
    for (std::size_t k = 0; k < indices.size(); ++k) s.coords.push_back(normalized_level(c.channels[k], indices[k], mode));
    s.indices = std::move(indices);
    return s;
}

std::size_t signal_space_size(const Configuration& c) {
    std::size_t size = 1;
    for (const auto& m : c.channels) size *= static_cast<std::size_t>(m.level_count());
    return size;
}

std::vector<SignalPoint> signal_space(const Configuration& c, Normalization mode) {
    check_configuration(c);
    const std::size_t size = signal_space_size(c);
    std::vector<SignalPoint> out;
    out.reserve(size);
    std::vector<int> idx(c.channels.size(), 0);
    for (std::size_t n = 0; n < size; ++n) {
        out.push_back(make_signal_point(c, idx, mode));
        for (std::size_t k = idx.size(); k-- > 0;) {
            if (++idx[k] < c.channels[k].level_count()) break;
            idx[k] = 0;
        }
    }
    return out;
}

json to_json(const Modality& m) {
    return json{{"name", m.name}, {"code", m.code}, {"kind", to_string(m.kind)}, {"levels", m.levels}};
}

Modality modality_from_json(const json& j, const std::string& path) {
    Modality m;
    m.name = jf::string(j, "name", path);
    auto kind = jf::string(j, "kind", path);
    if (kind == "pressure") m.kind = ModalityKind::Pressure;
    else if (kind == "frequency") m.kind = ModalityKind::Frequency;
    else if (kind == "area") m.kind = ModalityKind::Area;
    else jf::fail(jf::join(path, "kind"), "unknown modality kind '" + kind + "'");
    m.code = j.contains("code") ? jf::string(j, "code", path) : std::string(1, static_cast<char>(std::toupper(m.name.front())));
    const auto& levels = jf::array(j, "levels", path);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!levels[i].is_number()) jf::fail(jf::index(jf::join(path, "levels"), i), "expected a number");
        m.levels.push_back(levels[i].get<double>());
    }
    return m;
}

json to_json(const Configuration& c) {
    json channels = json::array();
    for (const auto& m : c.channels) channels.push_back(m.name);
    return json{{"id", c.id}, {"family", c.family}, {"channels", channels}, {"assignment", c.assignment}};
}

json catalog_to_json(const std::vector<Modality>& modalities) {
    json list = json::array();
    for (const auto& m : modalities) list.push_back(to_json(m));
    return json{{"modalities", list}};
}

std::vector<Modality> catalog_from_json(const json& j) {
    const auto& list = jf::array(j, "modalities", "");
    std::vector<Modality> out;
    std::set<std::string> names, codes;
    for (std::size_t i = 0; i < list.size(); ++i) {
        auto m = modality_from_json(list[i], jf::index("modalities", i));
        if (!names.insert(m.name).second) jf::fail(jf::index("modalities", i), "duplicate modality name '" + m.name + "'");
        if (!codes.insert(m.code).second) jf::fail(jf::index("modalities", i), "duplicate modality code '" + m.code + "'");
        check_modality(m);
        out.push_back(std::move(m));
    }
    if (out.empty()) jf::fail("modalities", "catalog must list at least one modality");
    return out;
}

std::vector<Modality> load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open catalog '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    return catalog_from_json(j);
}

} // namespace fluidrank
