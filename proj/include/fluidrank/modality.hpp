#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace fluidrank {

enum class ModalityKind { Pressure, Frequency, Area };

const char* to_string(ModalityKind kind);

/// One physical axis of haptic variation and its discrete levels: kPa for
/// pressure, Hz for frequency, pouch count for area.
struct Modality {
    std::string name;  // preference key, e.g. "pressure"
    std::string code;  // single-letter tag used in configuration ids
    ModalityKind kind = ModalityKind::Pressure;
    std::vector<double> levels;

    int level_count() const { return static_cast<int>(levels.size()); }
    bool operator==(const Modality&) const = default;
};

void check_modality(const Modality& m);

Modality default_pressure_modality();
Modality default_frequency_modality();
Modality default_area_modality();

/// Catalog order is pressure, area, frequency, so the pair families read PA,
/// PF and AF.
std::vector<Modality> default_modalities();

/// Ordered modality channels. Channel k is rendered in time window k and
/// encodes task axis assignment[k].
struct Configuration {
    std::string id;      // channel codes in channel order, e.g. "AP"
    std::string family;  // channel codes in catalog order, e.g. "PA"
    std::vector<Modality> channels;
    std::vector<int> assignment;

    std::size_t dimension() const { return channels.size(); }
    bool operator==(const Configuration&) const = default;
};

void check_configuration(const Configuration& c);

/// All ordered selections of d distinct modalities, in lexicographic order of
/// catalog indices. Throws Error(InsufficientModalities) when d exceeds the
/// catalog size.
std::vector<Configuration> enumerate_configurations(const std::vector<Modality>& modalities, int d);

/// Looks up a configuration by id. Throws Error(InvalidArgument) if missing.
const Configuration& find_configuration(const std::vector<Configuration>& configs, const std::string& id);

enum class Normalization { Index, Physical };

const char* to_string(Normalization n);

struct SignalPoint {
    std::vector<int> indices;
    std::vector<double> coords;  // per channel, in [0, 1]

    bool operator==(const SignalPoint&) const = default;
};

/// Normalized coordinate of a level: index/(L-1), or (v - v_min)/(v_max - v_min)
/// under physical normalization. Endpoints are exactly 0 and 1.
double normalized_level(const Modality& m, int index, Normalization mode = Normalization::Index);

SignalPoint make_signal_point(const Configuration& c, std::vector<int> indices,
                              Normalization mode = Normalization::Index);

/// Cartesian product of channel levels, channel 0 most significant.
std::vector<SignalPoint> signal_space(const Configuration& c, Normalization mode = Normalization::Index);

std::size_t signal_space_size(const Configuration& c);

nlohmann::json to_json(const Modality& m);
Modality modality_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const Configuration& c);

/// Catalog file: {"modalities": [{"name", "code", "kind", "levels"}...]}.
nlohmann::json catalog_to_json(const std::vector<Modality>& modalities);
std::vector<Modality> catalog_from_json(const nlohmann::json& j);
std::vector<Modality> load_catalog(const std::string& path);

} // namespace fluidrank
