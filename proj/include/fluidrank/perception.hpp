#pragma once

#include "fluidrank/modality.hpp"
#include "fluidrank/task.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fluidrank {

/// Human side of the channel.
struct PerceptionProfile {
    double beta = 8.0;                          // overall sensitivity
    std::map<std::string, double> preferences;  // slider value per modality name, in [0, 1]
    double alpha = 0.25;                        // saliency floor, in (0, 1)
    /// Multiplies every saliency weight. Only the products beta * W enter the
    /// model, so (beta, scale) and (c * beta, scale / c) are equivalent.
    double saliency_scale = 1.0;
    Normalization normalization = Normalization::Index;
};

/// Throws FieldError(InvalidArgument) naming each out-of-range field.
void check_profile(const PerceptionProfile& p);

/// Every catalog modality at the same slider value.
PerceptionProfile uniform_profile(const std::vector<Modality>& catalog, double preference = 1.0, double beta = 8.0);

/// Diagonal of W: (P + alpha) / (1 + alpha) per channel, times saliency_scale.
/// Throws Error(MissingPreference) when a channel's modality has no slider value.
std::vector<double> saliency_matrix(const PerceptionProfile& p, const Configuration& c);

/// Throws Error(ConfigurationMismatch) unless the configuration has one channel
/// per task axis and its assignment is a bijection.
void check_binding(const Configuration& c, const TaskSpec& t);

/// h(theta): per channel, the assigned axis value mapped to theta_j / (K_j - 1).
std::vector<double> expectation(const Configuration& c, const TaskSpec& t, std::size_t theta);

/// Row-stochastic table p(s | theta) over the whole signal space.
struct LikelihoodTable {
    std::size_t theta_count = 0;
    std::size_t signal_count = 0;
    std::vector<double> values;  // theta-major
    std::vector<SignalPoint> signals;

    double at(std::size_t theta, std::size_t s) const { return values[theta * signal_count + s]; }
    std::span<const double> row(std::size_t theta) const {
        return {values.data() + theta * signal_count, signal_count};
    }
};

/// p(s | theta) proportional to exp(-beta * sum_k W_kk (h_k(theta) - s_k)^2),
/// normalized over the signal space. Evaluated with the row maximum factored
/// out so extreme beta stays finite.
LikelihoodTable likelihood_table(const Configuration& c, const TaskSpec& t, const PerceptionProfile& p);

std::size_t signal_index(const Configuration& c, const SignalPoint& s);

double likelihood(const SignalPoint& s, std::size_t theta, const Configuration& c, const TaskSpec& t,
                  const PerceptionProfile& p);

/// Encoder: per channel, the level whose normalized coordinate is nearest to
/// h(theta), ties toward the lower level.
SignalPoint nearest_signal(const Configuration& c, const TaskSpec& t, std::size_t theta,
                           Normalization mode = Normalization::Index);

enum class DecodeMode { Map, Sample };

const char* to_string(DecodeMode m);

struct Decoded {
    std::size_t theta = 0;
    std::vector<double> posterior;
};

/// Posterior proportional to prior(theta) * p(s | theta). Map mode returns the
/// lowest-index maximizer; sample mode draws from the posterior with `seed`.
Decoded decode(const LikelihoodTable& table, const TaskSpec& t, std::size_t signal, DecodeMode mode,
               std::uint64_t seed = 0);

Decoded decode(const SignalPoint& s, const Configuration& c, const TaskSpec& t, const PerceptionProfile& p,
               DecodeMode mode, std::uint64_t seed = 0);

/// Preference document: {"pressure": 0.8, ..., "alpha": 0.25, "beta": 8.0}.
/// Keys other than alpha, beta, saliency_scale and normalization are slider
/// values. Shape problems throw FieldError(ParseError); range problems throw
/// FieldError(InvalidArgument).
PerceptionProfile profile_from_json(const nlohmann::json& j, const std::string& path = "");
nlohmann::json to_json(const PerceptionProfile& p);

} // namespace fluidrank
