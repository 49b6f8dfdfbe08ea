#include "fluidrank/info_rank.hpp"

#include "fluidrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace fluidrank {

using nlohmann::json;

namespace {

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

std::vector<double> marginal(const LikelihoodTable& table, const TaskSpec& t) {
    if (t.prior.size() != table.theta_count) throw Error(ErrorCode::ConfigurationMismatch, "prior does not match table");
    std::vector<double> ps(table.signal_count, 0.0);
    for (std::size_t theta = 0; theta < table.theta_count; ++theta) {
        const double w = t.prior[theta];
        if (w == 0.0) continue;
        auto row = table.row(theta);
        for (std::size_t s = 0; s < table.signal_count; ++s) ps[s] += w * row[s];
    }
    return ps;
}

} // namespace

double marginal_entropy(const LikelihoodTable& table, const TaskSpec& t) {
    double h = 0.0;
    for (double p : marginal(table, t)) h -= xlogx(p);
    return h;
}

double conditional_entropy(const LikelihoodTable& table, const TaskSpec& t) {
    if (t.prior.size() != table.theta_count) throw Error(ErrorCode::ConfigurationMismatch, "prior does not match table");
    double h = 0.0;
    for (std::size_t theta = 0; theta < table.theta_count; ++theta) {
        double row_h = 0.0;
        for (double p : table.row(theta)) row_h -= xlogx(p);
        h += t.prior[theta] * row_h;
    }
    return h;
}

double mutual_information_kl(const LikelihoodTable& table, const TaskSpec& t) {
    const auto ps = marginal(table, t);
    double mi = 0.0;
    for (std::size_t theta = 0; theta < table.theta_count; ++theta) {
        const double w = t.prior[theta];
        if (w == 0.0) continue;
        auto row = table.row(theta);
        for (std::size_t s = 0; s < table.signal_count; ++s) {
            if (row[s] > 0.0) mi += w * row[s] * std::log(row[s] / ps[s]);
        }
    }
    return std::max(0.0, mi);
}

InformationBreakdown information(const LikelihoodTable& table, const TaskSpec& t) {
    InformationBreakdown b;
    b.marginal_entropy = marginal_entropy(table, t);
    b.conditional_entropy = conditional_entropy(table, t);
    b.mutual_information = std::max(0.0, b.marginal_entropy - b.conditional_entropy);
    b.mutual_information_kl = mutual_information_kl(table, t);
    return b;
}

double marginal_entropy(const Configuration& c, const TaskSpec& t, const PerceptionProfile& p) {
    return marginal_entropy(likelihood_table(c, t, p), t);
}

double conditional_entropy(const Configuration& c, const TaskSpec& t, const PerceptionProfile& p) {
    return conditional_entropy(likelihood_table(c, t, p), t);
}

double mutual_information(const Configuration& c, const TaskSpec& t, const PerceptionProfile& p) {
    return information(likelihood_table(c, t, p), t).mutual_information;
}

double first_term_approximation(const Configuration& c, std::size_t n_configs) {
    return std::log(static_cast<double>(signal_space_size(c)) * static_cast<double>(n_configs));
}

RankingReport rank_configurations(const std::vector<Configuration>& configs, const TaskSpec& t,
                                  const PerceptionProfile& p) {
    if (configs.empty()) throw Error(ErrorCode::InvalidArgument, "no configurations to rank");
    check_task(t);
    check_profile(p);

    RankingReport report;
    report.task_id = t.id;
    report.task_entropy = t.entropy();
    for (const auto& c : configs) {
        const auto table = likelihood_table(c, t, p);
        RankingRow row;
        row.configuration_id = c.id;
        row.family = c.family;
        for (std::size_t k = 0; k < c.channels.size(); ++k) {
            row.channels.push_back(c.channels[k].name);
            row.assigned_axes.push_back(t.axis_names.empty() ? "axis" + std::to_string(c.assignment[k])
                                                             : t.axis_names[static_cast<std::size_t>(c.assignment[k])]);
        }
        row.signal_count = table.signal_count;
        row.info = information(table, t);
        row.first_term_approximation = first_term_approximation(c, configs.size());
        report.rows.push_back(std::move(row));
    }

    // Sort by value, then walk the sorted list grouping neighbours within the
    // tolerance and order each group by id.
    auto& rows = report.rows;
    std::stable_sort(rows.begin(), rows.end(), [](const RankingRow& a, const RankingRow& b) {
        return a.info.mutual_information > b.info.mutual_information;
    });
    for (std::size_t begin = 0; begin < rows.size();) {
        std::size_t end = begin + 1;
        while (end < rows.size() &&
               rows[end - 1].info.mutual_information - rows[end].info.mutual_information <= kRankTieTolerance) {
            ++end;
        }
        std::sort(rows.begin() + static_cast<std::ptrdiff_t>(begin), rows.begin() + static_cast<std::ptrdiff_t>(end),
                  [](const RankingRow& a, const RankingRow& b) { return a.configuration_id < b.configuration_id; });
        begin = end;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = static_cast<int>(i + 1);
    return report;
}

const RankingRow* find_row(const RankingReport& r, const std::string& configuration_id) {
    for (const auto& row : r.rows) {
        if (row.configuration_id == configuration_id) return &row;
    }
    return nullptr;
}

json to_json(const RankingReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({
            {"rank", row.rank},
            {"configuration_id", row.configuration_id},
            {"family", row.family},
            {"channels", row.channels},
            {"assigned_axes", row.assigned_axes},
            {"signal_count", row.signal_count},
            {"mutual_information_nats", row.info.mutual_information},
            {"mutual_information_bits", row.info.mutual_information / std::numbers::ln2},
            {"mutual_information_kl_nats", row.info.mutual_information_kl},
            {"marginal_entropy_nats", row.info.marginal_entropy},
            {"conditional_entropy_nats", row.info.conditional_entropy},
            {"diagnostics", {{"first_term_approximation_nats", row.first_term_approximation}}},
        });
    }
    return json{{"task_id", r.task_id}, {"task_entropy_nats", r.task_entropy}, {"rankings", rows}};
}

std::string format_ranking_table(const RankingReport& r) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-4s  %-6s  %-22s  %10s  %10s\n", "rank", "config", "axes", "MI (nats)",
                  "MI (bits)");
    out << line;
    for (const auto& row : r.rows) {
        std::string axes;
        for (std::size_t k = 0; k < row.channels.size(); ++k) {
            if (k) axes += ", ";
            axes += row.channels[k] + "=" + row.assigned_axes[k];
        }
        std::snprintf(line, sizeof line, "%-4d  %-6s  %-22s  %10.6f  %10.6f\n", row.rank, row.configuration_id.c_str(),
                      axes.c_str(), row.info.mutual_information, row.info.mutual_information / std::numbers::ln2);
        out << line;
    }
    return out.str();
}

} // namespace fluidrank
