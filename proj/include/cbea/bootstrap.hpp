#pragma once
// Uncertainty estimates: paired percentile bootstrap over fixtures and a
// case-cluster bootstrap over judge winner selections (both judge rows of a
// sampled case always travel together).

#include <algorithm>
#include <array>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cbea/core.hpp"

namespace cbea {

struct PairedSample {
    std::string fixture_id;
    double delta = 0.0;  // method A minus method B on one surface
};

struct BootstrapInterval {
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

namespace detail {

inline double percentile(std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace detail

inline BootstrapInterval paired_bootstrap(const std::vector<PairedSample>& samples,
                                          int resamples, double alpha,
                                          std::uint64_t seed = 17) {
    if (samples.empty()) throw EmptySamplesError("paired bootstrap over empty sample set");
    if (resamples < 1000) throw Error("paired bootstrap needs >= 1000 resamples");

    double sum = 0.0;
    for (const auto& s : samples) sum += s.delta;

    Rng rng(seed);
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(resamples));
    const std::size_t n = samples.size();
    for (int b = 0; b < resamples; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += samples[rng.pick(n)].delta;
        stats.push_back(acc / static_cast<double>(n));
    }
    std::sort(stats.begin(), stats.end());

    BootstrapInterval out;
    out.mean = sum / static_cast<double>(n);
    out.ci_low = detail::percentile(stats, alpha / 2.0);
    out.ci_high = detail::percentile(stats, 1.0 - alpha / 2.0);
    return out;
}

// ---------------------------------------------------------------------------

enum class Winner { cbea, raw, validator, tie };

inline const char* to_string(Winner w) {
    switch (w) {
        case Winner::cbea: return "cbea";
        case Winner::raw: return "raw";
        case Winner::validator: return "validator";
        case Winner::tie: return "tie";
    }
    return "?";
}

inline std::optional<Winner> winner_from(const std::string& s) {
    for (auto w : {Winner::cbea, Winner::raw, Winner::validator, Winner::tie})
        if (s == to_string(w)) return w;
    return std::nullopt;
}

struct WinnerRow {
    std::string case_id;
    std::string judge_id;
    Winner winner = Winner::tie;
};

struct WinnerTable {
    std::vector<WinnerRow> rows;
};

namespace detail {

struct CasePair {
    Winner first;
    Winner second;
};

inline std::vector<CasePair> pair_cases(const WinnerTable& table) {
    std::map<std::string, std::vector<Winner>> by_case;
    for (const auto& r : table.rows) by_case[r.case_id].push_back(r.winner);
    std::vector<CasePair> out;
    for (const auto& [case_id, winners] : by_case) {
        if (winners.size() != 2)
            throw UnpairedCaseError("case " + case_id + " has " +
                                    std::to_string(winners.size()) + " judge rows");
        out.push_back({winners[0], winners[1]});
    }
    return out;
}

}  // namespace detail

struct ClusterBootstrapReport {
    std::map<Winner, BootstrapInterval> shares;
    BootstrapInterval margin;  // cbea share minus raw share
};

inline ClusterBootstrapReport case_cluster_bootstrap(const WinnerTable& table, int resamples,
                                                     double alpha, std::uint64_t seed = 17) {
    const auto cases = detail::pair_cases(table);
    if (cases.empty()) throw EmptySamplesError("winner table has no cases");
    if (resamples < 1000) throw Error("cluster bootstrap needs >= 1000 resamples");

    const std::size_t n = cases.size();
    auto shares_of = [&](const std::vector<detail::CasePair>& sample) {
        std::array<double, 4> counts = {0, 0, 0, 0};
        for (const auto& c : sample) {
            counts[static_cast<std::size_t>(c.first)] += 1.0;
            counts[static_cast<std::size_t>(c.second)] += 1.0;
        }
        const double total = 2.0 * static_cast<double>(sample.size());
        for (auto& x : counts) x /= total;
        return counts;
    };

    const auto observed = shares_of(cases);

    Rng rng(seed);
    std::array<std::vector<double>, 4> dist;
    std::vector<double> margin_dist;
    for (int b = 0; b < resamples; ++b) {
        std::vector<detail::CasePair> sample;
        sample.reserve(n);
        for (std::size_t i = 0; i < n; ++i) sample.push_back(cases[rng.pick(n)]);
        const auto s = shares_of(sample);
        for (std::size_t k = 0; k < 4; ++k) dist[k].push_back(s[k]);
        margin_dist.push_back(s[0] - s[1]);
    }

    ClusterBootstrapReport out;
    for (auto w : {Winner::cbea, Winner::raw, Winner::validator, Winner::tie}) {
        auto& d = dist[static_cast<std::size_t>(w)];
        std::sort(d.begin(), d.end());
        BootstrapInterval iv;
        iv.mean = observed[static_cast<std::size_t>(w)];
        iv.ci_low = detail::percentile(d, alpha / 2.0);
        iv.ci_high = detail::percentile(d, 1.0 - alpha / 2.0);
        out.shares[w] = iv;
    }
    std::sort(margin_dist.begin(), margin_dist.end());
    out.margin.mean = observed[0] - observed[1];
    out.margin.ci_low = detail::percentile(margin_dist, alpha / 2.0);
    out.margin.ci_high = detail::percentile(margin_dist, 1.0 - alpha / 2.0);
    return out;
}

// Case-level exact agreement between the two judges.
inline double winner_exact_agreement(const WinnerTable& table) {
    const auto cases = detail::pair_cases(table);
    if (cases.empty()) throw EmptySamplesError("winner table has no cases");
    std::size_t agree = 0;
    for (const auto& c : cases)
        if (c.first == c.second) ++agree;
    return static_cast<double>(agree) / static_cast<double>(cases.size());
}

struct LabelAgreement {
    double exact = 0.0;
    double within_one = 0.0;
};

// Exact / within-1 agreement over paired 0-2 rubric labels.
inline LabelAgreement label_agreement(const std::vector<std::pair<int, int>>& pairs) {
    if (pairs.empty()) throw EmptySamplesError("no label pairs");
    std::size_t exact = 0, close = 0;
    for (const auto& [a, b] : pairs) {
        if (a == b) ++exact;
        if (std::abs(a - b) <= 1) ++close;
    }
    LabelAgreement out;
    out.exact = static_cast<double>(exact) / static_cast<double>(pairs.size());
    out.within_one = static_cast<double>(close) / static_cast<double>(pairs.size());
    return out;
}

// ---------------------------------------------------------------------------
// CSV: case_id,judge_id,winner

inline WinnerTable parse_winner_csv(const std::string& text) {
    WinnerTable out;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        for (char ch : line + ",") {
            if (ch == ',') {
                cells.push_back(cell);
                cell.clear();
            } else if (ch != '\r') {
                cell.push_back(ch);
            }
        }
        if (first && cells.size() >= 3 && cells[0] == "case_id") {
            first = false;
            continue;
        }
        first = false;
        if (cells.size() < 3) throw Error("bad winner csv row: " + line);
        const auto w = winner_from(cells[2]);
        if (!w) throw Error("unknown winner label: " + cells[2]);
        out.rows.push_back({cells[0], cells[1], *w});
    }
    return out;
}

inline std::string winner_table_to_csv(const WinnerTable& table) {
    std::string out = "case_id,judge_id,winner\n";
    for (const auto& r : table.rows)
        out += r.case_id + "," + r.judge_id + "," + to_string(r.winner) + "\n";
    return out;
}

inline std::vector<PairedSample> parse_delta_csv(const std::string& text) {
    std::vector<PairedSample> out;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error("bad delta csv row: " + line);
        const std::string id = line.substr(0, comma);
        if (first && id == "fixture_id") {
            first = false;
            continue;
        }
        first = false;
        out.push_back({id, std::stod(line.substr(comma + 1))});
    }
    return out;
}

}  // namespace cbea
