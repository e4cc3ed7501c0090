#pragma once
// Benchmark metrics with denominator discipline: every attempted run is
// classified exactly once, failure states are never dropped from rates, and
// empty denominators surface as explicit null-with-reason.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbea/commitment.hpp"
#include "cbea/fixtures.hpp"

namespace cbea {

struct OracleEval {
    std::optional<bool> hard_violation;       // v_f, emitted rows only
    std::optional<bool> coverage_failure;     // emitted rows only
    std::optional<bool> witness_drop;         // emitted rows only
    std::optional<bool> consequence_failure;  // emitted rows only
    std::optional<bool> infeasible_emission;  // n_f, D_0 rows only
    std::optional<bool> repair_match;         // D_repair rows only
};

struct RunRecord {
    std::string fixture_id;
    std::string variant;
    AttemptState state = AttemptState::invalid;
    std::string act_kind;  // empty unless an act was produced
    std::string selected_option;
    std::vector<std::string> witness_ids;
    std::vector<std::string> obligation_ids;
    std::string realized_text;
    long input_tokens = 0;
    long output_tokens = 0;
    bool privacy_ok = true;
    OracleEval oracle_eval;
};

// Null-aware metric value.
struct Metric {
    std::optional<double> value;
    std::string note;  // reason when undefined

    static Metric undefined(std::string why) { return {std::nullopt, std::move(why)}; }
    static Metric of(double v) { return {v, ""}; }
};

inline double metric_or(const Metric& m, double fallback) {
    return m.value ? *m.value : fallback;
}

// ---------------------------------------------------------------------------

inline Metric availability(const std::vector<RunRecord>& records) {
    if (records.empty()) throw EmptyDenominatorError("availability over empty record set");
    std::size_t emitted = 0;
    for (const auto& r : records)
        if (r.state == AttemptState::emitted) ++emitted;
    return Metric::of(static_cast<double>(emitted) / static_cast<double>(records.size()));
}

namespace detail {

template <typename Pick>
Metric emitted_rate(const std::vector<RunRecord>& records, Pick pick, const char* what) {
    std::size_t denom = 0, num = 0;
    for (const auto& r : records) {
        if (r.state != AttemptState::emitted) continue;
        const std::optional<bool> v = pick(r);
        if (!v) continue;
        ++denom;
        if (*v) ++num;
    }
    if (denom == 0) return Metric::undefined(std::string("no emitted rows for ") + what);
    return Metric::of(static_cast<double>(num) / static_cast<double>(denom));
}

}  // namespace detail

// Oracle hard-constraint violation rate over parseable emitted commitments.
inline Metric ohcvr(const std::vector<RunRecord>& records) {
    return detail::emitted_rate(
        records, [](const RunRecord& r) { return r.oracle_eval.hard_violation; }, "ohcvr");
}

// No-feasible emission rate over fixtures whose oracle feasible set is empty.
inline Metric nfer(const std::vector<RunRecord>& records) {
    std::size_t denom = 0, num = 0;
    for (const auto& r : records) {
        if (!r.oracle_eval.infeasible_emission) continue;
        ++denom;
        if (*r.oracle_eval.infeasible_emission) ++num;
    }
    if (denom == 0) return Metric::undefined("no infeasible fixtures in scope");
    return Metric::of(static_cast<double>(num) / static_cast<double>(denom));
}

// Match rate over fixtures expecting repair behavior; commitments score 0.
inline Metric repair_correctness(const std::vector<RunRecord>& records) {
    std::size_t denom = 0, num = 0;
    for (const auto& r : records) {
        if (!r.oracle_eval.repair_match) continue;
        ++denom;
        if (*r.oracle_eval.repair_match) ++num;
    }
    if (denom == 0) return Metric::undefined("no repair-expected fixtures in scope");
    return Metric::of(static_cast<double>(num) / static_cast<double>(denom));
}

struct CoverageReport {
    Metric ecf;
    Metric witness_drop;
    Metric consequence;
};

inline CoverageReport coverage_and_continuity(const std::vector<RunRecord>& records) {
    CoverageReport out;
    out.ecf = detail::emitted_rate(
        records, [](const RunRecord& r) { return r.oracle_eval.coverage_failure; }, "ecf");
    out.witness_drop = detail::emitted_rate(
        records, [](const RunRecord& r) { return r.oracle_eval.witness_drop; },
        "witness drop");
    out.consequence = detail::emitted_rate(
        records, [](const RunRecord& r) { return r.oracle_eval.consequence_failure; },
        "consequence");
    return out;
}

// State counts; the states partition the attempted set exactly.
inline std::map<AttemptState, std::size_t> denominator_report(
    const std::vector<RunRecord>& records) {
    std::map<AttemptState, std::size_t> counts;
    for (auto s : all_attempt_states()) counts[s] = 0;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : records) {
        if (!seen.insert({r.variant, r.fixture_id}).second)
            throw PartitionBreachError("row classified twice: " + r.variant + "/" +
                                       r.fixture_id);
        counts[r.state] += 1;
    }
    std::size_t total = 0;
    for (const auto& [_, n] : counts) total += n;
    if (total != records.size())
        throw PartitionBreachError("state counts do not partition the attempted set");
    return counts;
}

// ---------------------------------------------------------------------------

struct MetricReport {
    std::string variant;
    std::size_t attempted = 0;
    std::size_t invalid = 0;
    Metric availability;
    Metric ohcvr;
    Metric ecf;
    Metric witness_drop;
    Metric consequence;
    Metric nfer;
    Metric repair_correctness;
    Metric mean_cost;
};

inline MetricReport build_report(const std::string& variant,
                                 const std::vector<RunRecord>& records) {
    MetricReport rep;
    rep.variant = variant;
    rep.attempted = records.size();
    for (const auto& r : records)
        if (r.state == AttemptState::invalid) ++rep.invalid;
    rep.availability = records.empty() ? Metric::undefined("no attempts")
                                       : availability(records);
    rep.ohcvr = ohcvr(records);
    const auto cov = coverage_and_continuity(records);
    rep.ecf = cov.ecf;
    rep.witness_drop = cov.witness_drop;
    rep.consequence = cov.consequence;
    rep.nfer = nfer(records);
    rep.repair_correctness = repair_correctness(records);
    if (!records.empty()) {
        double total = 0.0;
        for (const auto& r : records) total += static_cast<double>(r.input_tokens);
        rep.mean_cost = Metric::of(total / static_cast<double>(records.size()));
    } else {
        rep.mean_cost = Metric::undefined("no attempts");
    }
    return rep;
}

// Horizon grouping by required-domain count; denominators stay per group.
inline std::map<int, MetricReport> horizon_grouping(const std::vector<RunRecord>& records,
                                                    const Manifest& manifest) {
    std::map<std::string, int> count_of;
    for (const auto& f : manifest.fixtures) count_of[f.id] = f.required_domain_count;
    std::map<int, std::vector<RunRecord>> groups;
    for (const auto& r : records) {
        auto it = count_of.find(r.fixture_id);
        if (it == count_of.end()) throw UnknownIdError("record for unknown fixture: " + r.fixture_id);
        groups[it->second].push_back(r);
    }
    std::map<int, MetricReport> out;
    for (auto& [k, rows] : groups)
        out[k] = build_report(rows.empty() ? "" : rows.front().variant, rows);
    return out;
}

// ---------------------------------------------------------------------------
// Long-history payload statistics (whitespace-token proxy).

struct PayloadStats {
    double median_input_tokens = 0.0;
    double median_output_tokens = 0.0;
    double delta_vs_raw = 0.0;  // raw median minus this variant's median
};

inline double median(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline std::map<std::string, PayloadStats> payload_stats(
    const std::map<std::string, std::vector<RunRecord>>& by_variant) {
    std::map<std::string, PayloadStats> out;
    double raw_median = 0.0;
    for (const auto& [variant, rows] : by_variant) {
        std::vector<double> in, outp;
        for (const auto& r : rows) {
            in.push_back(static_cast<double>(r.input_tokens));
            outp.push_back(static_cast<double>(r.output_tokens));
        }
        PayloadStats ps;
        ps.median_input_tokens = median(in);
        ps.median_output_tokens = median(outp);
        out[variant] = ps;
        if (variant == "raw") raw_median = ps.median_input_tokens;
    }
    for (auto& [variant, ps] : out) ps.delta_vs_raw = raw_median - ps.median_input_tokens;
    return out;
}

// ---------------------------------------------------------------------------
// Shadow-oracle recall over realized output texts, weighted by fact weight.

struct ShadowReport {
    double overall = 0.0;
    std::map<std::string, double> per_domain;
};

inline ShadowReport shadow_recall(const std::vector<RunRecord>& records,
                                  const Manifest& manifest) {
    std::map<std::string, const Fixture*> fixtures;
    for (const auto& f : manifest.fixtures) fixtures[f.id] = &f;

    double matched = 0.0, total = 0.0;
    std::map<std::string, std::pair<double, double>> domain_acc;
    for (const auto& r : records) {
        auto it = fixtures.find(r.fixture_id);
        if (it == fixtures.end()) continue;
        const Fixture& f = *it->second;
        const ShadowScore s = shadow_score_text(r.realized_text, f);
        matched += s.matched_weight;
        total += s.total_weight;
        auto& acc = domain_acc[to_string(f.domain)];
        acc.first += s.matched_weight;
        acc.second += s.total_weight;
    }
    ShadowReport out;
    out.overall = total == 0.0 ? 0.0 : matched / total;
    for (const auto& [dom, acc] : domain_acc)
        out.per_domain[dom] = acc.second == 0.0 ? 0.0 : acc.first / acc.second;
    return out;
}

// ---------------------------------------------------------------------------
// JSONL record stream.

inline nlohmann::json record_to_json(const RunRecord& r) {
    nlohmann::json j;
    j["fixture_id"] = r.fixture_id;
    j["variant"] = r.variant;
    j["state"] = to_string(r.state);
    j["act_kind"] = r.act_kind;
    j["selected_option"] = r.selected_option;
    j["witness_ids"] = r.witness_ids;
    j["obligation_ids"] = r.obligation_ids;
    j["realized_text"] = r.realized_text;
    j["input_tokens"] = r.input_tokens;
    j["output_tokens"] = r.output_tokens;
    j["privacy_ok"] = r.privacy_ok;
    nlohmann::json oe = nlohmann::json::object();
    auto put = [&](const char* key, const std::optional<bool>& v) {
        if (v) oe[key] = *v;
    };
    put("hard_violation", r.oracle_eval.hard_violation);
    put("coverage_failure", r.oracle_eval.coverage_failure);
    put("witness_drop", r.oracle_eval.witness_drop);
    put("consequence_failure", r.oracle_eval.consequence_failure);
    put("infeasible_emission", r.oracle_eval.infeasible_emission);
    put("repair_match", r.oracle_eval.repair_match);
    j["oracle_eval"] = oe;
    return j;
}

inline RunRecord record_from_json(const nlohmann::json& j) {
    RunRecord r;
    r.fixture_id = j.at("fixture_id").get<std::string>();
    r.variant = j.at("variant").get<std::string>();
    const std::string state = j.at("state").get<std::string>();
    for (auto s : all_attempt_states())
        if (state == to_string(s)) r.state = s;
    r.act_kind = j.at("act_kind").get<std::string>();
    r.selected_option = j.at("selected_option").get<std::string>();
    r.witness_ids = j.at("witness_ids").get<std::vector<std::string>>();
    r.obligation_ids = j.at("obligation_ids").get<std::vector<std::string>>();
    r.realized_text = j.at("realized_text").get<std::string>();
    r.input_tokens = j.at("input_tokens").get<long>();
    r.output_tokens = j.at("output_tokens").get<long>();
    r.privacy_ok = j.at("privacy_ok").get<bool>();
    const auto& oe = j.at("oracle_eval");
    auto get = [&](const char* key) -> std::optional<bool> {
        if (oe.contains(key)) return oe.at(key).get<bool>();
        return std::nullopt;
    };
    r.oracle_eval.hard_violation = get("hard_violation");
    r.oracle_eval.coverage_failure = get("coverage_failure");
    r.oracle_eval.witness_drop = get("witness_drop");
    r.oracle_eval.consequence_failure = get("consequence_failure");
    r.oracle_eval.infeasible_emission = get("infeasible_emission");
    r.oracle_eval.repair_match = get("repair_match");
    return r;
}

}  // namespace cbea
