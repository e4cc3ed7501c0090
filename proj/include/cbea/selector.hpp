#pragma once
// Budgeted evidence activation: the weighted objective over relevance,
// coverage, tail retention, consequence debt and overuse; greedy selection
// with tail-witness reservation; the MMR baseline; recall diagnostics.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cbea/contract.hpp"
#include "cbea/core.hpp"

namespace cbea {

struct SelectorWeights {
    double rel = 1.0;
    double cov = 2.0;
    double tail = 2.0;
    double debt = 1.0;
    double over = 1.0;
};

struct Budget {
    int total = 12;
    int tail_reserve = 0;

    int main_budget() const { return total - tail_reserve; }
};

// Reserve sizing rule: sum of the fixture's tail-unit costs, capped at a
// third of the total budget.
inline Budget make_budget(int total, const EvidencePool& pool) {
    int tail_cost = 0;
    for (const auto& u : pool.units)
        if (u.tail) tail_cost += u.cost;
    Budget b;
    b.total = total;
    b.tail_reserve = std::min(tail_cost, total / 3);
    return b;
}

struct ObjectiveTerms {
    double rel = 0.0;
    double cov = 0.0;
    double tail = 0.0;
    double debt = 0.0;
    double over = 0.0;
};

struct ActivationResult {
    std::vector<std::string> selected;  // insertion order
    int spent_cost = 0;
    double objective_value = 0.0;
    ObjectiveTerms per_term;

    bool contains(const std::string& id) const {
        return std::find(selected.begin(), selected.end(), id) != selected.end();
    }
    std::set<std::string> selected_set() const {
        return {selected.begin(), selected.end()};
    }
};

// eta_r(Z): 1 iff some selected unit covers requirement r.
inline int coverage_indicator(const std::set<std::string>& selected,
                              const Requirement& r, const CoverageMatrix& m) {
    if (!m.has_requirement(r.id)) throw UnknownIdError("unknown requirement id: " + r.id);
    for (const auto& uid : selected)
        if (m.covered(uid, r.id)) return 1;
    return 0;
}

// Per-unit relevance: distinct unit tokens found in the observation token
// set, divided by the unit token count, capped at 1.
inline double unit_relevance(const EvidenceUnit& u, const TurnContext& c) {
    const auto toks = normalize_tokens(u.content);
    if (toks.empty()) return 0.0;
    const double r = static_cast<double>(overlap_count(toks, c.observation_token_set)) /
                     static_cast<double>(toks.size());
    return std::min(r, 1.0);
}

namespace detail {

inline bool unit_covers_source(const EvidenceUnit& u, const RequiredCoverageSet& reqs,
                               RequirementSource source) {
    for (const auto& rid : u.covers) {
        const Requirement* r = reqs.find(rid);
        if (r && r->source == source) return true;
    }
    return false;
}

}  // namespace detail

inline std::pair<double, ObjectiveTerms> objective(
    const EvidencePool& pool, const std::set<std::string>& selected,
    const RequiredCoverageSet& reqs, const CoverageMatrix& m, const MutableState& u,
    const TurnContext& c, const SelectorWeights& w) {
    ObjectiveTerms t;

    std::vector<const EvidenceUnit*> units;
    units.reserve(selected.size());
    for (const auto& id : selected) {
        const EvidenceUnit* e = pool.find(id);
        if (!e) throw UnknownIdError("unknown evidence id: " + id);
        units.push_back(e);
    }

    for (const auto& r : reqs.requirements)
        if (coverage_indicator(selected, r, m)) t.cov += r.weight;

    for (const auto* e : units) {
        t.rel += unit_relevance(*e, c);
        if (e->tail && detail::unit_covers_source(*e, reqs, RequirementSource::tail_witness))
            t.tail += 1.0;
        if (!c.active_dimensions.count(e->dimension) && e->covers.empty()) t.over += 1.0;
    }

    for (const auto& ob : u.obligations) {
        for (const auto& src : ob.source_evidence_ids) {
            if (selected.count(src)) {
                t.debt += 1.0;
                break;
            }
        }
    }

    const double j = w.rel * t.rel + w.cov * t.cov + w.tail * t.tail + w.debt * t.debt -
                     w.over * t.over;
    return {j, t};
}

// Greedy budgeted coverage with tail-witness reservation. Phase 1 covers
// tail requirements from tail units (the reserve is a floor, not a cap);
// phase 2 adds the best marginal gain per unit cost while the gain stays
// positive and the budget allows.
inline ActivationResult greedy_select(const EvidencePool& pool,
                                      const RequiredCoverageSet& reqs,
                                      const CoverageMatrix& m, const MutableState& u,
                                      const TurnContext& c, const SelectorWeights& w,
                                      const Budget& budget) {
    ActivationResult out;
    std::set<std::string> chosen;
    int spent = 0;

    auto add = [&](const EvidenceUnit& e) {
        chosen.insert(e.id);
        out.selected.push_back(e.id);
        spent += e.cost;
    };

    // Phase 1: tail requirements.
    for (const auto& r : reqs.requirements) {
        if (r.source != RequirementSource::tail_witness) continue;
        if (coverage_indicator(chosen, r, m)) continue;
        const EvidenceUnit* best = nullptr;
        for (const auto& e : pool.units) {
            if (!e.tail || chosen.count(e.id) || spent + e.cost > budget.total) continue;
            if (!m.covered(e.id, r.id)) continue;
            if (!best || e.cost < best->cost || (e.cost == best->cost && e.id < best->id))
                best = &e;
        }
        if (best) add(*best);
    }

    // Phase 2: marginal gain per cost.
    double current = objective(pool, chosen, reqs, m, u, c, w).first;
    while (true) {
        const EvidenceUnit* best = nullptr;
        double best_rate = 0.0;
        double best_j = current;
        for (const auto& e : pool.units) {
            if (chosen.count(e.id) || spent + e.cost > budget.total) continue;
            auto trial = chosen;
            trial.insert(e.id);
            const double j = objective(pool, trial, reqs, m, u, c, w).first;
            const double rate = (j - current) / static_cast<double>(e.cost);
            if (rate <= 0.0) continue;
            if (!best || rate > best_rate || (rate == best_rate && e.id < best->id)) {
                best = &e;
                best_rate = rate;
                best_j = j;
            }
        }
        if (!best) break;
        add(*best);
        current = best_j;
    }

    auto [j, terms] = objective(pool, chosen, reqs, m, u, c, w);
    out.spent_cost = spent;
    out.objective_value = j;
    out.per_term = terms;
    return out;
}

// ---------------------------------------------------------------------------
// MMR baseline. Relevance-diversity only: reads contents, costs and ids,
// never covers sets, tail flags or obligations. Fills the budget.

inline std::vector<std::string> mmr_select(const EvidencePool& pool,
                                           const std::vector<std::string>& query_tokens,
                                           int budget_total, double lambda_mmr = 0.5) {
    const std::set<std::string> query(query_tokens.begin(), query_tokens.end());

    std::vector<std::set<std::string>> unit_tokens;
    unit_tokens.reserve(pool.units.size());
    for (const auto& e : pool.units) unit_tokens.push_back(token_set(e.content));

    std::vector<bool> taken(pool.units.size(), false);
    std::vector<std::size_t> picked;
    std::vector<std::string> out;
    int spent = 0;

    while (true) {
        int best = -1;
        double best_score = 0.0;
        for (std::size_t i = 0; i < pool.units.size(); ++i) {
            if (taken[i] || spent + pool.units[i].cost > budget_total) continue;
            double redundancy = 0.0;
            for (std::size_t p : picked)
                redundancy = std::max(redundancy, jaccard(unit_tokens[i], unit_tokens[p]));
            const double score = lambda_mmr * jaccard(unit_tokens[i], query) -
                                 (1.0 - lambda_mmr) * redundancy;
            if (best < 0 || score > best_score ||
                (score == best_score && pool.units[i].id < pool.units[best].id)) {
                best = static_cast<int>(i);
                best_score = score;
            }
        }
        if (best < 0) break;
        taken[best] = true;
        picked.push_back(static_cast<std::size_t>(best));
        out.push_back(pool.units[best].id);
        spent += pool.units[best].cost;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Selector-level recall against fixture labels.

struct OracleWitnessLabels {
    std::vector<std::string> hard;
    std::vector<std::string> required_witness;
    std::vector<std::string> tail;
    std::vector<std::string> debt;
};

struct RecallValue {
    double value = 1.0;
    bool defined = false;  // false: empty label set, reported as 1.0 with flag
};

struct SelectorRecall {
    RecallValue hard;
    RecallValue required_witness;
    RecallValue tail;
    RecallValue debt;
    RecallValue control_union;
};

inline SelectorRecall selector_recall(const std::set<std::string>& selected,
                                      const OracleWitnessLabels& labels) {
    auto one = [&](const std::vector<std::string>& labeled) {
        RecallValue r;
        if (labeled.empty()) return r;  // 1.0, flagged undefined
        std::size_t hit = 0;
        for (const auto& id : labeled)
            if (selected.count(id)) ++hit;
        r.value = static_cast<double>(hit) / static_cast<double>(labeled.size());
        r.defined = true;
        return r;
    };
    std::set<std::string> uni;
    for (const auto* set : {&labels.hard, &labels.required_witness, &labels.tail, &labels.debt})
        uni.insert(set->begin(), set->end());

    SelectorRecall out;
    out.hard = one(labels.hard);
    out.required_witness = one(labels.required_witness);
    out.tail = one(labels.tail);
    out.debt = one(labels.debt);
    out.control_union = one({uni.begin(), uni.end()});
    return out;
}

}  // namespace cbea
