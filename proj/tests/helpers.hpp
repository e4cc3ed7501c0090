#pragma once
// Shared test utilities: independent oracle reimplementations used to freeze
// expected values, small hand-built fixtures, and the reference winner table.
// Oracles here must stay independent of the library code paths they check.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cbea/bootstrap.hpp"
#include "cbea/contract.hpp"
#include "cbea/fixtures.hpp"
#include "cbea/selector.hpp"

namespace testutil {

// Brute-force objective scorer: a from-scratch reading of the weighted sum,
// sharing no code with cbea::objective.
inline double brute_force_objective(const cbea::EvidencePool& pool,
                                    const std::set<std::string>& selected,
                                    const cbea::RequiredCoverageSet& reqs,
                                    const cbea::MutableState& state,
                                    const cbea::TurnContext& ctx,
                                    const cbea::SelectorWeights& w) {
    double rel = 0.0, cov = 0.0, tail = 0.0, debt = 0.0, over = 0.0;

    std::set<std::string> obs;
    for (const auto& t : cbea::normalize_tokens(ctx.scenario_text)) obs.insert(t);

    for (const auto& r : reqs.requirements) {
        bool hit = false;
        for (const auto& u : pool.units)
            if (selected.count(u.id))
                for (const auto& c : u.covers)
                    if (c == r.id) hit = true;
        if (hit) cov += r.weight;
    }
    for (const auto& u : pool.units) {
        if (!selected.count(u.id)) continue;
        std::set<std::string> toks;
        for (const auto& t : cbea::normalize_tokens(u.content)) toks.insert(t);
        std::size_t inter = 0;
        for (const auto& t : toks)
            if (obs.count(t)) ++inter;
        if (!toks.empty())
            rel += std::min(1.0, static_cast<double>(inter) / static_cast<double>(toks.size()));
        if (u.tail) {
            bool tail_req = false;
            for (const auto& c : u.covers) {
                const cbea::Requirement* r = reqs.find(c);
                if (r && r->source == cbea::RequirementSource::tail_witness) tail_req = true;
            }
            if (tail_req) tail += 1.0;
        }
        if (!ctx.active_dimensions.count(u.dimension) && u.covers.empty()) over += 1.0;
    }
    for (const auto& ob : state.obligations) {
        bool sourced = false;
        for (const auto& src : ob.source_evidence_ids) sourced = sourced || selected.count(src);
        if (sourced) debt += 1.0;
    }
    return w.rel * rel + w.cov * cov + w.tail * tail + w.debt * debt - w.over * over;
}

// Exhaustive best-subset search under a cost budget (small pools only).
inline std::pair<std::set<std::string>, double> best_subset(
    const cbea::EvidencePool& pool, const cbea::RequiredCoverageSet& reqs,
    const cbea::MutableState& state, const cbea::TurnContext& ctx,
    const cbea::SelectorWeights& w, int budget) {
    const std::size_t n = pool.units.size();
    std::set<std::string> best;
    double best_j = 0.0;
    for (std::size_t mask = 0; mask < (1u << n); ++mask) {
        std::set<std::string> sel;
        int cost = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                sel.insert(pool.units[i].id);
                cost += pool.units[i].cost;
            }
        if (cost > budget) continue;
        const double j = brute_force_objective(pool, sel, reqs, state, ctx, w);
        if (j > best_j) {
            best_j = j;
            best = sel;
        }
    }
    return {best, best_j};
}

// Hand-built compilation input: 2 confirmed predicates, 8 evidence units,
// 4 requirements (2 hard + 1 field + 1 debt).
inline std::pair<std::vector<cbea::ClarificationAnswer>, cbea::Profile> small_profile() {
    using namespace cbea;
    std::vector<ClarificationAnswer> answers = {
        {"q1", "cap monthly at 500", true},
        {"q2", "keep the plan quarterly", true},
    };

    Profile p;
    p.turn = 5;
    p.active_dimensions = {"budget", "timing"};
    p.required_fields.push_back({"kickoff", "timing"});

    HardPredicate pred1;
    pred1.id = "p:cap";
    pred1.kind = PredicateKind::bound_numeric;
    pred1.dimension = "budget";
    pred1.target = "slots.monthly";
    pred1.comparator = Comparator::leq;
    pred1.value = 500.0;
    pred1.provenance = {1, true, "cap monthly at 500"};
    HardPredicate pred2;
    pred2.id = "p:plan";
    pred2.kind = PredicateKind::require_slot;
    pred2.dimension = "timing";
    pred2.target = "slots.plan";
    pred2.comparator = Comparator::eq;
    pred2.value = std::string("quarterly");
    pred2.provenance = {2, true, "keep the plan quarterly"};
    p.predicate_facts.push_back({pred1, "q1", true});
    p.predicate_facts.push_back({pred2, "q2", true});

    p.obligations.push_back({"ob:call", 4, "call back about the waiver", {"e7"}});

    auto unit = [](std::string id, std::string content, std::string dim, bool tail, int cost,
                   std::vector<std::string> covers) {
        EvidenceUnit u;
        u.id = std::move(id);
        u.content = std::move(content);
        u.dimension = std::move(dim);
        u.provenance = {1, true, u.content};
        u.tail = tail;
        u.cost = cost;
        u.covers = std::move(covers);
        return u;
    };
    p.evidence = {
        unit("e1", "ledger anchor", "budget", false, 1, {"req:hard:p:cap"}),
        unit("e2", "timber quarry", "timing", false, 1, {"req:hard:p:plan"}),
        unit("e3", "harbor beacon", "timing", false, 1, {"req:field:kickoff"}),
        unit("e4", "garnet ember", "budget", false, 1, {}),
        unit("e5", "meadow brook", "timing", false, 2, {}),
        unit("e6", "fathom keel", "other", false, 1, {}),
        unit("e7", "juniper lantern", "budget", false, 2, {"req:debt:ob:call"}),
        unit("e8", "nimbus pylon", "budget", true, 1, {}),
    };
    p.observations = {"Turn 0: ledger anchor and timber quarry noted.",
                      "Turn 1: harbor beacon flagged. garnet ember mentioned."};
    return {answers, p};
}

// Reference winner table: 90 cases x 2 judges with shares
// cbea 0.5000, raw 0.3056, validator 0.1778, tie 0.0167 and case-level exact
// agreement 0.60. Joint case distribution: both-cbea 29, both-raw 13,
// both-validator 12, singles c-r 26, c-v 5, c-t 1, r-v 2, r-t 1, v-t 1.
inline cbea::WinnerTable reference_winner_table() {
    using cbea::Winner;
    cbea::WinnerTable t;
    int case_no = 0;
    auto push = [&](Winner a, Winner b, int count) {
        for (int i = 0; i < count; ++i) {
            const std::string id = "case" + std::to_string(case_no++);
            t.rows.push_back({id, "judge1", a});
            t.rows.push_back({id, "judge2", b});
        }
    };
    push(Winner::cbea, Winner::cbea, 29);
    push(Winner::raw, Winner::raw, 13);
    push(Winner::validator, Winner::validator, 12);
    push(Winner::cbea, Winner::raw, 26);
    push(Winner::cbea, Winner::validator, 5);
    push(Winner::cbea, Winner::tie, 1);
    push(Winner::raw, Winner::validator, 2);
    push(Winner::raw, Winner::tie, 1);
    push(Winner::validator, Winner::tie, 1);
    return t;
}

}  // namespace testutil
