#pragma once
// Lexicographic commitment validation: violation vectors, feasibility,
// emission vs. repair, infeasibility diagnosis and the repair operator.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cbea/commitment.hpp"
#include "cbea/contract.hpp"
#include "cbea/core.hpp"

namespace cbea {

// Ordering key is exactly (hard, coverage, no_feasible_flag, neg_soft).
struct ViolationVector {
    int hard = 0;
    int coverage = 0;
    int no_feasible_flag = 0;
    double neg_soft = 0.0;
    bool unknown_witness = false;  // diagnostic flag, not part of the key

    std::tuple<int, int, int, double> key() const {
        return {hard, coverage, no_feasible_flag, neg_soft};
    }
};

inline bool operator<(const ViolationVector& a, const ViolationVector& b) {
    return a.key() < b.key();
}

// S = dims addressed + witnesses activated + obligations acknowledged,
// weighted 1.0 / 0.5 / 0.25 so soft utility never crosses an integer tier.
inline double soft_score(const StructuredCommitment& a, const MutableState& u,
                         const std::set<std::string>& activated, const TurnContext& c,
                         const EvidencePool& pool) {
    double dims_term = 1.0;
    if (!c.active_dimensions.empty()) {
        std::set<std::string> addressed;
        for (const auto& wid : a.evidence_witness_ids) {
            const EvidenceUnit* e = pool.find(wid);
            if (e && c.active_dimensions.count(e->dimension)) addressed.insert(e->dimension);
        }
        dims_term = static_cast<double>(addressed.size()) /
                    static_cast<double>(c.active_dimensions.size());
    }

    double witness_term = 0.0;
    if (!a.evidence_witness_ids.empty()) {
        std::size_t in_z = 0;
        for (const auto& wid : a.evidence_witness_ids)
            if (activated.count(wid)) ++in_z;
        witness_term = static_cast<double>(in_z) /
                       static_cast<double>(a.evidence_witness_ids.size());
    }

    const auto due = u.due_obligation_ids();
    double debt_term = 1.0;
    if (!due.empty()) {
        std::size_t acked = 0;
        for (const auto& oid : due)
            if (std::find(a.consequence_obligations.begin(), a.consequence_obligations.end(),
                          oid) != a.consequence_obligations.end())
                ++acked;
        debt_term = static_cast<double>(acked) / static_cast<double>(due.size());
    }

    return 1.0 * dims_term + 0.5 * witness_term + 0.25 * debt_term;
}

// Violation vector. A witness outside the activated set earns no coverage
// credit and marks the candidate as citing non-activated evidence.
inline ViolationVector violation_vector(const StructuredCommitment& a,
                                        const HardContract& h,
                                        const std::set<std::string>& activated,
                                        const RequiredCoverageSet& reqs,
                                        const CoverageMatrix& m, const MutableState& u,
                                        const TurnContext& c, const EvidencePool& pool,
                                        bool set_diagnosed_infeasible = false) {
    ViolationVector v;
    v.hard = count_hard_violations(h, a);

    std::set<std::string> usable;
    for (const auto& wid : a.evidence_witness_ids) {
        if (activated.count(wid) && m.has_unit(wid)) {
            usable.insert(wid);
        } else {
            // A witness outside the activated set earns no credit and is
            // itself a coverage failure for whatever it claimed to support.
            v.unknown_witness = true;
            ++v.coverage;
        }
    }
    for (const auto& r : reqs.requirements) {
        bool covered = false;
        for (const auto& wid : usable)
            if (m.covered(wid, r.id)) {
                covered = true;
                break;
            }
        if (!covered) ++v.coverage;
    }

    if (set_diagnosed_infeasible && a.carries_commitment()) v.no_feasible_flag = 1;
    v.neg_soft = -soft_score(a, u, activated, c, pool);
    return v;
}

struct RankedCandidate {
    const StructuredCommitment* candidate = nullptr;
    ViolationVector vec;
};

struct LcvInputs {
    const HardContract& contract;
    const std::set<std::string>& activated;
    const RequiredCoverageSet& requirements;
    const CoverageMatrix& matrix;
    const MutableState& state;
    const TurnContext& context;
    const EvidencePool& pool;
    bool set_diagnosed_infeasible = false;
};

inline std::vector<RankedCandidate> lex_select(
    const std::vector<StructuredCommitment>& candidates, const LcvInputs& in) {
    if (candidates.empty()) throw EmptyCandidateSetError("lex_select on empty candidate set");
    std::vector<RankedCandidate> ranked;
    ranked.reserve(candidates.size());
    for (const auto& a : candidates)
        ranked.push_back({&a, violation_vector(a, in.contract, in.activated, in.requirements,
                                               in.matrix, in.state, in.context, in.pool,
                                               in.set_diagnosed_infeasible)});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedCandidate& x, const RankedCandidate& y) {
                         if (x.vec.key() != y.vec.key()) return x.vec.key() < y.vec.key();
                         return x.candidate->id < y.candidate->id;
                     });
    return ranked;
}

// Feasible set: commitment-carrying candidates with zero hard and zero
// coverage violations.
inline std::vector<const StructuredCommitment*> feasible_set(
    const std::vector<StructuredCommitment>& candidates, const LcvInputs& in) {
    std::vector<const StructuredCommitment*> out;
    for (const auto& a : candidates) {
        if (!a.carries_commitment()) continue;
        const auto v = violation_vector(a, in.contract, in.activated, in.requirements,
                                        in.matrix, in.state, in.context, in.pool);
        if (v.hard == 0 && v.coverage == 0) out.push_back(&a);
    }
    return out;
}

// Diagnosis priority: contract conflict, then missing evidence, then
// unsupported commitment, then validator failure. The first two conditions
// are mutually exclusive by construction.
inline InfeasibilityReason diagnose_infeasibility(
    const std::vector<StructuredCommitment>& candidates, const LcvInputs& in) {
    InfeasibilityReason reason;

    bool any_commitment = false;
    bool all_hard_violating = true;
    std::set<std::string> violated_predicates;
    for (const auto& a : candidates) {
        if (!a.carries_commitment()) continue;
        any_commitment = true;
        int fails = 0;
        for (const auto& p : in.contract.predicates)
            if (!check_predicate(p, a)) {
                ++fails;
                violated_predicates.insert(p.id);
            }
        if (fails == 0) all_hard_violating = false;
    }
    if (any_commitment && all_hard_violating && !in.contract.predicates.empty()) {
        reason.kind = InfeasibilityKind::contract_conflict;
        reason.detail.assign(violated_predicates.begin(), violated_predicates.end());
        return reason;
    }

    // Missing evidence: some clean candidate fails only on coverage, and each
    // of its uncovered requirements has no covering unit inside Z.
    for (const auto& a : candidates) {
        if (!a.carries_commitment()) continue;
        const auto v = violation_vector(a, in.contract, in.activated, in.requirements,
                                        in.matrix, in.state, in.context, in.pool);
        if (v.hard != 0 || v.coverage == 0 || v.unknown_witness) continue;
        std::set<std::string> usable;
        for (const auto& wid : a.evidence_witness_ids)
            if (in.activated.count(wid) && in.matrix.has_unit(wid)) usable.insert(wid);
        std::vector<std::string> unfillable;
        bool all_unfillable = true;
        for (const auto& r : in.requirements.requirements) {
            bool covered = false;
            for (const auto& wid : usable)
                if (in.matrix.covered(wid, r.id)) {
                    covered = true;
                    break;
                }
            if (covered) continue;
            bool fillable = false;
            for (const auto& uid : in.activated)
                if (in.matrix.has_unit(uid) && in.matrix.covered(uid, r.id)) {
                    fillable = true;
                    break;
                }
            if (fillable)
                all_unfillable = false;
            else
                unfillable.push_back(r.id);
        }
        if (all_unfillable && !unfillable.empty()) {
            reason.kind = InfeasibilityKind::missing_evidence;
            reason.detail = unfillable;
            return reason;
        }
    }

    for (const auto& a : candidates) {
        if (!a.carries_commitment()) continue;
        const auto v = violation_vector(a, in.contract, in.activated, in.requirements,
                                        in.matrix, in.state, in.context, in.pool);
        if (v.hard == 0 && v.unknown_witness) {
            reason.kind = InfeasibilityKind::unsupported_commitment;
            for (const auto& wid : a.evidence_witness_ids)
                if (!in.activated.count(wid)) reason.detail.push_back(wid);
            return reason;
        }
    }

    reason.kind = InfeasibilityKind::validator_failure;
    return reason;
}

// Omega: total map from diagnosis to a non-commitment act.
inline ControlAct route_repair(const InfeasibilityReason& reason) {
    ControlAct act;
    act.reason = reason;
    std::string detail;
    for (const auto& d : reason.detail) {
        if (!detail.empty()) detail += ", ";
        detail += d;
    }
    switch (reason.kind) {
        case InfeasibilityKind::missing_evidence:
            act.kind = ActKind::clarify;
            act.text = "Before going further I need one more input. Missing: " + detail + ".";
            break;
        case InfeasibilityKind::contract_conflict:
            act.kind = ActKind::recontract;
            act.text = "Every available option conflicts with a confirmed boundary (" +
                       detail + "). Should we revisit that boundary?";
            break;
        case InfeasibilityKind::unsupported_commitment:
            act.kind = ActKind::abstain;
            act.text = "I cannot verify the cited support (" + detail +
                       "), so I am not making a recommendation.";
            break;
        case InfeasibilityKind::validator_failure:
            act.kind = ActKind::fallback;
            act.text = "Validation failed internally; falling back to a verified comparison "
                       "without a recommendation.";
            break;
    }
    return act;
}

struct GateDecision {
    ControlAct act;
    std::optional<ViolationVector> emitted_vector;
    std::optional<InfeasibilityReason> diagnosis;
};

// Emit the best feasible candidate by soft score, or route through Omega.
inline GateDecision emit_or_route(const std::vector<StructuredCommitment>& candidates,
                                  const LcvInputs& in) {
    GateDecision out;
    const auto feasible = feasible_set(candidates, in);
    if (!feasible.empty()) {
        const StructuredCommitment* best = nullptr;
        double best_s = 0.0;
        for (const auto* a : feasible) {
            const double s = soft_score(*a, in.state, in.activated, in.context, in.pool);
            if (!best || s > best_s || (s == best_s && a->id < best->id)) {
                best = a;
                best_s = s;
            }
        }
        out.act.kind = ActKind::commitment;
        out.act.commitment = *best;
        out.act.text = best->surface_text;
        out.emitted_vector = violation_vector(*best, in.contract, in.activated,
                                              in.requirements, in.matrix, in.state,
                                              in.context, in.pool);
        return out;
    }
    const auto reason = diagnose_infeasibility(candidates, in);
    out.diagnosis = reason;
    out.act = route_repair(reason);
    return out;
}

}  // namespace cbea
