#pragma once
// Formal runtime objects: hard contract, evidence pool, mutable state,
// required coverage set, coverage matrix, and the compilation step that
// builds them from confirmed answers.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cbea/core.hpp"

namespace cbea {

// ---------------------------------------------------------------------------
// Predicates

enum class PredicateKind {
    forbid_option,
    require_slot,
    bound_numeric,
    protect_obligation,
    no_unwitnessed_claim,
};

enum class Comparator { eq, neq, leq, geq, in_set, absent };

inline const char* to_string(PredicateKind k) {
    switch (k) {
        case PredicateKind::forbid_option: return "forbid_option";
        case PredicateKind::require_slot: return "require_slot";
        case PredicateKind::bound_numeric: return "bound_numeric";
        case PredicateKind::protect_obligation: return "protect_obligation";
        case PredicateKind::no_unwitnessed_claim: return "no_unwitnessed_claim";
    }
    return "?";
}

inline const char* to_string(Comparator c) {
    switch (c) {
        case Comparator::eq: return "eq";
        case Comparator::neq: return "neq";
        case Comparator::leq: return "leq";
        case Comparator::geq: return "geq";
        case Comparator::in_set: return "in_set";
        case Comparator::absent: return "absent";
    }
    return "?";
}

// Valid kind/comparator pairings. forbid_option rejects a choice, require_slot
// pins a slot value, bound_numeric bounds one, protect_obligation demands an
// obligation id in the act, no_unwitnessed_claim bans an unverifiable claim.
inline bool kind_comparator_valid(PredicateKind k, Comparator c) {
    switch (k) {
        case PredicateKind::forbid_option:
            return c == Comparator::neq || c == Comparator::absent;
        case PredicateKind::require_slot:
            return c == Comparator::eq || c == Comparator::in_set;
        case PredicateKind::bound_numeric:
            return c == Comparator::leq || c == Comparator::geq;
        case PredicateKind::protect_obligation:
            return c == Comparator::in_set;
        case PredicateKind::no_unwitnessed_claim:
            return c == Comparator::absent;
    }
    return false;
}

struct ProvenanceRecord {
    int source_turn = 0;
    bool confirmed = false;
    std::string raw_span;
};

struct HardPredicate {
    std::string id;
    PredicateKind kind = PredicateKind::forbid_option;
    std::string dimension;
    std::string target;  // field path into a structured commitment
    Comparator comparator = Comparator::neq;
    Value value;
    ProvenanceRecord provenance;
};

struct HardContract {
    std::vector<HardPredicate> predicates;

    const HardPredicate* find(const std::string& id) const {
        for (const auto& p : predicates)
            if (p.id == id) return &p;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// Evidence

struct EvidenceUnit {
    std::string id;
    std::string content;
    std::string dimension;
    ProvenanceRecord provenance;
    bool tail = false;
    int cost = 1;
    std::vector<std::string> covers;  // requirement ids
};

struct EvidencePool {
    std::vector<EvidenceUnit> units;

    const EvidenceUnit* find(const std::string& id) const {
        for (const auto& u : units)
            if (u.id == id) return &u;
        return nullptr;
    }
    std::size_t size() const { return units.size(); }
};

// ---------------------------------------------------------------------------
// Requirements

enum class RequirementSource {
    hard_predicate,
    required_field,
    consequence_debt,
    scene_obligation,
    no_feasible_guard,
    tail_witness,
};

inline const char* to_string(RequirementSource s) {
    switch (s) {
        case RequirementSource::hard_predicate: return "hard_predicate";
        case RequirementSource::required_field: return "required_field";
        case RequirementSource::consequence_debt: return "consequence_debt";
        case RequirementSource::scene_obligation: return "scene_obligation";
        case RequirementSource::no_feasible_guard: return "no_feasible_guard";
        case RequirementSource::tail_witness: return "tail_witness";
    }
    return "?";
}

struct Requirement {
    std::string id;
    std::string dimension;
    double weight = 1.0;
    RequirementSource source = RequirementSource::hard_predicate;
};

struct RequiredCoverageSet {
    std::vector<Requirement> requirements;

    const Requirement* find(const std::string& id) const {
        for (const auto& r : requirements)
            if (r.id == id) return &r;
        return nullptr;
    }
    std::size_t size() const { return requirements.size(); }
};

// Binary evidence-by-requirement matrix. entries[i][r] == 1 iff unit i lists
// requirement r in its covers set.
class CoverageMatrix {
public:
    CoverageMatrix() = default;

    CoverageMatrix(const EvidencePool& pool, const RequiredCoverageSet& reqs) {
        unit_ids_.reserve(pool.units.size());
        for (const auto& u : pool.units) {
            unit_index_[u.id] = unit_ids_.size();
            unit_ids_.push_back(u.id);
        }
        req_ids_.reserve(reqs.requirements.size());
        for (const auto& r : reqs.requirements) {
            req_index_[r.id] = req_ids_.size();
            req_ids_.push_back(r.id);
        }
        bits_.assign(unit_ids_.size(), std::vector<uint8_t>(req_ids_.size(), 0));
        for (std::size_t i = 0; i < pool.units.size(); ++i)
            for (const auto& rid : pool.units[i].covers) {
                auto it = req_index_.find(rid);
                if (it != req_index_.end()) bits_[i][it->second] = 1;
            }
    }

    std::size_t unit_count() const { return unit_ids_.size(); }
    std::size_t requirement_count() const { return req_ids_.size(); }

    bool has_unit(const std::string& uid) const { return unit_index_.count(uid) > 0; }
    bool has_requirement(const std::string& rid) const { return req_index_.count(rid) > 0; }

    bool covered(const std::string& unit_id, const std::string& req_id) const {
        auto ui = unit_index_.find(unit_id);
        if (ui == unit_index_.end()) throw UnknownIdError("unknown evidence id: " + unit_id);
        auto ri = req_index_.find(req_id);
        if (ri == req_index_.end()) throw UnknownIdError("unknown requirement id: " + req_id);
        return bits_[ui->second][ri->second] != 0;
    }

    const std::vector<std::string>& unit_ids() const { return unit_ids_; }
    const std::vector<std::string>& requirement_ids() const { return req_ids_; }

private:
    std::vector<std::string> unit_ids_;
    std::vector<std::string> req_ids_;
    std::map<std::string, std::size_t> unit_index_;
    std::map<std::string, std::size_t> req_index_;
    std::vector<std::vector<uint8_t>> bits_;
};

// ---------------------------------------------------------------------------
// Mutable state and turn context

struct Obligation {
    std::string id;
    int due_turn = 0;
    std::string description;
    std::vector<std::string> source_evidence_ids;
};

struct MutableState {
    int turn = 0;
    std::vector<Obligation> obligations;
    std::string history_digest;

    bool is_due(const Obligation& o) const { return o.due_turn <= turn; }

    std::vector<std::string> due_obligation_ids() const {
        std::vector<std::string> out;
        for (const auto& o : obligations)
            if (is_due(o)) out.push_back(o.id);
        return out;
    }
};

struct RequiredField {
    std::string name;
    std::string dimension;
};

struct TurnContext {
    std::string scenario_text;
    std::vector<std::string> observation_tokens;  // normalize_tokens(scenario_text)
    std::set<std::string> observation_token_set;  // same tokens, deduplicated
    std::set<std::string> active_dimensions;
    std::vector<RequiredField> required_fields;
    std::vector<std::string> tail_dimensions;
};

inline TurnContext make_turn_context(const std::string& scenario_text,
                                     std::set<std::string> active_dimensions,
                                     std::vector<RequiredField> required_fields = {},
                                     std::vector<std::string> tail_dimensions = {}) {
    TurnContext c;
    c.scenario_text = scenario_text;
    c.observation_tokens = normalize_tokens(scenario_text);
    c.observation_token_set = {c.observation_tokens.begin(), c.observation_tokens.end()};
    c.active_dimensions = std::move(active_dimensions);
    c.required_fields = std::move(required_fields);
    c.tail_dimensions = std::move(tail_dimensions);
    return c;
}

struct ClarificationAnswer {
    std::string question_id;
    std::string answer;
    bool confirmed = false;
};

// ---------------------------------------------------------------------------
// Profile block: the fixture's machine-readable confirmed-facts view.

struct PredicateFact {
    HardPredicate predicate;
    std::string answer_id;  // question this fact was confirmed by
    bool hard = true;
};

struct SoftHint {
    std::string id;
    std::string text;
    std::string dimension;
    int source_turn = 0;
};

struct Profile {
    int turn = 0;
    std::vector<PredicateFact> predicate_facts;
    std::vector<SoftHint> soft_hints;
    std::vector<EvidenceUnit> evidence;
    std::vector<Obligation> obligations;
    std::vector<std::string> observations;
    std::set<std::string> active_dimensions;
    std::vector<RequiredField> required_fields;
    std::vector<std::string> tail_dimensions;
};

struct Compiled {
    HardContract contract;
    EvidencePool pool;
    MutableState state;
    TurnContext context;
    RequiredCoverageSet requirements;
    CoverageMatrix matrix;
};

// ---------------------------------------------------------------------------
// Requirement derivation: one requirement per hard predicate, declared
// required field, due obligation, declared tail witness dimension, and
// active scene dimension lacking confirmed coverage. Pure in its inputs.

inline RequiredCoverageSet derive_requirements(const HardContract& h,
                                               const MutableState& u,
                                               const TurnContext& c) {
    RequiredCoverageSet out;
    std::set<std::string> confirmed_dims;
    for (const auto& p : h.predicates) {
        out.requirements.push_back(
            {"req:hard:" + p.id, p.dimension, 1.0, RequirementSource::hard_predicate});
        confirmed_dims.insert(p.dimension);
    }
    for (const auto& f : c.required_fields) {
        out.requirements.push_back(
            {"req:field:" + f.name, f.dimension, 1.0, RequirementSource::required_field});
        confirmed_dims.insert(f.dimension);
    }
    for (const auto& o : u.obligations)
        if (u.is_due(o))
            out.requirements.push_back(
                {"req:debt:" + o.id, "", 1.0, RequirementSource::consequence_debt});
    for (const auto& dim : c.tail_dimensions)
        out.requirements.push_back(
            {"req:tail:" + dim, dim, 1.0, RequirementSource::tail_witness});
    for (const auto& dim : c.active_dimensions)  // std::set: deterministic order
        if (!confirmed_dims.count(dim))
            out.requirements.push_back(
                {"req:scene:" + dim, dim, 1.0, RequirementSource::scene_obligation});
    return out;
}

// ---------------------------------------------------------------------------
// Compilation: confirmed answers become predicates; inferred or unconfirmed
// hints become plain evidence units, never contract entries.

inline Compiled compile_contract(const std::vector<ClarificationAnswer>& answers,
                                 const Profile& profile) {
    Compiled out;

    std::map<std::string, const ClarificationAnswer*> by_question;
    for (const auto& a : answers) by_question[a.question_id] = &a;

    std::set<std::string> seen_pred_ids;
    for (const auto& fact : profile.predicate_facts) {
        if (!fact.hard)
            throw UnconfirmedHardeningError("predicate fact not marked hard: " +
                                            fact.predicate.id);
        if (!fact.predicate.provenance.confirmed)
            throw UnconfirmedHardeningError("unconfirmed fact offered as predicate: " +
                                            fact.predicate.id);
        auto it = by_question.find(fact.answer_id);
        if (it == by_question.end() || !it->second->confirmed)
            throw UnconfirmedHardeningError("predicate " + fact.predicate.id +
                                            " lacks a confirmed answer");
        if (fact.predicate.provenance.raw_span.empty())
            throw Error("confirmed provenance needs a raw span: " + fact.predicate.id);
        if (!kind_comparator_valid(fact.predicate.kind, fact.predicate.comparator))
            throw Error("invalid kind/comparator pairing for " + fact.predicate.id);
        if (!seen_pred_ids.insert(fact.predicate.id).second)
            throw DuplicateIdError("duplicate predicate id: " + fact.predicate.id);
        out.contract.predicates.push_back(fact.predicate);
    }

    std::set<std::string> seen_unit_ids;
    for (const auto& u : profile.evidence) {
        if (u.cost < 1) throw Error("evidence cost must be >= 1: " + u.id);
        if (!seen_unit_ids.insert(u.id).second)
            throw DuplicateIdError("duplicate evidence id: " + u.id);
        out.pool.units.push_back(u);
    }
    for (const auto& hint : profile.soft_hints) {
        if (!seen_unit_ids.insert(hint.id).second)
            throw DuplicateIdError("duplicate evidence id: " + hint.id);
        EvidenceUnit u;
        u.id = hint.id;
        u.content = hint.text;
        u.dimension = hint.dimension;
        u.provenance = {hint.source_turn, false, hint.text};
        u.tail = false;
        u.cost = 1;
        out.pool.units.push_back(u);
    }

    out.state.turn = profile.turn;
    out.state.obligations = profile.obligations;
    // Digest over confirmed content only: a longer visible archive must not
    // change compiled state.
    std::uint64_t digest = 0x5c5c5c5cull;
    for (const auto& a : answers)
        if (a.confirmed) digest = hash_combine(digest, a.question_id + "=" + a.answer);
    out.state.history_digest = "confirmed:" + std::to_string(digest);

    std::string scenario;
    for (const auto& obs : profile.observations) {
        if (!scenario.empty()) scenario += "\n";
        scenario += obs;
    }
    out.context = make_turn_context(scenario, profile.active_dimensions,
                                    profile.required_fields, profile.tail_dimensions);

    out.requirements = derive_requirements(out.contract, out.state, out.context);

    std::set<std::string> req_ids;
    for (const auto& r : out.requirements.requirements)
        if (!req_ids.insert(r.id).second)
            throw DuplicateIdError("duplicate requirement id: " + r.id);

    // Covers entries for requirements that are not currently derived (e.g.
    // an obligation not yet due) simply have no matrix column.
    out.matrix = CoverageMatrix(out.pool, out.requirements);
    return out;
}

}  // namespace cbea
