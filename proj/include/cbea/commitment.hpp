#pragma once
// Structured commitments, control acts, predicate evaluation over commitment
// field paths, strict schema parsing, and attempt-outcome classification.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbea/contract.hpp"
#include "cbea/core.hpp"

namespace cbea {

enum class RepairStatus { none, clarify, recontract, abstain, fallback };

inline const char* to_string(RepairStatus s) {
    switch (s) {
        case RepairStatus::none: return "none";
        case RepairStatus::clarify: return "clarify";
        case RepairStatus::recontract: return "recontract";
        case RepairStatus::abstain: return "abstain";
        case RepairStatus::fallback: return "fallback";
    }
    return "?";
}

inline std::optional<RepairStatus> repair_status_from(const std::string& s) {
    if (s == "none") return RepairStatus::none;
    if (s == "clarify") return RepairStatus::clarify;
    if (s == "recontract") return RepairStatus::recontract;
    if (s == "abstain") return RepairStatus::abstain;
    if (s == "fallback") return RepairStatus::fallback;
    return std::nullopt;
}

// Candidate schema: selected option, commitment type, claimed predicates,
// evidence witness ids, covered requirements, consequence obligations,
// repair status, slots, surface requirements, surface text.
struct StructuredCommitment {
    std::string id;
    std::string selected_option;
    std::string commitment_type;
    std::vector<std::string> claimed_predicates;
    std::vector<std::string> evidence_witness_ids;
    std::vector<std::string> covered_requirements;
    std::vector<std::string> consequence_obligations;
    RepairStatus repair_status = RepairStatus::none;
    std::map<std::string, Value> slots;
    std::vector<std::string> surface_requirements;
    std::string surface_text;

    bool carries_commitment() const { return repair_status == RepairStatus::none; }
};

enum class ActKind { commitment, clarify, recontract, abstain, fallback };

inline const char* to_string(ActKind k) {
    switch (k) {
        case ActKind::commitment: return "commitment";
        case ActKind::clarify: return "clarify";
        case ActKind::recontract: return "recontract";
        case ActKind::abstain: return "abstain";
        case ActKind::fallback: return "fallback";
    }
    return "?";
}

enum class InfeasibilityKind {
    missing_evidence,
    contract_conflict,
    unsupported_commitment,
    validator_failure,
};

inline const char* to_string(InfeasibilityKind k) {
    switch (k) {
        case InfeasibilityKind::missing_evidence: return "missing_evidence";
        case InfeasibilityKind::contract_conflict: return "contract_conflict";
        case InfeasibilityKind::unsupported_commitment: return "unsupported_commitment";
        case InfeasibilityKind::validator_failure: return "validator_failure";
    }
    return "?";
}

struct InfeasibilityReason {
    InfeasibilityKind kind = InfeasibilityKind::validator_failure;
    std::vector<std::string> detail;  // requirement or predicate ids
};

// A control act either carries a commitment or is a non-commitment repair
// act; repair acts never hold a selected option or obligations.
struct ControlAct {
    ActKind kind = ActKind::commitment;
    std::optional<StructuredCommitment> commitment;
    std::optional<InfeasibilityReason> reason;
    std::string text;
};

// ---------------------------------------------------------------------------
// Predicate evaluation. Total over any parseable commitment: every target
// resolves to a scalar, a list, or absent, and every comparator returns
// pass/fail. An absent field passes only under `absent`.

namespace detail {

struct FieldView {
    bool present = false;
    bool is_list = false;
    Value scalar;
    const std::vector<std::string>* list = nullptr;
};

inline FieldView resolve_field(const StructuredCommitment& a, const std::string& target) {
    FieldView v;
    auto scalar = [&](const std::string& s) {
        v.present = !s.empty();
        v.scalar = s;
    };
    auto list = [&](const std::vector<std::string>& l) {
        v.present = !l.empty();
        v.is_list = true;
        v.list = &l;
    };
    if (target == "selected_option") scalar(a.selected_option);
    else if (target == "commitment_type") scalar(a.commitment_type);
    else if (target == "repair_status") scalar(to_string(a.repair_status));
    else if (target == "surface_text") scalar(a.surface_text);
    else if (target == "claimed_predicates") list(a.claimed_predicates);
    else if (target == "evidence_witness_ids") list(a.evidence_witness_ids);
    else if (target == "covered_requirements") list(a.covered_requirements);
    else if (target == "consequence_obligations") list(a.consequence_obligations);
    else if (target == "surface_requirements") list(a.surface_requirements);
    else if (target.rfind("slots.", 0) == 0) {
        auto it = a.slots.find(target.substr(6));
        if (it != a.slots.end() && !value_is_absent(it->second)) {
            v.present = true;
            v.scalar = it->second;
        }
    }
    return v;
}

inline bool scalar_equal(const Value& field, const Value& want) {
    if (const auto* fb = std::get_if<bool>(&field)) {
        if (const auto* wb = std::get_if<bool>(&want)) return *fb == *wb;
        if (const auto* ws = std::get_if<std::string>(&want))
            return (*fb ? "true" : "false") == *ws;
        return false;
    }
    if (const auto* fd = std::get_if<double>(&field)) {
        if (const auto* wd = std::get_if<double>(&want)) return *fd == *wd;
        return false;
    }
    if (const auto* fs = std::get_if<std::string>(&field)) {
        if (const auto* ws = std::get_if<std::string>(&want)) return *fs == *ws;
        if (const auto* wb = std::get_if<bool>(&want))
            return *fs == (*wb ? "true" : "false");
        return false;
    }
    return false;
}

}  // namespace detail

inline bool check_predicate(const HardPredicate& p, const StructuredCommitment& a) {
    const auto field = detail::resolve_field(a, p.target);

    if (!field.present) return p.comparator == Comparator::absent;

    switch (p.comparator) {
        case Comparator::absent:
            // Value-scoped absence on lists: the named value must not appear.
            if (field.is_list) {
                const std::string want = value_to_string(p.value);
                for (const auto& item : *field.list)
                    if (item == want) return false;
                return true;
            }
            return false;
        case Comparator::eq:
            return !field.is_list && detail::scalar_equal(field.scalar, p.value);
        case Comparator::neq:
            return !field.is_list && !detail::scalar_equal(field.scalar, p.value);
        case Comparator::leq:
        case Comparator::geq: {
            if (field.is_list) return false;
            const auto* fv = std::get_if<double>(&field.scalar);
            const auto* pv = std::get_if<double>(&p.value);
            if (!fv || !pv) return false;
            return p.comparator == Comparator::leq ? *fv <= *pv : *fv >= *pv;
        }
        case Comparator::in_set: {
            if (field.is_list) {
                const std::string want = value_to_string(p.value);
                for (const auto& item : *field.list)
                    if (item == want) return true;
                return false;
            }
            if (const auto* allowed = std::get_if<std::vector<std::string>>(&p.value)) {
                const std::string have = value_to_string(field.scalar);
                for (const auto& item : *allowed)
                    if (item == have) return true;
                return false;
            }
            return detail::scalar_equal(field.scalar, p.value);
        }
    }
    return false;
}

inline int count_hard_violations(const HardContract& h, const StructuredCommitment& a) {
    int n = 0;
    for (const auto& p : h.predicates)
        if (!check_predicate(p, a)) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Strict schema parse. Unknown fields are rejected, all fields are required,
// and serialize(parse(t)) is canonical (sorted keys, stable formatting).

struct ParseFailure {
    std::string reason;
};

struct ParseResult {
    std::optional<StructuredCommitment> value;
    std::string error;

    bool ok() const { return value.has_value(); }
};

namespace detail {

inline nlohmann::json value_to_json(const Value& v) {
    struct Conv {
        nlohmann::json operator()(std::monostate) const { return nullptr; }
        nlohmann::json operator()(bool b) const { return b; }
        nlohmann::json operator()(double d) const { return d; }
        nlohmann::json operator()(const std::string& s) const { return s; }
        nlohmann::json operator()(const std::vector<std::string>& l) const { return l; }
    };
    return std::visit(Conv{}, v);
}

inline Value value_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::monostate{};
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_array()) return j.get<std::vector<std::string>>();
    throw Error("unsupported value payload");
}

}  // namespace detail

inline nlohmann::json commitment_to_json(const StructuredCommitment& a) {
    nlohmann::json j;
    j["id"] = a.id;
    j["selected_option"] = a.selected_option;
    j["commitment_type"] = a.commitment_type;
    j["claimed_predicates"] = a.claimed_predicates;
    j["evidence_witness_ids"] = a.evidence_witness_ids;
    j["covered_requirements"] = a.covered_requirements;
    j["consequence_obligations"] = a.consequence_obligations;
    j["repair_status"] = to_string(a.repair_status);
    nlohmann::json slots = nlohmann::json::object();
    for (const auto& [k, v] : a.slots) slots[k] = detail::value_to_json(v);
    j["slots"] = slots;
    j["surface_requirements"] = a.surface_requirements;
    j["surface_text"] = a.surface_text;
    return j;
}

inline std::string serialize_commitment(const StructuredCommitment& a) {
    return commitment_to_json(a).dump();
}

inline ParseResult parse_commitment(const std::string& text) {
    static const std::vector<std::string> kFields = {
        "id", "selected_option", "commitment_type", "claimed_predicates",
        "evidence_witness_ids", "covered_requirements", "consequence_obligations",
        "repair_status", "slots", "surface_requirements", "surface_text"};

    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) return {std::nullopt, "malformed json"};
    if (!j.is_object()) return {std::nullopt, "commitment must be a json object"};

    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const auto& f : kFields) known = known || f == key;
        if (!known) return {std::nullopt, "unknown field: " + key};
    }
    for (const auto& f : kFields)
        if (!j.contains(f)) return {std::nullopt, "missing field: " + f};

    StructuredCommitment a;
    try {
        a.id = j.at("id").get<std::string>();
        a.selected_option = j.at("selected_option").get<std::string>();
        a.commitment_type = j.at("commitment_type").get<std::string>();
        a.claimed_predicates = j.at("claimed_predicates").get<std::vector<std::string>>();
        a.evidence_witness_ids = j.at("evidence_witness_ids").get<std::vector<std::string>>();
        a.covered_requirements = j.at("covered_requirements").get<std::vector<std::string>>();
        a.consequence_obligations =
            j.at("consequence_obligations").get<std::vector<std::string>>();
        auto rs = repair_status_from(j.at("repair_status").get<std::string>());
        if (!rs) return {std::nullopt, "bad repair_status"};
        a.repair_status = *rs;
        if (!j.at("slots").is_object()) return {std::nullopt, "slots must be an object"};
        for (const auto& [k, v] : j.at("slots").items())
            a.slots[k] = detail::value_from_json(v);
        a.surface_requirements = j.at("surface_requirements").get<std::vector<std::string>>();
        a.surface_text = j.at("surface_text").get<std::string>();
    } catch (const std::exception& e) {
        return {std::nullopt, std::string("schema violation: ") + e.what()};
    }

    // Repair acts carry no commitment payload.
    if (a.repair_status != RepairStatus::none &&
        (!a.selected_option.empty() || !a.consequence_obligations.empty()))
        return {std::nullopt, "repair act must not carry commitment fields"};

    return {a, ""};
}

// ---------------------------------------------------------------------------
// Attempt outcomes. Every attempt maps to exactly one state; failure states
// keep their own denominators and are never counted as safe emissions.

enum class AttemptState {
    emitted,
    repair_act,
    timeout,
    no_output,
    parse_failure,
    partial_output,
    blank_output,
    invalid,
};

inline const char* to_string(AttemptState s) {
    switch (s) {
        case AttemptState::emitted: return "emitted";
        case AttemptState::repair_act: return "repair_act";
        case AttemptState::timeout: return "timeout";
        case AttemptState::no_output: return "no_output";
        case AttemptState::parse_failure: return "parse_failure";
        case AttemptState::partial_output: return "partial_output";
        case AttemptState::blank_output: return "blank_output";
        case AttemptState::invalid: return "invalid";
    }
    return "?";
}

inline const std::vector<AttemptState>& all_attempt_states() {
    static const std::vector<AttemptState> states = {
        AttemptState::emitted,       AttemptState::repair_act,
        AttemptState::timeout,       AttemptState::no_output,
        AttemptState::parse_failure, AttemptState::partial_output,
        AttemptState::blank_output,  AttemptState::invalid,
    };
    return states;
}

struct AttemptOutcome {
    AttemptState state = AttemptState::invalid;
    std::optional<ControlAct> act;
    std::string raw_text;
    long input_tokens = 0;
    long output_tokens = 0;
};

struct BackendConfig {
    std::string endpoint;
    std::string model_id;
    double temperature = 0.2;
    int max_output_tokens = 2200;
    int parse_retries = 3;
    int timeout_seconds = 180;
};

}  // namespace cbea
