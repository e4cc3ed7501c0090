#pragma once
// Candidate production: the deterministic rule-based generator that drives
// offline runs, the optional external text-completion backend, surface
// realization and mutable-state update.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cbea/commitment.hpp"
#include "cbea/contract.hpp"
#include "cbea/core.hpp"
#include "cbea/fixtures.hpp"
#include "cbea/selector.hpp"

namespace cbea {

enum class Variant {
    raw,
    summarized,
    rag,
    long_context,
    tool_agent,
    validator_only,
    runtime_no_cbea,
    cbea_lcv,
    oracle_evidence,
};

inline const std::vector<Variant>& all_variants() {
    static const std::vector<Variant> v = {
        Variant::raw,           Variant::summarized,     Variant::rag,
        Variant::long_context,  Variant::tool_agent,     Variant::validator_only,
        Variant::runtime_no_cbea, Variant::cbea_lcv,     Variant::oracle_evidence,
    };
    return v;
}

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::raw: return "raw";
        case Variant::summarized: return "summarized";
        case Variant::rag: return "rag";
        case Variant::long_context: return "long_context";
        case Variant::tool_agent: return "tool_agent";
        case Variant::validator_only: return "validator_only";
        case Variant::runtime_no_cbea: return "runtime_no_cbea";
        case Variant::cbea_lcv: return "cbea_lcv";
        case Variant::oracle_evidence: return "oracle_evidence";
    }
    return "?";
}

inline std::optional<Variant> variant_from(const std::string& s) {
    for (auto v : all_variants())
        if (s == to_string(v)) return v;
    return std::nullopt;
}

// Gated variants compile a contract and route through the validation gate.
inline bool variant_gated(Variant v) {
    switch (v) {
        case Variant::validator_only:
        case Variant::runtime_no_cbea:
        case Variant::cbea_lcv:
        case Variant::oracle_evidence:
            return true;
        default:
            return false;
    }
}

// Ungated baselines hold no obligation store except the tool/memory agent.
inline bool variant_tracks_obligations(Variant v) {
    return variant_gated(v) || v == Variant::tool_agent;
}

// ---------------------------------------------------------------------------
// Rule-based candidate generation.

struct CandidateGenOptions {
    // Units candidates may cite as witnesses (activated set or attention set).
    std::set<std::string> witness_source;
    // Validation-side coverage view; normally the full compiled set.
    const RequiredCoverageSet* coverage_view = nullptr;
    bool acknowledge_obligations = true;
    bool include_repair_candidates = true;
};

namespace detail {

inline std::string leading_sentences(const Fixture& f, std::size_t n) {
    if (f.observations().empty()) return {};
    const std::string& first = f.observations().front();
    std::string out;
    std::size_t taken = 0;
    for (char ch : first) {
        out.push_back(ch);
        if (ch == '.' && ++taken >= n) break;
    }
    return out;
}

inline std::vector<std::string> witnesses_for_option(
    const Compiled& comp, const OptionDescriptor& o, const CandidateGenOptions& opts) {
    std::vector<std::string> out;
    const RequiredCoverageSet& reqs =
        opts.coverage_view ? *opts.coverage_view : comp.requirements;
    for (const auto& r : reqs.requirements) {
        const EvidenceUnit* best = nullptr;
        for (const auto& uid : opts.witness_source) {
            const EvidenceUnit* e = comp.pool.find(uid);
            if (!e || !comp.matrix.has_unit(uid) || !comp.matrix.has_requirement(r.id))
                continue;
            if (!comp.matrix.covered(uid, r.id)) continue;
            if (!best || e->id < best->id) best = e;
        }
        if (best && std::find(out.begin(), out.end(), best->id) == out.end())
            out.push_back(best->id);
    }
    for (const auto& wid : o.asserted_witness_ids)
        if (std::find(out.begin(), out.end(), wid) == out.end()) out.push_back(wid);
    return out;
}

inline std::vector<std::string> covered_by(const Compiled& comp,
                                           const std::vector<std::string>& witnesses) {
    std::vector<std::string> out;
    for (const auto& r : comp.requirements.requirements)
        for (const auto& wid : witnesses)
            if (comp.matrix.has_unit(wid) && comp.matrix.covered(wid, r.id)) {
                out.push_back(r.id);
                break;
            }
    return out;
}

inline std::string witness_digest(const Compiled& comp,
                                  const std::vector<std::string>& witnesses) {
    std::string out;
    for (const auto& wid : witnesses) {
        const EvidenceUnit* e = comp.pool.find(wid);
        if (!e) continue;
        if (!out.empty()) out += "; ";
        out += e->content;
    }
    return out;
}

}  // namespace detail

// Deterministic candidate set. Per option: a faithful candidate (witnesses
// drawn only from the witness source, due obligations acknowledged), a lean
// under-covered candidate, and for bait options a salient candidate that
// echoes the scenario. Repair candidates are appended per applicable reason.
inline std::vector<StructuredCommitment> generate_candidates(
    const Fixture& f, const Compiled& comp, const CandidateGenOptions& opts) {
    std::vector<StructuredCommitment> out;
    const auto due = comp.state.due_obligation_ids();

    for (const auto& o : f.options) {
        StructuredCommitment full;
        full.id = "c:" + o.id + ":full";
        full.selected_option = o.id;
        full.commitment_type = "recommendation";
        for (const auto& [k, v] : o.truth_slots) full.slots[k] = v;
        full.evidence_witness_ids = detail::witnesses_for_option(comp, o, opts);
        full.covered_requirements = detail::covered_by(comp, full.evidence_witness_ids);
        if (opts.acknowledge_obligations) full.consequence_obligations = due;
        full.surface_requirements = f.surface_requirements;
        for (const auto& p : comp.contract.predicates)
            if (check_predicate(p, full)) full.claimed_predicates.push_back(p.id);
        full.surface_text = "Recommend " + o.label + ". Grounds: " +
                            detail::witness_digest(comp, full.evidence_witness_ids) + ".";
        out.push_back(full);

        StructuredCommitment lean = full;
        lean.id = "c:" + o.id + ":lean";
        if (lean.evidence_witness_ids.size() > 1)
            lean.evidence_witness_ids.resize(1);
        for (const auto& wid : o.asserted_witness_ids)
            if (std::find(lean.evidence_witness_ids.begin(), lean.evidence_witness_ids.end(),
                          wid) == lean.evidence_witness_ids.end())
                lean.evidence_witness_ids.push_back(wid);
        lean.covered_requirements = detail::covered_by(comp, lean.evidence_witness_ids);
        lean.consequence_obligations.clear();
        lean.surface_requirements.clear();
        lean.claimed_predicates.clear();
        for (const auto& p : comp.contract.predicates)
            if (check_predicate(p, lean)) lean.claimed_predicates.push_back(p.id);
        lean.surface_text = "Recommend " + o.label + ": " + o.narrative + ".";
        out.push_back(lean);

        if (o.bait) {
            StructuredCommitment bait = lean;
            bait.id = "c:" + o.id + ":bait";
            // A variant holding an obligation store surfaces obligations even
            // in its careless candidate.
            if (opts.acknowledge_obligations) bait.consequence_obligations = due;
            for (const auto& claim : o.bait_claims) bait.claimed_predicates.push_back(claim);
            bait.surface_text = "Recommend " + o.label + ": " + o.narrative + ". " +
                                detail::leading_sentences(f, 2);
            out.push_back(bait);
        }
    }

    if (opts.include_repair_candidates) {
        auto repair = [&](RepairStatus status, const std::string& text) {
            StructuredCommitment r;
            r.id = std::string("c:repair:") + to_string(status);
            r.commitment_type = "repair";
            r.repair_status = status;
            r.surface_text = text;
            out.push_back(r);
        };
        repair(RepairStatus::clarify, "Could you confirm the missing detail first?");
        repair(RepairStatus::abstain, "Holding off on a recommendation for now.");
    }
    return out;
}

// Spec-shaped entry point: variant decides witness access and obligation
// tracking; the activation result supplies the witness source.
inline std::vector<StructuredCommitment> generate_candidates_rule_based(
    const Fixture& f, const Compiled& comp, const ActivationResult& activation,
    Variant variant, std::uint64_t /*seed*/ = 0) {
    CandidateGenOptions opts;
    opts.witness_source = activation.selected_set();
    opts.acknowledge_obligations = variant_tracks_obligations(variant);
    return generate_candidates(f, comp, opts);
}

// Ungated pick: surface relevance only (token overlap between candidate
// surface text and the full observation stream), ties by candidate id.
inline const StructuredCommitment* rank_by_surface_relevance(
    const std::vector<StructuredCommitment>& candidates, const TurnContext& c) {
    const std::set<std::string> query(c.observation_tokens.begin(),
                                      c.observation_tokens.end());
    const StructuredCommitment* best = nullptr;
    std::size_t best_score = 0;
    for (const auto& a : candidates) {
        const auto toks = normalize_tokens(a.surface_text);
        const std::size_t score = overlap_count(toks, query);
        if (!best || score > best_score || (score == best_score && a.id < best->id)) {
            best = &a;
            best_score = score;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Surface realization. Deterministic template over the act, activated
// evidence and context. Strict mode rejects witness ids that cannot be
// resolved to content snippets.

inline std::string realize_surface(const ControlAct& act, const MutableState& u,
                                   const EvidencePool& pool, const TurnContext& c,
                                   bool strict = true) {
    if (act.kind != ActKind::commitment) {
        // Repair acts carry a question or a decline, never a recommendation.
        return act.text;
    }
    const StructuredCommitment& a = *act.commitment;
    std::string out = "Recommendation: " + a.selected_option + ".";
    if (!a.evidence_witness_ids.empty()) {
        out += " Evidence:";
        for (const auto& wid : a.evidence_witness_ids) {
            const EvidenceUnit* e = pool.find(wid);
            if (!e) {
                if (strict)
                    throw MissingSurfaceRequirementError("unresolvable witness: " + wid);
                out += " [unverified " + wid + "]";
                continue;
            }
            out += " [" + wid + "] " + e->content + ";";
        }
    }
    for (const auto& sr : a.surface_requirements) out += " Note: " + sr + ".";
    if (!a.consequence_obligations.empty()) {
        out += " Carried obligations:";
        for (const auto& oid : a.consequence_obligations) {
            out += " " + oid;
            for (const auto& ob : u.obligations)
                if (ob.id == oid) out += " (" + ob.description + ")";
        }
        out += ".";
    }
    (void)c;
    return out;
}

// State update: commitments append their obligations, repair acts append
// nothing, prior obligations persist until discharged.
inline MutableState update_state(const MutableState& u, const ControlAct& act,
                                 const TurnContext& /*next*/) {
    MutableState out = u;
    out.turn += 1;
    if (act.kind == ActKind::commitment && act.commitment) {
        for (const auto& oid : act.commitment->consequence_obligations) {
            bool known = false;
            for (const auto& ob : out.obligations) known = known || ob.id == oid;
            if (!known)
                out.obligations.push_back(
                    {oid, out.turn + 2, "carried from commitment " + act.commitment->id, {}});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Backend path: single-shot text completion against a configurable endpoint.
// The transport is injectable; the default uses cpp-httplib. All failures
// become attempt states, never lost rows.

struct TransportReply {
    bool transport_error = false;  // connect/timeout class failures
    std::string error;
    int status = 0;
    std::string body;
};

using Transport = std::function<TransportReply(const BackendConfig&, const std::string& body)>;

Transport default_http_transport();  // defined in backend_http.hpp

inline AttemptOutcome classify_backend_text(const std::string& text, int max_output_tokens) {
    AttemptOutcome out;
    out.raw_text = text;
    out.output_tokens = static_cast<long>(whitespace_token_count(text));

    std::string trimmed = text;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
        trimmed.pop_back();
    std::size_t start = 0;
    while (start < trimmed.size() && std::isspace(static_cast<unsigned char>(trimmed[start])))
        ++start;
    trimmed = trimmed.substr(start);

    if (trimmed.empty()) {
        out.state = AttemptState::blank_output;
        return out;
    }

    auto parsed = parse_commitment(trimmed);
    if (parsed.ok()) {
        ControlAct act;
        if (parsed.value->carries_commitment()) {
            act.kind = ActKind::commitment;
            act.commitment = *parsed.value;
            act.text = parsed.value->surface_text;
            out.state = AttemptState::emitted;
        } else {
            switch (parsed.value->repair_status) {
                case RepairStatus::clarify: act.kind = ActKind::clarify; break;
                case RepairStatus::recontract: act.kind = ActKind::recontract; break;
                case RepairStatus::abstain: act.kind = ActKind::abstain; break;
                default: act.kind = ActKind::fallback; break;
            }
            act.text = parsed.value->surface_text;
            out.state = AttemptState::repair_act;
        }
        out.act = act;
        return out;
    }

    // Truncation heuristic: output that opens a JSON object, never closes it,
    // and sits at the token cap is a budget-exhausted partial.
    const bool opens = trimmed.front() == '{';
    const bool closes = trimmed.back() == '}';
    if (opens && !closes && out.output_tokens >= max_output_tokens) {
        out.state = AttemptState::partial_output;
        return out;
    }
    out.state = AttemptState::parse_failure;
    return out;
}

// Sends the prompt, retrying the parse on malformed structured output. A
// commitment is never fabricated from unparseable text.
inline AttemptOutcome generate_candidates_backend(const std::string& prompt,
                                                  const BackendConfig& cfg,
                                                  const Transport& transport) {
    AttemptOutcome out;
    out.input_tokens = static_cast<long>(whitespace_token_count(prompt));

    nlohmann::json req;
    req["model"] = cfg.model_id;
    req["prompt"] = prompt;
    req["temperature"] = cfg.temperature;
    req["max_tokens"] = cfg.max_output_tokens;

    for (int attempt = 0; attempt <= cfg.parse_retries; ++attempt) {
        const TransportReply reply = transport(cfg, req.dump());
        if (reply.transport_error) {
            out.state = AttemptState::timeout;
            out.raw_text = reply.error;
            return out;
        }
        if (reply.status != 200) {
            out.state = AttemptState::no_output;
            out.raw_text = "http " + std::to_string(reply.status);
            return out;
        }
        std::string text;
        nlohmann::json body = nlohmann::json::parse(reply.body, nullptr, false);
        if (body.is_object() && body.contains("text") && body["text"].is_string())
            text = body["text"].get<std::string>();
        else
            text = reply.body;

        AttemptOutcome classified = classify_backend_text(text, cfg.max_output_tokens);
        classified.input_tokens = out.input_tokens;
        if (classified.state != AttemptState::parse_failure || attempt == cfg.parse_retries)
            return classified;
    }
    out.state = AttemptState::parse_failure;
    return out;
}

}  // namespace cbea
