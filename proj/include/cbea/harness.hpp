#pragma once
// Matched-run orchestration: per-variant evidence access, the gate wiring,
// oracle scoring, parallel fan-out with ordered reduction, report emission
// and the self-test battery.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cbea/bootstrap.hpp"
#include "cbea/candidates.hpp"
#include "cbea/commitment.hpp"
#include "cbea/contract.hpp"
#include "cbea/core.hpp"
#include "cbea/fixtures.hpp"
#include "cbea/lcv.hpp"
#include "cbea/metrics.hpp"
#include "cbea/selector.hpp"

namespace cbea {

enum class AblationKind { no_validator, no_repair, no_coverage_tail };

inline const char* to_string(AblationKind a) {
    switch (a) {
        case AblationKind::no_validator: return "no_validator";
        case AblationKind::no_repair: return "no_repair";
        case AblationKind::no_coverage_tail: return "no_coverage_tail";
    }
    return "?";
}

inline std::optional<AblationKind> ablation_from(const std::string& s) {
    for (auto a : {AblationKind::no_validator, AblationKind::no_repair,
                   AblationKind::no_coverage_tail})
        if (s == to_string(a)) return a;
    return std::nullopt;
}

struct RunConfig {
    std::string manifest_path;
    std::vector<std::string> variants;
    std::uint64_t seed = 7;
    int budget_total = 12;
    int tail_reserve = -1;  // -1: per-fixture sizing rule
    SelectorWeights weights;
    std::optional<BackendConfig> backend;
    Transport transport;  // set alongside backend; injectable for tests
    int parallelism = 0;  // 0: hardware concurrency; also caps in-flight requests
    std::string output_dir = "out";
    double history_factor = 1.0;
};

// Ablation switches over the full runtime.
struct PipelineTweaks {
    bool use_gate = true;           // false: emit the top soft-score candidate
    bool allow_repair = true;       // false: force emission even when F is empty
    bool coverage_machinery = true; // false: hard-predicate view only, Rel-Over selection
};

namespace detail {

inline Budget fixture_budget(const RunConfig& cfg, const EvidencePool& pool) {
    if (cfg.tail_reserve >= 0) {
        Budget b;
        b.total = cfg.budget_total;
        b.tail_reserve = cfg.tail_reserve;
        return b;
    }
    return make_budget(cfg.budget_total, pool);
}

// Relevance-rate ranking shared by attention sets and the no-selector paths.
inline std::vector<const EvidenceUnit*> by_relevance(const EvidencePool& pool,
                                                     const TurnContext& c,
                                                     bool include_tail = true) {
    std::vector<const EvidenceUnit*> units;
    for (const auto& u : pool.units)
        if (include_tail || !u.tail) units.push_back(&u);
    std::stable_sort(units.begin(), units.end(),
                     [&](const EvidenceUnit* a, const EvidenceUnit* b) {
                         const double ra = unit_relevance(*a, c) / a->cost;
                         const double rb = unit_relevance(*b, c) / b->cost;
                         if (ra != rb) return ra > rb;
                         return a->id < b->id;
                     });
    return units;
}

inline ActivationResult from_ids(const EvidencePool& pool, const std::vector<std::string>& ids) {
    ActivationResult out;
    for (const auto& id : ids) {
        const EvidenceUnit* e = pool.find(id);
        if (!e) continue;
        out.selected.push_back(id);
        out.spent_cost += e->cost;
    }
    return out;
}

inline ActivationResult relevance_only_select(const EvidencePool& pool, const TurnContext& c,
                                              int budget_total) {
    ActivationResult out;
    int spent = 0;
    for (const auto* u : by_relevance(pool, c)) {
        if (unit_relevance(*u, c) <= 0.0) break;
        if (spent + u->cost > budget_total) continue;
        out.selected.push_back(u->id);
        spent += u->cost;
    }
    out.spent_cost = spent;
    return out;
}

inline ActivationResult pool_order_select(const EvidencePool& pool, int budget_total) {
    ActivationResult out;
    int spent = 0;
    for (const auto& u : pool.units) {
        if (spent + u.cost > budget_total) continue;
        out.selected.push_back(u.id);
        spent += u.cost;
    }
    out.spent_cost = spent;
    return out;
}

inline ActivationResult attention_top_k(const EvidencePool& pool, const TurnContext& c,
                                        std::size_t k, bool include_tail = true) {
    ActivationResult out;
    for (const auto* u : by_relevance(pool, c, include_tail)) {
        if (out.selected.size() >= k) break;
        out.selected.push_back(u->id);
        out.spent_cost += u->cost;
    }
    return out;
}

inline std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        cur.push_back(ch);
        if (ch == '.') {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// Lossy digest used by the summarized baseline: the trailing third of each
// turn's sentences is dropped.
inline std::string digest_observations(const std::vector<std::string>& observations) {
    std::string out;
    for (const auto& obs : observations) {
        const auto sentences = split_sentences(obs);
        const std::size_t keep = (sentences.size() * 2 + 2) / 3;
        for (std::size_t i = 0; i < keep; ++i) out += sentences[i];
        out += "\n";
    }
    return out;
}

inline std::string echo_recap(const std::vector<std::string>& observations) {
    std::string out = " Context recap:";
    std::size_t idx = 0;
    for (const auto& obs : observations)
        for (const auto& s : split_sentences(obs)) {
            if (idx++ % 3 != 2) out += s;
        }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Per-variant evidence activation.

inline ActivationResult activate_for_variant(const Fixture& f, const Compiled& comp,
                                             Variant variant, const RunConfig& cfg,
                                             const PipelineTweaks& tweaks) {
    const Budget budget = detail::fixture_budget(cfg, comp.pool);
    switch (variant) {
        case Variant::cbea_lcv: {
            if (!tweaks.coverage_machinery) {
                SelectorWeights w = cfg.weights;
                w.cov = 0.0;
                w.tail = 0.0;
                w.debt = 0.0;
                RequiredCoverageSet empty;
                CoverageMatrix m(comp.pool, empty);
                return greedy_select(comp.pool, empty, m, comp.state, comp.context, w,
                                     {budget.total, 0});
            }
            return greedy_select(comp.pool, comp.requirements, comp.matrix, comp.state,
                                 comp.context, cfg.weights, budget);
        }
        case Variant::oracle_evidence: {
            std::vector<std::string> ids;
            auto push = [&](const std::vector<std::string>& set) {
                for (const auto& id : set)
                    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
            };
            push(f.oracle_witnesses.hard);
            push(f.oracle_witnesses.required_witness);
            push(f.oracle_witnesses.tail);
            push(f.oracle_witnesses.debt);
            return detail::from_ids(comp.pool, ids);
        }
        case Variant::validator_only:
            return detail::pool_order_select(comp.pool, budget.total);
        case Variant::runtime_no_cbea:
            return detail::relevance_only_select(comp.pool, comp.context, budget.total);
        case Variant::raw:
            return detail::attention_top_k(comp.pool, comp.context, 9);
        case Variant::rag:
            return detail::attention_top_k(comp.pool, comp.context, 8);
        case Variant::long_context:
            return detail::attention_top_k(comp.pool, comp.context, 12);
        case Variant::summarized:
            return detail::attention_top_k(comp.pool, comp.context, 6, false);
        case Variant::tool_agent: {
            ActivationResult base = detail::attention_top_k(comp.pool, comp.context, 8);
            for (const auto& ob : comp.state.obligations)
                for (const auto& src : ob.source_evidence_ids)
                    if (!base.contains(src) && comp.pool.find(src)) {
                        base.selected.push_back(src);
                        base.spent_cost += comp.pool.find(src)->cost;
                    }
            return base;
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Prompt construction. Contract-bearing variants see compiled fields and
// activated evidence only; raw-history baselines embed the archive.

inline std::string build_prompt(const Fixture& f, const Compiled& comp, Variant variant,
                                const ActivationResult& activation) {
    std::ostringstream p;
    p << "Decision support task. Options:\n";
    for (const auto& o : f.options) {
        p << "- " << o.id << " (" << o.label << "):";
        for (const auto& [k, v] : o.truth_slots) p << " " << k << "=" << value_to_string(v);
        p << "\n";
    }

    auto evidence_block = [&](const std::vector<std::string>& ids) {
        for (const auto& id : ids) {
            const EvidenceUnit* e = comp.pool.find(id);
            if (e) p << "[" << e->id << "] " << e->content << "\n";
        }
    };

    switch (variant) {
        case Variant::raw:
        case Variant::long_context:
            p << "Full history:\n";
            for (const auto& obs : f.observations()) p << obs << "\n";
            break;
        case Variant::summarized:
            p << "Profile summary:\n" << detail::digest_observations(f.observations());
            break;
        case Variant::rag:
        case Variant::tool_agent:
            p << "Retrieved snippets:\n";
            evidence_block(activation.selected);
            if (variant == Variant::tool_agent) {
                p << "Obligation store:\n";
                for (const auto& ob : comp.state.obligations)
                    p << "- " << ob.id << " due turn " << ob.due_turn << ": "
                      << ob.description << "\n";
            }
            break;
        case Variant::validator_only:
        case Variant::runtime_no_cbea:
        case Variant::cbea_lcv:
        case Variant::oracle_evidence:
            p << "Confirmed contract:\n";
            for (const auto& pred : comp.contract.predicates)
                p << "- " << pred.id << " " << to_string(pred.kind) << " " << pred.target
                  << " " << to_string(pred.comparator) << " " << value_to_string(pred.value)
                  << "\n";
            p << "Required coverage:\n";
            for (const auto& r : comp.requirements.requirements)
                p << "- " << r.id << "\n";
            p << "Activated evidence:\n";
            evidence_block(activation.selected);
            p << "Obligations due:\n";
            for (const auto& oid : comp.state.due_obligation_ids()) p << "- " << oid << "\n";
            break;
    }
    p << "Reply with one JSON object using fields: id, selected_option, commitment_type, "
         "claimed_predicates, evidence_witness_ids, covered_requirements, "
         "consequence_obligations, repair_status, slots, surface_requirements, "
         "surface_text.\n";
    return p.str();
}

// ---------------------------------------------------------------------------
// Oracle scoring of one outcome against fixture labels.

inline OracleEval evaluate_outcome(const Fixture& f, const Compiled& comp,
                                   const AttemptOutcome& outcome) {
    OracleEval eval;
    const bool emitted = outcome.state == AttemptState::emitted;

    if (!f.oracle_feasible.empty() || f.bucket == Bucket::infeasible)
        if (f.oracle_feasible.empty()) eval.infeasible_emission = emitted;

    if (f.expected_repair) {
        bool match = false;
        if (outcome.state == AttemptState::repair_act && outcome.act)
            match = outcome.act->kind == *f.expected_repair;
        eval.repair_match = match;
    }

    if (!emitted || !outcome.act || !outcome.act->commitment) return eval;
    const StructuredCommitment& a = *outcome.act->commitment;

    // Hard violations are judged on the option's true attributes plus the
    // act's stated claims and obligations.
    StructuredCommitment probe = a;
    if (const OptionDescriptor* opt = f.find_option(a.selected_option)) {
        probe.slots.clear();
        for (const auto& [k, v] : opt->truth_slots) probe.slots[k] = v;
        bool violated = false;
        for (const auto& p : f.oracle_contract.predicates)
            violated = violated || !check_predicate(p, probe);
        eval.hard_violation = violated;
    } else {
        eval.hard_violation = true;  // committed to a nonexistent option
    }

    auto requirement_witnessed = [&](const std::string& rid) {
        if (!comp.matrix.has_requirement(rid)) return true;
        for (const auto& wid : a.evidence_witness_ids)
            if (comp.matrix.has_unit(wid) && comp.matrix.covered(wid, rid)) return true;
        return false;
    };
    auto labeled_failure = [&](const std::vector<std::string>& labeled) {
        for (const auto& uid : labeled) {
            const EvidenceUnit* e = comp.pool.find(uid);
            if (!e) continue;
            for (const auto& rid : e->covers)
                if (!requirement_witnessed(rid)) return true;
        }
        return false;
    };
    eval.coverage_failure = labeled_failure(f.oracle_witnesses.required_witness);
    eval.witness_drop = labeled_failure(f.oracle_witnesses.tail);

    bool missing_due = false;
    for (const auto& oid : comp.state.due_obligation_ids())
        if (std::find(a.consequence_obligations.begin(), a.consequence_obligations.end(),
                      oid) == a.consequence_obligations.end())
            missing_due = true;
    eval.consequence_failure = missing_due;
    return eval;
}

// ---------------------------------------------------------------------------
// One fixture through one variant pipeline.

inline RunRecord run_fixture(const Fixture& fixture, Variant variant, const RunConfig& cfg,
                             const PipelineTweaks& tweaks = {}) {
    RunRecord rec;
    rec.fixture_id = fixture.id;
    rec.variant = to_string(variant);
    try {
        const Fixture f = cfg.history_factor > 1.0
                              ? extend_history(fixture, cfg.history_factor)
                              : fixture;
        const Compiled comp = compile_fixture(f);
        const ActivationResult activation =
            activate_for_variant(f, comp, variant, cfg, tweaks);

        RequiredCoverageSet view;  // validation-side coverage view
        if (tweaks.coverage_machinery) {
            view = comp.requirements;
        } else {
            for (const auto& r : comp.requirements.requirements)
                if (r.source == RequirementSource::hard_predicate)
                    view.requirements.push_back(r);
        }

        CandidateGenOptions gen;
        gen.witness_source = activation.selected_set();
        gen.coverage_view = &view;
        gen.acknowledge_obligations =
            variant_tracks_obligations(variant) && tweaks.coverage_machinery;
        const auto candidates = generate_candidates(f, comp, gen);

        AttemptOutcome outcome;
        const std::string prompt = build_prompt(f, comp, variant, activation);
        outcome.input_tokens = static_cast<long>(whitespace_token_count(prompt));

        if (cfg.backend && cfg.transport) {
            // External backend path: one structured reply per fixture. Gated
            // variants still validate the parsed commitment before emission.
            outcome = generate_candidates_backend(prompt, *cfg.backend, cfg.transport);
            outcome.raw_text = scrub_shadow(f, outcome.raw_text);
            if (outcome.state != AttemptState::emitted &&
                outcome.state != AttemptState::repair_act)
                rec.realized_text = outcome.raw_text;
            if (variant_gated(variant) && outcome.state == AttemptState::emitted) {
                LcvInputs in{comp.contract, gen.witness_source, view,     comp.matrix,
                             comp.state,    comp.context,       comp.pool};
                const std::vector<StructuredCommitment> parsed = {*outcome.act->commitment};
                const GateDecision decision = emit_or_route(parsed, in);
                outcome.act = decision.act;
                outcome.state = decision.act.kind == ActKind::commitment
                                    ? AttemptState::emitted
                                    : AttemptState::repair_act;
            }
        } else if (!variant_gated(variant)) {
            const StructuredCommitment* pick =
                rank_by_surface_relevance(candidates, comp.context);
            ControlAct act;
            if (pick && pick->carries_commitment()) {
                act.kind = ActKind::commitment;
                act.commitment = *pick;
                outcome.state = AttemptState::emitted;
            } else if (pick) {
                act.kind = pick->repair_status == RepairStatus::clarify ? ActKind::clarify
                                                                        : ActKind::abstain;
                act.text = pick->surface_text;
                outcome.state = AttemptState::repair_act;
            } else {
                outcome.state = AttemptState::no_output;
            }
            if (pick) outcome.act = act;
        } else {
            LcvInputs in{comp.contract, gen.witness_source, view,     comp.matrix,
                         comp.state,    comp.context,       comp.pool};
            if (!tweaks.use_gate) {
                const StructuredCommitment* best = nullptr;
                double best_s = -1.0;
                for (const auto& a : candidates) {
                    if (!a.carries_commitment()) continue;
                    const double s =
                        soft_score(a, comp.state, gen.witness_source, comp.context, comp.pool);
                    if (!best || s > best_s || (s == best_s && a.id < best->id)) {
                        best = &a;
                        best_s = s;
                    }
                }
                if (best) {
                    outcome.state = AttemptState::emitted;
                    ControlAct act;
                    act.kind = ActKind::commitment;
                    act.commitment = *best;
                    outcome.act = act;
                } else {
                    outcome.state = AttemptState::no_output;
                }
            } else {
                GateDecision decision = emit_or_route(candidates, in);
                if (decision.act.kind != ActKind::commitment && !tweaks.allow_repair) {
                    // Forced emission: best lexicographic commitment wins.
                    LcvInputs flagged = in;
                    flagged.set_diagnosed_infeasible = true;
                    const auto ranked = lex_select(candidates, flagged);
                    const StructuredCommitment* best = nullptr;
                    for (const auto& rc : ranked)
                        if (rc.candidate->carries_commitment()) {
                            best = rc.candidate;
                            break;
                        }
                    if (best) {
                        decision.act = ControlAct{};
                        decision.act.kind = ActKind::commitment;
                        decision.act.commitment = *best;
                    }
                }
                outcome.state = decision.act.kind == ActKind::commitment
                                    ? AttemptState::emitted
                                    : AttemptState::repair_act;
                outcome.act = decision.act;
            }
        }

        // Realization. Raw-history baselines echo the visible archive; only
        // the intact gate guarantees resolvable witnesses, so ablated paths
        // realize leniently.
        if (outcome.act) {
            const bool strict = variant_gated(variant) && tweaks.use_gate &&
                                tweaks.allow_repair && tweaks.coverage_machinery;
            std::string text =
                realize_surface(*outcome.act, comp.state, comp.pool, comp.context, strict);
            if (variant == Variant::raw || variant == Variant::long_context)
                text += detail::echo_recap(f.observations());
            rec.realized_text = text;
            outcome.raw_text = text;
            outcome.output_tokens = static_cast<long>(whitespace_token_count(text));
        }

        if (variant_gated(variant)) {
            const auto privacy = privacy_boundary_check(prompt, f);
            rec.privacy_ok = privacy.pass;
        }

        rec.state = outcome.state;
        if (outcome.act) {
            rec.act_kind = to_string(outcome.act->kind);
            if (outcome.act->commitment) {
                rec.selected_option = outcome.act->commitment->selected_option;
                rec.witness_ids = outcome.act->commitment->evidence_witness_ids;
                rec.obligation_ids = outcome.act->commitment->consequence_obligations;
            }
        }
        rec.input_tokens = outcome.input_tokens;
        rec.output_tokens = outcome.output_tokens;
        rec.oracle_eval = evaluate_outcome(f, comp, outcome);
    } catch (const std::exception& e) {
        rec.state = AttemptState::invalid;
        rec.realized_text = std::string("error: ") + e.what();
        if (fixture.expected_repair) rec.oracle_eval.repair_match = false;
        if (fixture.oracle_feasible.empty()) rec.oracle_eval.infeasible_emission = false;
    }
    return rec;
}

// Fixture-level parallel fan-out with a single ordered reduction.
inline std::vector<RunRecord> run_variant(const Manifest& manifest, Variant variant,
                                          const RunConfig& cfg,
                                          const PipelineTweaks& tweaks = {}) {
    std::vector<RunRecord> records(manifest.fixtures.size());
    const unsigned n_threads = cfg.parallelism > 0
                                   ? static_cast<unsigned>(cfg.parallelism)
                                   : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < manifest.fixtures.size(); i += n_threads)
                records[i] = run_fixture(manifest.fixtures[i], variant, cfg, tweaks);
        });
    for (auto& th : pool) th.join();
    std::stable_sort(records.begin(), records.end(),
                     [](const RunRecord& a, const RunRecord& b) {
                         return a.fixture_id < b.fixture_id;
                     });
    return records;
}

inline std::vector<RunRecord> run_ablation(const Manifest& manifest, AblationKind ablation,
                                           const RunConfig& cfg) {
    PipelineTweaks tweaks;
    switch (ablation) {
        case AblationKind::no_validator: tweaks.use_gate = false; break;
        case AblationKind::no_repair: tweaks.allow_repair = false; break;
        case AblationKind::no_coverage_tail: tweaks.coverage_machinery = false; break;
    }
    auto records = run_variant(manifest, Variant::cbea_lcv, cfg, tweaks);
    for (auto& r : records) r.variant = to_string(ablation);
    return records;
}

// Every fixture appears exactly once per variant.
inline void verify_matched_run(const std::vector<RunRecord>& records,
                               const Manifest& manifest,
                               const std::vector<std::string>& variants) {
    std::map<std::string, std::set<std::string>> seen;
    for (const auto& r : records)
        if (!seen[r.variant].insert(r.fixture_id).second)
            throw PartitionBreachError("duplicate row " + r.variant + "/" + r.fixture_id);
    for (const auto& v : variants) {
        if (seen[v].size() != manifest.fixtures.size())
            throw PartitionBreachError("variant " + v + " has " +
                                       std::to_string(seen[v].size()) + " rows, expected " +
                                       std::to_string(manifest.fixtures.size()));
    }
}

// ---------------------------------------------------------------------------
// Record stream IO.

inline void write_records(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (const auto& r : records) out << record_to_json(r).dump() << "\n";
}

inline std::vector<RunRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    std::vector<RunRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(record_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports. Deterministic byte output given identical records.

namespace report {

inline std::string fmt(const Metric& m) {
    if (!m.value) return "--";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *m.value);
    return buf;
}

inline std::string fmt_num(double v, int precision = 4) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

inline const char* footer() {
    return "note: baselines are simulated by the deterministic rule-based generator; "
           "their absolute magnitudes are not comparable to external-model runs.\n";
}

inline std::string summary_table(const std::vector<MetricReport>& reports) {
    std::ostringstream out;
    out << "Method,Att.,Inv.,Struct.,Repair,Cost\n";
    for (const auto& r : reports) {
        out << r.variant << "," << r.attempted << "," << r.invalid << ","
            << fmt(r.availability) << "," << fmt(r.repair_correctness) << ","
            << (r.mean_cost.value ? fmt_num(*r.mean_cost.value, 0) : "--") << "\n";
    }
    return out.str();
}

inline std::string covered_detail_table(const std::vector<MetricReport>& reports) {
    std::ostringstream out;
    out << "Method,Struct.,OHCVR,ECF,Wit.,Cons.,NFER\n";
    for (const auto& r : reports)
        out << r.variant << "," << fmt(r.availability) << "," << fmt(r.ohcvr) << ","
            << fmt(r.ecf) << "," << fmt(r.witness_drop) << "," << fmt(r.consequence) << ","
            << fmt(r.nfer) << "\n";
    return out.str();
}

inline std::string horizon_table(const std::map<std::string, std::vector<RunRecord>>& by_variant,
                                 const Manifest& manifest) {
    std::ostringstream out;
    out << "Group,Method,Fix.,Struct.,OHCVR,Wit.,Cons.,Repair\n";
    for (const auto& [variant, records] : by_variant) {
        const auto groups = horizon_grouping(records, manifest);
        for (const auto& [count, rep] : groups)
            out << count << "-domain," << variant << "," << rep.attempted << ","
                << fmt(rep.availability) << "," << fmt(rep.ohcvr) << ","
                << fmt(rep.witness_drop) << "," << fmt(rep.consequence) << ","
                << fmt(rep.repair_correctness) << "\n";
    }
    return out.str();
}

inline std::string denominator_table(
    const std::map<std::string, std::vector<RunRecord>>& by_variant) {
    std::ostringstream out;
    out << "Method";
    for (auto s : all_attempt_states()) out << "," << to_string(s);
    out << ",attempted\n";
    for (const auto& [variant, records] : by_variant) {
        auto counts = denominator_report(records);
        out << variant;
        std::size_t total = 0;
        for (auto s : all_attempt_states()) {
            out << "," << counts[s];
            total += counts[s];
        }
        out << "," << total << "\n";
    }
    return out.str();
}

struct SelectorDiagnosticRow {
    std::string selector;
    double avg_z = 0.0;
    double hard = 0.0;
    double required_witness = 0.0;
    double tail = 0.0;
    double debt = 0.0;
    double control = 0.0;
};

}  // namespace report

// Selector-level diagnostic over the manifest at a fixed budget. Recalls are
// averaged over fixtures with non-empty label sets.
inline std::vector<report::SelectorDiagnosticRow> selector_diagnostic(
    const Manifest& manifest, const RunConfig& cfg, double lambda_mmr = 0.5) {
    struct Acc {
        double sum = 0.0;
        std::size_t n = 0;
        void add(const RecallValue& r) {
            if (!r.defined) return;
            sum += r.value;
            ++n;
        }
        double mean() const { return n == 0 ? 1.0 : sum / static_cast<double>(n); }
    };
    Acc cbea_acc[5], mmr_acc[5];
    double cbea_z = 0.0, mmr_z = 0.0;

    for (const auto& f : manifest.fixtures) {
        const Compiled comp = compile_fixture(f);
        const Budget budget = detail::fixture_budget(cfg, comp.pool);
        const auto greedy = greedy_select(comp.pool, comp.requirements, comp.matrix,
                                          comp.state, comp.context, cfg.weights, budget);
        const auto mmr =
            mmr_select(comp.pool, comp.context.observation_tokens, budget.total, lambda_mmr);
        cbea_z += static_cast<double>(greedy.selected.size());
        mmr_z += static_cast<double>(mmr.size());

        const auto rc = selector_recall(greedy.selected_set(), f.oracle_witnesses);
        const auto rm = selector_recall({mmr.begin(), mmr.end()}, f.oracle_witnesses);
        const RecallValue* cs[5] = {&rc.hard, &rc.required_witness, &rc.tail, &rc.debt,
                                    &rc.control_union};
        const RecallValue* ms[5] = {&rm.hard, &rm.required_witness, &rm.tail, &rm.debt,
                                    &rm.control_union};
        for (int k = 0; k < 5; ++k) {
            cbea_acc[k].add(*cs[k]);
            mmr_acc[k].add(*ms[k]);
        }
    }

    const double n = static_cast<double>(manifest.fixtures.size());
    std::vector<report::SelectorDiagnosticRow> rows(2);
    rows[0].selector = "cbea";
    rows[0].avg_z = cbea_z / n;
    rows[0].hard = cbea_acc[0].mean();
    rows[0].required_witness = cbea_acc[1].mean();
    rows[0].tail = cbea_acc[2].mean();
    rows[0].debt = cbea_acc[3].mean();
    rows[0].control = cbea_acc[4].mean();
    rows[1].selector = "mmr";
    rows[1].avg_z = mmr_z / n;
    rows[1].hard = mmr_acc[0].mean();
    rows[1].required_witness = mmr_acc[1].mean();
    rows[1].tail = mmr_acc[2].mean();
    rows[1].debt = mmr_acc[3].mean();
    rows[1].control = mmr_acc[4].mean();
    return rows;
}

inline std::string selector_table(const std::vector<report::SelectorDiagnosticRow>& rows) {
    std::ostringstream out;
    out << "Selector,AvgZ,Hard,ReqW,Tail,Debt,Control\n";
    for (const auto& r : rows)
        out << r.selector << "," << report::fmt_num(r.avg_z, 2) << ","
            << report::fmt_num(r.hard) << "," << report::fmt_num(r.required_witness) << ","
            << report::fmt_num(r.tail) << "," << report::fmt_num(r.debt) << ","
            << report::fmt_num(r.control) << "\n";
    return out.str();
}

inline std::string shadow_table(const std::map<std::string, std::vector<RunRecord>>& by_variant,
                                const Manifest& manifest) {
    std::ostringstream out;
    out << "Method,Overall";
    for (auto d : all_domains()) out << "," << to_string(d);
    out << "\n";
    for (const auto& [variant, records] : by_variant) {
        const auto rep = shadow_recall(records, manifest);
        out << variant << "," << report::fmt_num(rep.overall);
        for (auto d : all_domains()) {
            auto it = rep.per_domain.find(to_string(d));
            out << "," << report::fmt_num(it == rep.per_domain.end() ? 0.0 : it->second);
        }
        out << "\n";
    }
    return out.str();
}

inline std::string payload_table(const std::map<std::string, std::vector<RunRecord>>& by_variant) {
    const auto stats = payload_stats(by_variant);
    std::ostringstream out;
    out << "Method,MedianIn,MedianOut,DeltaVsRaw\n";
    for (const auto& [variant, ps] : stats)
        out << variant << "," << report::fmt_num(ps.median_input_tokens, 1) << ","
            << report::fmt_num(ps.median_output_tokens, 1) << ","
            << report::fmt_num(ps.delta_vs_raw, 1) << "\n";
    return out.str();
}

inline void write_text(const std::string& path, const std::string& body, bool with_footer = true) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << body;
    if (with_footer) out << report::footer();
}

// Column-aligned rendering of a csv table body.
inline std::string align_csv(const std::string& csv) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        for (char ch : line + ",") {
            if (ch == ',') {
                cells.push_back(cell);
                cell.clear();
            } else {
                cell.push_back(ch);
            }
        }
        rows.push_back(std::move(cells));
    }
    std::vector<std::size_t> widths;
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (widths.size() <= i) widths.resize(i + 1, 0);
            widths[i] = std::max(widths[i], r[i].size());
        }
    std::ostringstream out;
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            out << r[i];
            if (i + 1 < r.size())
                out << std::string(widths[i] - r[i].size() + 2, ' ');
        }
        out << "\n";
    }
    return out.str();
}

// Emit the full report set for a scored run: csv plus aligned-text mirrors.
inline void write_reports(const std::map<std::string, std::vector<RunRecord>>& by_variant,
                          const Manifest& manifest, const RunConfig& cfg,
                          const std::string& outdir) {
    std::vector<MetricReport> reports;
    for (const auto& [variant, records] : by_variant)
        reports.push_back(build_report(variant, records));
    auto both = [&](const std::string& name, const std::string& csv) {
        write_text(outdir + "/" + name + ".csv", csv);
        write_text(outdir + "/" + name + ".txt", align_csv(csv));
    };
    both("summary", report::summary_table(reports));
    both("covered_detail", report::covered_detail_table(reports));
    both("horizon", report::horizon_table(by_variant, manifest));
    both("denominators", report::denominator_table(by_variant));
    both("selector", selector_table(selector_diagnostic(manifest, cfg)));
    both("shadow", shadow_table(by_variant, manifest));
    both("payload", payload_table(by_variant));
}

// ---------------------------------------------------------------------------
// Self-test battery: generation invariants that must hold for any seed.

struct SelfTestResult {
    bool ok = true;
    std::vector<std::string> failures;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            failures.push_back(what);
        }
    }
};

inline SelfTestResult selftest(std::uint64_t seed) {
    SelfTestResult res;
    const Manifest m = generate_manifest(seed);

    res.expect(m.fixtures.size() == 360, "manifest holds 360 fixtures");
    std::map<Bucket, int> bucket_counts;
    std::map<int, int> domain_counts;
    std::set<std::string> ids;
    for (const auto& f : m.fixtures) {
        bucket_counts[f.bucket]++;
        domain_counts[f.required_domain_count]++;
        ids.insert(f.id);
    }
    res.expect(ids.size() == 360, "fixture ids unique");
    for (auto b : all_buckets())
        res.expect(bucket_counts[b] == 60, std::string("bucket ") + to_string(b) + " has 60");
    res.expect(domain_counts[2] == 144 && domain_counts[3] == 144 && domain_counts[4] == 72,
               "domain-count histogram 144/144/72");

    RunConfig cfg;
    for (const auto& f : m.fixtures) {
        const Compiled comp = compile_fixture(f);

        // Coverage matrix consistency.
        for (const auto& u : comp.pool.units)
            for (const auto& r : comp.requirements.requirements) {
                const bool listed = std::find(u.covers.begin(), u.covers.end(), r.id) !=
                                    u.covers.end();
                if (comp.matrix.covered(u.id, r.id) != listed)
                    res.expect(false, f.id + ": matrix mismatch " + u.id + "/" + r.id);
            }

        // False-hardening guard.
        for (const auto& p : comp.contract.predicates)
            res.expect(p.provenance.confirmed, f.id + ": unconfirmed predicate " + p.id);

        // Oracle consistency.
        for (const auto& o : f.options) {
            StructuredCommitment probe;
            probe.id = "probe";
            probe.selected_option = o.id;
            probe.commitment_type = "recommendation";
            for (const auto& [k, v] : o.truth_slots) probe.slots[k] = v;
            for (const auto& ob : comp.state.obligations) {
                if (comp.state.is_due(ob)) probe.consequence_obligations.push_back(ob.id);
            }
            bool passes = true;
            for (const auto& p : f.oracle_contract.predicates)
                passes = passes && check_predicate(p, probe);
            const bool inside = std::find(f.oracle_feasible.begin(), f.oracle_feasible.end(),
                                          o.id) != f.oracle_feasible.end();
            if (inside) {
                res.expect(passes, f.id + ": feasible option " + o.id + " violates oracle");
            } else if (passes) {
                // Outside options must lack a required witness somewhere.
                bool some_uncoverable = false;
                for (const auto& r : comp.requirements.requirements) {
                    bool coverable = false;
                    for (const auto& u : comp.pool.units)
                        coverable = coverable || comp.matrix.covered(u.id, r.id);
                    some_uncoverable = some_uncoverable || !coverable;
                }
                res.expect(some_uncoverable || !f.expected_repair.has_value() ||
                               *f.expected_repair == ActKind::abstain,
                           f.id + ": option " + o.id + " outside oracle set without cause");
            }
        }

        // Shadow separation: alias tokens never occur in compiled evidence.
        for (const auto& sf : f.shadow_facts)
            for (const auto& alias : sf.aliases) {
                const auto alias_toks = token_set(alias);
                for (const auto& u : comp.pool.units) {
                    const auto content_toks = token_set(u.content);
                    for (const auto& t : alias_toks)
                        if (content_toks.count(t))
                            res.expect(false, f.id + ": shadow token in evidence " + u.id);
                }
            }

        // Shadow facts are present in observations.
        std::string all_obs;
        for (const auto& obs : f.observations()) all_obs += obs + " ";
        const auto obs_tokens = normalize_tokens(all_obs);
        for (const auto& sf : f.shadow_facts)
            res.expect(shadow_fact_matches(obs_tokens, sf),
                       f.id + ": shadow fact missing from observations: " + sf.fact_id);

        // Runtime prompts stay inside the privacy boundary.
        const auto activation = activate_for_variant(f, comp, Variant::cbea_lcv, cfg, {});
        const auto prompt = build_prompt(f, comp, Variant::cbea_lcv, activation);
        res.expect(privacy_boundary_check(prompt, f).pass,
                   f.id + ": runtime prompt leaks a shadow fact");

        // Infeasible bucket: empty feasible set, repair expected.
        if (f.bucket == Bucket::infeasible)
            res.expect(f.oracle_feasible.empty() && f.expected_repair.has_value(),
                       f.id + ": infeasible bucket invariants");
        if (f.bucket == Bucket::tail)
            res.expect(!f.oracle_witnesses.tail.empty(), f.id + ": tail label present");

        // Tail-flagged units always back a tail-witness requirement.
        for (const auto& u : comp.pool.units) {
            if (!u.tail) continue;
            bool backs_tail = false;
            for (const auto& rid : u.covers) {
                const Requirement* r = comp.requirements.find(rid);
                backs_tail = backs_tail ||
                             (r && r->source == RequirementSource::tail_witness);
            }
            res.expect(backs_tail, f.id + ": tail unit without tail requirement " + u.id);
        }
    }

    // Determinism: regeneration is byte-identical.
    const Manifest m2 = generate_manifest(seed);
    res.expect(serialize_manifest(m) == serialize_manifest(m2),
               "regeneration is byte-identical");
    return res;
}

}  // namespace cbea
