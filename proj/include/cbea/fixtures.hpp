#pragma once
// Fixture benchmark: six stress buckets times five scenario domains, with
// oracle labels, shadow-oracle hidden facts, long-history extension and the
// privacy boundary matcher. Generation is deterministic per seed.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbea/commitment.hpp"
#include "cbea/contract.hpp"
#include "cbea/core.hpp"
#include "cbea/selector.hpp"

namespace cbea {

enum class Bucket { falsehard, exception, tail, infeasible, debt, surface };
enum class Domain { investment, love_choice, career, relocation, comprehensive };

inline const std::vector<Bucket>& all_buckets() {
    static const std::vector<Bucket> v = {Bucket::falsehard,  Bucket::exception,
                                          Bucket::tail,       Bucket::infeasible,
                                          Bucket::debt,       Bucket::surface};
    return v;
}

inline const std::vector<Domain>& all_domains() {
    static const std::vector<Domain> v = {Domain::investment, Domain::love_choice,
                                          Domain::career, Domain::relocation,
                                          Domain::comprehensive};
    return v;
}

inline const char* to_string(Bucket b) {
    switch (b) {
        case Bucket::falsehard: return "falsehard";
        case Bucket::exception: return "exception";
        case Bucket::tail: return "tail";
        case Bucket::infeasible: return "infeasible";
        case Bucket::debt: return "debt";
        case Bucket::surface: return "surface";
    }
    return "?";
}

inline const char* to_string(Domain d) {
    switch (d) {
        case Domain::investment: return "investment";
        case Domain::love_choice: return "love_choice";
        case Domain::career: return "career";
        case Domain::relocation: return "relocation";
        case Domain::comprehensive: return "comprehensive";
    }
    return "?";
}

inline std::optional<Bucket> bucket_from(const std::string& s) {
    for (auto b : all_buckets())
        if (s == to_string(b)) return b;
    return std::nullopt;
}

inline std::optional<Domain> domain_from(const std::string& s) {
    for (auto d : all_domains())
        if (s == to_string(d)) return d;
    return std::nullopt;
}

// ---------------------------------------------------------------------------

struct OptionDescriptor {
    std::string id;
    std::string label;
    std::string narrative;
    std::map<std::string, Value> truth_slots;
    std::vector<std::string> asserted_witness_ids;  // cited support that may not exist
    bool bait = false;                              // generator builds a salient candidate
    std::vector<std::string> bait_claims;
};

struct ShadowFact {
    std::string fact_id;
    std::vector<std::string> aliases;             // literal token phrases
    std::vector<std::string> paraphrase_patterns; // token phrases; "*" matches one token
    double weight = 1.0;
    int due_turn = 0;
};

// Structural role of a fixture inside its bucket.
enum class FixtureRole {
    emit,                 // a compliant, fully coverable option exists
    clarify_missing,      // one required field has no evidence anywhere
    unsupported_abstain,  // best option's only support is an asserted, nonexistent witness
    infeasible_conflict,  // every option violates the contract
};

inline const char* to_string(FixtureRole r) {
    switch (r) {
        case FixtureRole::emit: return "emit";
        case FixtureRole::clarify_missing: return "clarify_missing";
        case FixtureRole::unsupported_abstain: return "unsupported_abstain";
        case FixtureRole::infeasible_conflict: return "infeasible_conflict";
    }
    return "?";
}

inline std::optional<FixtureRole> role_from(const std::string& s) {
    for (auto r : {FixtureRole::emit, FixtureRole::clarify_missing,
                   FixtureRole::unsupported_abstain, FixtureRole::infeasible_conflict})
        if (s == to_string(r)) return r;
    return std::nullopt;
}

struct Fixture {
    std::string id;
    Bucket bucket = Bucket::falsehard;
    Domain domain = Domain::investment;
    int required_domain_count = 2;
    FixtureRole role = FixtureRole::emit;

    std::vector<ClarificationAnswer> confirmed_answers;
    std::vector<OptionDescriptor> options;
    Profile profile;  // runtime-visible facts block, observations included
    std::vector<std::string> surface_requirements;

    HardContract oracle_contract;
    OracleWitnessLabels oracle_witnesses;
    std::vector<std::string> oracle_feasible;
    std::optional<ActKind> expected_repair;
    std::vector<ShadowFact> shadow_facts;

    const std::vector<std::string>& observations() const { return profile.observations; }

    const OptionDescriptor* find_option(const std::string& id) const {
        for (const auto& o : options)
            if (o.id == id) return &o;
        return nullptr;
    }
};

struct Manifest {
    std::string schema_version = "1";
    std::uint64_t seed = 0;
    std::vector<Fixture> fixtures;
};

// ---------------------------------------------------------------------------
// Word banks. Evidence, shadow and filler vocabularies are mutually disjoint
// so that shadow facts can never collide with compiled evidence and filler
// turns never perturb relevance scores.

namespace wordbank {

inline const std::vector<std::string>& evidence() {
    static const std::vector<std::string> words = {
        "anchor",    "ballast",   "canopy",   "derrick",  "ember",     "fathom",
        "garnet",    "harbor",    "ingot",    "juniper",  "keel",      "lantern",
        "meadow",    "nimbus",    "orchard",  "pylon",    "quarry",    "rampart",
        "saddle",    "timber",    "umbra",    "vellum",   "warden",    "yarrow",
        "zephyr",    "alcove",    "brook",    "cistern",  "dapple",    "eddy",
        "fresco",    "gully",     "hollow",   "islet",    "jetty",     "knoll",
        "ledger",    "mantle",    "nectar",   "oriel",    "parapet",   "quill",
        "ridge",     "spruce",    "trellis",  "upland",   "vane",      "willow",
        "yoke",      "zenith",    "arbor",    "briar",    "cobble",    "dune",
        "escarp",    "fern",      "grove",    "heath",    "inlet",     "jasper",
        "kiln",      "loam",      "marsh",    "nook",     "osprey",    "pebble",
        "quay",      "rill",      "shale",    "thicket",  "underbrush","vole",
        "wharf",     "yew",       "almanac",  "beacon",   "cairn",     "delta",
        "estuary",   "fjord",     "glen",     "hamlet",   "isthmus",   "jamb",
        "kestrel",   "lagoon",    "moor",     "narrows",  "oxbow",     "plateau",
        "quarryman", "ravine",    "steppe",   "tarn",     "uplands",   "verge",
        "weir",      "yonder",    "atlas",    "bight",    "cape",      "dell",
        "eyrie",     "floe",      "gorge",    "hummock",  "icefield",  "jungle",
        "karst",     "lowland",   "mesa",     "notch",    "outcrop",   "polder",
        "quagmire",  "reef",      "sound",    "tundra",   "undertow",  "valley",
        "watershed", "yardarm",   "basin",    "cliff",    "drumlin",   "eskers",
        "foothill",  "gulch",     "headland", "interior", "joists",    "kettle",
        "lakebed",   "moraine",   "nunatak",  "oasis",    "pass",      "quartzite",
        "rapids",    "scarp",     "terrace",  "uprise",   "ventshaft", "wold",
        "yardland",  "zincmine",  "aquifer",  "bluff",    "crag",      "divide",
        "elevation", "flats",     "grotto",   "hogback",  "incline",   "jutting",
        "kopje",     "lava",      "midden",   "nadir",    "overlook",  "pinnacle",
        "quicksand", "rimrock",   "spur",     "talus",    "upthrust",  "vista",
        "wash",      "yazoo",     "apex",     "butte",    "cirque",    "defile",
        "embayment", "firn",      "glacier",  "horst",    "interfluve","joint",
        "klippe",    "landslip",  "monadnock","neve",     "orogeny",   "pediment",
        "quarrying", "regolith",  "sill",     "tor",      "uvala",     "volcano",
        "wadi",      "yardang",   "arete",    "bergschrund","caldera", "doline",
        "erratic",   "fumarole",  "graben",   "hornito",  "inselberg", "jokulhlaup",
    };
    return words;
}

inline const std::vector<std::string>& shadow() {
    static const std::vector<std::string> words = {
        "violet",   "crimson", "saffron", "indigo",   "maroon",  "teal",
        "ochre",    "magenta", "cobalt",  "scarlet",  "amber",   "cerulean",
        "burgundy", "fuchsia", "lilac",   "mauve",    "russet",  "sepia",
        "tangerine","verdant", "azure",   "carmine",  "damson",  "emeraldine",
        "fawn",     "gilt",    "hazel",   "ivory",    "jade",    "khaki",
        "lavender", "mulberry","navy",    "olive",    "plum",    "rosewood",
        "sable",    "taupe",   "ultramarine", "vermilion", "wheat", "xanthic",
        "yellowish","zaffre",  "brindle", "charcoal", "dovegray","ebonite",
    };
    return words;
}

inline const std::vector<std::string>& filler() {
    static const std::vector<std::string> words = {
        "weather",  "weekend", "coffee",  "playlist", "podcast", "traffic",
        "gym",      "recipe",  "garden",  "holiday",  "movie",   "novel",
        "brunch",   "jogging", "museum",  "concert",  "puzzle",  "picnic",
        "bakery",   "cycling", "sketch",  "chess",    "karaoke", "aquarium",
        "festival", "matinee", "sudoku",  "trivia",   "yoga",    "origami",
    };
    return words;
}

inline const std::vector<std::string>& option_names() {
    static const std::vector<std::string> names = {
        "Northgate", "Harborview", "Stonebridge", "Fairwater", "Oakline",
        "Westfold",  "Silvergate", "Eastmark",    "Greenway",  "Highfield",
        "Lakemoor",  "Redstone",   "Clearfield",  "Broadmere", "Ashford",
    };
    return names;
}

}  // namespace wordbank

// Domain scenario vocabulary: dimension names and slot names used by the
// contract templates.
struct DomainSpec {
    std::vector<std::string> dimensions;
    std::string numeric_slot;   // bound_numeric target
    std::string scoped_slot;    // exception-scoped variant of the numeric slot
    std::string choice_slot;    // require_slot target
    std::string choice_value;
    std::string topic;
};

inline const DomainSpec& domain_spec(Domain d) {
    static const std::map<Domain, DomainSpec> specs = {
        {Domain::investment,
         {{"risk", "liquidity", "horizon", "fees", "ethics", "taxes"},
          "monthly_outlay", "net_monthly_outlay", "rebalance_plan", "quarterly",
          "investment plans"}},
        {Domain::love_choice,
         {{"trust", "distance", "family", "timing", "values", "finances"},
          "weekly_travel_hours", "net_weekly_travel_hours", "checkin_cadence", "weekly",
          "relationship paths"}},
        {Domain::career,
         {{"compensation", "growth", "stability", "workload", "health", "mentorship"},
          "overtime_hours", "net_overtime_hours", "review_cycle", "quarterly",
          "career moves"}},
        {Domain::relocation,
         {{"housing", "schools", "commute", "climate", "community", "employment"},
          "monthly_rent", "net_monthly_rent", "lease_term", "flexible",
          "relocation choices"}},
        {Domain::comprehensive,
         {{"budget", "timeline", "wellbeing", "logistics", "relationships", "contingency"},
          "monthly_cost", "net_monthly_cost", "rollout_plan", "phased",
          "life plans"}},
    };
    return specs.at(d);
}

// ---------------------------------------------------------------------------
// Shadow / privacy matching: deterministic alias and paraphrase matching
// over normalized token streams.

inline bool phrase_matches(const std::vector<std::string>& haystack,
                           const std::vector<std::string>& phrase) {
    if (phrase.empty() || haystack.size() < phrase.size()) return false;
    for (std::size_t i = 0; i + phrase.size() <= haystack.size(); ++i) {
        bool ok = true;
        for (std::size_t k = 0; k < phrase.size(); ++k) {
            if (phrase[k] == "*") continue;  // wildcard slot: any single token
            if (haystack[i + k] != phrase[k]) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
    }
    return false;
}

// Pattern tokens are whitespace-split; "*" is a one-token wildcard slot and
// survives normalization.
inline std::vector<std::string> pattern_tokens(const std::string& pattern) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : pattern + " ") {
        if (ch == ' ') {
            if (cur == "*") {
                out.push_back("*");
            } else if (!cur.empty()) {
                for (auto& t : normalize_tokens(cur)) out.push_back(t);
            }
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    return out;
}

inline bool shadow_fact_matches(const std::vector<std::string>& tokens, const ShadowFact& f) {
    for (const auto& alias : f.aliases)
        if (phrase_matches(tokens, normalize_tokens(alias))) return true;
    for (const auto& pat : f.paraphrase_patterns)
        if (phrase_matches(tokens, pattern_tokens(pat))) return true;
    return false;
}

struct PrivacyCheckResult {
    bool pass = true;
    std::vector<std::string> offending_fact_ids;
};

inline PrivacyCheckResult privacy_boundary_check(const std::string& prompt,
                                                 const Fixture& f) {
    PrivacyCheckResult out;
    const auto tokens = normalize_tokens(prompt);
    for (const auto& fact : f.shadow_facts)
        if (shadow_fact_matches(tokens, fact)) {
            out.pass = false;
            out.offending_fact_ids.push_back(fact.fact_id);
        }
    return out;
}

struct ShadowScore {
    double matched_weight = 0.0;
    double total_weight = 0.0;
    std::vector<std::string> matched_ids;

    double recall() const {
        return total_weight == 0.0 ? 0.0 : matched_weight / total_weight;
    }
};

// Shadow-field scrubbing for logged bodies: text that trips the matcher is
// withheld wholesale rather than partially rewritten.
inline std::string scrub_shadow(const Fixture& f, const std::string& text) {
    return privacy_boundary_check(text, f).pass ? text
                                                : "[scrubbed: shadow content removed]";
}

inline ShadowScore shadow_score_text(const std::string& text, const Fixture& f) {
    ShadowScore s;
    const auto tokens = normalize_tokens(text);
    for (const auto& fact : f.shadow_facts) {
        s.total_weight += fact.weight;
        if (shadow_fact_matches(tokens, fact)) {
            s.matched_weight += fact.weight;
            s.matched_ids.push_back(fact.fact_id);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Generation

namespace detail {

// Deals mutually distinct words from a bank, deterministically per fixture.
class WordDealer {
public:
    WordDealer(const std::vector<std::string>& bank, Rng& rng) : bank_(bank) {
        order_.resize(bank.size());
        for (std::size_t i = 0; i < bank.size(); ++i) order_[i] = i;
        for (std::size_t i = bank.size(); i > 1; --i)
            std::swap(order_[i - 1], order_[rng.pick(i)]);
    }

    std::string deal() {
        if (next_ >= order_.size()) next_ = 0;  // bank exhausted: recycle
        return bank_[order_[next_++]];
    }

    std::string phrase(std::size_t n) {
        std::string out;
        for (std::size_t i = 0; i < n; ++i) {
            if (i) out += " ";
            out += deal();
        }
        return out;
    }

private:
    const std::vector<std::string>& bank_;
    std::vector<std::size_t> order_;
    std::size_t next_ = 0;
};

}  // namespace detail

inline Fixture generate_fixture(Bucket bucket, Domain domain, std::uint64_t seed,
                                int required_domain_count = 0,
                                std::optional<FixtureRole> forced_role = std::nullopt) {
    Rng rng(hash_combine(hash_combine(seed, to_string(bucket)), to_string(domain)));
    const DomainSpec& spec = domain_spec(domain);

    Fixture f;
    f.bucket = bucket;
    f.domain = domain;
    f.id = std::string(to_string(bucket)) + ":" + to_string(domain) + ":" +
           std::to_string(seed);
    f.required_domain_count =
        required_domain_count ? required_domain_count : 2 + static_cast<int>(rng.pick(3));

    if (forced_role) {
        f.role = *forced_role;
    } else if (bucket == Bucket::infeasible) {
        f.role = FixtureRole::infeasible_conflict;
    } else {
        const std::size_t r = rng.pick(5);
        f.role = r == 0 ? FixtureRole::clarify_missing
                        : (r == 2 ? FixtureRole::unsupported_abstain : FixtureRole::emit);
    }

    detail::WordDealer evidence_words(wordbank::evidence(), rng);
    detail::WordDealer shadow_words(wordbank::shadow(), rng);
    detail::WordDealer filler_words(wordbank::filler(), rng);

    const int n_active = f.required_domain_count;
    std::vector<std::string> dims = spec.dimensions;
    rng.shuffle(dims);
    std::vector<std::string> active(dims.begin(), dims.begin() + n_active);
    const std::string tail_dim = dims[static_cast<std::size_t>(n_active)];
    const std::string offdim = dims[static_cast<std::size_t>(n_active) + 1 < dims.size()
                                        ? static_cast<std::size_t>(n_active) + 1
                                        : dims.size() - 1];

    f.profile.turn = 6;
    f.profile.active_dimensions = {active.begin(), active.end()};
    if (bucket == Bucket::tail) f.profile.tail_dimensions = {tail_dim};

    // --- contract ------------------------------------------------------
    const bool scoped = bucket == Bucket::exception;
    const double limit = 300.0 + 50.0 * static_cast<double>(rng.pick(5));
    const std::string numeric_target =
        "slots." + (scoped ? spec.scoped_slot : spec.numeric_slot);

    HardPredicate p1;
    p1.id = "pred:limit";
    p1.kind = PredicateKind::bound_numeric;
    p1.dimension = active[0];
    p1.target = numeric_target;
    p1.comparator = Comparator::leq;
    p1.value = limit;
    p1.provenance = {1, true, "confirmed cap " + std::to_string(static_cast<int>(limit))};

    HardPredicate p2;
    p2.id = "pred:slot";
    p2.kind = PredicateKind::require_slot;
    p2.dimension = active[0];
    p2.target = "slots." + spec.choice_slot;
    p2.comparator = Comparator::eq;
    p2.value = spec.choice_value;
    p2.provenance = {2, true, "confirmed " + spec.choice_slot + " = " + spec.choice_value};

    f.confirmed_answers.push_back(
        {"q:limit", "cap " + spec.numeric_slot + " at " + std::to_string(static_cast<int>(limit)),
         true});
    f.confirmed_answers.push_back(
        {"q:slot", spec.choice_slot + " must stay " + spec.choice_value, true});
    f.profile.predicate_facts.push_back({p1, "q:limit", true});
    f.profile.predicate_facts.push_back({p2, "q:slot", true});
    if (scoped)
        f.confirmed_answers.push_back(
            {"q:exception", "secured amounts are excluded from the " + spec.numeric_slot + " cap",
             true});

    // --- obligation (due only on the consequence-debt surface) -----------
    Obligation ob;
    ob.id = "ob:review";
    ob.due_turn = bucket == Bucket::debt ? f.profile.turn - 1 : f.profile.turn + 3;
    ob.description = "revisit the agreed follow-up before committing";
    ob.source_evidence_ids =
        bucket == Bucket::debt ? std::vector<std::string>{"ev:debt"} : std::vector<std::string>{};
    f.profile.obligations.push_back(ob);

    if (bucket == Bucket::debt) {
        HardPredicate p3;
        p3.id = "pred:continuity";
        p3.kind = PredicateKind::protect_obligation;
        p3.dimension = active[0];
        p3.target = "consequence_obligations";
        p3.comparator = Comparator::in_set;
        p3.value = ob.id;
        p3.provenance = {3, true, "confirmed follow-up obligation"};
        f.confirmed_answers.push_back({"q:continuity", "the follow-up must be honored", true});
        f.profile.predicate_facts.push_back({p3, "q:continuity", true});
    }

    HardPredicate claim_guard;
    const bool has_claim_guard =
        bucket == Bucket::falsehard || domain == Domain::love_choice;
    if (has_claim_guard) {
        claim_guard.id = "pred:noclaim";
        claim_guard.kind = PredicateKind::no_unwitnessed_claim;
        claim_guard.dimension = active[0];
        claim_guard.target = "claimed_predicates";
        claim_guard.comparator = Comparator::absent;
        claim_guard.value = std::string("claim:approval");
        claim_guard.provenance = {3, true, "confirmed: no unverified approval claims"};
        f.confirmed_answers.push_back(
            {"q:noclaim", "never assert third-party approval without proof", true});
        f.profile.predicate_facts.push_back({claim_guard, "q:noclaim", true});
    }

    // --- required fields -------------------------------------------------
    const std::string field1 = "window_" + evidence_words.deal();
    f.profile.required_fields.push_back({field1, active[0]});
    std::string missing_field;
    if (f.role == FixtureRole::clarify_missing ||
        f.role == FixtureRole::unsupported_abstain) {
        missing_field = "confirmation_" + evidence_words.deal();
        f.profile.required_fields.push_back({missing_field, active[0]});
    }

    // --- options ----------------------------------------------------------
    std::vector<std::string> names = wordbank::option_names();
    rng.shuffle(names);
    const bool all_violate = f.role == FixtureRole::infeasible_conflict;

    for (int i = 0; i < 3; ++i) {
        OptionDescriptor o;
        o.id = "opt_" + std::to_string(i + 1);
        o.label = names[static_cast<std::size_t>(i)];
        o.narrative = evidence_words.phrase(3);
        const bool over_limit = all_violate || i == 2;
        const bool wrong_slot = !all_violate && i == 1;
        const double amount = over_limit ? limit + 150.0 : limit - 100.0;
        if (scoped) {
            // Gross figure is high everywhere; the cap binds the net figure.
            o.truth_slots[spec.numeric_slot] = amount + 200.0;
            o.truth_slots[spec.scoped_slot] = amount;
        } else {
            o.truth_slots[spec.numeric_slot] = amount;
        }
        o.truth_slots[spec.choice_slot] =
            wrong_slot ? std::string("adhoc") : spec.choice_value;
        f.options.push_back(o);
    }
    if (f.role == FixtureRole::unsupported_abstain)
        f.options[0].asserted_witness_ids = {"ev:asserted"};

    // Bait: the narratively salient candidate baselines fall for.
    std::size_t bait_idx = 2;  // opt_3 violates the cap
    if (bucket == Bucket::tail || bucket == Bucket::debt) bait_idx = 0;  // lean bait
    if (bucket == Bucket::surface) bait_idx = 1;
    f.options[bait_idx].bait = true;

    // --- soft hint (false hardening surface) -----------------------------
    if (bucket == Bucket::falsehard) {
        SoftHint hint;
        hint.id = "hint:lean";
        hint.text = evidence_words.phrase(3);
        hint.dimension = active[0];
        hint.source_turn = 4;
        f.profile.soft_hints.push_back(hint);
        f.confirmed_answers.push_back({"q:hint", hint.text, false});
        f.options[2].bait_claims = {"hint:lean", "claim:approval"};
    } else if (has_claim_guard) {
        f.options[bait_idx].bait_claims = {"claim:approval"};
    }

    // --- evidence units ----------------------------------------------------
    // Pool order matters for the pool-order baseline: control units first,
    // then the consequence-debt unit, in-dimension notes, long off-dimension
    // tangents, and the rare tail unit last. Control/note/tangent contents
    // are fully narrated in the observations; debt and tail contents are not.
    auto add_unit = [&](const std::string& id, const std::string& content,
                        const std::string& dim, bool tail, int cost,
                        std::vector<std::string> covers) {
        EvidenceUnit u;
        u.id = id;
        u.content = content;
        u.dimension = dim;
        u.provenance = {1 + static_cast<int>(rng.pick(4)), true, content};
        u.tail = tail;
        u.cost = cost;
        u.covers = std::move(covers);
        f.profile.evidence.push_back(u);
    };

    std::vector<std::string> narrated;  // sentences describing confirmed evidence
    int scene_index = 0;
    for (int i = 1; i < n_active; ++i) {
        const std::string content = evidence_words.phrase(4);
        add_unit("ev:ctx:" + std::to_string(scene_index++), content,
                 active[static_cast<std::size_t>(i)], false, 1,
                 {"req:scene:" + active[static_cast<std::size_t>(i)]});
        narrated.push_back("They described " + content + ".");
        f.oracle_witnesses.required_witness.push_back(f.profile.evidence.back().id);
    }
    {
        const std::string content = evidence_words.phrase(4);
        add_unit("ev:field:0", content, active[0], false, 1, {"req:field:" + field1});
        narrated.push_back("They noted " + content + " for the " + field1 + ".");
        f.oracle_witnesses.required_witness.push_back("ev:field:0");
    }
    int hard_index = 0;
    for (const auto& fact : f.profile.predicate_facts) {
        const std::string content = evidence_words.phrase(4);
        add_unit("ev:hard:" + std::to_string(hard_index++), content, fact.predicate.dimension,
                 false, 1, {"req:hard:" + fact.predicate.id});
        narrated.push_back("They confirmed " + content + ".");
        f.oracle_witnesses.hard.push_back(f.profile.evidence.back().id);
    }

    if (bucket == Bucket::debt) {
        add_unit("ev:debt", evidence_words.phrase(4), active[0], false, 2,
                 {"req:debt:" + ob.id});
        f.oracle_witnesses.debt.push_back("ev:debt");
    }

    for (int i = 0; i < 4; ++i) {
        const std::string content = evidence_words.phrase(4);
        add_unit("ev:note:" + std::to_string(i), content,
                 active[static_cast<std::size_t>(i) % active.size()], false, 1, {});
        narrated.push_back("They mentioned " + content + ".");
    }
    // Long, salient, off-topic tangents: similarity selectors gorge on these.
    for (int i = 0; i < 8; ++i) {
        const std::string content = evidence_words.phrase(8);
        add_unit("ev:xtra:" + std::to_string(i), content, offdim, false, 1, {});
        narrated.push_back("They also went on about " + content + ".");
    }

    if (bucket == Bucket::tail) {
        add_unit("ev:tail", evidence_words.phrase(4), tail_dim, true, 1,
                 {"req:tail:" + tail_dim});
        f.oracle_witnesses.tail.push_back("ev:tail");
    }

    // --- shadow facts -------------------------------------------------------
    const int n_shadow = 3 + static_cast<int>(rng.pick(2));
    std::vector<std::string> shadow_sentences;
    for (int i = 0; i < n_shadow; ++i) {
        ShadowFact sf;
        sf.fact_id = "sf:" + std::to_string(i);
        const std::string a = shadow_words.deal();
        const std::string b = shadow_words.deal();
        sf.aliases = {a + " " + b};
        sf.paraphrase_patterns = {a + " * " + b};
        sf.weight = 0.5 + 0.5 * static_cast<double>(rng.pick(3));
        sf.due_turn = static_cast<int>(rng.pick(9));
        f.shadow_facts.push_back(sf);
        shadow_sentences.push_back("Privately they kept returning to the " + a + " " + b +
                                   " situation.");
    }

    // --- surface requirements ------------------------------------------------
    if (bucket == Bucket::surface) {
        f.surface_requirements = {"state the tradeoff on " + active[0],
                                  "give a concrete next step"};
    }

    // --- observations ----------------------------------------------------------
    std::vector<std::string> sentences;
    sentences.push_back("The user is weighing " + spec.topic + ": " + f.options[0].label +
                        " (" + f.options[0].narrative + "), " + f.options[1].label + " (" +
                        f.options[1].narrative + "), and " + f.options[2].label + " (" +
                        f.options[2].narrative + ").");
    sentences.push_back("They capped " + spec.numeric_slot + " at " +
                        std::to_string(static_cast<int>(limit)) + " and confirmed the " +
                        spec.choice_slot + " should stay " + spec.choice_value + ".");
    if (scoped)
        sentences.push_back("They confirmed one exception: secured amounts do not count "
                            "against the cap.");
    if (bucket == Bucket::falsehard)
        sentences.push_back("At one point they mused about " + f.profile.soft_hints[0].text +
                            " but never confirmed it.");
    sentences.push_back("Earlier they promised a follow-up review and want it honored.");
    std::size_t shadow_used = 0;
    for (std::size_t i = 0; i < narrated.size(); ++i) {
        sentences.push_back(narrated[i]);
        // interleave the hidden-fact mentions through the archive
        if (i % 3 == 1 && shadow_used < shadow_sentences.size())
            sentences.push_back(shadow_sentences[shadow_used++]);
    }
    while (shadow_used < shadow_sentences.size())
        sentences.push_back(shadow_sentences[shadow_used++]);
    for (int i = 0; i < 8; ++i)
        sentences.push_back("Small talk drifted to the " + filler_words.deal() + " and the " +
                            filler_words.deal() + " afterwards.");

    const std::size_t per_turn = (sentences.size() + 4) / 5;
    std::string turn_text;
    int turn_no = 0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (!turn_text.empty()) turn_text += " ";
        turn_text += sentences[i];
        if ((i + 1) % per_turn == 0 || i + 1 == sentences.size()) {
            f.profile.observations.push_back("Turn " + std::to_string(turn_no++) + ": " +
                                             turn_text);
            turn_text.clear();
        }
    }

    // --- oracle labels ------------------------------------------------------
    f.oracle_contract.predicates.clear();
    for (const auto& fact : f.profile.predicate_facts)
        f.oracle_contract.predicates.push_back(fact.predicate);

    for (const auto& o : f.options) {
        StructuredCommitment probe;
        probe.id = "probe";
        probe.selected_option = o.id;
        probe.commitment_type = "recommendation";
        for (const auto& [k, v] : o.truth_slots) probe.slots[k] = v;
        probe.consequence_obligations = {ob.id};
        bool ok = true;
        for (const auto& p : f.oracle_contract.predicates)
            ok = ok && check_predicate(p, probe);
        if (ok) f.oracle_feasible.push_back(o.id);
    }
    switch (f.role) {
        case FixtureRole::emit:
            break;
        case FixtureRole::clarify_missing:
            f.expected_repair = ActKind::clarify;
            break;
        case FixtureRole::unsupported_abstain:
            f.expected_repair = ActKind::abstain;
            break;
        case FixtureRole::infeasible_conflict:
            f.oracle_feasible.clear();  // no option survives the contract
            f.expected_repair = ActKind::recontract;
            break;
    }

    return f;
}

// 360 fixtures: six buckets x sixty, per-bucket domain rotation, domain-count
// histogram 144/144/72, and the emit/repair split that fixes the runtime's
// operating point.
inline Manifest generate_manifest(std::uint64_t seed) {
    Manifest m;
    m.seed = seed;
    for (Bucket bucket : all_buckets()) {
        for (int i = 0; i < 60; ++i) {
            const Domain domain = all_domains()[static_cast<std::size_t>(i) % 5];
            const int count = i < 24 ? 2 : (i < 48 ? 3 : 4);
            FixtureRole role;
            if (bucket == Bucket::infeasible) {
                role = FixtureRole::infeasible_conflict;
            } else {
                role = i % 5 == 0 ? FixtureRole::clarify_missing
                                  : (i % 5 == 2 ? FixtureRole::unsupported_abstain
                                                : FixtureRole::emit);
            }
            const std::uint64_t fixture_seed =
                hash_combine(hash_combine(seed ^ 0xabcd1234u, to_string(bucket)),
                             std::to_string(i));
            Fixture f = generate_fixture(bucket, domain, fixture_seed, count, role);
            f.id = std::string(to_string(bucket)) + ":" + std::to_string(i);
            m.fixtures.push_back(std::move(f));
        }
    }
    return m;
}

// Long-history extension: only the visible archive grows. Filler turns use
// the reserved filler vocabulary, so compiled artifacts and activation are
// unchanged.
inline Fixture extend_history(const Fixture& f, double factor) {
    if (factor < 1.0) throw Error("history factor must be >= 1");
    Fixture out = f;
    std::size_t base = 0;
    for (const auto& obs : f.profile.observations) base += whitespace_token_count(obs);
    const auto target = static_cast<std::size_t>(static_cast<double>(base) * factor);
    std::size_t have = base;
    Rng rng(hash_combine(0x9090u, f.id));
    const auto& bank = wordbank::filler();
    int turn_no = static_cast<int>(f.profile.observations.size());
    while (have + 8 <= target) {
        std::string s = "Turn " + std::to_string(turn_no++) + ": Archived chatter about the " +
                        bank[rng.pick(bank.size())] + ", the " + bank[rng.pick(bank.size())] +
                        " and the " + bank[rng.pick(bank.size())] + " filled the session.";
        have += whitespace_token_count(s);
        out.profile.observations.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON schema (schema_version "1"). Serialization is canonical: nlohmann
// objects keep sorted keys, so serialize -> parse -> serialize is byte-stable.

namespace schema {

using nlohmann::json;

inline json provenance_to_json(const ProvenanceRecord& p) {
    return {{"source_turn", p.source_turn}, {"confirmed", p.confirmed},
            {"raw_span", p.raw_span}};
}

inline ProvenanceRecord provenance_from_json(const json& j) {
    return {j.at("source_turn").get<int>(), j.at("confirmed").get<bool>(),
            j.at("raw_span").get<std::string>()};
}

inline json predicate_to_json(const HardPredicate& p) {
    return {{"id", p.id},
            {"kind", to_string(p.kind)},
            {"dimension", p.dimension},
            {"target", p.target},
            {"comparator", to_string(p.comparator)},
            {"value", detail::value_to_json(p.value)},
            {"provenance", provenance_to_json(p.provenance)}};
}

inline HardPredicate predicate_from_json(const json& j) {
    HardPredicate p;
    p.id = j.at("id").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    for (auto k : {PredicateKind::forbid_option, PredicateKind::require_slot,
                   PredicateKind::bound_numeric, PredicateKind::protect_obligation,
                   PredicateKind::no_unwitnessed_claim})
        if (kind == to_string(k)) p.kind = k;
    p.dimension = j.at("dimension").get<std::string>();
    p.target = j.at("target").get<std::string>();
    const std::string cmp = j.at("comparator").get<std::string>();
    for (auto c : {Comparator::eq, Comparator::neq, Comparator::leq, Comparator::geq,
                   Comparator::in_set, Comparator::absent})
        if (cmp == to_string(c)) p.comparator = c;
    p.value = detail::value_from_json(j.at("value"));
    p.provenance = provenance_from_json(j.at("provenance"));
    return p;
}

inline json unit_to_json(const EvidenceUnit& u) {
    return {{"id", u.id},          {"content", u.content}, {"dimension", u.dimension},
            {"provenance", provenance_to_json(u.provenance)},
            {"tail", u.tail},      {"cost", u.cost},       {"covers", u.covers}};
}

inline EvidenceUnit unit_from_json(const json& j) {
    EvidenceUnit u;
    u.id = j.at("id").get<std::string>();
    u.content = j.at("content").get<std::string>();
    u.dimension = j.at("dimension").get<std::string>();
    u.provenance = provenance_from_json(j.at("provenance"));
    u.tail = j.at("tail").get<bool>();
    u.cost = j.at("cost").get<int>();
    u.covers = j.at("covers").get<std::vector<std::string>>();
    return u;
}

inline json fixture_to_json(const Fixture& f) {
    json j;
    j["id"] = f.id;
    j["bucket"] = to_string(f.bucket);
    j["domain"] = to_string(f.domain);
    j["required_domain_count"] = f.required_domain_count;
    j["role"] = to_string(f.role);

    json answers = json::array();
    for (const auto& a : f.confirmed_answers)
        answers.push_back({{"question_id", a.question_id}, {"answer", a.answer},
                           {"confirmed", a.confirmed}});
    j["confirmed_answers"] = answers;

    json options = json::array();
    for (const auto& o : f.options) {
        json slots = json::object();
        for (const auto& [k, v] : o.truth_slots) slots[k] = detail::value_to_json(v);
        options.push_back({{"id", o.id},
                           {"label", o.label},
                           {"narrative", o.narrative},
                           {"truth_slots", slots},
                           {"asserted_witness_ids", o.asserted_witness_ids},
                           {"bait", o.bait},
                           {"bait_claims", o.bait_claims}});
    }
    j["options"] = options;

    json profile;
    profile["turn"] = f.profile.turn;
    json facts = json::array();
    for (const auto& fact : f.profile.predicate_facts)
        facts.push_back({{"predicate", predicate_to_json(fact.predicate)},
                         {"answer_id", fact.answer_id},
                         {"hard", fact.hard}});
    profile["predicate_facts"] = facts;
    json hints = json::array();
    for (const auto& h : f.profile.soft_hints)
        hints.push_back({{"id", h.id}, {"text", h.text}, {"dimension", h.dimension},
                         {"source_turn", h.source_turn}});
    profile["soft_hints"] = hints;
    json units = json::array();
    for (const auto& u : f.profile.evidence) units.push_back(unit_to_json(u));
    profile["evidence"] = units;
    json obligations = json::array();
    for (const auto& o : f.profile.obligations)
        obligations.push_back({{"id", o.id}, {"due_turn", o.due_turn},
                               {"description", o.description},
                               {"source_evidence_ids", o.source_evidence_ids}});
    profile["obligations"] = obligations;
    profile["observations"] = f.profile.observations;
    profile["active_dimensions"] =
        std::vector<std::string>(f.profile.active_dimensions.begin(),
                                 f.profile.active_dimensions.end());
    json fields = json::array();
    for (const auto& rf : f.profile.required_fields)
        fields.push_back({{"name", rf.name}, {"dimension", rf.dimension}});
    profile["required_fields"] = fields;
    profile["tail_dimensions"] = f.profile.tail_dimensions;
    j["profile"] = profile;

    j["surface_requirements"] = f.surface_requirements;

    json oracle;
    json preds = json::array();
    for (const auto& p : f.oracle_contract.predicates) preds.push_back(predicate_to_json(p));
    oracle["contract"] = preds;
    oracle["witnesses"] = {{"hard", f.oracle_witnesses.hard},
                           {"required_witness", f.oracle_witnesses.required_witness},
                           {"tail", f.oracle_witnesses.tail},
                           {"debt", f.oracle_witnesses.debt}};
    oracle["feasible"] = f.oracle_feasible;
    oracle["expected_repair"] =
        f.expected_repair ? json(to_string(*f.expected_repair)) : json(nullptr);
    j["oracle"] = oracle;

    json shadows = json::array();
    for (const auto& s : f.shadow_facts)
        shadows.push_back({{"fact_id", s.fact_id},
                           {"aliases", s.aliases},
                           {"paraphrase_patterns", s.paraphrase_patterns},
                           {"weight", s.weight},
                           {"due_turn", s.due_turn}});
    j["shadow_facts"] = shadows;
    return j;
}

inline Fixture fixture_from_json(const json& j) {
    Fixture f;
    f.id = j.at("id").get<std::string>();
    f.bucket = *bucket_from(j.at("bucket").get<std::string>());
    f.domain = *domain_from(j.at("domain").get<std::string>());
    f.required_domain_count = j.at("required_domain_count").get<int>();
    f.role = *role_from(j.at("role").get<std::string>());

    for (const auto& a : j.at("confirmed_answers"))
        f.confirmed_answers.push_back({a.at("question_id").get<std::string>(),
                                       a.at("answer").get<std::string>(),
                                       a.at("confirmed").get<bool>()});
    for (const auto& o : j.at("options")) {
        OptionDescriptor od;
        od.id = o.at("id").get<std::string>();
        od.label = o.at("label").get<std::string>();
        od.narrative = o.at("narrative").get<std::string>();
        for (const auto& [k, v] : o.at("truth_slots").items())
            od.truth_slots[k] = detail::value_from_json(v);
        od.asserted_witness_ids = o.at("asserted_witness_ids").get<std::vector<std::string>>();
        od.bait = o.at("bait").get<bool>();
        od.bait_claims = o.at("bait_claims").get<std::vector<std::string>>();
        f.options.push_back(std::move(od));
    }

    const auto& profile = j.at("profile");
    f.profile.turn = profile.at("turn").get<int>();
    for (const auto& fact : profile.at("predicate_facts"))
        f.profile.predicate_facts.push_back({predicate_from_json(fact.at("predicate")),
                                             fact.at("answer_id").get<std::string>(),
                                             fact.at("hard").get<bool>()});
    for (const auto& h : profile.at("soft_hints"))
        f.profile.soft_hints.push_back({h.at("id").get<std::string>(),
                                        h.at("text").get<std::string>(),
                                        h.at("dimension").get<std::string>(),
                                        h.at("source_turn").get<int>()});
    for (const auto& u : profile.at("evidence"))
        f.profile.evidence.push_back(unit_from_json(u));
    for (const auto& o : profile.at("obligations"))
        f.profile.obligations.push_back({o.at("id").get<std::string>(),
                                         o.at("due_turn").get<int>(),
                                         o.at("description").get<std::string>(),
                                         o.at("source_evidence_ids")
                                             .get<std::vector<std::string>>()});
    f.profile.observations = profile.at("observations").get<std::vector<std::string>>();
    const auto dims = profile.at("active_dimensions").get<std::vector<std::string>>();
    f.profile.active_dimensions = {dims.begin(), dims.end()};
    for (const auto& rf : profile.at("required_fields"))
        f.profile.required_fields.push_back({rf.at("name").get<std::string>(),
                                             rf.at("dimension").get<std::string>()});
    f.profile.tail_dimensions = profile.at("tail_dimensions").get<std::vector<std::string>>();

    f.surface_requirements = j.at("surface_requirements").get<std::vector<std::string>>();

    const auto& oracle = j.at("oracle");
    for (const auto& p : oracle.at("contract"))
        f.oracle_contract.predicates.push_back(predicate_from_json(p));
    const auto& w = oracle.at("witnesses");
    f.oracle_witnesses.hard = w.at("hard").get<std::vector<std::string>>();
    f.oracle_witnesses.required_witness =
        w.at("required_witness").get<std::vector<std::string>>();
    f.oracle_witnesses.tail = w.at("tail").get<std::vector<std::string>>();
    f.oracle_witnesses.debt = w.at("debt").get<std::vector<std::string>>();
    f.oracle_feasible = oracle.at("feasible").get<std::vector<std::string>>();
    if (!oracle.at("expected_repair").is_null()) {
        const std::string er = oracle.at("expected_repair").get<std::string>();
        for (auto k : {ActKind::clarify, ActKind::recontract, ActKind::abstain,
                       ActKind::fallback})
            if (er == to_string(k)) f.expected_repair = k;
    }

    for (const auto& s : j.at("shadow_facts"))
        f.shadow_facts.push_back({s.at("fact_id").get<std::string>(),
                                  s.at("aliases").get<std::vector<std::string>>(),
                                  s.at("paraphrase_patterns").get<std::vector<std::string>>(),
                                  s.at("weight").get<double>(),
                                  s.at("due_turn").get<int>()});
    return f;
}

inline json manifest_to_json(const Manifest& m) {
    json j;
    j["schema_version"] = m.schema_version;
    j["seed"] = m.seed;
    json fixtures = json::array();
    for (const auto& f : m.fixtures) fixtures.push_back(fixture_to_json(f));
    j["fixtures"] = fixtures;
    return j;
}

inline Manifest manifest_from_json(const json& j) {
    Manifest m;
    m.schema_version = j.at("schema_version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& f : j.at("fixtures")) m.fixtures.push_back(fixture_from_json(f));
    return m;
}

}  // namespace schema

inline std::string serialize_manifest(const Manifest& m) {
    return schema::manifest_to_json(m).dump(2);
}

inline Manifest parse_manifest(const std::string& text) {
    return schema::manifest_from_json(nlohmann::json::parse(text));
}

inline std::string serialize_fixture(const Fixture& f) {
    return schema::fixture_to_json(f).dump(2);
}

inline Fixture parse_fixture(const std::string& text) {
    return schema::fixture_from_json(nlohmann::json::parse(text));
}

// Runtime compilation view of a fixture.
inline Compiled compile_fixture(const Fixture& f) {
    return compile_contract(f.confirmed_answers, f.profile);
}

}  // namespace cbea
