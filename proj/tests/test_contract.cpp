#include <catch2/catch_amalgamated.hpp>

#include "cbea/commitment.hpp"
#include "cbea/contract.hpp"
#include "helpers.hpp"

using namespace cbea;

TEST_CASE("token normalizer lowercases, strips punctuation, splits whitespace") {
    const auto toks = normalize_tokens("The cap, at 500 USD -- per Month!");
    REQUIRE(toks == std::vector<std::string>{"the", "cap", "at", "500", "usd", "per",
                                             "month"});
    REQUIRE(normalize_tokens("").empty());
}

TEST_CASE("compile_contract builds contract, pool, state and matrix") {
    auto [answers, profile] = testutil::small_profile();
    const Compiled c = compile_contract(answers, profile);

    REQUIRE(c.contract.predicates.size() == 2);
    REQUIRE(c.pool.units.size() == 8);
    REQUIRE(c.requirements.size() == 4);  // 2 hard + 1 field + 1 due obligation
    REQUIRE(c.matrix.unit_count() == 8);
    REQUIRE(c.matrix.requirement_count() == 4);

    // Brute-force matrix recomputation: entry is set iff covers lists it.
    for (const auto& u : c.pool.units)
        for (const auto& r : c.requirements.requirements) {
            const bool listed =
                std::find(u.covers.begin(), u.covers.end(), r.id) != u.covers.end();
            REQUIRE(c.matrix.covered(u.id, r.id) == listed);
        }
}

TEST_CASE("compile_contract identity on empty inputs") {
    const Compiled c = compile_contract({}, Profile{});
    REQUIRE(c.contract.predicates.empty());
    REQUIRE(c.pool.units.empty());
    REQUIRE(c.requirements.size() == 0);
    REQUIRE(c.matrix.unit_count() == 0);
    REQUIRE(c.matrix.requirement_count() == 0);
}

TEST_CASE("unconfirmed facts can never harden into predicates") {
    auto [answers, profile] = testutil::small_profile();

    SECTION("fact marked unconfirmed") {
        profile.predicate_facts[0].predicate.provenance.confirmed = false;
        REQUIRE_THROWS_AS(compile_contract(answers, profile), UnconfirmedHardeningError);
    }
    SECTION("answer behind the fact is unconfirmed") {
        answers[0].confirmed = false;
        REQUIRE_THROWS_AS(compile_contract(answers, profile), UnconfirmedHardeningError);
    }
    SECTION("soft hints become evidence units, never predicates") {
        profile.soft_hints.push_back({"hint:1", "maybe go all in", "budget", 3});
        const Compiled c = compile_contract(answers, profile);
        REQUIRE(c.contract.predicates.size() == 2);
        REQUIRE(c.pool.find("hint:1") != nullptr);
        REQUIRE_FALSE(c.pool.find("hint:1")->provenance.confirmed);
    }
}

TEST_CASE("duplicate ids are rejected") {
    auto [answers, profile] = testutil::small_profile();
    SECTION("predicates") {
        profile.predicate_facts.push_back(profile.predicate_facts[0]);
        REQUIRE_THROWS_AS(compile_contract(answers, profile), DuplicateIdError);
    }
    SECTION("evidence") {
        profile.evidence.push_back(profile.evidence[0]);
        REQUIRE_THROWS_AS(compile_contract(answers, profile), DuplicateIdError);
    }
}

TEST_CASE("derive_requirements emits one requirement per source") {
    auto [answers, profile] = testutil::small_profile();
    const Compiled c = compile_contract(answers, profile);

    std::map<RequirementSource, int> by_source;
    for (const auto& r : c.requirements.requirements) by_source[r.source]++;
    REQUIRE(by_source[RequirementSource::hard_predicate] == 2);
    REQUIRE(by_source[RequirementSource::required_field] == 1);
    REQUIRE(by_source[RequirementSource::consequence_debt] == 1);  // ob:call is due
    REQUIRE(by_source[RequirementSource::scene_obligation] == 0);  // both dims confirmed

    SECTION("scene requirement appears for an unconfirmed active dimension") {
        profile.active_dimensions.insert("wellbeing");
        const Compiled c2 = compile_contract(answers, profile);
        const Requirement* scene = c2.requirements.find("req:scene:wellbeing");
        REQUIRE(scene != nullptr);
        REQUIRE(scene->source == RequirementSource::scene_obligation);
    }
    SECTION("undue obligations derive no requirement") {
        profile.obligations[0].due_turn = profile.turn + 2;
        const Compiled c2 = compile_contract(answers, profile);
        REQUIRE(c2.requirements.find("req:debt:ob:call") == nullptr);
    }
}

TEST_CASE("derive_requirements is pure") {
    auto [answers, profile] = testutil::small_profile();
    const Compiled c = compile_contract(answers, profile);
    const auto a = derive_requirements(c.contract, c.state, c.context);
    const auto b = derive_requirements(c.contract, c.state, c.context);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a.requirements[i].id == b.requirements[i].id);
        REQUIRE(a.requirements[i].source == b.requirements[i].source);
        REQUIRE(a.requirements[i].weight == b.requirements[i].weight);
    }
}

TEST_CASE("check_predicate comparator semantics") {
    StructuredCommitment a;
    a.id = "c1";
    a.selected_option = "opt_2";
    a.commitment_type = "recommendation";
    a.slots["monthly"] = 500.0;
    a.slots["plan"] = std::string("quarterly");
    a.consequence_obligations = {"ob:call"};
    a.claimed_predicates = {"p:cap"};

    HardPredicate p;
    p.provenance = {1, true, "x"};

    SECTION("bound_numeric leq boundary passes") {
        p.kind = PredicateKind::bound_numeric;
        p.target = "slots.monthly";
        p.comparator = Comparator::leq;
        p.value = 500.0;
        REQUIRE(check_predicate(p, a));
        p.value = 499.0;
        REQUIRE_FALSE(check_predicate(p, a));
    }
    SECTION("forbid_option rejects the named option") {
        p.kind = PredicateKind::forbid_option;
        p.target = "selected_option";
        p.comparator = Comparator::neq;
        p.value = std::string("opt_2");
        REQUIRE_FALSE(check_predicate(p, a));
        p.value = std::string("opt_9");
        REQUIRE(check_predicate(p, a));
    }
    SECTION("require_slot on a present slot passes") {
        p.kind = PredicateKind::require_slot;
        p.target = "slots.plan";
        p.comparator = Comparator::eq;
        p.value = std::string("quarterly");
        REQUIRE(check_predicate(p, a));
    }
    SECTION("absent comparator passes only on absent fields") {
        p.kind = PredicateKind::forbid_option;
        p.target = "slots.missing";
        p.comparator = Comparator::absent;
        REQUIRE(check_predicate(p, a));
        // Absent field under any other comparator fails.
        p.comparator = Comparator::neq;
        p.value = std::string("anything");
        REQUIRE_FALSE(check_predicate(p, a));
    }
    SECTION("protect_obligation demands membership") {
        p.kind = PredicateKind::protect_obligation;
        p.target = "consequence_obligations";
        p.comparator = Comparator::in_set;
        p.value = std::string("ob:call");
        REQUIRE(check_predicate(p, a));
        p.value = std::string("ob:other");
        REQUIRE_FALSE(check_predicate(p, a));
    }
    SECTION("no_unwitnessed_claim bans the tagged claim") {
        p.kind = PredicateKind::no_unwitnessed_claim;
        p.target = "claimed_predicates";
        p.comparator = Comparator::absent;
        p.value = std::string("claim:approval");
        REQUIRE(check_predicate(p, a));
        a.claimed_predicates.push_back("claim:approval");
        REQUIRE_FALSE(check_predicate(p, a));
    }
    SECTION("evaluation is total over repair acts") {
        StructuredCommitment repair;
        repair.id = "r1";
        repair.repair_status = RepairStatus::clarify;
        p.kind = PredicateKind::bound_numeric;
        p.target = "slots.monthly";
        p.comparator = Comparator::leq;
        p.value = 10.0;
        REQUIRE_NOTHROW(check_predicate(p, repair));
    }
}

TEST_CASE("kind/comparator pairing table") {
    REQUIRE(kind_comparator_valid(PredicateKind::forbid_option, Comparator::neq));
    REQUIRE(kind_comparator_valid(PredicateKind::forbid_option, Comparator::absent));
    REQUIRE_FALSE(kind_comparator_valid(PredicateKind::forbid_option, Comparator::leq));
    REQUIRE(kind_comparator_valid(PredicateKind::bound_numeric, Comparator::geq));
    REQUIRE_FALSE(kind_comparator_valid(PredicateKind::bound_numeric, Comparator::eq));
    REQUIRE(kind_comparator_valid(PredicateKind::protect_obligation, Comparator::in_set));
    REQUIRE_FALSE(kind_comparator_valid(PredicateKind::no_unwitnessed_claim, Comparator::eq));
}

TEST_CASE("overdue obligations are flagged by due-ness rule") {
    MutableState u;
    u.turn = 6;
    u.obligations = {{"ob:a", 6, "due now", {}}, {"ob:b", 9, "later", {}}};
    const auto due = u.due_obligation_ids();
    REQUIRE(due == std::vector<std::string>{"ob:a"});
}
