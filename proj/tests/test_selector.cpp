#include <catch2/catch_amalgamated.hpp>

#include "cbea/fixtures.hpp"
#include "cbea/selector.hpp"
#include "helpers.hpp"

using namespace cbea;

namespace {

Compiled small_compiled() {
    auto [answers, profile] = testutil::small_profile();
    return compile_contract(answers, profile);
}

EvidencePool random_pool(Rng& rng, std::size_t n) {
    EvidencePool pool;
    for (std::size_t i = 0; i < n; ++i) {
        EvidenceUnit u;
        u.id = "u" + std::to_string(i);
        u.content = "w" + std::to_string(rng.pick(12)) + " w" + std::to_string(rng.pick(12));
        u.dimension = rng.pick(2) ? "budget" : "other";
        u.tail = rng.pick(5) == 0;
        u.cost = 1 + static_cast<int>(rng.pick(3));
        u.provenance = {0, true, u.content};
        pool.units.push_back(u);
    }
    return pool;
}

}  // namespace

TEST_CASE("coverage indicator") {
    const Compiled c = small_compiled();
    const Requirement* cap = c.requirements.find("req:hard:p:cap");
    REQUIRE(cap != nullptr);

    REQUIRE(coverage_indicator({}, *cap, c.matrix) == 0);
    REQUIRE(coverage_indicator({"e1"}, *cap, c.matrix) == 1);
    // Three non-covering units, checked against brute-force membership.
    const std::set<std::string> zs = {"e4", "e5", "e6"};
    int expected = 0;
    for (const auto& u : c.pool.units)
        if (zs.count(u.id))
            for (const auto& r : u.covers)
                if (r == cap->id) expected = 1;
    REQUIRE(coverage_indicator(zs, *cap, c.matrix) == expected);

    Requirement unknown{"req:ghost", "x", 1.0, RequirementSource::required_field};
    REQUIRE_THROWS_AS(coverage_indicator({}, unknown, c.matrix), UnknownIdError);
}

TEST_CASE("objective on the empty set is zero") {
    const Compiled c = small_compiled();
    const auto [j, terms] = objective(c.pool, {}, c.requirements, c.matrix, c.state,
                                      c.context, SelectorWeights{});
    REQUIRE(j == 0.0);
    REQUIRE(terms.rel == 0.0);
    REQUIRE(terms.cov == 0.0);
    REQUIRE(terms.tail == 0.0);
    REQUIRE(terms.debt == 0.0);
    REQUIRE(terms.over == 0.0);
}

TEST_CASE("full coverage contributes weighted sum under default weights") {
    const Compiled c = small_compiled();
    const std::set<std::string> all = {"e1", "e2", "e3", "e7"};
    const auto [j, terms] = objective(c.pool, all, c.requirements, c.matrix, c.state,
                                      c.context, SelectorWeights{});
    // Unit weights: Cov equals |R|, and the cov term contributes 2*|R|.
    REQUIRE(terms.cov == Catch::Approx(4.0));
    REQUIRE(j >= 2.0 * 4.0);
    REQUIRE(j == Catch::Approx(testutil::brute_force_objective(
                c.pool, all, c.requirements, c.state, c.context, SelectorWeights{})));
}

TEST_CASE("objective matches the independent scorer on hand-picked sets") {
    const Compiled c = small_compiled();
    const std::vector<std::set<std::string>> picks = {
        {"e1"}, {"e1", "e5"}, {"e2", "e6", "e8"}, {"e3", "e7"}, {"e4", "e8"},
    };
    for (const auto& z : picks) {
        const auto [j, _] = objective(c.pool, z, c.requirements, c.matrix, c.state,
                                      c.context, SelectorWeights{});
        REQUIRE(j == Catch::Approx(testutil::brute_force_objective(
                    c.pool, z, c.requirements, c.state, c.context, SelectorWeights{})));
    }
    REQUIRE_THROWS_AS(objective(c.pool, {"ghost"}, c.requirements, c.matrix, c.state,
                                c.context, SelectorWeights{}),
                      UnknownIdError);
}

TEST_CASE("greedy_select on budget zero is empty") {
    const Compiled c = small_compiled();
    const auto res = greedy_select(c.pool, c.requirements, c.matrix, c.state, c.context,
                                   SelectorWeights{}, {0, 0});
    REQUIRE(res.selected.empty());
    REQUIRE(res.spent_cost == 0);
    REQUIRE(res.objective_value == 0.0);
}

TEST_CASE("tail reservation beats a competing high-relevance unit") {
    // Two units, budget 2: the tail unit covering the tail requirement is
    // selected first even though the other unit carries all the relevance.
    Profile p;
    p.turn = 1;
    p.active_dimensions = {"budget"};
    p.tail_dimensions = {"legacy"};
    EvidenceUnit tail;
    tail.id = "t1";
    tail.content = "umbra vellum";
    tail.dimension = "legacy";
    tail.tail = true;
    tail.cost = 2;
    tail.covers = {"req:tail:legacy"};
    tail.provenance = {0, true, "x"};
    EvidenceUnit hot;
    hot.id = "r1";
    hot.content = "budget cap anchor";
    hot.dimension = "budget";
    hot.cost = 2;
    hot.provenance = {0, true, "x"};
    p.evidence = {hot, tail};
    p.observations = {"budget cap anchor discussed at length"};

    const Compiled c = compile_contract({}, p);
    const Budget budget{2, 2};
    const auto res = greedy_select(c.pool, c.requirements, c.matrix, c.state, c.context,
                                   SelectorWeights{}, budget);
    REQUIRE(res.selected == std::vector<std::string>{"t1"});

    // Exhaustive subset search confirms the greedy pick is feasible-optimal.
    const auto [best, best_j] = testutil::best_subset(c.pool, c.requirements, c.state,
                                                      c.context, SelectorWeights{}, 2);
    REQUIRE(best == std::set<std::string>{"t1"});
    REQUIRE(res.objective_value == Catch::Approx(best_j));
}

TEST_CASE("budget feasibility holds under fuzzing") {
    Rng rng(99);
    for (int round = 0; round < 60; ++round) {
        EvidencePool pool = random_pool(rng, 3 + rng.pick(8));
        Profile p;
        p.active_dimensions = {"budget"};
        p.evidence = pool.units;
        p.observations = {"w0 w1 w2 w3 w4 w5"};
        const Compiled c = compile_contract({}, p);
        const int total = static_cast<int>(rng.pick(10));
        const auto res = greedy_select(c.pool, c.requirements, c.matrix, c.state, c.context,
                                       SelectorWeights{}, {total, 0});
        REQUIRE(res.spent_cost <= total);
        // Objective audit: stored value matches recomputation from `selected`.
        const auto [j, _] = objective(c.pool, res.selected_set(), c.requirements, c.matrix,
                                      c.state, c.context, SelectorWeights{});
        REQUIRE(std::abs(j - res.objective_value) <= 1e-9);
    }
}

TEST_CASE("coverage is monotone in the selected set") {
    const Compiled c = small_compiled();
    Rng rng(5);
    for (int round = 0; round < 40; ++round) {
        std::set<std::string> z;
        for (const auto& u : c.pool.units)
            if (rng.pick(2)) z.insert(u.id);
        const auto before = objective(c.pool, z, c.requirements, c.matrix, c.state,
                                      c.context, SelectorWeights{});
        for (const auto& u : c.pool.units) {
            if (z.count(u.id)) continue;
            auto grown = z;
            grown.insert(u.id);
            const auto after = objective(c.pool, grown, c.requirements, c.matrix, c.state,
                                         c.context, SelectorWeights{});
            REQUIRE(after.second.cov >= before.second.cov);
        }
    }
}

TEST_CASE("tail dominance: greedy covers every tail requirement on generated fixtures") {
    const Manifest m = generate_manifest(11);
    for (const auto& f : m.fixtures) {
        const Compiled c = compile_fixture(f);
        const Budget budget = make_budget(12, c.pool);
        const auto res = greedy_select(c.pool, c.requirements, c.matrix, c.state, c.context,
                                       SelectorWeights{}, budget);
        for (const auto& r : c.requirements.requirements) {
            if (r.source != RequirementSource::tail_witness) continue;
            REQUIRE(coverage_indicator(res.selected_set(), r, c.matrix) == 1);
        }
    }
}

TEST_CASE("mmr on an empty pool is empty") {
    REQUIRE(mmr_select(EvidencePool{}, {"a", "b"}, 12).empty());
}

TEST_CASE("mmr deprioritizes a duplicate unit") {
    EvidencePool pool;
    EvidenceUnit a;
    a.id = "a";
    a.content = "harbor beacon signal";
    a.cost = 1;
    EvidenceUnit b = a;
    b.id = "b";  // identical content: zero marginal similarity term
    EvidenceUnit c;
    c.id = "c";
    c.content = "orchard vellum";
    c.cost = 1;
    pool.units = {a, b, c};

    const auto picked =
        mmr_select(pool, {"harbor", "beacon", "signal", "orchard"}, 2, 0.5);
    REQUIRE(picked.size() == 2);
    REQUIRE(picked[0] == "a");
    // The duplicate's similarity term cancels its relevance; the partially
    // relevant but diverse unit outranks it.
    REQUIRE(picked[1] == "c");
}

TEST_CASE("mmr is blind to covers, tail flags and obligations") {
    const Manifest m = generate_manifest(3);
    const Fixture& f = m.fixtures[17];
    const Compiled c = compile_fixture(f);
    const auto base = mmr_select(c.pool, c.context.observation_tokens, 12);

    Compiled scrambled = c;
    Rng rng(1234);
    for (auto& u : scrambled.pool.units) {
        u.tail = rng.pick(2) == 0;
        u.covers.clear();
        if (rng.pick(2)) u.covers.push_back("req:ghost:" + std::to_string(rng.pick(5)));
    }
    scrambled.state.obligations.clear();
    const auto after = mmr_select(scrambled.pool, scrambled.context.observation_tokens, 12);
    REQUIRE(base == after);
}

TEST_CASE("selector recall categories") {
    OracleWitnessLabels labels;
    labels.hard = {"e1", "e2"};
    labels.required_witness = {"e3"};
    labels.tail = {"e8"};
    labels.debt = {"e7"};

    SECTION("exact control set recalls 1.0 everywhere") {
        const auto r = selector_recall({"e1", "e2", "e3", "e7", "e8"}, labels);
        REQUIRE(r.hard.value == 1.0);
        REQUIRE(r.required_witness.value == 1.0);
        REQUIRE(r.tail.value == 1.0);
        REQUIRE(r.debt.value == 1.0);
        REQUIRE(r.control_union.value == 1.0);
        REQUIRE(r.hard.defined);
    }
    SECTION("partial selection") {
        const auto r = selector_recall({"e1", "e3"}, labels);
        REQUIRE(r.hard.value == Catch::Approx(0.5));
        REQUIRE(r.control_union.value == Catch::Approx(0.4));
    }
    SECTION("empty label set reports 1.0 with the undefined flag") {
        const auto r = selector_recall({"e1"}, OracleWitnessLabels{});
        REQUIRE(r.tail.value == 1.0);
        REQUIRE_FALSE(r.tail.defined);
    }
}
