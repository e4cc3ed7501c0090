#include <catch2/catch_amalgamated.hpp>

#include "cbea/harness.hpp"
#include "cbea/metrics.hpp"

using namespace cbea;

namespace {

RunRecord row(const std::string& fixture, AttemptState state,
              const std::string& variant = "v") {
    RunRecord r;
    r.fixture_id = fixture;
    r.variant = variant;
    r.state = state;
    return r;
}

std::vector<RunRecord> synthetic_rows(std::size_t emitted, std::size_t repairs,
                                      std::size_t failures = 0) {
    std::vector<RunRecord> out;
    std::size_t n = 0;
    for (std::size_t i = 0; i < emitted; ++i)
        out.push_back(row("f" + std::to_string(n++), AttemptState::emitted));
    for (std::size_t i = 0; i < repairs; ++i)
        out.push_back(row("f" + std::to_string(n++), AttemptState::repair_act));
    for (std::size_t i = 0; i < failures; ++i)
        out.push_back(row("f" + std::to_string(n++), AttemptState::parse_failure));
    return out;
}

}  // namespace

TEST_CASE("availability uses the attempted denominator") {
    REQUIRE(*availability(synthetic_rows(180, 180)).value == Catch::Approx(0.5));
    REQUIRE(*availability(synthetic_rows(0, 10)).value == 0.0);
    REQUIRE(*availability(synthetic_rows(10, 0)).value == 1.0);
    REQUIRE_THROWS_AS(availability({}), EmptyDenominatorError);
}

TEST_CASE("ohcvr is computed over emitted rows only") {
    SECTION("119 emitted, 14 violating") {
        auto rows = synthetic_rows(119, 30);
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].state == AttemptState::emitted)
                rows[i].oracle_eval.hard_violation = i < 14;
        REQUIRE(*ohcvr(rows).value == Catch::Approx(14.0 / 119.0).epsilon(1e-9));
        REQUIRE(*ohcvr(rows).value == Catch::Approx(0.1176).margin(5e-5));
    }
    SECTION("all emitted violate") {
        auto rows = synthetic_rows(5, 0);
        for (auto& r : rows) r.oracle_eval.hard_violation = true;
        REQUIRE(*ohcvr(rows).value == 1.0);
    }
    SECTION("no emitted rows yields an explicit null with a reason, never zero") {
        const auto m = ohcvr(synthetic_rows(0, 4));
        REQUIRE_FALSE(m.value.has_value());
        REQUIRE_FALSE(m.note.empty());
    }
}

TEST_CASE("nfer counts emissions on infeasible fixtures only") {
    auto rows = synthetic_rows(30, 30);
    std::size_t marked = 0;
    for (auto& r : rows) {
        if (marked < 60) {
            r.oracle_eval.infeasible_emission = r.state == AttemptState::emitted;
            ++marked;
        }
    }
    // brute-force recount over the marked rows
    std::size_t denom = 0, num = 0;
    for (const auto& r : rows)
        if (r.oracle_eval.infeasible_emission) {
            ++denom;
            if (*r.oracle_eval.infeasible_emission) ++num;
        }
    REQUIRE(denom == 60);
    REQUIRE(*nfer(rows).value ==
            Catch::Approx(static_cast<double>(num) / static_cast<double>(denom)));

    SECTION("gated variant emits nothing on the infeasible set") {
        for (auto& r : rows)
            if (r.oracle_eval.infeasible_emission) r.oracle_eval.infeasible_emission = false;
        REQUIRE(*nfer(rows).value == 0.0);
    }
}

TEST_CASE("repair correctness scores commitments as zero") {
    auto rows = synthetic_rows(2, 2);
    rows[0].oracle_eval.repair_match = false;  // commitment on a repair fixture
    rows[1].oracle_eval.repair_match = false;
    rows[2].oracle_eval.repair_match = true;
    rows[3].oracle_eval.repair_match = true;
    REQUIRE(*repair_correctness(rows).value == Catch::Approx(0.5));
}

TEST_CASE("coverage and continuity match a per-row recount") {
    Rng rng(8);
    auto rows = synthetic_rows(40, 10);
    for (auto& r : rows) {
        if (r.state != AttemptState::emitted) continue;
        r.oracle_eval.coverage_failure = rng.pick(3) == 0;
        r.oracle_eval.witness_drop = rng.pick(4) == 0;
        r.oracle_eval.consequence_failure = rng.pick(2) == 0;
    }
    const auto rep = coverage_and_continuity(rows);
    std::size_t ne = 0, ecf = 0, wit = 0, cons = 0;
    for (const auto& r : rows) {
        if (r.state != AttemptState::emitted) continue;
        ++ne;
        if (*r.oracle_eval.coverage_failure) ++ecf;
        if (*r.oracle_eval.witness_drop) ++wit;
        if (*r.oracle_eval.consequence_failure) ++cons;
    }
    REQUIRE(*rep.ecf.value == Catch::Approx(double(ecf) / double(ne)));
    REQUIRE(*rep.witness_drop.value == Catch::Approx(double(wit) / double(ne)));
    REQUIRE(*rep.consequence.value == Catch::Approx(double(cons) / double(ne)));
}

TEST_CASE("denominator report partitions the attempted set") {
    auto rows = synthetic_rows(3, 2, 5);
    const auto counts = denominator_report(rows);
    REQUIRE(counts.at(AttemptState::emitted) == 3);
    REQUIRE(counts.at(AttemptState::repair_act) == 2);
    REQUIRE(counts.at(AttemptState::parse_failure) == 5);
    std::size_t total = 0;
    for (const auto& [_, n] : counts) total += n;
    REQUIRE(total == rows.size());

    SECTION("a duplicated row breaches the partition") {
        rows.push_back(rows.front());
        REQUIRE_THROWS_AS(denominator_report(rows), PartitionBreachError);
    }
}

TEST_CASE("stubbed malformed replies land in the failure column") {
    // five malformed replies injected into an otherwise clean run
    auto rows = synthetic_rows(10, 3, 5);
    const auto counts = denominator_report(rows);
    REQUIRE(counts.at(AttemptState::parse_failure) == 5);
    REQUIRE(*availability(rows).value == Catch::Approx(10.0 / 18.0));
}

TEST_CASE("horizon grouping splits by required domain count and recombines") {
    Manifest m;
    m.seed = 1;
    // miniature manifest: 4 fixtures across groups 2 and 3
    for (int i = 0; i < 4; ++i) {
        Fixture f;
        f.id = "f" + std::to_string(i);
        f.required_domain_count = i < 2 ? 2 : 3;
        m.fixtures.push_back(f);
    }
    std::vector<RunRecord> rows;
    rows.push_back(row("f0", AttemptState::emitted));
    rows.push_back(row("f1", AttemptState::repair_act));
    rows.push_back(row("f2", AttemptState::emitted));
    rows.push_back(row("f3", AttemptState::emitted));

    const auto groups = horizon_grouping(rows, m);
    REQUIRE(groups.size() == 2);
    REQUIRE(groups.at(2).attempted == 2);
    REQUIRE(groups.at(3).attempted == 2);
    REQUIRE(*groups.at(2).availability.value == Catch::Approx(0.5));
    REQUIRE(*groups.at(3).availability.value == Catch::Approx(1.0));

    // algebraic recombination equals the ungrouped metric
    double recombined = 0.0;
    for (const auto& [_, rep] : groups)
        recombined += *rep.availability.value * static_cast<double>(rep.attempted);
    recombined /= static_cast<double>(rows.size());
    REQUIRE(recombined == Catch::Approx(*availability(rows).value));

    RunRecord stray = row("ghost", AttemptState::emitted);
    auto bad = rows;
    bad.push_back(stray);
    REQUIRE_THROWS_AS(horizon_grouping(bad, m), UnknownIdError);
}

TEST_CASE("payload stats report medians and deltas against raw") {
    std::map<std::string, std::vector<RunRecord>> by_variant;
    for (int i = 0; i < 3; ++i) {
        RunRecord r = row("f" + std::to_string(i), AttemptState::emitted, "raw");
        r.input_tokens = 1000 + i * 100;  // median 1100
        by_variant["raw"].push_back(r);
        RunRecord s = row("f" + std::to_string(i), AttemptState::emitted, "cbea_lcv");
        s.input_tokens = 200 + i * 10;  // median 210
        by_variant["cbea_lcv"].push_back(s);
    }
    const auto stats = payload_stats(by_variant);
    REQUIRE(stats.at("raw").median_input_tokens == Catch::Approx(1100));
    REQUIRE(stats.at("cbea_lcv").median_input_tokens == Catch::Approx(210));
    REQUIRE(stats.at("cbea_lcv").delta_vs_raw == Catch::Approx(890));
    REQUIRE(stats.at("raw").delta_vs_raw == Catch::Approx(0));

    SECTION("single record median is the value itself") {
        std::map<std::string, std::vector<RunRecord>> one;
        RunRecord r = row("f0", AttemptState::emitted, "raw");
        r.input_tokens = 42;
        one["raw"].push_back(r);
        REQUIRE(payload_stats(one).at("raw").median_input_tokens == Catch::Approx(42));
    }
}

TEST_CASE("shadow recall over realized texts") {
    Manifest m = generate_manifest(9);
    m.fixtures.resize(10);

    SECTION("zero-match outputs recall zero") {
        std::vector<RunRecord> rows;
        for (const auto& f : m.fixtures) {
            RunRecord r = row(f.id, AttemptState::emitted);
            r.realized_text = "nothing hidden here";
            rows.push_back(r);
        }
        REQUIRE(shadow_recall(rows, m).overall == 0.0);
    }
    SECTION("verbatim echoes recall everything") {
        std::vector<RunRecord> rows;
        for (const auto& f : m.fixtures) {
            RunRecord r = row(f.id, AttemptState::emitted);
            for (const auto& obs : f.observations()) r.realized_text += obs + " ";
            rows.push_back(r);
        }
        REQUIRE(shadow_recall(rows, m).overall == Catch::Approx(1.0));
    }
}

TEST_CASE("aggregates equal per-row recounts on random record sets") {
    Rng rng(555);
    for (int round = 0; round < 20; ++round) {
        std::vector<RunRecord> rows;
        const std::size_t n = 5 + rng.pick(40);
        for (std::size_t i = 0; i < n; ++i) {
            const auto state = all_attempt_states()[rng.pick(all_attempt_states().size())];
            RunRecord r = row("f" + std::to_string(i), state);
            if (state == AttemptState::emitted)
                r.oracle_eval.hard_violation = rng.pick(2) == 0;
            rows.push_back(r);
        }
        std::size_t emitted = 0, violating = 0;
        for (const auto& r : rows)
            if (r.state == AttemptState::emitted) {
                ++emitted;
                if (*r.oracle_eval.hard_violation) ++violating;
            }
        REQUIRE(*availability(rows).value ==
                Catch::Approx(double(emitted) / double(rows.size())));
        const auto v = ohcvr(rows);
        if (emitted == 0) {
            REQUIRE_FALSE(v.value.has_value());
        } else {
            REQUIRE(*v.value == Catch::Approx(double(violating) / double(emitted)));
        }
        REQUIRE_NOTHROW(denominator_report(rows));
    }
}

TEST_CASE("record jsonl round trip") {
    RunRecord r = row("fx", AttemptState::emitted, "cbea_lcv");
    r.act_kind = "commitment";
    r.selected_option = "opt_1";
    r.witness_ids = {"e1", "e2"};
    r.obligation_ids = {"ob:review"};
    r.realized_text = "Recommendation: opt_1.";
    r.input_tokens = 120;
    r.output_tokens = 30;
    r.oracle_eval.hard_violation = false;
    r.oracle_eval.repair_match = std::nullopt;

    const auto j = record_to_json(r);
    const RunRecord back = record_from_json(j);
    REQUIRE(record_to_json(back).dump() == j.dump());
    REQUIRE(back.oracle_eval.hard_violation.has_value());
    REQUIRE_FALSE(back.oracle_eval.repair_match.has_value());
}
