#include <catch2/catch_amalgamated.hpp>

#include "cbea/bootstrap.hpp"
#include "helpers.hpp"

using namespace cbea;

TEST_CASE("paired bootstrap on a degenerate sample is exact") {
    std::vector<PairedSample> samples;
    for (int i = 0; i < 360; ++i) samples.push_back({"f" + std::to_string(i), 0.25});
    const auto iv = paired_bootstrap(samples, 2000, 0.05, 1);
    REQUIRE(iv.mean == Catch::Approx(0.25));
    REQUIRE(iv.ci_low == Catch::Approx(0.25));
    REQUIRE(iv.ci_high == Catch::Approx(0.25));
}

TEST_CASE("paired bootstrap is deterministic under a fixed seed") {
    std::vector<PairedSample> samples;
    Rng rng(12);
    for (int i = 0; i < 100; ++i)
        samples.push_back({"f" + std::to_string(i), rng.unit_real()});
    const auto a = paired_bootstrap(samples, 3000, 0.05, 42);
    const auto b = paired_bootstrap(samples, 3000, 0.05, 42);
    REQUIRE(a.ci_low == b.ci_low);
    REQUIRE(a.ci_high == b.ci_high);
}

TEST_CASE("paired bootstrap validates inputs") {
    REQUIRE_THROWS_AS(paired_bootstrap({}, 2000, 0.05), EmptySamplesError);
    REQUIRE_THROWS_AS(paired_bootstrap({{"f", 1.0}}, 10, 0.05), Error);
}

TEST_CASE("repair-correctness deltas reproduce the published interval") {
    // 360 per-fixture deltas: 275 wins, 80 losses, 5 ties -> mean 0.5417,
    // matching the all-row repair-correctness distribution.
    std::vector<PairedSample> samples;
    int n = 0;
    for (int i = 0; i < 275; ++i) samples.push_back({"f" + std::to_string(n++), 1.0});
    for (int i = 0; i < 80; ++i) samples.push_back({"f" + std::to_string(n++), -1.0});
    for (int i = 0; i < 5; ++i) samples.push_back({"f" + std::to_string(n++), 0.0});

    const auto iv = paired_bootstrap(samples, 10000, 0.05, 7);
    REQUIRE(iv.mean == Catch::Approx(0.5417).margin(0.002));
    REQUIRE(iv.ci_low == Catch::Approx(0.4571).margin(0.03));
    REQUIRE(iv.ci_high == Catch::Approx(0.6286).margin(0.03));
}

TEST_CASE("confidence intervals nest when alpha shrinks") {
    std::vector<PairedSample> samples;
    Rng rng(3);
    for (int i = 0; i < 200; ++i)
        samples.push_back({"f" + std::to_string(i), rng.unit_real() - 0.3});
    const auto wide = paired_bootstrap(samples, 4000, 0.01, 9);
    const auto narrow = paired_bootstrap(samples, 4000, 0.10, 9);
    REQUIRE(wide.ci_low <= narrow.ci_low);
    REQUIRE(wide.ci_high >= narrow.ci_high);
}

TEST_CASE("winner table validation") {
    WinnerTable table;
    table.rows.push_back({"case0", "judge1", Winner::cbea});
    REQUIRE_THROWS_AS(case_cluster_bootstrap(table, 2000, 0.05), UnpairedCaseError);
    REQUIRE_THROWS_AS(case_cluster_bootstrap(WinnerTable{}, 2000, 0.05),
                      EmptySamplesError);
}

TEST_CASE("reference winner table reproduces the published shares and intervals") {
    const WinnerTable table = testutil::reference_winner_table();
    REQUIRE(table.rows.size() == 180);

    const auto rep = case_cluster_bootstrap(table, 10000, 0.05, 17);
    REQUIRE(rep.shares.at(Winner::cbea).mean == Catch::Approx(0.5000).margin(1e-9));
    REQUIRE(rep.shares.at(Winner::raw).mean == Catch::Approx(0.3056).margin(5e-4));
    REQUIRE(rep.shares.at(Winner::validator).mean == Catch::Approx(0.1778).margin(5e-4));
    REQUIRE(rep.shares.at(Winner::tie).mean == Catch::Approx(0.0167).margin(5e-4));

    REQUIRE(rep.shares.at(Winner::cbea).ci_low == Catch::Approx(0.4167).margin(0.02));
    REQUIRE(rep.shares.at(Winner::cbea).ci_high == Catch::Approx(0.5833).margin(0.02));

    REQUIRE(rep.margin.mean == Catch::Approx(0.1944).margin(5e-4));
    REQUIRE(rep.margin.ci_low > 0.0);  // the margin interval excludes zero
    REQUIRE(rep.margin.ci_low == Catch::Approx(0.0500).margin(0.02));
    REQUIRE(rep.margin.ci_high == Catch::Approx(0.3389).margin(0.02));
}

TEST_CASE("unanimous table collapses to a single point") {
    WinnerTable table;
    for (int i = 0; i < 30; ++i) {
        table.rows.push_back({"case" + std::to_string(i), "judge1", Winner::cbea});
        table.rows.push_back({"case" + std::to_string(i), "judge2", Winner::cbea});
    }
    const auto rep = case_cluster_bootstrap(table, 2000, 0.05, 5);
    REQUIRE(rep.shares.at(Winner::cbea).mean == 1.0);
    REQUIRE(rep.shares.at(Winner::cbea).ci_low == 1.0);
    REQUIRE(rep.shares.at(Winner::cbea).ci_high == 1.0);
}

TEST_CASE("cluster integrity: both judge rows of a case travel together") {
    // With asymmetric judges (judge1 always cbea, judge2 always raw), every
    // resample must keep the shares exactly equal at 0.5 each; any split of
    // the pair would break the equality.
    WinnerTable table;
    for (int i = 0; i < 40; ++i) {
        table.rows.push_back({"case" + std::to_string(i), "judge1", Winner::cbea});
        table.rows.push_back({"case" + std::to_string(i), "judge2", Winner::raw});
    }
    const auto rep = case_cluster_bootstrap(table, 3000, 0.05, 11);
    REQUIRE(rep.shares.at(Winner::cbea).ci_low == Catch::Approx(0.5));
    REQUIRE(rep.shares.at(Winner::cbea).ci_high == Catch::Approx(0.5));
    REQUIRE(rep.margin.ci_low == Catch::Approx(0.0));
    REQUIRE(rep.margin.ci_high == Catch::Approx(0.0));
}

TEST_CASE("judge agreement counters") {
    const WinnerTable table = testutil::reference_winner_table();
    REQUIRE(winner_exact_agreement(table) == Catch::Approx(0.6000));

    std::vector<std::pair<int, int>> labels = {{2, 2}, {1, 2}, {0, 2}, {1, 1}};
    const auto agr = label_agreement(labels);
    REQUIRE(agr.exact == Catch::Approx(0.5));
    REQUIRE(agr.within_one == Catch::Approx(0.75));
}

TEST_CASE("winner table csv round trip") {
    const WinnerTable table = testutil::reference_winner_table();
    const std::string csv = winner_table_to_csv(table);
    const WinnerTable back = parse_winner_csv(csv);
    REQUIRE(back.rows.size() == table.rows.size());
    REQUIRE(winner_table_to_csv(back) == csv);

    REQUIRE_THROWS_AS(parse_winner_csv("case0,judge1,unknown_winner\n"), Error);
}

TEST_CASE("delta csv parsing") {
    const auto samples = parse_delta_csv("fixture_id,delta\nf0,0.5\nf1,-1\n");
    REQUIRE(samples.size() == 2);
    REQUIRE(samples[0].fixture_id == "f0");
    REQUIRE(samples[1].delta == Catch::Approx(-1.0));
}
