// Command-line front end: generate fixtures, run matched variants and
// ablations, score record streams, and run the bootstrap, shadow, payload
// and selftest diagnostics. Exit code is nonzero iff an invariant check
// fails.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbea/backend_http.hpp"
#include "cbea/harness.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cbea::Error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& body) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw cbea::Error("cannot write " + path);
    out << body;
}

cbea::RunConfig load_config(const std::string& path) {
    cbea::RunConfig cfg;
    if (path.empty()) return cfg;
    const auto j = nlohmann::json::parse(slurp(path));
    if (j.contains("manifest")) cfg.manifest_path = j["manifest"].get<std::string>();
    if (j.contains("variants")) cfg.variants = j["variants"].get<std::vector<std::string>>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("budget_total")) cfg.budget_total = j["budget_total"].get<int>();
    if (j.contains("tail_reserve")) cfg.tail_reserve = j["tail_reserve"].get<int>();
    if (j.contains("weights")) {
        const auto& w = j["weights"];
        cfg.weights.rel = w.value("rel", cfg.weights.rel);
        cfg.weights.cov = w.value("cov", cfg.weights.cov);
        cfg.weights.tail = w.value("tail", cfg.weights.tail);
        cfg.weights.debt = w.value("debt", cfg.weights.debt);
        cfg.weights.over = w.value("over", cfg.weights.over);
    }
    if (j.contains("parallelism")) cfg.parallelism = j["parallelism"].get<int>();
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("history_factor")) cfg.history_factor = j["history_factor"].get<double>();
    if (j.contains("backend")) {
        const auto& b = j["backend"];
        cbea::BackendConfig bc;
        bc.endpoint = b.value("endpoint", std::string());
        bc.model_id = b.value("model_id", std::string());
        bc.temperature = b.value("temperature", bc.temperature);
        bc.max_output_tokens = b.value("max_output_tokens", bc.max_output_tokens);
        bc.parse_retries = b.value("parse_retries", bc.parse_retries);
        bc.timeout_seconds = b.value("timeout_seconds", bc.timeout_seconds);
        cfg.backend = bc;
        cfg.transport = cbea::make_http_transport();
    }
    return cfg;
}

cbea::Manifest load_manifest(const std::string& path) {
    return cbea::parse_manifest(slurp(path));
}

std::map<std::string, std::vector<cbea::RunRecord>> group_records(
    const std::vector<cbea::RunRecord>& records) {
    std::map<std::string, std::vector<cbea::RunRecord>> out;
    for (const auto& r : records) out[r.variant].push_back(r);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contract-bounded evidence activation + lexicographic commitment "
                 "validation runtime and benchmark"};
    app.require_subcommand(1);

    // generate
    std::uint64_t gen_seed = 7;
    std::string gen_out = "manifest.json";
    double gen_factor = 1.0;
    auto* gen = app.add_subcommand("generate", "generate a fixture manifest");
    gen->add_option("--seed", gen_seed, "generation seed");
    gen->add_option("--out", gen_out, "output manifest path");
    gen->add_option("--history-factor", gen_factor, "lengthen visible history by this factor");

    // run
    std::string run_config_path;
    std::string run_manifest;
    std::vector<std::string> run_variants;
    std::string run_out_dir;
    std::uint64_t run_seed = 0;
    int run_budget = 0;
    int run_parallelism = -1;
    auto* run = app.add_subcommand("run", "run variants over a manifest");
    run->add_option("--config", run_config_path, "json config file");
    run->add_option("--manifest", run_manifest, "manifest path (overrides config)");
    run->add_option("--variant", run_variants, "variant name, repeatable; default: all nine");
    run->add_option("--out", run_out_dir, "output directory (overrides config)");
    run->add_option("--seed", run_seed, "run seed (overrides config)");
    run->add_option("--budget", run_budget, "activation budget (overrides config)");
    run->add_option("--parallelism", run_parallelism, "worker threads (overrides config)");

    // ablate
    std::string abl_config_path;
    std::string abl_manifest;
    std::vector<std::string> abl_names;
    std::string abl_out_dir;
    auto* abl = app.add_subcommand("ablate", "run targeted ablations");
    abl->add_option("--config", abl_config_path, "json config file");
    abl->add_option("--manifest", abl_manifest, "manifest path");
    abl->add_option("--ablation", abl_names,
                    "ablation name, repeatable; default: all three");
    abl->add_option("--out", abl_out_dir, "output directory");

    // score
    std::vector<std::string> score_records;
    std::string score_manifest;
    std::string score_out = "out/report";
    auto* score = app.add_subcommand("score", "score record streams into report tables");
    score->add_option("--records", score_records, "jsonl record files")->required();
    score->add_option("--manifest", score_manifest, "manifest path")->required();
    score->add_option("--out", score_out, "report output directory");

    // bootstrap
    std::string boot_winners;
    std::string boot_deltas;
    int boot_resamples = 10000;
    double boot_alpha = 0.05;
    std::uint64_t boot_seed = 17;
    std::string boot_out = "out/bootstrap.csv";
    auto* boot = app.add_subcommand("bootstrap", "bootstrap confidence intervals");
    boot->add_option("--winners", boot_winners, "winner table csv (case cluster bootstrap)");
    boot->add_option("--deltas", boot_deltas, "paired delta csv (paired bootstrap)");
    boot->add_option("--resamples", boot_resamples, "resample count");
    boot->add_option("--alpha", boot_alpha, "1 - confidence level");
    boot->add_option("--seed", boot_seed, "resampling seed");
    boot->add_option("--out", boot_out, "output csv");

    // shadow
    std::vector<std::string> shadow_records;
    std::string shadow_manifest;
    std::string shadow_out = "out/shadow.csv";
    auto* shadow = app.add_subcommand("shadow", "uncompiled-fact recall over outputs");
    shadow->add_option("--records", shadow_records, "jsonl record files")->required();
    shadow->add_option("--manifest", shadow_manifest, "manifest path")->required();
    shadow->add_option("--out", shadow_out, "output csv");

    // payload
    double payload_factor = 4.0;
    std::uint64_t payload_seed = 7;
    std::string payload_out = "out/payload.csv";
    auto* payload = app.add_subcommand("payload", "long-history prompt payload diagnostic");
    payload->add_option("--factor", payload_factor, "history length factor");
    payload->add_option("--seed", payload_seed, "manifest seed");
    payload->add_option("--out", payload_out, "output csv");

    // selftest
    std::uint64_t selftest_seed = 7;
    auto* self = app.add_subcommand("selftest", "generation and invariant checks");
    self->add_option("--seed", selftest_seed, "manifest seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            cbea::Manifest m = cbea::generate_manifest(gen_seed);
            if (gen_factor > 1.0)
                for (auto& f : m.fixtures) f = cbea::extend_history(f, gen_factor);
            spit(gen_out, cbea::serialize_manifest(m));
            std::cout << "wrote " << gen_out << " (" << m.fixtures.size() << " fixtures)\n";
            return 0;
        }

        if (*run) {
            cbea::RunConfig cfg = load_config(run_config_path);
            if (!run_manifest.empty()) cfg.manifest_path = run_manifest;
            if (!run_variants.empty()) cfg.variants = run_variants;
            if (!run_out_dir.empty()) cfg.output_dir = run_out_dir;
            if (run_seed) cfg.seed = run_seed;
            if (run_budget) cfg.budget_total = run_budget;
            if (run_parallelism >= 0) cfg.parallelism = run_parallelism;
            if (cfg.variants.empty())
                for (auto v : cbea::all_variants()) cfg.variants.push_back(cbea::to_string(v));

            const cbea::Manifest manifest = load_manifest(cfg.manifest_path);
            bool privacy_ok = true;
            for (const auto& name : cfg.variants) {
                const auto variant = cbea::variant_from(name);
                if (!variant) throw cbea::Error("unknown variant: " + name);
                const auto records = cbea::run_variant(manifest, *variant, cfg);
                for (const auto& r : records) privacy_ok = privacy_ok && r.privacy_ok;
                const std::string path = cfg.output_dir + "/" + name + ".jsonl";
                std::filesystem::create_directories(cfg.output_dir);
                cbea::write_records(path, records);
                std::cout << "wrote " << path << "\n";
            }
            if (!privacy_ok) {
                std::cerr << "privacy boundary violated in a runtime prompt\n";
                return 2;
            }
            return 0;
        }

        if (*abl) {
            cbea::RunConfig cfg = load_config(abl_config_path);
            if (!abl_manifest.empty()) cfg.manifest_path = abl_manifest;
            if (!abl_out_dir.empty()) cfg.output_dir = abl_out_dir;
            if (abl_names.empty())
                abl_names = {"no_validator", "no_repair", "no_coverage_tail"};
            const cbea::Manifest manifest = load_manifest(cfg.manifest_path);
            for (const auto& name : abl_names) {
                const auto kind = cbea::ablation_from(name);
                if (!kind) throw cbea::Error("unknown ablation: " + name);
                const auto records = cbea::run_ablation(manifest, *kind, cfg);
                const std::string path = cfg.output_dir + "/" + name + ".jsonl";
                std::filesystem::create_directories(cfg.output_dir);
                cbea::write_records(path, records);
                std::cout << "wrote " << path << "\n";
            }
            return 0;
        }

        if (*score) {
            const cbea::Manifest manifest = load_manifest(score_manifest);
            std::vector<cbea::RunRecord> all;
            for (const auto& path : score_records) {
                auto part = cbea::read_records(path);
                all.insert(all.end(), part.begin(), part.end());
            }
            const auto grouped = group_records(all);
            cbea::RunConfig cfg;
            cbea::write_reports(grouped, manifest, cfg, score_out);
            std::cout << "wrote report tables under " << score_out << "\n";
            return 0;
        }

        if (*boot) {
            std::ostringstream out;
            if (!boot_winners.empty()) {
                const auto table = cbea::parse_winner_csv(slurp(boot_winners));
                const auto rep =
                    cbea::case_cluster_bootstrap(table, boot_resamples, boot_alpha, boot_seed);
                out << "statistic,observed,ci_low,ci_high\n";
                for (auto w : {cbea::Winner::cbea, cbea::Winner::raw, cbea::Winner::validator,
                               cbea::Winner::tie}) {
                    const auto& iv = rep.shares.at(w);
                    out << cbea::to_string(w) << "_share," << iv.mean << "," << iv.ci_low
                        << "," << iv.ci_high << "\n";
                }
                out << "cbea_raw_margin," << rep.margin.mean << "," << rep.margin.ci_low
                    << "," << rep.margin.ci_high << "\n";
                out << "judge_exact_agreement," << cbea::winner_exact_agreement(table)
                    << ",,\n";
            }
            if (!boot_deltas.empty()) {
                const auto samples = cbea::parse_delta_csv(slurp(boot_deltas));
                const auto iv =
                    cbea::paired_bootstrap(samples, boot_resamples, boot_alpha, boot_seed);
                out << "paired_delta," << iv.mean << "," << iv.ci_low << "," << iv.ci_high
                    << "\n";
            }
            if (boot_winners.empty() && boot_deltas.empty())
                throw cbea::Error("bootstrap needs --winners and/or --deltas");
            spit(boot_out, out.str());
            std::cout << out.str();
            return 0;
        }

        if (*shadow) {
            const cbea::Manifest manifest = load_manifest(shadow_manifest);
            std::vector<cbea::RunRecord> all;
            for (const auto& path : shadow_records) {
                auto part = cbea::read_records(path);
                all.insert(all.end(), part.begin(), part.end());
            }
            const auto table = cbea::shadow_table(group_records(all), manifest);
            spit(shadow_out, table);
            std::cout << table;
            return 0;
        }

        if (*payload) {
            cbea::Manifest manifest = cbea::generate_manifest(payload_seed);
            cbea::RunConfig cfg;
            cfg.history_factor = payload_factor;
            std::map<std::string, std::vector<cbea::RunRecord>> grouped;
            for (auto v : {cbea::Variant::raw, cbea::Variant::cbea_lcv})
                grouped[cbea::to_string(v)] = cbea::run_variant(manifest, v, cfg);
            const auto table = cbea::payload_table(grouped);
            spit(payload_out, table);
            std::cout << table;
            return 0;
        }

        if (*self) {
            const auto res = cbea::selftest(selftest_seed);
            for (const auto& f : res.failures) std::cerr << "FAIL " << f << "\n";
            std::cout << (res.ok ? "selftest ok\n" : "selftest failed\n");
            return res.ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
