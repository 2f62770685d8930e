#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bench.hpp"
#include "doctest.h"

using namespace dta;

TEST_CASE("theoretical capacity: paper parameters, linearity in N, vanishing rate") {
    double t_alpha = theoretical_capacity(500, 0.005, 20, 5);
    CHECK(t_alpha > 17100.0);
    CHECK(t_alpha < 17400.0);
    CHECK(t_alpha == doctest::Approx(17244.08).epsilon(1e-4));
    CHECK(theoretical_capacity(1000, 0.005, 20, 5) == doctest::Approx(2.0 * t_alpha).epsilon(1e-12));
    CHECK(std::isinf(theoretical_capacity(500, 1e-300, 20, 5)));
}

TEST_CASE("config json round trip and unknown-key rejection") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::DecodeCapacity;
    cfg.trials = 3;
    cfg.seed = 77;
    cfg.pattern.n_channels = 123;
    std::string text = cfg.to_json_text();
    ExperimentConfig back = ExperimentConfig::from_json_text(text);
    CHECK(back.kind == ExperimentKind::DecodeCapacity);
    CHECK(back.trials == 3);
    CHECK(back.seed == 77);
    CHECK(back.pattern.n_channels == 123);

    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"bogus_key": 1})"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"neuron": {"oops": 2}})"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("not json"), ParseError);
}

TEST_CASE("records csv shape and quoting") {
    std::vector<TrialRecord> recs;
    recs.push_back({"exp,with\"quote", 1, 42, 2.5, true, 7, 0.99, 3, 12.0});
    std::string csv = records_to_csv(recs);
    CHECK(csv.find("experiment,trial,seed,load,converged,epochs_used,accuracy,fallback_count\n") == 0);
    CHECK(csv.find("\"exp,with\"\"quote\"") != std::string::npos);
    // wall time never lands in records.csv (reruns must be byte-identical)
    CHECK(csv.find("12") == std::string::npos);
}

TEST_CASE("single short pattern is deep in capacity") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::EncodeCapacityShort;
    cfg.trials = 10;
    cfg.max_epochs = 200;
    cfg.max_loads = 1;
    cfg.seed = 2027;
    cfg.pattern = {100, 400.0, 0.005, 0.005};
    ExperimentResult r = run_encode_capacity(cfg, EncodeMode::ShortPatterns);
    REQUIRE(r.records.size() == 10);
    int converged = 0;
    for (const auto& rec : r.records) converged += rec.converged ? 1 : 0;
    CHECK(converged >= 9);
}

TEST_CASE("encode capacity bookkeeping: records = trials x loads visited") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::EncodeCapacityShort;
    cfg.trials = 4;
    cfg.max_epochs = 30;
    cfg.max_loads = 3;
    cfg.seed = 11;
    cfg.pattern = {60, 200.0, 0.005, 0.005};
    ExperimentResult r = run_encode_capacity(cfg, EncodeMode::ShortPatterns);
    CHECK(r.records.size() % cfg.trials == 0);
    size_t loads_visited = r.records.size() / cfg.trials;
    CHECK(loads_visited >= 1);
    CHECK(loads_visited <= 3);
    // rows ordered by (load, trial)
    for (size_t i = 1; i < r.records.size(); ++i) {
        const auto& a = r.records[i - 1];
        const auto& b = r.records[i];
        CHECK((a.load < b.load || (a.load == b.load && a.trial < b.trial)));
    }
}

TEST_CASE("decode capacity: one pattern per class converges everywhere at desk scale") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::DecodeCapacity;
    cfg.trials = 3;
    cfg.max_epochs = 100;
    cfg.max_loads = 1;
    cfg.seed = 5;
    cfg.n_classes = 5;
    cfg.pattern = {500, 50.0, 0.005, 0.005};
    ExperimentResult r = run_decode_capacity(cfg);
    REQUIRE(r.records.size() == 3);
    for (const auto& rec : r.records) {
        CHECK(rec.converged);
        CHECK(rec.load == doctest::Approx(5));
    }
    CHECK(r.summary.at("p_alpha") >= 5.0);
}

TEST_CASE("calpha: single class converges; emits nu_in_tau") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::CAlpha;
    cfg.trials = 3;
    cfg.max_epochs = 100;
    cfg.max_loads = 1;
    cfg.seed = 8;
    cfg.pattern = {200, 50.0, 0.005, 0.005};
    ExperimentResult r = run_calpha(cfg);
    REQUIRE(r.records.size() == 3);
    for (const auto& rec : r.records) CHECK(rec.converged);
    CHECK(r.summary.at("c_alpha") >= 1.0);
    CHECK(r.summary.at("nu_in_tau") == doctest::Approx(0.005 * 10.0));
}

TEST_CASE("interference map grid dimensions") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::InterferenceMap;
    cfg.delta_t_values = {20.0, 60.0};
    cfg.trace_epochs = 40;
    cfg.threads = 2;
    ExperimentResult r = run_interference_map(cfg);
    // per delta_t: one dta + one psd record
    CHECK(r.records.size() == 4);
    // per delta_t and method: w1 and w2 series, trace_epochs points each
    CHECK(r.curves.size() == 2 * 2 * 2 * 40);
    CHECK(r.summary.at("cells") == doctest::Approx(2.0));
}

TEST_CASE("vrd refit: coefficients near the published fit at desk scale") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::VrdRefit;
    cfg.seed = 99;
    cfg.refit.n_templates = 400;
    ExperimentResult r = run_vrd_refit(cfg);
    double c1 = r.summary.at("c1_delta_t");
    double c2 = r.summary.at("c2_duration");
    CHECK(c1 > 0.04);
    CHECK(c1 < 0.12);
    CHECK(c2 > 0.00005);
    CHECK(c2 < 0.00015);
    CHECK(r.summary.at("rms_residual") < 0.5);
    CHECK(static_cast<double>(r.records.size()) == r.summary.at("rows"));
}

TEST_CASE("experiment outputs written and byte-stable across thread counts") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::InterferenceMap;
    cfg.delta_t_values = {20.0, 60.0};
    cfg.trace_epochs = 25;
    cfg.seed = 1234;

    namespace fs = std::filesystem;
    auto run_to = [&](const std::string& dir, int threads) {
        ExperimentConfig c = cfg;
        c.threads = threads;
        write_outputs(run_experiment(c), dir);
        std::ifstream f(fs::path(dir) / "records.csv", std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    std::string a = run_to("/tmp/dta_bench_t1", 1);
    std::string b = run_to("/tmp/dta_bench_t2", 2);
    CHECK(a == b);
    CHECK(fs::exists("/tmp/dta_bench_t1/summary.json"));
    CHECK(fs::exists("/tmp/dta_bench_t1/curves.csv"));
    // row count in the csv matches the record count plus header
    size_t lines = static_cast<size_t>(std::count(a.begin(), a.end(), '\n'));
    CHECK(lines == run_experiment(cfg).records.size() + 1);
}
