#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "baselines.hpp"
#include "datagen.hpp"
#include "learning.hpp"

namespace dta {

enum class ExperimentKind {
    EncodeCapacityShort,
    EncodeCapacityLong,
    DecodeCapacity,
    CAlpha,
    InterferenceMap,
    Iris,
    VrdRefit,
};

ExperimentKind experiment_kind_from_string(const std::string& s);
std::string to_string(ExperimentKind k);

enum class Method { Dta, Psd, Filt, Resume, FirstError };

Method method_from_string(const std::string& s);
std::string to_string(Method m);

struct PatternSpec {
    int n_channels = 100;
    double duration = 400.0;
    double nu_in = 0.005;
    double nu_out = 0.005;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::EncodeCapacityShort;
    NeuronParams neuron;
    Method method = Method::Dta;
    double eta = 0.01;  // baseline learning rate
    DtaConfig dta;
    PatternSpec pattern;
    int trials = 10;
    int max_epochs = 500;
    uint64_t seed = 1;
    double failure_fraction = 0.5;
    int threads = 1;
    int max_loads = 64;  // safety cap on load growth

    // decode-capacity / calpha
    int n_classes = 5;

    // interference map
    std::vector<double> delta_t_values;
    int trace_epochs = 1000;

    // iris
    struct {
        std::string path = "data/iris.csv";
        int fields_per_feature = 10;
        double beta = 1.5;
        double window = 10.0;
        int target_spikes = 10;
        double train_fraction = 0.5;
    } iris;

    // vrd refit
    struct {
        int n_templates = 600;
        double t_min = 100.0, t_max = 10000.0;
        double sigma_min = 1.0, sigma_max = 10.0;
        double rate = 0.004;  // template generation rate, spikes/ms
    } refit;

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig load(const std::string& path);
    std::string to_json_text() const;
};

struct TrialRecord {
    std::string experiment;
    int trial = 0;
    uint64_t seed = 0;
    double load = 0.0;  // pattern count, duration, class count or delta_t
    bool converged = false;
    int epochs_used = 0;
    double accuracy = 0.0;
    int fallback_count = 0;
    double wall_ms = 0.0;  // not emitted in records.csv (reruns must be byte-identical)
};

// one generic per-epoch curve point
struct CurvePoint {
    std::string series;
    int trial = 0;
    double load = 0.0;
    int epoch = 0;
    double value = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<TrialRecord> records;
    std::vector<CurvePoint> curves;
    std::map<std::string, double> summary;          // scalar aggregates
    std::map<std::string, std::string> summary_str; // non-numeric extras
};

// Eq.-11 estimate of the maximal learnable input duration; +infinity when the
// denominator underflows.
double theoretical_capacity(double n_channels, double nu_out, double tau_m, double tau_s);

enum class EncodeMode { ShortPatterns, LongPattern };

ExperimentResult run_encode_capacity(const ExperimentConfig& cfg, EncodeMode mode);
ExperimentResult run_decode_capacity(const ExperimentConfig& cfg);
ExperimentResult run_calpha(const ExperimentConfig& cfg);
ExperimentResult run_interference_map(const ExperimentConfig& cfg);
ExperimentResult run_iris(const ExperimentConfig& cfg);
ExperimentResult run_vrd_refit(const ExperimentConfig& cfg);

// dispatch on cfg.kind
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// records.csv, summary.json and curves.csv under out_dir
void write_outputs(const ExperimentResult& result, const std::string& out_dir);

std::string records_to_csv(const std::vector<TrialRecord>& records);
std::string curves_to_csv(const std::vector<CurvePoint>& curves);
std::string summary_to_json(const ExperimentResult& result);

}  // namespace dta
