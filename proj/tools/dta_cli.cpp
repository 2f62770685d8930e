// Command-line driver for the DTA experiments, talking to the shared library
// through its C API only.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dta/dta.h"
#include "json.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
    std::string config;
    std::string out_dir = "out";
    std::optional<uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config, "JSON config file");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--trials", o.trials, "number of trials");
    cmd->add_option("--threads", o.threads, "worker threads");
}

[[noreturn]] void die(const std::string& where) {
    std::cerr << where << ": " << dta_last_error() << "\n";
    std::exit(1);
}

int run_kind(const char* kind, const CommonOpts& o) {
    dta_experiment* e = nullptr;
    if (!o.config.empty()) {
        if (dta_experiment_load(o.config.c_str(), &e) != DTA_OK) die("load config");
    } else {
        if (dta_experiment_create_default(kind, &e) != DTA_OK) die("create experiment");
    }
    if (o.seed && dta_experiment_set_seed(e, *o.seed) != DTA_OK) die("set seed");
    if (o.trials && dta_experiment_set_trials(e, *o.trials) != DTA_OK) die("set trials");
    if (o.threads && dta_experiment_set_threads(e, *o.threads) != DTA_OK) die("set threads");

    char* summary = nullptr;
    if (dta_experiment_run(e, o.out_dir.c_str(), &summary) != DTA_OK) {
        dta_experiment_free(e);
        die("run experiment");
    }
    std::cout << summary;
    dta_string_free(summary);
    dta_experiment_free(e);
    std::cerr << "wrote " << o.out_dir << "/records.csv, curves.csv, summary.json\n";
    return 0;
}

// Ad-hoc single training run described by a small JSON config:
//   task: "encoding" | "decoding"
//   n_channels, duration, nu_in, patterns  (generated Poisson inputs)
//   nu_out (encoding) or labels [ints] (decoding)
//   kernel, max_epochs, seed
int run_train(const CommonOpts& o) {
    json j;
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) {
            std::cerr << "cannot open " << o.config << "\n";
            return 1;
        }
        in >> j;
    } else {
        j = json::object();
    }
    const std::string task = j.value("task", std::string("encoding"));
    const int n_channels = j.value("n_channels", 100);
    const double duration = j.value("duration", 200.0);
    const double nu_in = j.value("nu_in", 0.005);
    const double nu_out = j.value("nu_out", 0.005);
    const int n_patterns = j.value("patterns", 1);
    const int max_epochs = j.value("max_epochs", 100);
    const uint64_t seed = o.seed.value_or(j.value("seed", 1));
    const std::string kernel = j.value("kernel", std::string("psp"));

    dta_neuron* neuron = nullptr;
    if (dta_neuron_create(n_channels, j.value("threshold", 1.0), j.value("tau_m", 20.0),
                          j.value("tau_s", 5.0), &neuron) != DTA_OK)
        die("neuron");

    std::vector<dta_pattern*> patterns;
    for (int i = 0; i < n_patterns; ++i) {
        dta_pattern* p = nullptr;
        if (dta_pattern_poisson(n_channels, duration, nu_in, seed * 1000003 + i, &p) != DTA_OK)
            die("pattern");
        patterns.push_back(p);
    }

    dta_train_config* cfg = nullptr;
    dta_train_config_create(&cfg);
    dta_train_config_set_max_epochs(cfg, max_epochs);
    dta_kernel kk = kernel == "stdp" ? DTA_KERNEL_STDP
                    : kernel == "filt" ? DTA_KERNEL_FILT
                                       : DTA_KERNEL_PSP;
    dta_train_config_set_kernel(cfg, kk);

    dta_train_result* result = nullptr;
    if (task == "encoding") {
        // desired trains drawn as Poisson with rate nu_out
        std::vector<std::vector<double>> desired(n_patterns);
        std::vector<const double*> dptr(n_patterns);
        std::vector<size_t> dlen(n_patterns);
        for (int i = 0; i < n_patterns; ++i) {
            double* buf = nullptr;
            size_t len = 0;
            if (dta_poisson_train(duration, nu_out, seed * 7000003 + i, &buf, &len) != DTA_OK)
                die("desired train");
            desired[i].assign(buf, buf + len);
            dta_buffer_free(buf);
            dptr[i] = desired[i].data();
            dlen[i] = desired[i].size();
        }
        if (dta_train_encoding(neuron, patterns.data(), patterns.size(), dptr.data(), dlen.data(),
                               cfg, seed, &result) != DTA_OK)
            die("train");
    } else if (task == "decoding") {
        std::vector<int> labels;
        if (j.contains("labels"))
            labels = j.at("labels").get<std::vector<int>>();
        else
            for (int i = 0; i < n_patterns; ++i) labels.push_back(1 + i % 5);
        if (labels.size() != static_cast<size_t>(n_patterns)) {
            std::cerr << "labels length must equal patterns\n";
            return 1;
        }
        if (dta_train_decoding(neuron, patterns.data(), patterns.size(), labels.data(), cfg, seed,
                               &result) != DTA_OK)
            die("train");
    } else {
        std::cerr << "unknown task: " << task << "\n";
        return 1;
    }

    json out;
    out["task"] = task;
    out["converged"] = dta_train_result_converged(result) != 0;
    out["epochs_used"] = dta_train_result_epochs(result);
    out["fallbacks"] = dta_train_result_fallbacks(result);
    size_t ne = dta_train_result_n_epoch_accuracies(result);
    json curve = json::array();
    for (size_t i = 0; i < ne; ++i) curve.push_back(dta_train_result_accuracy(result, i));
    out["accuracy_per_epoch"] = curve;
    std::cout << out.dump(2) << "\n";

    if (!o.out_dir.empty()) {
        std::filesystem::create_directories(o.out_dir);
        std::ofstream f(std::filesystem::path(o.out_dir) / "curves.csv", std::ios::binary);
        f << "series,trial,load,epoch,value\n";
        for (size_t i = 0; i < ne; ++i)
            f << "accuracy,0," << n_patterns << ',' << (i + 1) << ','
              << dta_train_result_accuracy(result, i) << "\n";
    }

    dta_train_result_free(result);
    dta_train_config_free(cfg);
    for (auto* p : patterns) dta_pattern_free(p);
    dta_neuron_free(neuron);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DTA spiking-neuron learning benchmarks"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* kind;
        const char* help;
    };
    const Sub subs[] = {
        {"encode-capacity", "encode-capacity-short", "Encoding-task memory capacity"},
        {"decode-capacity", "decode-capacity", "Decoding-task memory capacity"},
        {"calpha", "calpha", "class-count capacity (one pattern per class)"},
        {"interference", "interference", "toy two-spike interference map"},
        {"iris", "iris", "IRIS population-coded WTA classification"},
        {"vrd-refit", "vrd-refit", "refit the vRD convergence threshold"},
    };

    std::vector<CommonOpts> opts(std::size(subs) + 1);
    std::vector<std::pair<const char*, int>> chosen;
    for (size_t i = 0; i < std::size(subs); ++i) {
        CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        add_common(cmd, opts[i]);
        cmd->callback([&chosen, &subs, i] { chosen.emplace_back(subs[i].kind, static_cast<int>(i)); });
    }
    CLI::App* train = app.add_subcommand("train", "ad-hoc single training run");
    add_common(train, opts[std::size(subs)]);
    train->callback([&chosen] { chosen.emplace_back("train", -1); });

    CLI11_PARSE(app, argc, argv);

    for (auto& [kind, idx] : chosen) {
        if (idx < 0) return run_train(opts[std::size(subs)]);
        return run_kind(kind, opts[idx]);
    }
    return 0;
}
