// Exercises the shared-library C API end to end: handles, error codes,
// training, metrics and the experiment runner. No core headers included.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "dta/dta.h"

static int failures = 0;

#define EXPECT(cond)                                                      \
    do {                                                                  \
        if (!(cond)) {                                                    \
            std::printf("FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond);   \
            ++failures;                                                   \
        }                                                                 \
    } while (0)

static void test_neuron_and_simulate() {
    dta_neuron* n = nullptr;
    EXPECT(dta_neuron_create(2, 1.0, 20.0, 5.0, &n) == DTA_OK);
    EXPECT(dta_neuron_n_channels(n) == 2);

    // invalid argument paths return codes and a message
    EXPECT(dta_neuron_create(0, 1.0, 20.0, 5.0, &n) == DTA_ERR_INVALID_ARGUMENT);
    EXPECT(std::strlen(dta_last_error()) > 0);
    dta_neuron* bad = nullptr;
    EXPECT(dta_neuron_create(2, 1.0, 5.0, 20.0, &bad) == DTA_ERR_INVALID_ARGUMENT);  // tau order

    double w[2] = {1.5, 0.0};
    EXPECT(dta_neuron_set_weights(n, w, 2) == DTA_OK);
    EXPECT(dta_neuron_set_weights(n, w, 1) == DTA_ERR_INVALID_ARGUMENT);

    dta_pattern* p = nullptr;
    EXPECT(dta_pattern_create(2, 60.0, &p) == DTA_OK);
    double ch0[] = {5.0};
    EXPECT(dta_pattern_set_channel(p, 0, ch0, 1) == DTA_OK);
    double decreasing[] = {5.0, 4.0};
    EXPECT(dta_pattern_set_channel(p, 1, decreasing, 2) == DTA_ERR_INVALID_ARGUMENT);
    double outside[] = {70.0};
    EXPECT(dta_pattern_set_channel(p, 1, outside, 1) == DTA_ERR_INVALID_ARGUMENT);

    double* spikes = nullptr;
    size_t count = 0;
    EXPECT(dta_simulate(n, p, nullptr, &spikes, &count) == DTA_OK);
    EXPECT(count == 1);
    EXPECT(spikes[0] > 5.0);
    dta_buffer_free(spikes);

    // a raised threshold silences the neuron
    double high = 2.0;
    EXPECT(dta_simulate(n, p, &high, &spikes, &count) == DTA_OK);
    EXPECT(count == 0);
    dta_buffer_free(spikes);

    dta_pattern_free(p);
    dta_neuron_free(n);
}

static void test_training() {
    // two-channel toy: desired spikes 8 ms after each input
    dta_neuron* n = nullptr;
    EXPECT(dta_neuron_create(2, 1.0, 20.0, 5.0, &n) == DTA_OK);
    dta_pattern* p = nullptr;
    EXPECT(dta_pattern_create(2, 83.0, &p) == DTA_OK);
    double in1[] = {5.0}, in2[] = {45.0};
    EXPECT(dta_pattern_set_channel(p, 0, in1, 1) == DTA_OK);
    EXPECT(dta_pattern_set_channel(p, 1, in2, 1) == DTA_OK);
    double desired[] = {13.0, 53.0};

    dta_train_config* cfg = nullptr;
    EXPECT(dta_train_config_create(&cfg) == DTA_OK);
    EXPECT(dta_train_config_set_kernel(cfg, DTA_KERNEL_PSP) == DTA_OK);
    EXPECT(dta_train_config_set_max_epochs(cfg, 50) == DTA_OK);
    EXPECT(dta_train_config_set_eta_bounds(cfg, 1e-4, 1.0, -1.0, -1e-4) == DTA_OK);
    EXPECT(dta_train_config_set_eta_bounds(cfg, -1.0, 1.0, -1.0, -1e-4) ==
           DTA_ERR_INVALID_ARGUMENT);  // lb_d must stay positive

    const dta_pattern* patterns[] = {p};
    const double* dptr[] = {desired};
    size_t dlen[] = {2};
    dta_train_result* result = nullptr;
    EXPECT(dta_train_encoding(n, patterns, 1, dptr, dlen, cfg, 42, &result) == DTA_OK);
    EXPECT(dta_train_result_converged(result) == 1);
    EXPECT(dta_train_result_epochs(result) >= 1);
    size_t ne = dta_train_result_n_epoch_accuracies(result);
    EXPECT(ne >= 1);
    EXPECT(dta_train_result_accuracy(result, ne - 1) == 1.0);
    dta_train_result_free(result);

    // trained weights reproduce the desired spikes
    double* spikes = nullptr;
    size_t count = 0;
    EXPECT(dta_simulate(n, p, nullptr, &spikes, &count) == DTA_OK);
    EXPECT(count == 2);
    if (count == 2) {
        EXPECT(std::fabs(spikes[0] - 13.0) < 1.0);
        EXPECT(std::fabs(spikes[1] - 53.0) < 1.0);
    }
    dta_buffer_free(spikes);

    // decoding: ask the same neuron for exactly one spike
    int labels[] = {1};
    EXPECT(dta_train_decoding(n, patterns, 1, labels, cfg, 43, &result) == DTA_OK);
    EXPECT(dta_train_result_converged(result) == 1);
    dta_train_result_free(result);
    EXPECT(dta_simulate(n, p, nullptr, &spikes, &count) == DTA_OK);
    EXPECT(count == 1);
    dta_buffer_free(spikes);

    dta_train_config_free(cfg);
    dta_pattern_free(p);
    dta_neuron_free(n);
}

static void test_metrics_and_poisson() {
    double a[] = {0.0};
    EXPECT(std::fabs(dta_vrd(a, 1, nullptr, 0, 100.0) - std::sqrt(0.5)) < 1e-12);
    EXPECT(std::fabs(dta_vrd_star(1000.0, 1.0) - 0.18) < 1e-15);
    double cap = dta_theoretical_capacity(500, 0.005, 20, 5);
    EXPECT(cap > 17100 && cap < 17400);

    double* t = nullptr;
    size_t len = 0;
    EXPECT(dta_poisson_train(400.0, 0.005, 7, &t, &len) == DTA_OK);
    for (size_t i = 1; i < len; ++i) EXPECT(t[i] > t[i - 1]);
    dta_buffer_free(t);

    dta_pattern* p = nullptr;
    EXPECT(dta_pattern_poisson(10, 100.0, 0.01, 3, &p) == DTA_OK);
    dta_pattern_free(p);
}

static void test_experiments() {
    dta_experiment* e = nullptr;
    EXPECT(dta_experiment_create_from_json(R"({"nonsense": true})", &e) == DTA_ERR_PARSE);

    const char* cfg_json = R"({
      "kind": "interference",
      "delta_t_values": [20.0, 60.0],
      "trace_epochs": 30,
      "seed": 9
    })";
    EXPECT(dta_experiment_create_from_json(cfg_json, &e) == DTA_OK);
    EXPECT(dta_experiment_set_threads(e, 2) == DTA_OK);

    char* echoed = nullptr;
    EXPECT(dta_experiment_config_json(e, &echoed) == DTA_OK);
    EXPECT(std::string(echoed).find("interference") != std::string::npos);
    dta_string_free(echoed);

    char* summary = nullptr;
    EXPECT(dta_experiment_run(e, "/tmp/dta_capi_out", &summary) == DTA_OK);
    EXPECT(summary != nullptr);
    if (summary) {
        std::string s(summary);
        EXPECT(s.find("\"kind\"") != std::string::npos);
        EXPECT(s.find("dta_converged_cells") != std::string::npos);
    }
    dta_string_free(summary);
    dta_experiment_free(e);

    // default construction + overrides
    EXPECT(dta_experiment_create_default("vrd-refit", &e) == DTA_OK);
    EXPECT(dta_experiment_set_seed(e, 123) == DTA_OK);
    EXPECT(dta_experiment_set_trials(e, 2) == DTA_OK);
    dta_experiment_free(e);
    EXPECT(dta_experiment_create_default("no-such-kind", &e) == DTA_ERR_PARSE);
}

int main() {
    std::printf("dta C API %s\n", dta_version());
    test_neuron_and_simulate();
    test_training();
    test_metrics_and_poisson();
    test_experiments();
    if (failures) {
        std::printf("%d failure(s)\n", failures);
        return 1;
    }
    std::printf("all C API checks passed\n");
    return 0;
}
