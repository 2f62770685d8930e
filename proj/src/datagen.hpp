#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "common.hpp"
#include "rng.hpp"

namespace dta {

struct PoissonSpec {
    int n_channels = 1;
    double duration = 0.0;  // ms
    double rate = 0.0;      // spikes/ms
    uint64_t seed = 0;
};

// Homogeneous Poisson train: exponential inter-arrival sampling until T.
SpikeTrain poisson_train(double duration, double rate, Rng& rng);

// N independent trains drawn from one seeded stream.
InputPattern poisson_pattern(const PoissonSpec& spec);

// Gaussian receptive-field population code. Each feature is covered by M
// channels with centers spread slightly beyond [min, max]; a feature value v
// maps to one spike per channel at t = T - G(v, mu_j, sigma) * T.
struct PopulationSpec {
    int fields_per_feature = 10;  // M
    double beta = 1.5;
    double window = 10.0;  // encoding window T, ms
    std::vector<double> feature_min, feature_max;

    void validate() const;
    double center(size_t feature, int j) const;  // j in [1, M]
    double sigma(size_t feature) const;
};

// Per-feature ranges measured on the training split only.
PopulationSpec fit_population_spec(const std::vector<std::vector<double>>& rows,
                                   int fields_per_feature = 10, double beta = 1.5,
                                   double window = 10.0);

InputPattern population_encode(const std::vector<double>& features, const PopulationSpec& spec);

// Latency code for activations in [0, 1]: zero activation emits no spike,
// otherwise the spike lands at T - T * A.
std::vector<std::optional<double>> latency_encode(const std::vector<double>& activations,
                                                  double window);

struct Dataset {
    std::vector<std::vector<double>> features;
    std::vector<int> labels;                // indices by first appearance
    std::vector<std::string> label_names;
};

// CSV with a header row, four float columns and a string label column.
Dataset load_iris(const std::string& path);

struct Split {
    std::vector<int> train;  // row indices
    std::vector<int> test;
};

// Stratified split: per class, a seeded shuffle and round(fraction * n) rows
// to the training side.
Split split_dataset(const Dataset& ds, double fraction, Rng& rng);

}  // namespace dta
