#pragma once

#include "common.hpp"

namespace dta {

struct VrdConfig {
    double tau_q = 100.0;  // filter time constant, ms
};

// van Rossum distance between two spike trains, evaluated in closed form.
// With the causal filter exp(-t/tau_q), pairwise inner products reduce to
// (tau_q/2) exp(-|t1-t2|/tau_q), so no numeric integration is needed.
double vrd(const SpikeTrain& a, const SpikeTrain& b, const VrdConfig& cfg = {});

// Convergence threshold vRD*(T, dt) = 0.08 dt + 0.0001 T.
double vrd_star(double duration, double delta_t);

// Fraction of responses with vrd(response, desired) < vrd_star(T, 1).
// Empty input counts as vacuously converged (1.0).
double encoding_accuracy(const std::vector<SpikeTrain>& responses,
                         const std::vector<SpikeTrain>& desired,
                         const std::vector<double>& durations, const VrdConfig& cfg = {});

// Fraction of exact spike-count matches.
double decoding_accuracy(const std::vector<int>& counts, const std::vector<int>& labels);

}  // namespace dta
