#pragma once

#include <optional>

#include "common.hpp"

namespace dta {

// Simplified SRM neuron. The membrane potential is a weighted sum of PSP
// kernels over input spikes minus a reset kernel per past output spike; a
// spike is emitted when the potential crosses the threshold from below.
struct NeuronParams {
    int n_channels = 1;
    double threshold = 1.0;   // potential units
    double tau_m = 20.0;      // membrane time constant, ms
    double tau_s = 5.0;       // synaptic time constant, ms
    double v_norm = 0.0;      // derived; normalises the PSP kernel peak to 1
    double dt = 0.1;          // simulation grid step, ms
    double fire_tol = 1e-9;   // crossing tolerance, potential units
    double refine_tol = 1e-4; // spike-time refinement tolerance, ms

    NeuronParams() { recompute_norm(); }
    NeuronParams(int n, double theta, double tm, double ts)
        : n_channels(n), threshold(theta), tau_m(tm), tau_s(ts) {
        recompute_norm();
        fire_tol = 1e-9 * threshold;
    }

    // v_norm = xi^(xi/(xi-1)) / (xi-1) with xi = tau_m/tau_s.
    // Call after any change to the time constants.
    void recompute_norm() {
        if (!(tau_m > tau_s) || !(tau_s > 0.0))
            throw Error("neuron time constants require tau_m > tau_s > 0");
        double xi = tau_m / tau_s;
        v_norm = std::pow(xi, xi / (xi - 1.0)) / (xi - 1.0);
    }
};

enum class KernelKind { Stdp, Psp, Filt };

// PSP kernel (peak value 1, zero for t < 0)
double psp_kernel(const NeuronParams& p, double t);

// time of the PSP kernel peak: (tau_m tau_s / (tau_m - tau_s)) ln(tau_m/tau_s)
double psp_peak_time(const NeuronParams& p);

// reset kernel exp(-t/tau_m) for t >= 0, else 0
double reset_kernel(const NeuronParams& p, double t);

// learning window: Stdp = reset kernel shape; Psp = psp_kernel; Filt has an
// anti-causal branch and is continuous at t = 0
double learning_kernel(KernelKind kind, const NeuronParams& p, double t);

// per-channel sums of a kernel over the channel's input spikes at time t
std::vector<double> psp_channel_sums(const NeuronParams& p, const InputPattern& x, double t);
std::vector<double> kernel_channel_sums(KernelKind kind, const NeuronParams& p,
                                        const InputPattern& x, double t);

// reset-free membrane potential V0(t) = sum_i w_i sum_{t^i} psp(t - t^i),
// evaluated exactly at arbitrary t
double membrane_v0(const NeuronParams& p, const WeightVector& w, const InputPattern& x, double t);

// dynamic threshold theta(t) = theta (1 + sum_{t^d in y} gamma(t - t^d));
// pointwise, so the reset of a spike exactly at t is included (gamma(0) = 1)
double dynamic_theta(const NeuronParams& p, const SpikeTrain& y, double t);

// Threshold crossings on the grid {0, dt, ..., T}, each refined by bisection
// on the analytic potential. Resets take effect immediately after a spike;
// at most one spike per grid interval.
SpikeTrain simulate(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                    std::optional<double> threshold_override = std::nullopt);

}  // namespace dta
