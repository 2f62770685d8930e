#pragma once

#include "learning.hpp"
#include "neuron.hpp"

namespace dta {

// Comparison rules sharing the Widrow-Hoff style update: LTP at every desired
// time, LTD at every actual output time, no matching or exclusion.
// PSD = Psp kernel, FILT = Filt kernel, ReSuMe = Stdp kernel.
WeightVector wh_step(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                     const SpikeTrain& y, KernelKind kernel, double eta);

// First-error rule: act only on the temporally earliest violation, either a
// desired time with no matched spike (LTP) or an unmatched actual spike (LTD).
WeightVector first_error_step(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                              const SpikeTrain& y, KernelKind kernel, double eta,
                              double match_tol = 1.0);

// Two input channels with one spike each and a desired output shortly after
// each input; the unique exact solution is obtainable in closed form.
struct ToyProblem {
    double input1 = 0.0, input2 = 0.0;
    double desired1 = 0.0, desired2 = 0.0;
    NeuronParams params;
    double duration = 0.0;

    // Desired spikes sit 8 ms after their input (high on the rising flank of
    // the PSP kernel, so the box constraints on eta admit the solution).
    static ToyProblem make(double delta_t);

    double delta_t() const { return desired2 - desired1; }
    InputPattern pattern() const { return {{{input1}, {input2}}, duration}; }
    SpikeTrain desired() const { return {desired1, desired2}; }
    void validate() const;
};

// Solve the lower-triangular threshold-equality system for the exact weights:
//   w1 psp(d1 - i1) = theta
//   w1 psp(d2 - i1) + w2 psp(d2 - i2) = theta (1 + gamma(d2 - d1))
WeightVector toy_optimal_weights(const ToyProblem& tp);

enum class ToyRule { Psd, FirstError, Dta };

struct InterferenceTrace {
    std::vector<double> w1_dist;  // |w1 - w1*| after each epoch
    std::vector<double> w2_dist;
    bool converged = false;  // training-loop stop rule (vRD accuracy) fired
    int stop_epoch = 0;      // 1-based epoch at which it fired
};

// Train from zero weights, one rule step per epoch, recording the distance of
// each weight from its optimum. Training freezes once the response matches
// the desired train by the vRD criterion; the trace keeps its length.
InterferenceTrace interference_trace_full(const ToyProblem& tp, ToyRule rule, int epochs,
                                          double eta = 0.01, const DtaConfig& cfg = {});

// w1 distances only
std::vector<double> interference_trace(const ToyProblem& tp, ToyRule rule, int epochs,
                                       double eta = 0.01);

}  // namespace dta
