#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "linsolve.hpp"
#include "neuron.hpp"
#include "rng.hpp"

namespace dta {

// Hyper-parameters of the DTA learning rule. The eta bounds constrain the
// per-spike update multipliers solved by the LP: positive for desired times,
// negative for undesired actual times.
struct DtaConfig {
    KernelKind kernel = KernelKind::Psp;
    double lb_d = 1e-4, ub_d = 1.0;    // eta^d range, lb_d > 0
    double lb_o = -1.0, ub_o = -1e-4;  // eta^o range, ub_o < 0
    double fallback_eta = 1e-3;        // fixed eta when the LP is infeasible
    std::optional<double> ineq_margin; // epsilon; default 1e-3 * threshold
    double match_tol = 1.0;            // spike matching tolerance, ms
    int max_epochs = 100;
    int max_bisect = 60;
    // Minimal-magnitude updates are the default: an arbitrary feasible vertex
    // slams eta values to their bounds, which perturbs the potential at
    // unconstrained times and spawns spurious spikes. Minimising sum |eta|
    // keeps updates local and makes multi-pattern training converge.
    enum class Objective { Feasibility, MinAbsEta };
    Objective objective = Objective::MinAbsEta;

    double margin_for(const NeuronParams& p) const {
        return ineq_margin.value_or(1e-3 * p.threshold);
    }
    void validate() const {
        if (!(lb_d > 0.0) || !(lb_d <= ub_d)) throw Error("dta config: need 0 < lb_d <= ub_d");
        if (!(ub_o < 0.0) || !(lb_o <= ub_o)) throw Error("dta config: need lb_o <= ub_o < 0");
        if (!(match_tol > 0.0)) throw Error("dta config: match_tol must be positive");
        if (ineq_margin && !(*ineq_margin > 0.0)) throw Error("dta config: margin must be positive");
        if (max_epochs < 1) throw Error("dta config: max_epochs must be >= 1");
    }
};

struct EncodingProblem {
    std::vector<InputPattern> patterns;
    std::vector<SpikeTrain> desired;
};

struct DecodingProblem {
    std::vector<InputPattern> patterns;
    std::vector<int> labels;  // desired spike counts, >= 0
};

struct TrainResult {
    bool converged = false;
    int epochs_used = 0;
    std::vector<double> accuracy_per_epoch;
    WeightVector final_weights;
    std::vector<int> violations_per_iteration;  // unmatched actual spikes after each update
    int fallback_count = 0;                     // iterations that used the fixed-eta fallback
    int skipped_iterations = 0;                 // decoding iterations with no usable theta*
};

struct MatchResult {
    std::vector<std::pair<double, double>> pairs;  // (actual, desired)
    SpikeTrain unmatched_actual;
    SpikeTrain unmatched_desired;
    bool fully_converged() const { return unmatched_actual.empty() && unmatched_desired.empty(); }
};

// Greedy in-order one-to-one matching: walking both trains in time order, an
// actual spike takes the earliest unmatched desired spike within +-tol.
MatchResult match_spikes(const SpikeTrain& actual, const SpikeTrain& desired, double tol);

// Threshold as seen by the firing condition at time t: resets of desired
// spikes strictly before t. (dynamic_theta is the pointwise function and
// includes gamma(0) = 1 for a spike exactly at t; the crossing that places a
// spike at t happens against the left limit, which this returns.)
double constraint_theta(const NeuronParams& p, const SpikeTrain& y, double t);

// Assembles the DTA constraint problem: one eta variable per desired time and
// per unmatched actual time; equality rows pin V0 to the dynamic threshold at
// desired times, inequality rows push V0 below it at unmatched actual times.
lp::Problem build_encoding_lp(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                              const SpikeTrain& y, const SpikeTrain& unmatched,
                              const DtaConfig& cfg);

struct StepResult {
    WeightVector weights;
    bool used_fallback = false;
    bool skipped = false;       // decoding only: theta* search failed entirely
    SpikeTrain desired_used;    // decoding only: the y that drove the update
};

// One DTA iteration on one pattern for the Encoding task. A fully converged
// pattern leaves the weights untouched.
StepResult encoding_step(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                         const SpikeTrain& y, const DtaConfig& cfg);

TrainResult train_encoding(const EncodingProblem& problem, const NeuronParams& p,
                           const WeightVector& w0, const DtaConfig& cfg, uint64_t rng_seed);

enum class ThetaDirection { MoreSpikes, FewerSpikes };

// Bisection over thresholds in (0, 10 theta) for the threshold that yields
// exactly one more (or fewer) spike. Throws ThetaSearchFailed with the
// closest bracket when the count is never hit.
double find_theta_star(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                       ThetaDirection direction, int max_bisect = 60);

// find_theta_star with the documented fallback: a 200-point linear threshold
// scan over (0, 10 theta). Returns nullopt when both fail.
std::optional<double> find_theta_star_with_fallback(const NeuronParams& p, const WeightVector& w,
                                                    const InputPattern& x, ThetaDirection direction,
                                                    int max_bisect = 60);

// One DTA iteration for the Decoding task: pick desired timings via the
// dynamic-threshold procedure, then run an encoding step against them.
StepResult decoding_step(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                         int label, const DtaConfig& cfg);

TrainResult train_decoding(const DecodingProblem& problem, const NeuronParams& p,
                           const WeightVector& w0, const DtaConfig& cfg, uint64_t rng_seed);

// Winner-take-all prediction: argmax spike count, ties to the lowest index.
int wta_predict(const std::vector<int>& spike_counts);

using EpochObserver = std::function<void(int epoch, const std::vector<WeightVector>& weights)>;

struct WtaTrainOutput {
    std::vector<WeightVector> weights;  // one per class neuron
    std::vector<TrainResult> results;   // per-neuron training records
};

// One neuron per class, trained with decoding steps in a shared epoch loop.
// Neuron k's target is `target_spikes` on patterns of class k and quiescence
// otherwise; any neuron with a wrong count is adjusted even when the WTA
// prediction happens to be right.
WtaTrainOutput train_wta_network(const std::vector<InputPattern>& patterns,
                                 const std::vector<int>& class_labels, int n_classes,
                                 int target_spikes, const NeuronParams& p, const DtaConfig& cfg,
                                 uint64_t rng_seed, const EpochObserver& observer = {});

}  // namespace dta
