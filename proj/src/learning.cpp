#include "learning.hpp"

#include <algorithm>
#include <cmath>

#include "metrics.hpp"

namespace dta {

MatchResult match_spikes(const SpikeTrain& actual, const SpikeTrain& desired, double tol) {
    if (!(tol > 0.0)) throw Error("match_spikes: tol must be positive");
    MatchResult r;
    size_t j = 0;
    for (double a : actual) {
        while (j < desired.size() && desired[j] < a - tol) r.unmatched_desired.push_back(desired[j++]);
        if (j < desired.size() && desired[j] <= a + tol) {
            r.pairs.emplace_back(a, desired[j]);
            ++j;
        } else {
            r.unmatched_actual.push_back(a);
        }
    }
    while (j < desired.size()) r.unmatched_desired.push_back(desired[j++]);
    return r;
}

double constraint_theta(const NeuronParams& p, const SpikeTrain& y, double t) {
    double g = 0.0;
    for (double td : y) {
        if (td >= t) break;
        g += reset_kernel(p, t - td);
    }
    return p.threshold * (1.0 + g);
}

namespace {

// preferred extra suppression below theta at undesired times, in units of the
// threshold (applied as far as feasible, never required)
constexpr double kSuppressionDepth = 0.1;

// LP plus the pieces needed to turn a solution into a weight update
struct EncodingLpParts {
    lp::Problem problem;
    std::vector<double> var_times;           // desired times then unmatched actual times
    size_t n_desired = 0;
    std::vector<std::vector<double>> ksums;  // per variable: kernel sums per channel
};

EncodingLpParts build_encoding_parts(const NeuronParams& p, const WeightVector& w,
                                     const InputPattern& x, const SpikeTrain& y,
                                     const SpikeTrain& unmatched, const DtaConfig& cfg) {
    EncodingLpParts parts;
    parts.n_desired = y.size();
    parts.var_times = y;
    parts.var_times.insert(parts.var_times.end(), unmatched.begin(), unmatched.end());
    const size_t nv = parts.var_times.size();
    const size_t nc = x.channels.size();
    if (nv == 0) throw Error("encoding lp: no constraint times");

    parts.ksums.resize(nv);
    for (size_t v = 0; v < nv; ++v)
        parts.ksums[v] = kernel_channel_sums(cfg.kernel, p, x, parts.var_times[v]);

    lp::Problem& lpp = parts.problem;
    lpp.n_vars = static_cast<int>(nv);
    lpp.lower.resize(nv);
    lpp.upper.resize(nv);
    for (size_t v = 0; v < nv; ++v) {
        bool is_desired = v < parts.n_desired;
        lpp.lower[v] = is_desired ? cfg.lb_d : cfg.lb_o;
        lpp.upper[v] = is_desired ? cfg.ub_d : cfg.ub_o;
    }

    const double eps = cfg.margin_for(p);
    // constraint times coincide with variable times: equalities at desired
    // times, inequalities at unmatched actual times
    for (size_t c = 0; c < nv; ++c) {
        const double tc = parts.var_times[c];
        std::vector<double> lam = psp_channel_sums(p, x, tc);
        std::vector<double> row(nv, 0.0);
        for (size_t v = 0; v < nv; ++v) {
            double m = 0.0;
            for (size_t i = 0; i < nc; ++i) m += parts.ksums[v][i] * lam[i];
            row[v] = m;
        }
        double v0 = 0.0;
        for (size_t i = 0; i < nc; ++i) v0 += w[i] * lam[i];
        double rhs = constraint_theta(p, y, tc) - v0;
        if (c < parts.n_desired)
            lpp.add_eq(std::move(row), rhs);
        else
            lpp.add_le(std::move(row), rhs - eps);
    }

    if (cfg.objective == DtaConfig::Objective::MinAbsEta) {
        // the sign of each eta is fixed by its bounds, so sum |eta| is linear
        lpp.objective.resize(nv);
        for (size_t v = 0; v < nv; ++v) lpp.objective[v] = v < parts.n_desired ? 1.0 : -1.0;
    } else {
        // in feasibility mode, prefer solutions that push undesired times
        // well below threshold instead of grazing the margin; a barely
        // suppressed spike reappears a fraction of a millisecond later
        lpp.centering_margin = kSuppressionDepth * p.threshold;
    }
    return parts;
}

WeightVector apply_eta(const EncodingLpParts& parts, const WeightVector& w,
                       const std::vector<double>& eta) {
    WeightVector out = w;
    for (size_t v = 0; v < parts.var_times.size(); ++v) {
        if (eta[v] == 0.0) continue;
        for (size_t i = 0; i < out.size(); ++i) out[i] += eta[v] * parts.ksums[v][i];
    }
    return out;
}

}  // namespace

lp::Problem build_encoding_lp(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                              const SpikeTrain& y, const SpikeTrain& unmatched,
                              const DtaConfig& cfg) {
    return build_encoding_parts(p, w, x, y, unmatched, cfg).problem;
}

StepResult encoding_step(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                         const SpikeTrain& y, const DtaConfig& cfg) {
    SpikeTrain o = simulate(p, w, x);
    MatchResult m = match_spikes(o, y, cfg.match_tol);
    if (m.fully_converged()) return {w, false, false, y};

    EncodingLpParts parts = build_encoding_parts(p, w, x, y, m.unmatched_actual, cfg);
    lp::Solution sol = lp::solve(parts.problem);
    if (sol.status != lp::Status::Infeasible)
        return {apply_eta(parts, w, sol.values), false, false, y};

    // infeasible: fixed-eta update at every desired / unmatched time
    std::vector<double> eta(parts.var_times.size());
    for (size_t v = 0; v < eta.size(); ++v)
        eta[v] = v < parts.n_desired ? cfg.fallback_eta : -cfg.fallback_eta;
    return {apply_eta(parts, w, eta), true, false, y};
}

namespace {

// accuracy bookkeeping shared by the encoding/decoding epoch loops
struct EpochLoop {
    const NeuronParams& p;
    const DtaConfig& cfg;
    Rng rng;
    TrainResult result;

    EpochLoop(const NeuronParams& p_, const DtaConfig& cfg_, const WeightVector& w0, uint64_t seed)
        : p(p_), cfg(cfg_), rng(seed) {
        result.final_weights = w0;
    }

    template <class StepFn, class AccuracyFn>
    void run(size_t n_patterns, StepFn&& step, AccuracyFn&& accuracy) {
        for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
            std::vector<int> order = rng.permutation(static_cast<int>(n_patterns));
            for (int idx : order) step(idx, result);
            result.epochs_used = epoch;
            double acc = accuracy(result.final_weights);
            result.accuracy_per_epoch.push_back(acc);
            if (acc >= 1.0) {
                result.converged = true;
                break;
            }
        }
    }
};

}  // namespace

TrainResult train_encoding(const EncodingProblem& problem, const NeuronParams& p,
                           const WeightVector& w0, const DtaConfig& cfg, uint64_t rng_seed) {
    cfg.validate();
    if (problem.patterns.size() != problem.desired.size())
        throw Error("train_encoding: pattern/desired count mismatch");

    EpochLoop loop(p, cfg, w0, rng_seed);
    loop.run(
        problem.patterns.size(),
        [&](int idx, TrainResult& r) {
            const InputPattern& x = problem.patterns[idx];
            const SpikeTrain& y = problem.desired[idx];
            StepResult s = encoding_step(p, r.final_weights, x, y, cfg);
            r.final_weights = std::move(s.weights);
            if (s.used_fallback) ++r.fallback_count;
            MatchResult after = match_spikes(simulate(p, r.final_weights, x), y, cfg.match_tol);
            r.violations_per_iteration.push_back(static_cast<int>(after.unmatched_actual.size()));
        },
        [&](const WeightVector& w) {
            std::vector<SpikeTrain> responses;
            std::vector<double> durations;
            responses.reserve(problem.patterns.size());
            for (const auto& x : problem.patterns) {
                responses.push_back(simulate(p, w, x));
                durations.push_back(x.duration);
            }
            return encoding_accuracy(responses, problem.desired, durations);
        });
    return loop.result;
}

double find_theta_star(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                       ThetaDirection direction, int max_bisect) {
    const double theta = p.threshold;
    const int c = static_cast<int>(simulate(p, w, x).size());
    if (direction == ThetaDirection::MoreSpikes && x.total_spikes() == 0)
        throw Error("find_theta_star: no input spikes to elicit more output");
    const int target = c + (direction == ThetaDirection::MoreSpikes ? 1 : -1);
    if (target < 0) throw ThetaSearchFailed(0.0, theta);

    // counts are (assumed) non-increasing in the threshold; search below
    // theta for more spikes, above for fewer
    double lo = direction == ThetaDirection::MoreSpikes ? 0.0 : theta;
    double hi = direction == ThetaDirection::MoreSpikes ? theta : 10.0 * theta;
    for (int it = 0; it < max_bisect; ++it) {
        double mid = 0.5 * (lo + hi);
        int k = static_cast<int>(simulate(p, w, x, mid).size());
        if (k == target) return mid;
        if (k > target)
            lo = mid;  // too many spikes: raise the threshold
        else
            hi = mid;
    }
    throw ThetaSearchFailed(lo, hi);
}

std::optional<double> find_theta_star_with_fallback(const NeuronParams& p, const WeightVector& w,
                                                    const InputPattern& x, ThetaDirection direction,
                                                    int max_bisect) {
    try {
        return find_theta_star(p, w, x, direction, max_bisect);
    } catch (const ThetaSearchFailed&) {
        // linear scan over 200 interior grid points of (0, 10 theta)
        const int c = static_cast<int>(simulate(p, w, x).size());
        const int target = c + (direction == ThetaDirection::MoreSpikes ? 1 : -1);
        if (target < 0) return std::nullopt;
        for (int j = 1; j <= 200; ++j) {
            double cand = 10.0 * p.threshold * static_cast<double>(j) / 201.0;
            if (static_cast<int>(simulate(p, w, x, cand).size()) == target) return cand;
        }
        return std::nullopt;
    }
}

StepResult decoding_step(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                         int label, const DtaConfig& cfg) {
    if (label < 0) throw Error("decoding_step: label must be >= 0");
    SpikeTrain o = simulate(p, w, x);
    if (static_cast<int>(o.size()) == label) return {w, false, false, {}};

    ThetaDirection dir = static_cast<int>(o.size()) < label ? ThetaDirection::MoreSpikes
                                                            : ThetaDirection::FewerSpikes;
    std::optional<double> theta_star;
    if (dir == ThetaDirection::MoreSpikes && x.total_spikes() == 0)
        theta_star = std::nullopt;
    else
        theta_star = find_theta_star_with_fallback(p, w, x, dir, cfg.max_bisect);
    if (!theta_star) return {w, false, true, {}};

    SpikeTrain y = simulate(p, w, x, *theta_star);
    StepResult s = encoding_step(p, w, x, y, cfg);
    s.desired_used = std::move(y);
    return s;
}

TrainResult train_decoding(const DecodingProblem& problem, const NeuronParams& p,
                           const WeightVector& w0, const DtaConfig& cfg, uint64_t rng_seed) {
    cfg.validate();
    if (problem.patterns.size() != problem.labels.size())
        throw Error("train_decoding: pattern/label count mismatch");

    EpochLoop loop(p, cfg, w0, rng_seed);
    loop.run(
        problem.patterns.size(),
        [&](int idx, TrainResult& r) {
            const InputPattern& x = problem.patterns[idx];
            StepResult s = decoding_step(p, r.final_weights, x, problem.labels[idx], cfg);
            r.final_weights = std::move(s.weights);
            if (s.used_fallback) ++r.fallback_count;
            if (s.skipped) ++r.skipped_iterations;
            int viol = 0;
            if (!s.desired_used.empty()) {
                MatchResult after =
                    match_spikes(simulate(p, r.final_weights, x), s.desired_used, cfg.match_tol);
                viol = static_cast<int>(after.unmatched_actual.size());
            }
            r.violations_per_iteration.push_back(viol);
        },
        [&](const WeightVector& w) {
            std::vector<int> counts;
            counts.reserve(problem.patterns.size());
            for (const auto& x : problem.patterns)
                counts.push_back(static_cast<int>(simulate(p, w, x).size()));
            return decoding_accuracy(counts, problem.labels);
        });
    return loop.result;
}

int wta_predict(const std::vector<int>& spike_counts) {
    if (spike_counts.empty()) throw Error("wta_predict: no neurons");
    int best = 0;
    for (size_t k = 1; k < spike_counts.size(); ++k)
        if (spike_counts[k] > spike_counts[best]) best = static_cast<int>(k);
    return best;
}

WtaTrainOutput train_wta_network(const std::vector<InputPattern>& patterns,
                                 const std::vector<int>& class_labels, int n_classes,
                                 int target_spikes, const NeuronParams& p, const DtaConfig& cfg,
                                 uint64_t rng_seed, const EpochObserver& observer) {
    cfg.validate();
    if (target_spikes < 1) throw Error("train_wta_network: target_spikes must be >= 1");
    if (patterns.size() != class_labels.size())
        throw Error("train_wta_network: pattern/label count mismatch");

    Rng rng(rng_seed);
    WtaTrainOutput out;
    out.weights.resize(n_classes);
    out.results.resize(n_classes);
    for (int k = 0; k < n_classes; ++k) {
        out.weights[k].resize(p.n_channels);
        for (auto& wv : out.weights[k]) wv = rng.normal(0.01, 0.01);
        out.results[k].final_weights = out.weights[k];
    }

    const size_t P = patterns.size();
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::vector<int> order = rng.permutation(static_cast<int>(P));
        for (int idx : order) {
            for (int k = 0; k < n_classes; ++k) {
                int label = class_labels[idx] == k ? target_spikes : 0;
                StepResult s = decoding_step(p, out.weights[k], patterns[idx], label, cfg);
                out.weights[k] = std::move(s.weights);
                if (s.used_fallback) ++out.results[k].fallback_count;
                if (s.skipped) ++out.results[k].skipped_iterations;
            }
        }
        bool all_exact = true;
        for (int k = 0; k < n_classes; ++k) {
            std::vector<int> counts, labels;
            counts.reserve(P);
            labels.reserve(P);
            for (size_t i = 0; i < P; ++i) {
                counts.push_back(static_cast<int>(simulate(p, out.weights[k], patterns[i]).size()));
                labels.push_back(class_labels[i] == k ? target_spikes : 0);
            }
            double acc = decoding_accuracy(counts, labels);
            out.results[k].accuracy_per_epoch.push_back(acc);
            out.results[k].epochs_used = epoch;
            if (acc < 1.0) all_exact = false;
        }
        if (observer) observer(epoch, out.weights);
        if (all_exact) {
            for (auto& r : out.results) r.converged = true;
            break;
        }
    }
    for (int k = 0; k < n_classes; ++k) out.results[k].final_weights = out.weights[k];
    return out;
}

}  // namespace dta
