#include "baselines.hpp"

#include <cmath>

#include "metrics.hpp"

namespace dta {

WeightVector wh_step(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                     const SpikeTrain& y, KernelKind kernel, double eta) {
    if (!(eta > 0.0)) throw Error("wh_step: eta must be positive");
    SpikeTrain o = simulate(p, w, x);
    WeightVector out = w;
    for (size_t i = 0; i < x.channels.size(); ++i) {
        double acc = 0.0;
        for (double td : y)
            for (double ti : x.channels[i]) acc += learning_kernel(kernel, p, td - ti);
        for (double to : o)
            for (double ti : x.channels[i]) acc -= learning_kernel(kernel, p, to - ti);
        out[i] += eta * acc;
    }
    return out;
}

WeightVector first_error_step(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                              const SpikeTrain& y, KernelKind kernel, double eta,
                              double match_tol) {
    if (!(eta > 0.0)) throw Error("first_error_step: eta must be positive");
    SpikeTrain o = simulate(p, w, x);
    MatchResult m = match_spikes(o, y, match_tol);
    if (m.fully_converged()) return w;

    // earliest violation in time: missing desired spike (LTP) or unmatched
    // actual spike (LTD)
    double t = 0.0;
    double sign = 0.0;
    bool have_d = !m.unmatched_desired.empty();
    bool have_a = !m.unmatched_actual.empty();
    if (have_d && (!have_a || m.unmatched_desired.front() <= m.unmatched_actual.front())) {
        t = m.unmatched_desired.front();
        sign = +1.0;
    } else {
        t = m.unmatched_actual.front();
        sign = -1.0;
    }

    WeightVector out = w;
    for (size_t i = 0; i < x.channels.size(); ++i) {
        double acc = 0.0;
        for (double ti : x.channels[i]) acc += learning_kernel(kernel, p, t - ti);
        out[i] += sign * eta * acc;
    }
    return out;
}

ToyProblem ToyProblem::make(double delta_t) {
    constexpr double kOffset = 8.0;
    ToyProblem tp;
    tp.params = NeuronParams(2, 1.0, 20.0, 5.0);
    tp.input1 = 5.0;
    tp.desired1 = tp.input1 + kOffset;
    tp.desired2 = tp.desired1 + delta_t;
    tp.input2 = tp.desired2 - kOffset;
    tp.duration = tp.desired2 + 30.0;
    tp.validate();
    return tp;
}

void ToyProblem::validate() const {
    if (!(input1 < desired1 && desired1 < input2 && input2 < desired2))
        throw Error("toy problem requires i1 < d1 < i2 < d2");
    if (params.n_channels != 2) throw Error("toy problem requires two channels");
}

WeightVector toy_optimal_weights(const ToyProblem& tp) {
    tp.validate();
    const NeuronParams& p = tp.params;
    double l11 = psp_kernel(p, tp.desired1 - tp.input1);
    double l21 = psp_kernel(p, tp.desired2 - tp.input1);
    double l22 = psp_kernel(p, tp.desired2 - tp.input2);
    if (std::abs(l11) < 1e-12 || std::abs(l22) < 1e-12)
        throw Error("degenerate toy problem: PSP term vanishes at a desired time");
    double theta = p.threshold;
    double w1 = theta / l11;
    double w2 = (theta * (1.0 + reset_kernel(p, tp.desired2 - tp.desired1)) - w1 * l21) / l22;
    return {w1, w2};
}

InterferenceTrace interference_trace_full(const ToyProblem& tp, ToyRule rule, int epochs,
                                          double eta, const DtaConfig& cfg) {
    if (epochs < 1) throw Error("interference_trace: epochs must be >= 1");
    WeightVector opt = toy_optimal_weights(tp);
    InputPattern x = tp.pattern();
    SpikeTrain y = tp.desired();

    InterferenceTrace tr;
    WeightVector w(2, 0.0);
    bool stopped = false;
    for (int e = 1; e <= epochs; ++e) {
        if (!stopped) {
            switch (rule) {
                case ToyRule::Psd:
                    w = wh_step(tp.params, w, x, y, KernelKind::Psp, eta);
                    break;
                case ToyRule::FirstError:
                    w = first_error_step(tp.params, w, x, y, KernelKind::Psp, eta, cfg.match_tol);
                    break;
                case ToyRule::Dta:
                    w = encoding_step(tp.params, w, x, y, cfg).weights;
                    break;
            }
            SpikeTrain o = simulate(tp.params, w, x);
            if (vrd(o, y) < vrd_star(tp.duration, 1.0)) {
                stopped = true;
                tr.converged = true;
                tr.stop_epoch = e;
            }
        }
        tr.w1_dist.push_back(std::abs(w[0] - opt[0]));
        tr.w2_dist.push_back(std::abs(w[1] - opt[1]));
    }
    return tr;
}

std::vector<double> interference_trace(const ToyProblem& tp, ToyRule rule, int epochs, double eta) {
    return interference_trace_full(tp, rule, epochs, eta).w1_dist;
}

}  // namespace dta
