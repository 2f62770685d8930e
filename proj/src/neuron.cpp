#include "neuron.hpp"

#include <algorithm>
#include <cmath>

namespace dta {

double psp_kernel(const NeuronParams& p, double t) {
    if (t < 0.0) return 0.0;
    return p.v_norm * (std::exp(-t / p.tau_m) - std::exp(-t / p.tau_s));
}

double psp_peak_time(const NeuronParams& p) {
    return (p.tau_m * p.tau_s / (p.tau_m - p.tau_s)) * std::log(p.tau_m / p.tau_s);
}

double reset_kernel(const NeuronParams& p, double t) {
    if (t < 0.0) return 0.0;
    return std::exp(-t / p.tau_m);
}

double learning_kernel(KernelKind kind, const NeuronParams& p, double t) {
    switch (kind) {
        case KernelKind::Stdp:
            return reset_kernel(p, t);
        case KernelKind::Psp:
            return psp_kernel(p, t);
        case KernelKind::Filt: {
            double cm = p.tau_m / (p.tau_m + p.tau_s);
            double cs = p.tau_s / (p.tau_m + p.tau_s);
            if (t > 0.0)
                return p.v_norm * (cm * std::exp(-t / p.tau_m) - cs * std::exp(-t / p.tau_s));
            return p.v_norm * (cm - cs) * std::exp(t / p.tau_m);
        }
    }
    return 0.0;
}

std::vector<double> psp_channel_sums(const NeuronParams& p, const InputPattern& x, double t) {
    std::vector<double> sums(x.channels.size(), 0.0);
    for (size_t i = 0; i < x.channels.size(); ++i)
        for (double ti : x.channels[i]) sums[i] += psp_kernel(p, t - ti);
    return sums;
}

std::vector<double> kernel_channel_sums(KernelKind kind, const NeuronParams& p,
                                        const InputPattern& x, double t) {
    std::vector<double> sums(x.channels.size(), 0.0);
    for (size_t i = 0; i < x.channels.size(); ++i)
        for (double ti : x.channels[i]) sums[i] += learning_kernel(kind, p, t - ti);
    return sums;
}

double membrane_v0(const NeuronParams& p, const WeightVector& w, const InputPattern& x, double t) {
    double v = 0.0;
    for (size_t i = 0; i < x.channels.size(); ++i) {
        double s = 0.0;
        for (double ti : x.channels[i]) s += psp_kernel(p, t - ti);
        v += w[i] * s;
    }
    return v;
}

double dynamic_theta(const NeuronParams& p, const SpikeTrain& y, double t) {
    double g = 0.0;
    for (double td : y) g += reset_kernel(p, t - td);
    return p.threshold * (1.0 + g);
}

namespace {

struct Event {
    double t;
    double w;
};

}  // namespace

SpikeTrain simulate(const NeuronParams& p, const WeightVector& w, const InputPattern& x,
                    std::optional<double> threshold_override) {
    if (x.duration <= 0.0) throw Error("simulate: pattern duration must be positive");
    if (w.size() != x.channels.size()) throw Error("simulate: weight/channel count mismatch");
    const double theta = threshold_override.value_or(p.threshold);
    if (!(theta > 0.0)) throw Error("simulate: threshold must be positive");
    const double level = theta - p.fire_tol;
    const double T = x.duration;

    std::vector<Event> events;
    events.reserve(x.total_spikes());
    for (size_t i = 0; i < x.channels.size(); ++i)
        for (double ti : x.channels[i]) events.push_back({ti, w[i]});
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });

    SpikeTrain out;

    // exact potential at arbitrary time, from the full input history and the
    // spikes fired so far
    auto v_exact = [&](double t) {
        double em = 0.0, es = 0.0;
        for (const Event& e : events) {
            if (e.t > t) break;
            em += e.w * std::exp(-(t - e.t) / p.tau_m);
            es += e.w * std::exp(-(t - e.t) / p.tau_s);
        }
        double v = p.v_norm * (em - es);
        for (double s : out) {
            if (s > t) break;
            v -= theta * std::exp(-(t - s) / p.tau_m);
        }
        return v;
    };

    const size_t n_steps = static_cast<size_t>(std::ceil(T / p.dt - 1e-12));
    const double decay_m = std::exp(-p.dt / p.tau_m);
    const double decay_s = std::exp(-p.dt / p.tau_s);

    double em = 0.0, es = 0.0, rm = 0.0;  // running exponential sums
    size_t next_event = 0;
    double v_prev = 0.0;
    double t_prev = 0.0;

    for (size_t k = 0; k <= n_steps; ++k) {
        const double t = (k == n_steps) ? T : static_cast<double>(k) * p.dt;
        if (k > 0) {
            const double h = t - t_prev;
            if (std::abs(h - p.dt) < 1e-12) {
                em *= decay_m;
                es *= decay_s;
                rm *= decay_m;
            } else {
                em *= std::exp(-h / p.tau_m);
                es *= std::exp(-h / p.tau_s);
                rm *= std::exp(-h / p.tau_m);
            }
        }
        while (next_event < events.size() && events[next_event].t <= t) {
            const Event& e = events[next_event++];
            em += e.w * std::exp(-(t - e.t) / p.tau_m);
            es += e.w * std::exp(-(t - e.t) / p.tau_s);
        }
        double v = p.v_norm * (em - es) - theta * rm;
        if (!std::isfinite(v)) throw SimulationDiverged();

        bool crossing = (k == 0) ? (v >= level) : (v_prev < theta && v >= level);
        if (crossing) {
            double spike_time;
            if (k == 0) {
                spike_time = 0.0;
            } else {
                double a = t_prev, b = t;
                if (v_exact(a) >= level) {
                    spike_time = a;
                } else {
                    while (b - a > p.refine_tol) {
                        double m = 0.5 * (a + b);
                        if (v_exact(m) >= level)
                            b = m;
                        else
                            a = m;
                    }
                    spike_time = 0.5 * (a + b);
                }
            }
            if (out.empty() || spike_time > out.back()) {
                out.push_back(spike_time);
                rm += std::exp(-(t - spike_time) / p.tau_m);
                v = p.v_norm * (em - es) - theta * rm;
            }
        }
        v_prev = v;
        t_prev = t;
    }
    return out;
}

}  // namespace dta
