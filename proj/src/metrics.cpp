#include "metrics.hpp"

#include <cmath>

namespace dta {

namespace {

// sum over pairs of (tau_q/2) exp(-|t1-t2|/tau_q)
double pair_sum(const SpikeTrain& u, const SpikeTrain& v, double tau_q) {
    double s = 0.0;
    for (double t1 : u)
        for (double t2 : v) s += std::exp(-std::abs(t1 - t2) / tau_q);
    return 0.5 * tau_q * s;
}

}  // namespace

double vrd(const SpikeTrain& a, const SpikeTrain& b, const VrdConfig& cfg) {
    if (!(cfg.tau_q > 0.0)) throw Error("vrd: tau_q must be positive");
    double sq = (pair_sum(a, a, cfg.tau_q) + pair_sum(b, b, cfg.tau_q) -
                 2.0 * pair_sum(a, b, cfg.tau_q)) /
                cfg.tau_q;
    return std::sqrt(std::max(sq, 0.0));
}

double vrd_star(double duration, double delta_t) {
    if (!(duration > 0.0) || !(delta_t > 0.0))
        throw Error("vrd_star: duration and delta_t must be positive");
    return 0.08 * delta_t + 0.0001 * duration;
}

double encoding_accuracy(const std::vector<SpikeTrain>& responses,
                         const std::vector<SpikeTrain>& desired,
                         const std::vector<double>& durations, const VrdConfig& cfg) {
    if (responses.size() != desired.size() || responses.size() != durations.size())
        throw Error("encoding_accuracy: length mismatch");
    if (responses.empty()) return 1.0;
    int hits = 0;
    for (size_t i = 0; i < responses.size(); ++i)
        if (vrd(responses[i], desired[i], cfg) < vrd_star(durations[i], 1.0)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(responses.size());
}

double decoding_accuracy(const std::vector<int>& counts, const std::vector<int>& labels) {
    if (counts.size() != labels.size()) throw Error("decoding_accuracy: length mismatch");
    if (counts.empty()) return 1.0;
    int hits = 0;
    for (size_t i = 0; i < counts.size(); ++i)
        if (counts[i] == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(counts.size());
}

}  // namespace dta
