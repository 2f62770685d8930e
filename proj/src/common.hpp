#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace dta {

// All times are in milliseconds, rates in spikes/ms.

// Spike times of one channel, strictly increasing.
using SpikeTrain = std::vector<double>;

// Synaptic efficacies, one per input channel.
using WeightVector = std::vector<double>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimulationDiverged : Error {
    SimulationDiverged() : Error("membrane potential diverged (non-finite value)") {}
};

struct ThetaSearchFailed : Error {
    double bracket_lo, bracket_hi;
    ThetaSearchFailed(double lo, double hi)
        : Error("dynamic-threshold bisection did not reach the target spike count"),
          bracket_lo(lo), bracket_hi(hi) {}
};

struct UnboundedError : Error {
    UnboundedError() : Error("linear program objective is unbounded") {}
};

struct ParseError : Error {
    using Error::Error;
};

inline bool is_strictly_increasing(const SpikeTrain& t) {
    for (size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) return false;
    return true;
}

// N spike trains plus the common duration T.
struct InputPattern {
    std::vector<SpikeTrain> channels;
    double duration = 0.0;

    void validate() const {
        if (duration <= 0.0) throw Error("pattern duration must be positive");
        for (const auto& ch : channels) {
            if (!is_strictly_increasing(ch))
                throw Error("spike train must be strictly increasing");
            if (!ch.empty() && (ch.front() < 0.0 || ch.back() > duration))
                throw Error("spike time outside [0, T]");
        }
    }

    size_t total_spikes() const {
        size_t n = 0;
        for (const auto& ch : channels) n += ch.size();
        return n;
    }
};

}  // namespace dta
