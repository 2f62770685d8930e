#include "dta/dta.h"

#include <cstring>
#include <string>

#include "bench.hpp"
#include "datagen.hpp"
#include "learning.hpp"
#include "metrics.hpp"
#include "neuron.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Maps core exceptions onto C status codes.
template <class Fn>
dta_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const dta::SimulationDiverged& e) {
        set_error(e.what());
        return DTA_ERR_DIVERGED;
    } catch (const dta::ThetaSearchFailed& e) {
        set_error(e.what());
        return DTA_ERR_THETA_SEARCH;
    } catch (const dta::UnboundedError& e) {
        set_error(e.what());
        return DTA_ERR_UNBOUNDED;
    } catch (const dta::ParseError& e) {
        set_error(e.what());
        return DTA_ERR_PARSE;
    } catch (const dta::Error& e) {
        set_error(e.what());
        return DTA_ERR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        set_error(e.what());
        return DTA_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct dta_neuron {
    dta::NeuronParams params;
    dta::WeightVector weights;
};

struct dta_pattern {
    dta::InputPattern pattern;
};

struct dta_train_config {
    dta::DtaConfig cfg;
};

struct dta_train_result {
    dta::TrainResult result;
};

struct dta_experiment {
    dta::ExperimentConfig cfg;
};

extern "C" {

const char* dta_version(void) { return "1.0.0"; }

const char* dta_last_error(void) { return g_last_error.c_str(); }

dta_status dta_neuron_create(int n_channels, double threshold, double tau_m, double tau_s,
                             dta_neuron** out) {
    return guarded([&]() -> dta_status {
        if (!out || n_channels < 1) {
            set_error("neuron_create: bad arguments");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        auto* n = new dta_neuron{dta::NeuronParams(n_channels, threshold, tau_m, tau_s),
                                 dta::WeightVector(n_channels, 0.0)};
        *out = n;
        return DTA_OK;
    });
}

dta_status dta_neuron_set_grid(dta_neuron* n, double dt, double refine_tol) {
    if (!n || !(dt > 0.0) || !(refine_tol > 0.0)) {
        set_error("neuron_set_grid: bad arguments");
        return DTA_ERR_INVALID_ARGUMENT;
    }
    n->params.dt = dt;
    n->params.refine_tol = refine_tol;
    return DTA_OK;
}

int dta_neuron_n_channels(const dta_neuron* n) { return n ? n->params.n_channels : 0; }

dta_status dta_neuron_set_weights(dta_neuron* n, const double* w, size_t len) {
    if (!n || !w || len != n->weights.size()) {
        set_error("neuron_set_weights: bad arguments");
        return DTA_ERR_INVALID_ARGUMENT;
    }
    std::copy(w, w + len, n->weights.begin());
    return DTA_OK;
}

dta_status dta_neuron_get_weights(const dta_neuron* n, double* out, size_t len) {
    if (!n || !out || len != n->weights.size()) {
        set_error("neuron_get_weights: bad arguments");
        return DTA_ERR_INVALID_ARGUMENT;
    }
    std::copy(n->weights.begin(), n->weights.end(), out);
    return DTA_OK;
}

void dta_neuron_free(dta_neuron* n) { delete n; }

dta_status dta_pattern_create(int n_channels, double duration, dta_pattern** out) {
    if (!out || n_channels < 1 || !(duration > 0.0)) {
        set_error("pattern_create: bad arguments");
        return DTA_ERR_INVALID_ARGUMENT;
    }
    auto* p = new dta_pattern;
    p->pattern.duration = duration;
    p->pattern.channels.resize(n_channels);
    *out = p;
    return DTA_OK;
}

dta_status dta_pattern_set_channel(dta_pattern* p, int channel, const double* times, size_t len) {
    return guarded([&]() -> dta_status {
        if (!p || channel < 0 || channel >= static_cast<int>(p->pattern.channels.size()) ||
            (len > 0 && !times)) {
            set_error("pattern_set_channel: bad arguments");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        dta::SpikeTrain train(times, times + len);
        if (!dta::is_strictly_increasing(train)) {
            set_error("pattern_set_channel: times must be strictly increasing");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        if (!train.empty() && (train.front() < 0.0 || train.back() > p->pattern.duration)) {
            set_error("pattern_set_channel: times outside [0, T]");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        p->pattern.channels[channel] = std::move(train);
        return DTA_OK;
    });
}

dta_status dta_pattern_poisson(int n_channels, double duration, double rate, uint64_t seed,
                               dta_pattern** out) {
    return guarded([&]() -> dta_status {
        if (!out) {
            set_error("pattern_poisson: bad arguments");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        auto* p = new dta_pattern;
        p->pattern = dta::poisson_pattern({n_channels, duration, rate, seed});
        *out = p;
        return DTA_OK;
    });
}

void dta_pattern_free(dta_pattern* p) { delete p; }

dta_status dta_poisson_train(double duration, double rate, uint64_t seed, double** times_out,
                             size_t* count_out) {
    return guarded([&]() -> dta_status {
        if (!times_out || !count_out) {
            set_error("poisson_train: bad arguments");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        dta::Rng rng(seed);
        dta::SpikeTrain t = dta::poisson_train(duration, rate, rng);
        *count_out = t.size();
        *times_out = new double[t.size()];
        std::copy(t.begin(), t.end(), *times_out);
        return DTA_OK;
    });
}

dta_status dta_simulate(const dta_neuron* n, const dta_pattern* x, const double* threshold_override,
                        double** spikes_out, size_t* count_out) {
    return guarded([&]() -> dta_status {
        if (!n || !x || !spikes_out || !count_out) {
            set_error("simulate: bad arguments");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        std::optional<double> ov;
        if (threshold_override) ov = *threshold_override;
        dta::SpikeTrain s = dta::simulate(n->params, n->weights, x->pattern, ov);
        *count_out = s.size();
        *spikes_out = new double[s.size()];
        std::copy(s.begin(), s.end(), *spikes_out);
        return DTA_OK;
    });
}

void dta_buffer_free(double* buf) { delete[] buf; }

dta_status dta_train_config_create(dta_train_config** out) {
    if (!out) return DTA_ERR_INVALID_ARGUMENT;
    *out = new dta_train_config;
    return DTA_OK;
}

dta_status dta_train_config_set_kernel(dta_train_config* c, dta_kernel kernel) {
    if (!c) return DTA_ERR_INVALID_ARGUMENT;
    switch (kernel) {
        case DTA_KERNEL_STDP: c->cfg.kernel = dta::KernelKind::Stdp; break;
        case DTA_KERNEL_PSP: c->cfg.kernel = dta::KernelKind::Psp; break;
        case DTA_KERNEL_FILT: c->cfg.kernel = dta::KernelKind::Filt; break;
        default:
            set_error("unknown kernel");
            return DTA_ERR_INVALID_ARGUMENT;
    }
    return DTA_OK;
}

dta_status dta_train_config_set_max_epochs(dta_train_config* c, int max_epochs) {
    if (!c || max_epochs < 1) return DTA_ERR_INVALID_ARGUMENT;
    c->cfg.max_epochs = max_epochs;
    return DTA_OK;
}

dta_status dta_train_config_set_eta_bounds(dta_train_config* c, double lb_d, double ub_d,
                                           double lb_o, double ub_o) {
    if (!c) return DTA_ERR_INVALID_ARGUMENT;
    return guarded([&]() -> dta_status {
        dta::DtaConfig trial = c->cfg;
        trial.lb_d = lb_d;
        trial.ub_d = ub_d;
        trial.lb_o = lb_o;
        trial.ub_o = ub_o;
        trial.validate();
        c->cfg = trial;
        return DTA_OK;
    });
}

dta_status dta_train_config_set_fallback_eta(dta_train_config* c, double eta) {
    if (!c || !(eta > 0.0)) return DTA_ERR_INVALID_ARGUMENT;
    c->cfg.fallback_eta = eta;
    return DTA_OK;
}

dta_status dta_train_config_set_match_tol(dta_train_config* c, double tol) {
    if (!c || !(tol > 0.0)) return DTA_ERR_INVALID_ARGUMENT;
    c->cfg.match_tol = tol;
    return DTA_OK;
}

dta_status dta_train_config_set_ineq_margin(dta_train_config* c, double margin) {
    if (!c || !(margin > 0.0)) return DTA_ERR_INVALID_ARGUMENT;
    c->cfg.ineq_margin = margin;
    return DTA_OK;
}

void dta_train_config_free(dta_train_config* c) { delete c; }

dta_status dta_train_encoding(dta_neuron* n, const dta_pattern* const* patterns, size_t n_patterns,
                              const double* const* desired, const size_t* desired_len,
                              const dta_train_config* c, uint64_t seed, dta_train_result** out) {
    return guarded([&]() -> dta_status {
        if (!n || !patterns || !desired || !desired_len || !c || !out || n_patterns == 0) {
            set_error("train_encoding: bad arguments");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        dta::EncodingProblem problem;
        for (size_t i = 0; i < n_patterns; ++i) {
            problem.patterns.push_back(patterns[i]->pattern);
            problem.desired.emplace_back(desired[i], desired[i] + desired_len[i]);
        }
        dta::TrainResult r = dta::train_encoding(problem, n->params, n->weights, c->cfg, seed);
        n->weights = r.final_weights;
        *out = new dta_train_result{std::move(r)};
        return DTA_OK;
    });
}

dta_status dta_train_decoding(dta_neuron* n, const dta_pattern* const* patterns, size_t n_patterns,
                              const int* labels, const dta_train_config* c, uint64_t seed,
                              dta_train_result** out) {
    return guarded([&]() -> dta_status {
        if (!n || !patterns || !labels || !c || !out || n_patterns == 0) {
            set_error("train_decoding: bad arguments");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        dta::DecodingProblem problem;
        for (size_t i = 0; i < n_patterns; ++i) {
            problem.patterns.push_back(patterns[i]->pattern);
            problem.labels.push_back(labels[i]);
        }
        dta::TrainResult r = dta::train_decoding(problem, n->params, n->weights, c->cfg, seed);
        n->weights = r.final_weights;
        *out = new dta_train_result{std::move(r)};
        return DTA_OK;
    });
}

int dta_train_result_converged(const dta_train_result* r) {
    return r && r->result.converged ? 1 : 0;
}

int dta_train_result_epochs(const dta_train_result* r) { return r ? r->result.epochs_used : 0; }

int dta_train_result_fallbacks(const dta_train_result* r) {
    return r ? r->result.fallback_count : 0;
}

size_t dta_train_result_n_epoch_accuracies(const dta_train_result* r) {
    return r ? r->result.accuracy_per_epoch.size() : 0;
}

double dta_train_result_accuracy(const dta_train_result* r, size_t epoch_index) {
    if (!r || epoch_index >= r->result.accuracy_per_epoch.size()) return -1.0;
    return r->result.accuracy_per_epoch[epoch_index];
}

void dta_train_result_free(dta_train_result* r) { delete r; }

double dta_vrd(const double* a, size_t na, const double* b, size_t nb, double tau_q) {
    dta::SpikeTrain ta(a, a + na), tb(b, b + nb);
    return dta::vrd(ta, tb, {tau_q});
}

double dta_vrd_star(double duration, double delta_t) { return dta::vrd_star(duration, delta_t); }

double dta_theoretical_capacity(double n_channels, double nu_out, double tau_m, double tau_s) {
    return dta::theoretical_capacity(n_channels, nu_out, tau_m, tau_s);
}

dta_status dta_experiment_create_default(const char* kind, dta_experiment** out) {
    return guarded([&]() -> dta_status {
        if (!kind || !out) {
            set_error("experiment_create_default: bad arguments");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        auto* e = new dta_experiment;
        e->cfg.kind = dta::experiment_kind_from_string(kind);
        *out = e;
        return DTA_OK;
    });
}

dta_status dta_experiment_create_from_json(const char* json_text, dta_experiment** out) {
    return guarded([&]() -> dta_status {
        if (!json_text || !out) {
            set_error("experiment_create_from_json: bad arguments");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        auto* e = new dta_experiment{dta::ExperimentConfig::from_json_text(json_text)};
        *out = e;
        return DTA_OK;
    });
}

dta_status dta_experiment_load(const char* path, dta_experiment** out) {
    return guarded([&]() -> dta_status {
        if (!path || !out) {
            set_error("experiment_load: bad arguments");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        auto* e = new dta_experiment{dta::ExperimentConfig::load(path)};
        *out = e;
        return DTA_OK;
    });
}

dta_status dta_experiment_set_seed(dta_experiment* e, uint64_t seed) {
    if (!e) return DTA_ERR_INVALID_ARGUMENT;
    e->cfg.seed = seed;
    return DTA_OK;
}

dta_status dta_experiment_set_trials(dta_experiment* e, int trials) {
    if (!e || trials < 1) return DTA_ERR_INVALID_ARGUMENT;
    e->cfg.trials = trials;
    return DTA_OK;
}

dta_status dta_experiment_set_threads(dta_experiment* e, int threads) {
    if (!e || threads < 1) return DTA_ERR_INVALID_ARGUMENT;
    e->cfg.threads = threads;
    return DTA_OK;
}

dta_status dta_experiment_config_json(const dta_experiment* e, char** json_out) {
    if (!e || !json_out) return DTA_ERR_INVALID_ARGUMENT;
    *json_out = dup_string(e->cfg.to_json_text());
    return DTA_OK;
}

dta_status dta_experiment_run(const dta_experiment* e, const char* out_dir,
                              char** summary_json_out) {
    return guarded([&]() -> dta_status {
        if (!e) {
            set_error("experiment_run: bad arguments");
            return DTA_ERR_INVALID_ARGUMENT;
        }
        dta::ExperimentResult result = dta::run_experiment(e->cfg);
        if (out_dir) dta::write_outputs(result, out_dir);
        if (summary_json_out) *summary_json_out = dup_string(dta::summary_to_json(result));
        return DTA_OK;
    });
}

void dta_experiment_free(dta_experiment* e) { delete e; }

void dta_string_free(char* s) { delete[] s; }

}  // extern "C"
