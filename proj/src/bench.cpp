#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "metrics.hpp"

namespace dta {

using nlohmann::json;

namespace {

// seed streams: every random draw in an experiment descends from
// derive_seed(master, stream, sub); adding threads never shifts a stream
constexpr uint64_t kStreamTrial = 0xA1;
constexpr uint64_t kStreamInit = 0xB2;
constexpr uint64_t kStreamPattern = 0xC3;
constexpr uint64_t kStreamDesired = 0xD4;
constexpr uint64_t kStreamShuffle = 0xE5;
constexpr uint64_t kStreamSplit = 0xF6;

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

KernelKind kernel_from_string(const std::string& s) {
    if (s == "stdp") return KernelKind::Stdp;
    if (s == "psp") return KernelKind::Psp;
    if (s == "filt") return KernelKind::Filt;
    throw ParseError("unknown kernel: " + s);
}

std::string kernel_to_string(KernelKind k) {
    switch (k) {
        case KernelKind::Stdp: return "stdp";
        case KernelKind::Psp: return "psp";
        case KernelKind::Filt: return "filt";
    }
    return "psp";
}

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ParseError("unknown key '" + it.key() + "' in " + where);
    }
}

KernelKind method_kernel(Method m) {
    switch (m) {
        case Method::Psd: return KernelKind::Psp;
        case Method::Filt: return KernelKind::Filt;
        case Method::Resume: return KernelKind::Stdp;
        default: return KernelKind::Psp;
    }
}

// ---- baseline trainers (shared Widrow-Hoff update / first-error rule) ----

TrainResult train_encoding_baseline(const EncodingProblem& problem, const NeuronParams& p,
                                    const WeightVector& w0, Method method, double eta,
                                    int max_epochs, double match_tol, uint64_t seed) {
    KernelKind kernel = method_kernel(method);
    Rng rng(seed);
    TrainResult r;
    r.final_weights = w0;
    for (int epoch = 1; epoch <= max_epochs; ++epoch) {
        std::vector<int> order = rng.permutation(static_cast<int>(problem.patterns.size()));
        for (int idx : order) {
            const InputPattern& x = problem.patterns[idx];
            const SpikeTrain& y = problem.desired[idx];
            if (method == Method::FirstError)
                r.final_weights = first_error_step(p, r.final_weights, x, y, kernel, eta, match_tol);
            else
                r.final_weights = wh_step(p, r.final_weights, x, y, kernel, eta);
            MatchResult after = match_spikes(simulate(p, r.final_weights, x), y, match_tol);
            r.violations_per_iteration.push_back(static_cast<int>(after.unmatched_actual.size()));
        }
        std::vector<SpikeTrain> responses;
        std::vector<double> durations;
        for (const auto& x : problem.patterns) {
            responses.push_back(simulate(p, r.final_weights, x));
            durations.push_back(x.duration);
        }
        double acc = encoding_accuracy(responses, problem.desired, durations);
        r.accuracy_per_epoch.push_back(acc);
        r.epochs_used = epoch;
        if (acc >= 1.0) {
            r.converged = true;
            break;
        }
    }
    return r;
}

// decoding control: desired timings from the dynamic-threshold procedure, but
// the plain Widrow-Hoff update instead of the constraint solve
TrainResult train_decoding_baseline(const DecodingProblem& problem, const NeuronParams& p,
                                    const WeightVector& w0, Method method, double eta,
                                    int max_epochs, int max_bisect, uint64_t seed) {
    KernelKind kernel = method_kernel(method);
    Rng rng(seed);
    TrainResult r;
    r.final_weights = w0;
    for (int epoch = 1; epoch <= max_epochs; ++epoch) {
        std::vector<int> order = rng.permutation(static_cast<int>(problem.patterns.size()));
        for (int idx : order) {
            const InputPattern& x = problem.patterns[idx];
            int label = problem.labels[idx];
            SpikeTrain o = simulate(p, r.final_weights, x);
            if (static_cast<int>(o.size()) == label) {
                r.violations_per_iteration.push_back(0);
                continue;
            }
            ThetaDirection dir = static_cast<int>(o.size()) < label ? ThetaDirection::MoreSpikes
                                                                    : ThetaDirection::FewerSpikes;
            std::optional<double> ts;
            if (dir == ThetaDirection::MoreSpikes && x.total_spikes() == 0)
                ts = std::nullopt;
            else
                ts = find_theta_star_with_fallback(p, r.final_weights, x, dir, max_bisect);
            if (!ts) {
                ++r.skipped_iterations;
                r.violations_per_iteration.push_back(0);
                continue;
            }
            SpikeTrain y = simulate(p, r.final_weights, x, *ts);
            r.final_weights = wh_step(p, r.final_weights, x, y, kernel, eta);
            MatchResult after = match_spikes(simulate(p, r.final_weights, x), y, 1.0);
            r.violations_per_iteration.push_back(static_cast<int>(after.unmatched_actual.size()));
        }
        std::vector<int> counts;
        for (const auto& x : problem.patterns)
            counts.push_back(static_cast<int>(simulate(p, r.final_weights, x).size()));
        double acc = decoding_accuracy(counts, problem.labels);
        r.accuracy_per_epoch.push_back(acc);
        r.epochs_used = epoch;
        if (acc >= 1.0) {
            r.converged = true;
            break;
        }
    }
    return r;
}

}  // namespace

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "encode-capacity-short") return ExperimentKind::EncodeCapacityShort;
    if (s == "encode-capacity-long") return ExperimentKind::EncodeCapacityLong;
    if (s == "decode-capacity") return ExperimentKind::DecodeCapacity;
    if (s == "calpha") return ExperimentKind::CAlpha;
    if (s == "interference") return ExperimentKind::InterferenceMap;
    if (s == "iris") return ExperimentKind::Iris;
    if (s == "vrd-refit") return ExperimentKind::VrdRefit;
    throw ParseError("unknown experiment kind: " + s);
}

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::EncodeCapacityShort: return "encode-capacity-short";
        case ExperimentKind::EncodeCapacityLong: return "encode-capacity-long";
        case ExperimentKind::DecodeCapacity: return "decode-capacity";
        case ExperimentKind::CAlpha: return "calpha";
        case ExperimentKind::InterferenceMap: return "interference";
        case ExperimentKind::Iris: return "iris";
        case ExperimentKind::VrdRefit: return "vrd-refit";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "dta") return Method::Dta;
    if (s == "psd") return Method::Psd;
    if (s == "filt") return Method::Filt;
    if (s == "resume") return Method::Resume;
    if (s == "first-error") return Method::FirstError;
    throw ParseError("unknown method: " + s);
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Dta: return "dta";
        case Method::Psd: return "psd";
        case Method::Filt: return "filt";
        case Method::Resume: return "resume";
        case Method::FirstError: return "first-error";
    }
    return "?";
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    check_keys(j,
               {"kind", "neuron", "method", "eta", "dta", "pattern", "trials", "max_epochs",
                "seed", "failure_fraction", "threads", "max_loads", "n_classes", "delta_t_values",
                "trace_epochs", "iris", "refit"},
               "config");
    if (j.contains("kind")) cfg.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("method")) cfg.method = method_from_string(j.at("method").get<std::string>());
    if (j.contains("eta")) cfg.eta = j.at("eta").get<double>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
    if (j.contains("max_epochs")) cfg.max_epochs = j.at("max_epochs").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
    if (j.contains("failure_fraction")) cfg.failure_fraction = j.at("failure_fraction").get<double>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("max_loads")) cfg.max_loads = j.at("max_loads").get<int>();
    if (j.contains("n_classes")) cfg.n_classes = j.at("n_classes").get<int>();
    if (j.contains("delta_t_values"))
        cfg.delta_t_values = j.at("delta_t_values").get<std::vector<double>>();
    if (j.contains("trace_epochs")) cfg.trace_epochs = j.at("trace_epochs").get<int>();

    if (j.contains("neuron")) {
        const json& n = j.at("neuron");
        check_keys(n, {"threshold", "tau_m", "tau_s", "dt", "fire_tol", "refine_tol"}, "neuron");
        if (n.contains("threshold")) cfg.neuron.threshold = n.at("threshold").get<double>();
        if (n.contains("tau_m")) cfg.neuron.tau_m = n.at("tau_m").get<double>();
        if (n.contains("tau_s")) cfg.neuron.tau_s = n.at("tau_s").get<double>();
        if (n.contains("dt")) cfg.neuron.dt = n.at("dt").get<double>();
        if (n.contains("refine_tol")) cfg.neuron.refine_tol = n.at("refine_tol").get<double>();
        cfg.neuron.recompute_norm();
        cfg.neuron.fire_tol = n.contains("fire_tol") ? n.at("fire_tol").get<double>()
                                                     : 1e-9 * cfg.neuron.threshold;
    }
    if (j.contains("dta")) {
        const json& d = j.at("dta");
        check_keys(d,
                   {"kernel", "lb_d", "ub_d", "lb_o", "ub_o", "fallback_eta", "ineq_margin",
                    "match_tol", "objective", "max_bisect"},
                   "dta");
        if (d.contains("kernel")) cfg.dta.kernel = kernel_from_string(d.at("kernel").get<std::string>());
        if (d.contains("lb_d")) cfg.dta.lb_d = d.at("lb_d").get<double>();
        if (d.contains("ub_d")) cfg.dta.ub_d = d.at("ub_d").get<double>();
        if (d.contains("lb_o")) cfg.dta.lb_o = d.at("lb_o").get<double>();
        if (d.contains("ub_o")) cfg.dta.ub_o = d.at("ub_o").get<double>();
        if (d.contains("fallback_eta")) cfg.dta.fallback_eta = d.at("fallback_eta").get<double>();
        if (d.contains("ineq_margin")) cfg.dta.ineq_margin = d.at("ineq_margin").get<double>();
        if (d.contains("match_tol")) cfg.dta.match_tol = d.at("match_tol").get<double>();
        if (d.contains("max_bisect")) cfg.dta.max_bisect = d.at("max_bisect").get<int>();
        if (d.contains("objective")) {
            std::string o = d.at("objective").get<std::string>();
            if (o == "feasibility")
                cfg.dta.objective = DtaConfig::Objective::Feasibility;
            else if (o == "min-abs-eta")
                cfg.dta.objective = DtaConfig::Objective::MinAbsEta;
            else
                throw ParseError("unknown dta objective: " + o);
        }
    }
    if (j.contains("pattern")) {
        const json& p = j.at("pattern");
        check_keys(p, {"n_channels", "duration", "nu_in", "nu_out"}, "pattern");
        if (p.contains("n_channels")) cfg.pattern.n_channels = p.at("n_channels").get<int>();
        if (p.contains("duration")) cfg.pattern.duration = p.at("duration").get<double>();
        if (p.contains("nu_in")) cfg.pattern.nu_in = p.at("nu_in").get<double>();
        if (p.contains("nu_out")) cfg.pattern.nu_out = p.at("nu_out").get<double>();
    }
    if (j.contains("iris")) {
        const json& s = j.at("iris");
        check_keys(s, {"path", "fields_per_feature", "beta", "window", "target_spikes",
                       "train_fraction"},
                   "iris");
        if (s.contains("path")) cfg.iris.path = s.at("path").get<std::string>();
        if (s.contains("fields_per_feature"))
            cfg.iris.fields_per_feature = s.at("fields_per_feature").get<int>();
        if (s.contains("beta")) cfg.iris.beta = s.at("beta").get<double>();
        if (s.contains("window")) cfg.iris.window = s.at("window").get<double>();
        if (s.contains("target_spikes")) cfg.iris.target_spikes = s.at("target_spikes").get<int>();
        if (s.contains("train_fraction"))
            cfg.iris.train_fraction = s.at("train_fraction").get<double>();
    }
    if (j.contains("refit")) {
        const json& s = j.at("refit");
        check_keys(s, {"n_templates", "t_min", "t_max", "sigma_min", "sigma_max", "rate"}, "refit");
        if (s.contains("n_templates")) cfg.refit.n_templates = s.at("n_templates").get<int>();
        if (s.contains("t_min")) cfg.refit.t_min = s.at("t_min").get<double>();
        if (s.contains("t_max")) cfg.refit.t_max = s.at("t_max").get<double>();
        if (s.contains("sigma_min")) cfg.refit.sigma_min = s.at("sigma_min").get<double>();
        if (s.contains("sigma_max")) cfg.refit.sigma_max = s.at("sigma_max").get<double>();
        if (s.contains("rate")) cfg.refit.rate = s.at("rate").get<double>();
    }
    if (cfg.trials < 1) throw ParseError("config: trials must be >= 1");
    if (cfg.max_epochs < 1) throw ParseError("config: max_epochs must be >= 1");
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["kind"] = to_string(kind);
    j["method"] = to_string(method);
    j["eta"] = eta;
    j["trials"] = trials;
    j["max_epochs"] = max_epochs;
    j["seed"] = seed;
    j["failure_fraction"] = failure_fraction;
    j["threads"] = threads;
    j["max_loads"] = max_loads;
    j["n_classes"] = n_classes;
    j["trace_epochs"] = trace_epochs;
    if (!delta_t_values.empty()) j["delta_t_values"] = delta_t_values;
    j["neuron"] = {{"threshold", neuron.threshold}, {"tau_m", neuron.tau_m},
                   {"tau_s", neuron.tau_s},         {"dt", neuron.dt},
                   {"fire_tol", neuron.fire_tol},   {"refine_tol", neuron.refine_tol}};
    j["dta"] = {{"kernel", kernel_to_string(dta.kernel)},
                {"lb_d", dta.lb_d},
                {"ub_d", dta.ub_d},
                {"lb_o", dta.lb_o},
                {"ub_o", dta.ub_o},
                {"fallback_eta", dta.fallback_eta},
                {"match_tol", dta.match_tol},
                {"max_bisect", dta.max_bisect},
                {"objective", dta.objective == DtaConfig::Objective::Feasibility ? "feasibility"
                                                                                 : "min-abs-eta"}};
    if (dta.ineq_margin) j["dta"]["ineq_margin"] = *dta.ineq_margin;
    j["pattern"] = {{"n_channels", pattern.n_channels},
                    {"duration", pattern.duration},
                    {"nu_in", pattern.nu_in},
                    {"nu_out", pattern.nu_out}};
    j["iris"] = {{"path", iris.path},
                 {"fields_per_feature", iris.fields_per_feature},
                 {"beta", iris.beta},
                 {"window", iris.window},
                 {"target_spikes", iris.target_spikes},
                 {"train_fraction", iris.train_fraction}};
    j["refit"] = {{"n_templates", refit.n_templates}, {"t_min", refit.t_min},
                  {"t_max", refit.t_max},             {"sigma_min", refit.sigma_min},
                  {"sigma_max", refit.sigma_max},     {"rate", refit.rate}};
    return j.dump(2);
}

double theoretical_capacity(double n_channels, double nu_out, double tau_m, double tau_s) {
    if (!(n_channels > 0) || !(nu_out > 0) || !(tau_m > 0) || !(tau_s > 0))
        throw Error("theoretical_capacity: arguments must be positive");
    double tau = std::sqrt(tau_m * tau_s);
    double q = nu_out * tau / (1.0 + nu_out * tau);
    double denom = (-2.0 * nu_out * tau / (1.0 + nu_out * tau)) * std::log(q);
    if (denom < 1e-12) return std::numeric_limits<double>::infinity();
    return n_channels * tau / denom;
}

namespace {

struct CapacityState {
    WeightVector weights;
    uint64_t trial_seed = 0;
};

TrainResult dispatch_encoding(const ExperimentConfig& cfg, const EncodingProblem& problem,
                              const NeuronParams& p, const WeightVector& w0, int epoch_cap,
                              uint64_t shuffle_seed) {
    if (cfg.method == Method::Dta) {
        DtaConfig dc = cfg.dta;
        dc.max_epochs = epoch_cap;
        return train_encoding(problem, p, w0, dc, shuffle_seed);
    }
    return train_encoding_baseline(problem, p, w0, cfg.method, cfg.eta, epoch_cap,
                                   cfg.dta.match_tol, shuffle_seed);
}

TrainResult dispatch_decoding(const ExperimentConfig& cfg, const DecodingProblem& problem,
                              const NeuronParams& p, const WeightVector& w0, int epoch_cap,
                              uint64_t shuffle_seed) {
    if (cfg.method == Method::Dta) {
        DtaConfig dc = cfg.dta;
        dc.max_epochs = epoch_cap;
        return train_decoding(problem, p, w0, dc, shuffle_seed);
    }
    return train_decoding_baseline(problem, p, w0, cfg.method, cfg.eta, epoch_cap,
                                   cfg.dta.max_bisect, shuffle_seed);
}

WeightVector initial_weights(uint64_t trial_seed, int n) {
    Rng rng(derive_seed(trial_seed, kStreamInit));
    WeightVector w(n);
    for (auto& v : w) v = rng.normal(0.01, 0.01);
    return w;
}

}  // namespace

ExperimentResult run_encode_capacity(const ExperimentConfig& cfg, EncodeMode mode) {
    ExperimentResult res;
    res.config = cfg;
    const std::string exp_id = to_string(cfg.kind) + ":" + to_string(cfg.method);
    NeuronParams p = cfg.neuron;
    p.n_channels = cfg.pattern.n_channels;

    std::vector<CapacityState> st(cfg.trials);
    for (int t = 0; t < cfg.trials; ++t) {
        st[t].trial_seed = derive_seed(cfg.seed, kStreamTrial, t);
        st[t].weights = initial_weights(st[t].trial_seed, p.n_channels);
    }

    int last_majority_load = 0;
    int stop_load = 0;
    for (int load = 1; load <= cfg.max_loads; ++load) {
        std::vector<TrialRecord> batch(cfg.trials);
        std::vector<std::vector<double>> accs(cfg.trials);
        parallel_for(cfg.trials, cfg.threads, [&](int t) {
            double t0 = now_ms();
            EncodingProblem problem;
            if (mode == EncodeMode::ShortPatterns) {
                for (int q = 0; q < load; ++q) {
                    PoissonSpec ps{cfg.pattern.n_channels, cfg.pattern.duration, cfg.pattern.nu_in,
                                   derive_seed(st[t].trial_seed, kStreamPattern, q)};
                    problem.patterns.push_back(poisson_pattern(ps));
                    Rng drng(derive_seed(st[t].trial_seed, kStreamDesired, q));
                    problem.desired.push_back(
                        poisson_train(cfg.pattern.duration, cfg.pattern.nu_out, drng));
                }
            } else {
                double T = 1000.0 + 100.0 * (load - 1);
                PoissonSpec ps{cfg.pattern.n_channels, T, cfg.pattern.nu_in,
                               derive_seed(st[t].trial_seed, kStreamPattern, load)};
                problem.patterns.push_back(poisson_pattern(ps));
                Rng drng(derive_seed(st[t].trial_seed, kStreamDesired, load));
                problem.desired.push_back(poisson_train(T, cfg.pattern.nu_out, drng));
            }
            TrainResult tr = dispatch_encoding(cfg, problem, p, st[t].weights, cfg.max_epochs,
                                               derive_seed(st[t].trial_seed, kStreamShuffle, load));
            st[t].weights = tr.final_weights;
            TrialRecord& rec = batch[t];
            rec.experiment = exp_id;
            rec.trial = t;
            rec.seed = st[t].trial_seed;
            rec.load = mode == EncodeMode::ShortPatterns
                           ? static_cast<double>(load)
                           : problem.patterns.front().duration;
            rec.converged = tr.converged;
            rec.epochs_used = tr.epochs_used;
            rec.accuracy = tr.accuracy_per_epoch.empty() ? 0.0 : tr.accuracy_per_epoch.back();
            rec.fallback_count = tr.fallback_count;
            rec.wall_ms = now_ms() - t0;
            accs[t] = tr.accuracy_per_epoch;
        });
        for (int t = 0; t < cfg.trials; ++t) {
            res.records.push_back(batch[t]);
            for (size_t e = 0; e < accs[t].size(); ++e)
                res.curves.push_back(
                    {"accuracy", t, batch[t].load, static_cast<int>(e + 1), accs[t][e]});
        }
        int failed = 0;
        for (const auto& r : batch) failed += r.converged ? 0 : 1;
        double frac = static_cast<double>(failed) / cfg.trials;
        if (frac >= cfg.failure_fraction) {
            stop_load = load;
            break;
        }
        last_majority_load = load;
        stop_load = load;
    }

    double t_alpha = mode == EncodeMode::ShortPatterns
                         ? last_majority_load * cfg.pattern.duration
                         : (last_majority_load > 0 ? 1000.0 + 100.0 * (last_majority_load - 1) : 0.0);
    res.summary["t_alpha"] = t_alpha;
    res.summary["last_converged_load"] = last_majority_load;
    res.summary["first_failed_load"] = stop_load;
    res.summary["theoretical_t_alpha"] = theoretical_capacity(
        cfg.pattern.n_channels, cfg.pattern.nu_out, cfg.neuron.tau_m, cfg.neuron.tau_s);
    res.summary_str["mode"] = mode == EncodeMode::ShortPatterns ? "short" : "long";
    return res;
}

ExperimentResult run_decode_capacity(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.config = cfg;
    const std::string exp_id = to_string(cfg.kind) + ":" + to_string(cfg.method);
    NeuronParams p = cfg.neuron;
    p.n_channels = cfg.pattern.n_channels;
    const int C = cfg.n_classes;

    std::vector<CapacityState> st(cfg.trials);
    for (int t = 0; t < cfg.trials; ++t) {
        st[t].trial_seed = derive_seed(cfg.seed, kStreamTrial, t);
        st[t].weights = initial_weights(st[t].trial_seed, p.n_channels);
    }

    int last_majority_load = 0;
    int stop_load = 0;
    for (int load = 1; load <= cfg.max_loads; ++load) {
        std::vector<TrialRecord> batch(cfg.trials);
        std::vector<std::vector<double>> accs(cfg.trials);
        parallel_for(cfg.trials, cfg.threads, [&](int t) {
            double t0 = now_ms();
            DecodingProblem problem;
            for (int c = 1; c <= C; ++c) {
                for (int q = 0; q < load; ++q) {
                    PoissonSpec ps{cfg.pattern.n_channels, cfg.pattern.duration, cfg.pattern.nu_in,
                                   derive_seed(st[t].trial_seed, kStreamPattern,
                                               static_cast<uint64_t>(c) * 100000 + q)};
                    problem.patterns.push_back(poisson_pattern(ps));
                    problem.labels.push_back(c);
                }
            }
            TrainResult tr = dispatch_decoding(cfg, problem, p, st[t].weights, cfg.max_epochs,
                                               derive_seed(st[t].trial_seed, kStreamShuffle, load));
            st[t].weights = tr.final_weights;
            TrialRecord& rec = batch[t];
            rec.experiment = exp_id;
            rec.trial = t;
            rec.seed = st[t].trial_seed;
            rec.load = static_cast<double>(C * load);
            rec.converged = tr.converged;
            rec.epochs_used = tr.epochs_used;
            rec.accuracy = tr.accuracy_per_epoch.empty() ? 0.0 : tr.accuracy_per_epoch.back();
            rec.fallback_count = tr.fallback_count;
            rec.wall_ms = now_ms() - t0;
            accs[t] = tr.accuracy_per_epoch;
        });
        for (int t = 0; t < cfg.trials; ++t) {
            res.records.push_back(batch[t]);
            for (size_t e = 0; e < accs[t].size(); ++e)
                res.curves.push_back(
                    {"accuracy", t, batch[t].load, static_cast<int>(e + 1), accs[t][e]});
        }
        int failed = 0;
        for (const auto& r : batch) failed += r.converged ? 0 : 1;
        if (static_cast<double>(failed) / cfg.trials >= cfg.failure_fraction) {
            stop_load = load;
            break;
        }
        last_majority_load = load;
        stop_load = load;
    }
    res.summary["p_alpha"] = static_cast<double>(C * last_majority_load);
    res.summary["last_converged_load"] = last_majority_load;
    res.summary["first_failed_load"] = stop_load;
    return res;
}

ExperimentResult run_calpha(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.config = cfg;
    const std::string exp_id = to_string(cfg.kind) + ":" + to_string(cfg.method);
    NeuronParams p = cfg.neuron;
    p.n_channels = cfg.pattern.n_channels;

    std::vector<CapacityState> st(cfg.trials);
    for (int t = 0; t < cfg.trials; ++t) {
        st[t].trial_seed = derive_seed(cfg.seed, kStreamTrial, t);
        st[t].weights = initial_weights(st[t].trial_seed, p.n_channels);
    }

    int last_majority_c = 0;
    int stop_c = 0;
    for (int c_count = 1; c_count <= cfg.max_loads; ++c_count) {
        std::vector<TrialRecord> batch(cfg.trials);
        parallel_for(cfg.trials, cfg.threads, [&](int t) {
            double t0 = now_ms();
            DecodingProblem problem;
            for (int c = 1; c <= c_count; ++c) {
                PoissonSpec ps{cfg.pattern.n_channels, cfg.pattern.duration, cfg.pattern.nu_in,
                               derive_seed(st[t].trial_seed, kStreamPattern, c)};
                problem.patterns.push_back(poisson_pattern(ps));
                problem.labels.push_back(c);
            }
            TrainResult tr = dispatch_decoding(cfg, problem, p, st[t].weights, cfg.max_epochs,
                                               derive_seed(st[t].trial_seed, kStreamShuffle, c_count));
            st[t].weights = tr.final_weights;
            TrialRecord& rec = batch[t];
            rec.experiment = exp_id;
            rec.trial = t;
            rec.seed = st[t].trial_seed;
            rec.load = c_count;
            rec.converged = tr.converged;
            rec.epochs_used = tr.epochs_used;
            rec.accuracy = tr.accuracy_per_epoch.empty() ? 0.0 : tr.accuracy_per_epoch.back();
            rec.fallback_count = tr.fallback_count;
            rec.wall_ms = now_ms() - t0;
        });
        for (int t = 0; t < cfg.trials; ++t) res.records.push_back(batch[t]);
        int failed = 0;
        for (const auto& r : batch) failed += r.converged ? 0 : 1;
        if (static_cast<double>(failed) / cfg.trials >= cfg.failure_fraction) {
            stop_c = c_count;
            break;
        }
        last_majority_c = c_count;
        stop_c = c_count;
    }
    double tau = std::sqrt(cfg.neuron.tau_m * cfg.neuron.tau_s);
    res.summary["c_alpha"] = last_majority_c;
    res.summary["first_failed_load"] = stop_c;
    res.summary["nu_in_tau"] = cfg.pattern.nu_in * tau;
    return res;
}

ExperimentResult run_interference_map(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.config = cfg;
    std::vector<double> sweep = cfg.delta_t_values;
    if (sweep.empty())
        for (int d = 10; d <= 100; d += 10) sweep.push_back(d);

    struct Cell {
        InterferenceTrace dta, psd;
    };
    std::vector<Cell> cells(sweep.size());
    parallel_for(static_cast<int>(sweep.size()), cfg.threads, [&](int i) {
        ToyProblem tp = ToyProblem::make(sweep[i]);
        cells[i].dta = interference_trace_full(tp, ToyRule::Dta, cfg.trace_epochs, cfg.eta, cfg.dta);
        cells[i].psd = interference_trace_full(tp, ToyRule::Psd, cfg.trace_epochs, cfg.eta, cfg.dta);
    });

    for (size_t i = 0; i < sweep.size(); ++i) {
        auto emit = [&](const char* name, const InterferenceTrace& tr) {
            TrialRecord rec;
            rec.experiment = std::string(to_string(cfg.kind)) + ":" + name;
            rec.trial = 0;
            rec.seed = cfg.seed;
            rec.load = sweep[i];
            rec.converged = tr.converged;
            rec.epochs_used = tr.converged ? tr.stop_epoch : cfg.trace_epochs;
            rec.accuracy = tr.w1_dist.back();
            rec.fallback_count = 0;
            res.records.push_back(rec);
            for (size_t e = 0; e < tr.w1_dist.size(); ++e) {
                res.curves.push_back({std::string(name) + "_w1", 0, sweep[i],
                                      static_cast<int>(e + 1), tr.w1_dist[e]});
                res.curves.push_back({std::string(name) + "_w2", 0, sweep[i],
                                      static_cast<int>(e + 1), tr.w2_dist[e]});
            }
        };
        emit("dta", cells[i].dta);
        emit("psd", cells[i].psd);
    }
    int psd_nonconverged = 0, dta_converged = 0;
    for (size_t i = 0; i < sweep.size(); ++i) {
        psd_nonconverged += cells[i].psd.converged ? 0 : 1;
        dta_converged += cells[i].dta.converged ? 1 : 0;
    }
    res.summary["psd_nonconverged_cells"] = psd_nonconverged;
    res.summary["dta_converged_cells"] = dta_converged;
    res.summary["cells"] = static_cast<double>(sweep.size());
    return res;
}

ExperimentResult run_iris(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.config = cfg;
    const std::string exp_id = to_string(cfg.kind) + ":" + to_string(cfg.method);
    Dataset ds = load_iris(cfg.iris.path);
    const int n_classes = static_cast<int>(ds.label_names.size());

    struct TrialOut {
        TrialRecord rec;
        std::vector<CurvePoint> curves;
        double train_acc = 0.0, test_acc = 0.0;
    };
    std::vector<TrialOut> outs(cfg.trials);

    parallel_for(cfg.trials, cfg.threads, [&](int t) {
        double t0 = now_ms();
        uint64_t trial_seed = derive_seed(cfg.seed, kStreamTrial, t);
        Rng split_rng(derive_seed(trial_seed, kStreamSplit));
        Split sp = split_dataset(ds, cfg.iris.train_fraction, split_rng);

        std::vector<std::vector<double>> train_rows;
        for (int idx : sp.train) train_rows.push_back(ds.features[idx]);
        PopulationSpec spec = fit_population_spec(train_rows, cfg.iris.fields_per_feature,
                                                  cfg.iris.beta, cfg.iris.window);

        std::vector<InputPattern> train_x, test_x;
        std::vector<int> train_y, test_y;
        for (int idx : sp.train) {
            train_x.push_back(population_encode(ds.features[idx], spec));
            train_y.push_back(ds.labels[idx]);
        }
        for (int idx : sp.test) {
            test_x.push_back(population_encode(ds.features[idx], spec));
            test_y.push_back(ds.labels[idx]);
        }

        NeuronParams p = cfg.neuron;
        p.n_channels = static_cast<int>(train_x.front().channels.size());

        DtaConfig dc = cfg.dta;
        dc.max_epochs = cfg.max_epochs;

        auto wta_accuracy = [&](const std::vector<WeightVector>& ws,
                                const std::vector<InputPattern>& xs, const std::vector<int>& ys) {
            int hits = 0;
            for (size_t i = 0; i < xs.size(); ++i) {
                std::vector<int> counts(ws.size());
                for (size_t k = 0; k < ws.size(); ++k)
                    counts[k] = static_cast<int>(simulate(p, ws[k], xs[i]).size());
                if (wta_predict(counts) == ys[i]) ++hits;
            }
            return static_cast<double>(hits) / static_cast<double>(xs.size());
        };

        TrialOut& out = outs[t];
        EpochObserver observer = [&](int epoch, const std::vector<WeightVector>& ws) {
            out.curves.push_back(
                {"train_accuracy", t, 0.0, epoch, wta_accuracy(ws, train_x, train_y)});
            out.curves.push_back({"test_accuracy", t, 0.0, epoch, wta_accuracy(ws, test_x, test_y)});
        };

        WtaTrainOutput wta =
            train_wta_network(train_x, train_y, n_classes, cfg.iris.target_spikes, p, dc,
                              derive_seed(trial_seed, kStreamShuffle), observer);

        out.train_acc = wta_accuracy(wta.weights, train_x, train_y);
        out.test_acc = wta_accuracy(wta.weights, test_x, test_y);
        bool all_conv = true;
        int epochs = 0, fallbacks = 0;
        for (const auto& r : wta.results) {
            all_conv = all_conv && r.converged;
            epochs = std::max(epochs, r.epochs_used);
            fallbacks += r.fallback_count;
        }
        out.rec = {exp_id,
                   t,
                   trial_seed,
                   static_cast<double>(train_x.size()),
                   all_conv,
                   epochs,
                   out.test_acc,
                   fallbacks,
                   now_ms() - t0};
    });

    double mean_train = 0.0, mean_test = 0.0;
    for (const auto& o : outs) {
        mean_train += o.train_acc;
        mean_test += o.test_acc;
    }
    mean_train /= cfg.trials;
    mean_test /= cfg.trials;
    double var_train = 0.0, var_test = 0.0;
    for (const auto& o : outs) {
        var_train += (o.train_acc - mean_train) * (o.train_acc - mean_train);
        var_test += (o.test_acc - mean_test) * (o.test_acc - mean_test);
    }
    if (cfg.trials > 1) {
        var_train /= cfg.trials - 1;
        var_test /= cfg.trials - 1;
    }
    for (auto& o : outs) {
        res.records.push_back(o.rec);
        for (auto& c : o.curves) res.curves.push_back(c);
    }
    res.summary["mean_train_accuracy"] = mean_train;
    res.summary["mean_test_accuracy"] = mean_test;
    res.summary["sd_train_accuracy"] = std::sqrt(var_train);
    res.summary["sd_test_accuracy"] = std::sqrt(var_test);
    return res;
}

ExperimentResult run_vrd_refit(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.config = cfg;
    const std::string exp_id = to_string(cfg.kind);
    Rng rng(derive_seed(cfg.seed, kStreamTrial));
    double s_dd = 0, s_dt = 0, s_tt = 0, s_dy = 0, s_ty = 0;
    int rows = 0;
    double ss_res_acc = 0.0;
    std::vector<std::array<double, 3>> data;
    for (int i = 0; i < cfg.refit.n_templates; ++i) {
        double T = rng.uniform(cfg.refit.t_min, cfg.refit.t_max);
        SpikeTrain tpl = poisson_train(T, cfg.refit.rate, rng);
        double sigma = rng.uniform(cfg.refit.sigma_min, cfg.refit.sigma_max);
        if (tpl.empty()) continue;
        SpikeTrain jit = tpl;
        double mean_disp = 0.0;
        for (auto& s : jit) {
            double d = rng.normal(0.0, sigma);
            s += d;
            mean_disp += std::abs(d);
        }
        mean_disp /= static_cast<double>(jit.size());
        std::sort(jit.begin(), jit.end());
        double d = vrd(tpl, jit);
        data.push_back({mean_disp, T, d});
        TrialRecord rec;
        rec.experiment = exp_id;
        rec.trial = i;
        rec.seed = cfg.seed;
        rec.load = T;
        rec.converged = true;
        rec.epochs_used = 0;
        rec.accuracy = d;
        res.records.push_back(rec);
        ++rows;
    }
    // two-coefficient least squares: vrd ~ c1 * dt + c2 * T
    for (const auto& r : data) {
        s_dd += r[0] * r[0];
        s_dt += r[0] * r[1];
        s_tt += r[1] * r[1];
        s_dy += r[0] * r[2];
        s_ty += r[1] * r[2];
    }
    double det = s_dd * s_tt - s_dt * s_dt;
    if (std::abs(det) < 1e-12) throw Error("vrd refit: singular normal equations");
    double c1 = (s_dy * s_tt - s_ty * s_dt) / det;
    double c2 = (s_dd * s_ty - s_dt * s_dy) / det;
    for (const auto& r : data) {
        double e = r[2] - c1 * r[0] - c2 * r[1];
        ss_res_acc += e * e;
    }
    res.summary["c1_delta_t"] = c1;
    res.summary["c2_duration"] = c2;
    res.summary["rms_residual"] = rows > 0 ? std::sqrt(ss_res_acc / rows) : 0.0;
    res.summary["rows"] = rows;
    return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::EncodeCapacityShort:
            return run_encode_capacity(cfg, EncodeMode::ShortPatterns);
        case ExperimentKind::EncodeCapacityLong:
            return run_encode_capacity(cfg, EncodeMode::LongPattern);
        case ExperimentKind::DecodeCapacity:
            return run_decode_capacity(cfg);
        case ExperimentKind::CAlpha:
            return run_calpha(cfg);
        case ExperimentKind::InterferenceMap:
            return run_interference_map(cfg);
        case ExperimentKind::Iris:
            return run_iris(cfg);
        case ExperimentKind::VrdRefit:
            return run_vrd_refit(cfg);
    }
    throw Error("unknown experiment kind");
}

std::string records_to_csv(const std::vector<TrialRecord>& records) {
    std::string out = "experiment,trial,seed,load,converged,epochs_used,accuracy,fallback_count\n";
    for (const auto& r : records) {
        out += csv_quote(r.experiment);
        out += ',' + std::to_string(r.trial);
        out += ',' + std::to_string(r.seed);
        out += ',' + fmt_double(r.load);
        out += r.converged ? ",1" : ",0";
        out += ',' + std::to_string(r.epochs_used);
        out += ',' + fmt_double(r.accuracy);
        out += ',' + std::to_string(r.fallback_count);
        out += '\n';
    }
    return out;
}

std::string curves_to_csv(const std::vector<CurvePoint>& curves) {
    std::string out = "series,trial,load,epoch,value\n";
    for (const auto& c : curves) {
        out += csv_quote(c.series);
        out += ',' + std::to_string(c.trial);
        out += ',' + fmt_double(c.load);
        out += ',' + std::to_string(c.epoch);
        out += ',' + fmt_double(c.value);
        out += '\n';
    }
    return out;
}

std::string summary_to_json(const ExperimentResult& result) {
    json j;
    j["kind"] = to_string(result.config.kind);
    j["method"] = to_string(result.config.method);
    j["seed"] = result.config.seed;
    j["trials"] = result.config.trials;
    j["records"] = result.records.size();
    double wall = 0.0;
    for (const auto& r : result.records) wall += r.wall_ms;
    j["total_trial_wall_ms"] = wall;
    for (const auto& [k, v] : result.summary) j[k] = v;
    for (const auto& [k, v] : result.summary_str) j[k] = v;
    return j.dump(2) + "\n";
}

void write_outputs(const ExperimentResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
        if (!f) throw Error("cannot write output file: " + name);
        f << text;
    };
    write("records.csv", records_to_csv(result.records));
    write("curves.csv", curves_to_csv(result.curves));
    write("summary.json", summary_to_json(result));
}

}  // namespace dta
