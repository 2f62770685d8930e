#include "datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace dta {

SpikeTrain poisson_train(double duration, double rate, Rng& rng) {
    if (!(duration > 0.0) || rate < 0.0) throw Error("poisson_train: bad spec");
    SpikeTrain out;
    if (rate == 0.0) return out;
    double t = 0.0;
    for (;;) {
        t += rng.exponential(rate);
        if (t > duration) break;
        out.push_back(t);
    }
    return out;
}

InputPattern poisson_pattern(const PoissonSpec& spec) {
    if (spec.n_channels < 1) throw Error("poisson_pattern: need at least one channel");
    Rng rng(spec.seed);
    InputPattern x;
    x.duration = spec.duration;
    x.channels.resize(spec.n_channels);
    for (auto& ch : x.channels) ch = poisson_train(spec.duration, spec.rate, rng);
    return x;
}

void PopulationSpec::validate() const {
    if (fields_per_feature < 3) throw Error("population spec: need M >= 3");
    if (!(beta >= 1.0 && beta <= 2.0)) throw Error("population spec: beta in [1, 2]");
    if (!(window > 0.0)) throw Error("population spec: window must be positive");
    if (feature_min.size() != feature_max.size() || feature_min.empty())
        throw Error("population spec: feature ranges not configured");
    for (size_t f = 0; f < feature_min.size(); ++f)
        if (!(feature_max[f] > feature_min[f]))
            throw Error("population spec: feature max must exceed min");
}

double PopulationSpec::center(size_t feature, int j) const {
    double span = feature_max[feature] - feature_min[feature];
    return feature_min[feature] +
           ((2.0 * j - 3.0) / 2.0) * (span / (fields_per_feature - 2));
}

double PopulationSpec::sigma(size_t feature) const {
    double span = feature_max[feature] - feature_min[feature];
    return span / (beta * (fields_per_feature - 2));
}

PopulationSpec fit_population_spec(const std::vector<std::vector<double>>& rows,
                                   int fields_per_feature, double beta, double window) {
    if (rows.empty()) throw Error("fit_population_spec: empty data");
    size_t nf = rows.front().size();
    PopulationSpec spec;
    spec.fields_per_feature = fields_per_feature;
    spec.beta = beta;
    spec.window = window;
    spec.feature_min.assign(nf, std::numeric_limits<double>::infinity());
    spec.feature_max.assign(nf, -std::numeric_limits<double>::infinity());
    for (const auto& r : rows) {
        if (r.size() != nf) throw Error("fit_population_spec: ragged rows");
        for (size_t f = 0; f < nf; ++f) {
            spec.feature_min[f] = std::min(spec.feature_min[f], r[f]);
            spec.feature_max[f] = std::max(spec.feature_max[f], r[f]);
        }
    }
    spec.validate();
    return spec;
}

InputPattern population_encode(const std::vector<double>& features, const PopulationSpec& spec) {
    spec.validate();
    if (features.size() != spec.feature_min.size())
        throw Error("population_encode: feature count mismatch");
    InputPattern x;
    x.duration = spec.window;
    x.channels.reserve(features.size() * spec.fields_per_feature);
    for (size_t f = 0; f < features.size(); ++f) {
        double v = features[f];
        if (!std::isfinite(v)) throw Error("population_encode: non-finite feature");
        double sg = spec.sigma(f);
        for (int j = 1; j <= spec.fields_per_feature; ++j) {
            double mu = spec.center(f, j);
            double g = std::exp(-(v - mu) * (v - mu) / (2.0 * sg * sg));
            x.channels.push_back({spec.window - g * spec.window});
        }
    }
    return x;
}

std::vector<std::optional<double>> latency_encode(const std::vector<double>& activations,
                                                  double window) {
    if (!(window > 0.0)) throw Error("latency_encode: window must be positive");
    std::vector<std::optional<double>> out;
    out.reserve(activations.size());
    for (double a : activations) {
        if (!(a >= 0.0 && a <= 1.0)) throw Error("latency_encode: activation outside [0, 1]");
        if (a == 0.0)
            out.push_back(std::nullopt);
        else
            out.push_back(window - window * a);
    }
    return out;
}

Dataset load_iris(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file: " + path);
    Dataset ds;
    std::map<std::string, int> label_ids;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) continue;  // header
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<double> row;
        std::string cell;
        for (int c = 0; c < 4; ++c) {
            if (!std::getline(ss, cell, ','))
                throw ParseError("iris row " + std::to_string(line_no) + ": too few columns");
            try {
                size_t pos = 0;
                double v = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument(cell);
                row.push_back(v);
            } catch (const std::exception&) {
                throw ParseError("iris row " + std::to_string(line_no) + ": bad number '" + cell +
                                 "'");
            }
        }
        std::string label;
        if (!std::getline(ss, label))
            throw ParseError("iris row " + std::to_string(line_no) + ": missing label");
        auto [it, inserted] = label_ids.try_emplace(label, static_cast<int>(ds.label_names.size()));
        if (inserted) ds.label_names.push_back(label);
        ds.features.push_back(std::move(row));
        ds.labels.push_back(it->second);
    }
    if (ds.features.empty()) throw ParseError("iris file has no data rows: " + path);
    return ds;
}

Split split_dataset(const Dataset& ds, double fraction, Rng& rng) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error("split: fraction must be in (0, 1)");
    int n_classes = 0;
    for (int l : ds.labels) n_classes = std::max(n_classes, l + 1);
    std::vector<std::vector<int>> per_class(n_classes);
    for (size_t i = 0; i < ds.labels.size(); ++i)
        per_class[ds.labels[i]].push_back(static_cast<int>(i));
    Split sp;
    for (auto& idx : per_class) {
        rng.shuffle(idx);
        size_t n_train = static_cast<size_t>(std::llround(fraction * static_cast<double>(idx.size())));
        for (size_t i = 0; i < idx.size(); ++i)
            (i < n_train ? sp.train : sp.test).push_back(idx[i]);
    }
    std::sort(sp.train.begin(), sp.train.end());
    std::sort(sp.test.begin(), sp.test.end());
    return sp;
}

}  // namespace dta
