#include "lava/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lava/error.hpp"

namespace lava {

std::vector<double> locality_similarity(const FloatMatrix& correlations, std::size_t reference,
                                        const std::optional<std::vector<std::size_t>>& pair_subset) {
    if (reference >= correlations.rows()) {
        throw ParameterError("reference locality out of range");
    }
    std::vector<std::size_t> cols;
    if (pair_subset) {
        if (pair_subset->empty()) {
            throw ParameterError("pair subset is empty");
        }
        for (const auto p : *pair_subset) {
            if (p >= correlations.cols()) {
                throw ParameterError("pair id " + std::to_string(p) + " out of range");
            }
        }
        cols = *pair_subset;
    } else {
        cols.resize(correlations.cols());
        std::iota(cols.begin(), cols.end(), 0);
    }
    const auto ref = correlations.row(reference);
    double ref_norm = 0.0;
    for (const auto c : cols) {
        ref_norm += static_cast<double>(ref[c]) * ref[c];
    }
    std::vector<double> out(correlations.rows(), 0.0);
    for (std::size_t i = 0; i < correlations.rows(); ++i) {
        const auto row = correlations.row(i);
        double dot = 0.0;
        double norm = 0.0;
        for (const auto c : cols) {
            dot += static_cast<double>(ref[c]) * row[c];
            norm += static_cast<double>(row[c]) * row[c];
        }
        if (ref_norm > 0.0 && norm > 0.0) {
            out[i] = dot / std::sqrt(ref_norm * norm);
        }
    }
    return out;
}

double shannon_entropy_bits(std::span<const double> probabilities) {
    double h = 0.0;
    for (const double p : probabilities) {
        if (p > 0.0) {
            h -= p * std::log2(p);
        }
    }
    return std::max(0.0, h);
}

PresenceStats presence_entropy(const AmfModel& model, double presence_floor) {
    PresenceStats stats;
    stats.presence_floor = presence_floor;
    const auto& p = model.presences;
    std::vector<double> retained_values;
    std::vector<double> scaled(p.cols());
    for (std::size_t i = 0; i < p.rows(); ++i) {
        const auto row = p.row(i);
        const double sum = std::accumulate(row.begin(), row.end(), 0.0);
        stats.summed_presence.push_back(sum);
        if (sum < presence_floor || sum <= 0.0) {
            stats.entropy_bits.emplace_back(std::nullopt);
            continue;
        }
        for (std::size_t m = 0; m < row.size(); ++m) {
            scaled[m] = row[m] / sum;
        }
        const double h = std::min(shannon_entropy_bits(scaled), std::log2(static_cast<double>(p.cols())));
        stats.entropy_bits.emplace_back(h);
        retained_values.push_back(h);
    }
    stats.retained = retained_values.size();
    stats.empty = retained_values.empty();
    if (!stats.empty) {
        stats.mean = std::accumulate(retained_values.begin(), retained_values.end(), 0.0) /
                     static_cast<double>(retained_values.size());
        double s = 0.0;
        for (const double h : retained_values) {
            s += (h - stats.mean) * (h - stats.mean);
        }
        stats.std = retained_values.size() > 1 ? std::sqrt(s / static_cast<double>(retained_values.size() - 1)) : 0.0;
    }
    return stats;
}

std::vector<double> presence_weighted_average(const FloatMatrix& correlations, const AmfModel& model,
                                              std::size_t module) {
    if (module >= model.presences.cols() || model.presences.rows() != correlations.rows()) {
        throw ParameterError("module id out of range or model does not match correlations");
    }
    std::vector<double> out(correlations.cols(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < correlations.rows(); ++i) {
        const double w = model.presences(i, module);
        if (w == 0.0) {
            continue;
        }
        total += w;
        const auto row = correlations.row(i);
        for (std::size_t c = 0; c < out.size(); ++c) {
            out[c] += w * row[c];
        }
    }
    if (!(total > 0.0)) {
        throw ParameterError("module " + std::to_string(module) + " has zero total presence");
    }
    for (auto& v : out) {
        v /= total;
    }
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty()) {
        throw ParameterError("pearson: vectors must be nonempty and of equal length");
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        return 0.0;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 1000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) {
        d = kTiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            break;
        }
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0) || x < 0.0 || x > 1.0) {
        throw ParameterError("incomplete beta: need a, b > 0 and 0 <= x <= 1");
    }
    if (x == 0.0 || x == 1.0) {
        return x;
    }
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) {
        throw ParameterError("t distribution needs df > 0");
    }
    if (std::isinf(t)) {
        return t > 0.0 ? 1.0 : 0.0;
    }
    const double tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    return t >= 0.0 ? 1.0 - tail : tail;
}

double correlation_p_value(double r, std::size_t k) {
    if (k < 3) {
        throw ParameterError("correlation p-value needs at least 3 observations");
    }
    const double r2 = std::min(1.0, r * r);
    if (r2 >= 1.0) {
        return 0.0;
    }
    const double df = static_cast<double>(k - 2);
    const double t2 = r2 * df / (1.0 - r2);
    // Two-sided tail: P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
    return std::clamp(regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t2)), 0.0, 1.0);
}

MetadataAssociation metadata_association(const AmfModel& model, const SampleLabels& labels,
                                         const LocalitySet& localities, const std::string& target_label,
                                         double presence_threshold) {
    if (model.presences.rows() != localities.size()) {
        throw ParameterError("model presences do not match the locality count");
    }
    MetadataAssociation out;
    out.target_label = target_label;
    out.presence_threshold = presence_threshold;
    for (std::size_t l = 0; l < localities.size(); ++l) {
        std::size_t hits = 0;
        for (const auto s : localities.members.row(l)) {
            if (s >= labels.labels.size()) {
                throw ParameterError("label vector shorter than the sample count");
            }
            hits += labels.labels[s] == target_label ? 1 : 0;
        }
        out.locality_ratio.push_back(static_cast<double>(hits) / static_cast<double>(localities.neighborhood_size()));
    }
    for (std::size_t m = 0; m < model.presences.cols(); ++m) {
        ModuleAssociation assoc;
        assoc.module = m;
        std::vector<double> presence;
        std::vector<double> ratio;
        for (std::size_t l = 0; l < localities.size(); ++l) {
            if (model.presences(l, m) > presence_threshold) {
                presence.push_back(model.presences(l, m));
                ratio.push_back(out.locality_ratio[l]);
            }
        }
        assoc.localities = presence.size();
        if (presence.size() >= 3) {
            assoc.defined = true;
            assoc.pearson_r = pearson(presence, ratio);
            assoc.pearson_p = correlation_p_value(assoc.pearson_r, presence.size());
            assoc.spearman_r = spearman(presence, ratio);
            assoc.spearman_p = correlation_p_value(assoc.spearman_r, presence.size());
        }
        out.modules.push_back(assoc);
    }
    return out;
}

std::vector<double> feature_sums(std::span<const double> pair_values, const PairIndex& pairs) {
    if (pair_values.size() != pairs.size()) {
        throw ParameterError("vector length does not match the pair count");
    }
    std::vector<double> sums(pairs.features(), 0.0);
    std::size_t p = 0;
    for (std::size_t i = 0; i < pairs.features(); ++i) {
        for (std::size_t j = i + 1; j < pairs.features(); ++j, ++p) {
            sums[i] += pair_values[p];
            sums[j] += pair_values[p];
        }
    }
    return sums;
}

FeatureRanking module_feature_ranking(const AmfModel& model, const PairIndex& pairs, std::size_t module,
                                      double fraction_cutoff) {
    if (!(fraction_cutoff > 0.0 && fraction_cutoff <= 1.0)) {
        throw ParameterError("fraction cutoff must lie in (0, 1]");
    }
    if (module >= model.modules.rows()) {
        throw ParameterError("module id out of range");
    }
    const auto sums = feature_sums(model.modules.row(module), pairs);
    FeatureRanking ranking;
    for (std::size_t f = 0; f < sums.size(); ++f) {
        ranking.ordered.emplace_back(f, sums[f]);
    }
    std::stable_sort(ranking.ordered.begin(), ranking.ordered.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    const double top = ranking.ordered.empty() ? 0.0 : ranking.ordered.front().second;
    if (!(top > 0.0)) {
        ranking.all_zero = true;
        ranking.ordered.clear();
        return ranking;
    }
    for (const auto& [f, s] : ranking.ordered) {
        if (s >= fraction_cutoff * top) {
            ranking.retained.push_back(f);
        }
    }
    return ranking;
}

}  // namespace lava
