#include "lava/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lava/error.hpp"

namespace lava {

PairIndex PairIndex::from_pair_count(std::size_t pairs) {
    const auto d = static_cast<std::size_t>(std::llround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(pairs))) / 2.0));
    if (d < 2 || d * (d - 1) / 2 != pairs) {
        throw ParameterError(std::to_string(pairs) + " is not a pair count D(D-1)/2");
    }
    return PairIndex(d);
}

std::size_t PairIndex::id(std::size_t i, std::size_t j) const {
    if (i >= j || j >= features_) {
        throw ParameterError("pair (" + std::to_string(i) + ", " + std::to_string(j) + ") is not a valid i < j < D pair");
    }
    return i * features_ - i * (i + 1) / 2 + (j - i - 1);
}

std::pair<std::size_t, std::size_t> PairIndex::pair(std::size_t id) const {
    if (id >= size()) {
        throw ParameterError("pair id out of range");
    }
    // Row i starts at i*D - i(i+1)/2; invert the quadratic, then fix rounding.
    const double d = static_cast<double>(features_);
    auto i = static_cast<std::size_t>(std::floor(((2.0 * d - 1.0) - std::sqrt((2.0 * d - 1.0) * (2.0 * d - 1.0) -
                                                                               8.0 * static_cast<double>(id))) /
                                                 2.0));
    const auto start = [&](std::size_t r) { return r * features_ - r * (r + 1) / 2; };
    while (i > 0 && start(i) > id) {
        --i;
    }
    while (i + 1 < features_ && start(i + 1) <= id) {
        ++i;
    }
    return {i, i + 1 + (id - start(i))};
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t end = start + 1;
        while (end < order.size() && x[order[end]] == x[order[start]]) {
            ++end;
        }
        const double rank = 0.5 * static_cast<double>(start + 1 + end);
        for (std::size_t k = start; k < end; ++k) {
            ranks[order[k]] = rank;
        }
        start = end;
    }
    return ranks;
}

double spearman_abs(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ParameterError("spearman_abs: vectors differ in length");
    }
    if (x.size() < 2) {
        throw ParameterError("spearman_abs: need at least 2 observations");
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double mean = 0.5 * static_cast<double>(x.size() + 1);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double a = rx[k] - mean;
        const double b = ry[k] - mean;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        return 0.0;
    }
    return std::min(1.0, std::abs(sxy) / std::sqrt(sxx * syy));
}

double constant_fraction(std::span<const double> x) {
    if (x.empty()) {
        throw ParameterError("constant_fraction: empty vector");
    }
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    std::size_t best = 1;
    std::size_t run = 1;
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        run = sorted[k] == sorted[k - 1] ? run + 1 : 1;
        best = std::max(best, run);
    }
    return static_cast<double>(best) / static_cast<double>(sorted.size());
}

std::size_t correlation_bytes(std::size_t localities, std::size_t features) {
    return localities * PairIndex(features).size() * sizeof(float);
}

namespace {

void check_inputs(const FeatureMatrix& features, const LocalitySet& localities, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ParameterError("filter threshold must lie in (0, 1]");
    }
    if (features.features() < 2) {
        throw ParameterError("need at least 2 features to form pairs");
    }
    if (localities.neighborhood_size() < 2) {
        throw ParameterError("localities need at least 2 members");
    }
    for (const auto i : localities.members.values()) {
        if (i >= features.samples()) {
            throw ParameterError("locality member index " + std::to_string(i) + " out of range");
        }
    }
}

}  // namespace

CorrelationDataset locality_correlations(const FeatureMatrix& features, const LocalitySet& localities,
                                         double threshold) {
    check_inputs(features, localities, threshold);
    const std::size_t dim = features.features();
    const std::size_t n = localities.neighborhood_size();
    const PairIndex pairs(dim);
    CorrelationDataset out{FloatMatrix(localities.size(), pairs.size(), 0.0F), pairs, threshold};

    const auto ell = static_cast<std::ptrdiff_t>(localities.size());
#pragma omp parallel
    {
        std::vector<double> column(n);
        RealMatrix unit_ranks(dim, n);  // centered, unit-norm ranks per feature
        std::vector<bool> usable(dim);
#pragma omp for schedule(dynamic)
        for (std::ptrdiff_t li = 0; li < ell; ++li) {
            const auto l = static_cast<std::size_t>(li);
            const auto members = localities.members.row(l);
            for (std::size_t f = 0; f < dim; ++f) {
                for (std::size_t k = 0; k < n; ++k) {
                    column[k] = features.values(members[k], f);
                }
                usable[f] = false;
                if (constant_fraction(column) > threshold) {
                    continue;
                }
                const auto ranks = average_ranks(column);
                const double mean = 0.5 * static_cast<double>(n + 1);
                double norm2 = 0.0;
                auto z = unit_ranks.row(f);
                for (std::size_t k = 0; k < n; ++k) {
                    z[k] = ranks[k] - mean;
                    norm2 += z[k] * z[k];
                }
                if (norm2 <= 0.0) {
                    continue;
                }
                const double inv = 1.0 / std::sqrt(norm2);
                for (auto& v : z) {
                    v *= inv;
                }
                usable[f] = true;
            }
            auto row = out.values.row(l);
            std::size_t p = 0;
            for (std::size_t i = 0; i < dim; ++i) {
                for (std::size_t j = i + 1; j < dim; ++j, ++p) {
                    if (!usable[i] || !usable[j]) {
                        continue;
                    }
                    const auto a = unit_ranks.row(i);
                    const auto b = unit_ranks.row(j);
                    double dot = 0.0;
                    for (std::size_t k = 0; k < n; ++k) {
                        dot += a[k] * b[k];
                    }
                    row[p] = static_cast<float>(std::min(1.0, std::abs(dot)));
                }
            }
        }
    }
    return out;
}

namespace reference {

CorrelationDataset locality_correlations(const FeatureMatrix& features, const LocalitySet& localities,
                                         double threshold) {
    check_inputs(features, localities, threshold);
    const std::size_t dim = features.features();
    const std::size_t n = localities.neighborhood_size();
    const PairIndex pairs(dim);
    CorrelationDataset out{FloatMatrix(localities.size(), pairs.size(), 0.0F), pairs, threshold};
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t l = 0; l < localities.size(); ++l) {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto [i, j] = pairs.pair(p);
            for (std::size_t k = 0; k < n; ++k) {
                x[k] = features.values(localities.members(l, k), i);
                y[k] = features.values(localities.members(l, k), j);
            }
            if (constant_fraction(x) > threshold || constant_fraction(y) > threshold) {
                continue;
            }
            out.values(l, p) = static_cast<float>(spearman_abs(x, y));
        }
    }
    return out;
}

}  // namespace reference

}  // namespace lava
