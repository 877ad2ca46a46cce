#include "lava/kmeans.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "lava/error.hpp"
#include "lava/random.hpp"

namespace lava {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

std::pair<std::size_t, double> nearest(std::span<const double> x, const RealMatrix& centroids) noexcept {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double d = squared_distance(x, centroids.row(c));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return {best, best_d};
}

// Draws an index with probability proportional to mass; returns size() if all mass is zero.
std::size_t draw(std::span<const double> mass, Rng& rng) {
    double total = 0.0;
    for (const double m : mass) {
        total += m;
    }
    if (!(total > 0.0)) {
        return mass.size();
    }
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = mass.size();
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (mass[i] > 0.0) {
            acc += mass[i];
            last_positive = i;
            if (target < acc) {
                return i;
            }
        }
    }
    return last_positive;
}

RealMatrix kmeanspp_init(const RealMatrix& points, std::span<const double> weights, std::size_t k, Rng& rng) {
    const std::size_t count = points.rows();
    RealMatrix centroids(k, points.cols());
    std::vector<double> closest(count, std::numeric_limits<double>::infinity());
    std::vector<double> mass(weights.begin(), weights.end());
    std::vector<bool> taken(count, false);
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t pick = draw(mass, rng);
        if (pick == count) {
            // Every weighted point coincides with a chosen center.
            for (pick = 0; pick < count && (taken[pick] || weights[pick] <= 0.0); ++pick) {
            }
            if (pick == count) {
                pick = 0;
            }
        }
        taken[pick] = true;
        std::copy(points.row(pick).begin(), points.row(pick).end(), centroids.row(c).begin());
        for (std::size_t i = 0; i < count; ++i) {
            closest[i] = std::min(closest[i], squared_distance(points.row(i), centroids.row(c)));
            mass[i] = weights[i] * closest[i];
        }
    }
    return centroids;
}

KMeansResult lloyd(const RealMatrix& points, std::span<const double> weights, RealMatrix centroids,
                   std::size_t max_iters) {
    const std::size_t count = points.rows();
    const std::size_t dim = points.cols();
    const std::size_t k = centroids.rows();
    std::vector<std::size_t> assignment(count, k);
    std::vector<double> dist2(count, 0.0);
    KMeansResult result;

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static) reduction(|| : changed)
        for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            const auto [c, d] = nearest(points.row(i), centroids);
            if (c != assignment[i]) {
                assignment[i] = c;
                changed = true;
            }
            dist2[i] = d;
        }
        result.iterations = iter + 1;
        if (!changed) {
            break;
        }

        RealMatrix sums(k, dim, 0.0);
        std::vector<double> mass(k, 0.0);
        for (std::size_t i = 0; i < count; ++i) {
            const auto c = assignment[i];
            mass[c] += weights[i];
            for (std::size_t d = 0; d < dim; ++d) {
                sums(c, d) += weights[i] * points(i, d);
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (mass[c] > 0.0) {
                for (std::size_t d = 0; d < dim; ++d) {
                    centroids(c, d) = sums(c, d) / mass[c];
                }
                continue;
            }
            // Empty cluster: move it to the weighted-farthest point.
            std::size_t far = 0;
            double far_score = -1.0;
            for (std::size_t i = 0; i < count; ++i) {
                const double score = weights[i] * dist2[i];
                if (score > far_score) {
                    far_score = score;
                    far = i;
                }
            }
            std::copy(points.row(far).begin(), points.row(far).end(), centroids.row(c).begin());
            dist2[far] = 0.0;
            assignment[far] = c;
        }
    }
    result.inertia = weighted_inertia(points, weights, centroids);
    result.centroids = std::move(centroids);
    return result;
}

}  // namespace

double weighted_inertia(const RealMatrix& points, std::span<const double> weights, const RealMatrix& centroids) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
        total += weights[i] * nearest(points.row(i), centroids).second;
    }
    return total;
}

KMeansResult weighted_kmeans(const RealMatrix& points, std::span<const double> weights, std::size_t k,
                             std::uint64_t seed, const KMeansOptions& options) {
    if (weights.size() != points.rows()) {
        throw ParameterError("weight count does not match point count");
    }
    std::size_t positive = 0;
    for (const double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ParameterError("k-means weights must be finite and non-negative");
        }
        positive += w > 0.0 ? 1 : 0;
    }
    if (k == 0 || k > positive) {
        throw ParameterError("k=" + std::to_string(k) + " must satisfy 1 <= k <= points with positive weight (" +
                             std::to_string(positive) + ")");
    }
    if (options.max_iters == 0 || options.n_init == 0) {
        throw ParameterError("k-means needs max_iters >= 1 and n_init >= 1");
    }

    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t init = 0; init < options.n_init; ++init) {
        Rng rng(derive_seed(seed, init));
        auto run = lloyd(points, weights, kmeanspp_init(points, weights, k, rng), options.max_iters);
        if (run.inertia < best.inertia) {
            best = std::move(run);
        }
    }
    return best;
}

}  // namespace lava
