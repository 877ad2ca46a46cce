#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lava/direct.hpp"
#include "lava/error.hpp"
#include "lava/kmeans.hpp"
#include "lava/placement.hpp"
#include "lava/random.hpp"

using namespace lava;

namespace {

RealMatrix grid_points(std::size_t width, std::size_t height) {
    RealMatrix pts(width * height, 2);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        pts(i, 0) = static_cast<double>(i % width);
        pts(i, 1) = static_cast<double>(i / width);
    }
    return pts;
}

// Plain Lloyd from uniformly drawn initial centers, used as an independent yardstick.
double lloyd_random_init(const RealMatrix& pts, std::size_t k, Rng& rng) {
    RealMatrix centers(k, pts.cols());
    for (std::size_t c = 0; c < k; ++c) {
        const auto src = pts.row(rng.below(pts.rows()));
        std::copy(src.begin(), src.end(), centers.row(c).begin());
    }
    std::vector<std::size_t> label(pts.rows(), 0);
    for (int iter = 0; iter < 300; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < pts.rows(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                double d = 0.0;
                for (std::size_t j = 0; j < pts.cols(); ++j) {
                    d += (pts(i, j) - centers(c, j)) * (pts(i, j) - centers(c, j));
                }
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            changed = changed || label[i] != arg;
            label[i] = arg;
        }
        RealMatrix sums(k, pts.cols());
        std::vector<double> counts(k, 0.0);
        for (std::size_t i = 0; i < pts.rows(); ++i) {
            counts[label[i]] += 1.0;
            for (std::size_t j = 0; j < pts.cols(); ++j) {
                sums(label[i], j) += pts(i, j);
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0.0) {
                for (std::size_t j = 0; j < pts.cols(); ++j) {
                    centers(c, j) = sums(c, j) / counts[c];
                }
            }
        }
        if (!changed && iter > 0) {
            break;
        }
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            double d = 0.0;
            for (std::size_t j = 0; j < pts.cols(); ++j) {
                d += (pts(i, j) - centers(c, j)) * (pts(i, j) - centers(c, j));
            }
            best = std::min(best, d);
        }
        inertia += best;
    }
    return inertia;
}

}  // namespace

TEST_CASE("locality count is round(E*o/n) with halves away from zero") {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + rng.below(200);
        const std::size_t e = n + 1 + rng.below(5000);
        const double o = rng.uniform(0.5, 10.0);
        const double x = static_cast<double>(e) * o / static_cast<double>(n);
        const auto expected = static_cast<std::size_t>(std::floor(x + 0.5));
        if (expected == 0) {
            CHECK_THROWS_AS(locality_count(e, o, n), ParameterError);
        } else {
            CHECK(locality_count(e, o, n) == expected);
        }
    }
    CHECK(locality_count(10, 0.5, 2) == 3);  // 2.5 rounds up
}

TEST_CASE("sample weights: zero exponents give ones") {
    CentralityProfile profile{{2, 0, 5}, {1.0, 2.0, 0.5}};
    for (const double w : sample_weights(profile, 3, 0.0, 0.0)) {
        CHECK(w == 1.0);
    }
}

TEST_CASE("sample weights: alpha=1, in-degree [2, 0], E=2") {
    CentralityProfile profile{{2, 0}, {1.0, 1.0}};
    const auto w = sample_weights(profile, 2, 1.0, 0.0);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == 0.0);
}

TEST_CASE("sample weights match a scalar recomputation") {
    Rng rng(2);
    CentralityProfile profile;
    for (int i = 0; i < 40; ++i) {
        profile.in_neighborhood.push_back(1 + rng.below(30));
        profile.avg_n_distance.push_back(rng.uniform(0.1, 3.0));
    }
    const auto w = sample_weights(profile, 40, 2.0, -1.0);
    for (std::size_t i = 0; i < 40; ++i) {
        const double rel = static_cast<double>(profile.in_neighborhood[i]) / 40.0;
        const double expected = rel * rel * profile.avg_n_distance[i];
        CHECK(w[i] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("sample weights never produce infinities") {
    CentralityProfile profile{{0, 3, 1}, {0.0, 2.0, 4.0}};
    for (const double w : sample_weights(profile, 3, -2.0, 3.0)) {
        CHECK(std::isfinite(w));
        CHECK(w > 0.0);
    }
}

TEST_CASE("k-means separates two groups") {
    RealMatrix pts(6, 1);
    const double xs[] = {-0.1, 0.0, 0.1, 9.9, 10.0, 10.1};
    for (std::size_t i = 0; i < 6; ++i) {
        pts(i, 0) = xs[i];
    }
    const std::vector<double> w(6, 1.0);
    const auto result = weighted_kmeans(pts, w, 2, 3);
    std::vector<double> c{result.centroids(0, 0), result.centroids(1, 0)};
    std::sort(c.begin(), c.end());
    CHECK(c[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(10.0));
}

TEST_CASE("k-means with one cluster is the weighted mean") {
    RealMatrix pts(2, 1);
    pts(1, 0) = 1.0;
    const std::vector<double> w{100.0, 1.0};
    const auto result = weighted_kmeans(pts, w, 1, 4);
    CHECK(result.centroids(0, 0) == doctest::Approx(1.0 / 101.0));
}

TEST_CASE("k-means on 500 points is within 1.05x of the best of 20 random restarts") {
    Rng rng(5);
    RealMatrix pts(500, 2);
    for (auto& v : pts.values()) {
        v = rng.uniform();
    }
    const std::vector<double> w(500, 1.0);
    const auto result = weighted_kmeans(pts, w, 10, 17, KMeansOptions{300, 3});
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < 20; ++r) {
        best = std::min(best, lloyd_random_init(pts, 10, rng));
    }
    CHECK(result.inertia <= 1.05 * best);
    CHECK(result.inertia == doctest::Approx(weighted_inertia(pts, w, result.centroids)));
}

TEST_CASE("k-means is invariant to a uniform rescaling of the weights") {
    Rng rng(6);
    RealMatrix pts(120, 3);
    for (auto& v : pts.values()) {
        v = rng.normal();
    }
    const std::vector<double> ones(120, 1.0);
    const std::vector<double> scaled(120, 3.5);
    const auto a = weighted_kmeans(pts, ones, 5, 8);
    const auto b = weighted_kmeans(pts, scaled, 5, 8);
    for (std::size_t i = 0; i < a.centroids.size(); ++i) {
        CHECK(a.centroids.values()[i] == doctest::Approx(b.centroids.values()[i]).epsilon(1e-12));
    }
}

TEST_CASE("k-means needs at least k weighted points") {
    RealMatrix pts(3, 1);
    pts(1, 0) = 1.0;
    pts(2, 0) = 2.0;
    const std::vector<double> w{1.0, 0.0, 0.0};
    CHECK_THROWS_AS(weighted_kmeans(pts, w, 2, 1), ParameterError);
}

TEST_CASE("placement loss is zero when locality membership mirrors centrality") {
    CentralityProfile profile{{1, 1, 1, 1}, {1.0, 1.0, 1.0, 1.0}};
    LocalitySet set;
    set.probes = RealMatrix(4, 1);
    set.members = IndexMatrix(4, 1);
    for (std::size_t i = 0; i < 4; ++i) {
        set.members(i, 0) = i;
    }
    CHECK(placement_loss(profile, set, 4) == 0.0);
}

TEST_CASE("placement loss of a single locality over the densest samples") {
    const auto pts = grid_points(6, 5);
    const std::size_t n = 8;
    const auto profile = centrality_profile(knn_self(pts, n));
    std::vector<std::size_t> order(pts.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return profile.in_neighborhood[a] > profile.in_neighborhood[b];
    });
    LocalitySet set;
    set.probes = RealMatrix(1, 2);
    set.members = IndexMatrix(1, n);
    std::vector<bool> covered(pts.rows(), false);
    for (std::size_t k = 0; k < n; ++k) {
        set.members(0, k) = order[k];
        covered[order[k]] = true;
    }
    const double e = static_cast<double>(pts.rows());
    double expected = 0.0;
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        const double rel = static_cast<double>(profile.in_neighborhood[i]) / e;
        expected += covered[i] ? std::abs(rel - 1.0) : rel;
    }
    CHECK(placement_loss(profile, set, pts.rows()) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("DIRECT with budget 1 returns the box center") {
    const std::vector<double> lo{-4.0, -4.0};
    const std::vector<double> hi{4.0, 4.0};
    const auto result =
        direct_minimize([](std::span<const double> x) { return x[0] * x[0] + 1.0; }, lo, hi, DirectOptions{1});
    REQUIRE(result.evaluations.size() == 1);
    CHECK(result.best_x == std::vector<double>{0.0, 0.0});
    CHECK(result.best_value == 1.0);
}

TEST_CASE("DIRECT finds the minimum of a shifted quadratic within 200 evaluations") {
    const std::vector<double> lo{-4.0, -4.0};
    const std::vector<double> hi{4.0, 4.0};
    const auto result = direct_minimize(
        [](std::span<const double> x) { return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] + 2.0) * (x[1] + 2.0); }, lo, hi,
        DirectOptions{200});
    CHECK(result.evaluations.size() <= 200);
    CHECK(std::hypot(result.best_x[0] - 1.0, result.best_x[1] + 2.0) <= 0.05);
}

TEST_CASE("DIRECT best value is the minimum over all evaluations") {
    const std::vector<double> lo{0.0};
    const std::vector<double> hi{1.0};
    const auto result =
        direct_minimize([](std::span<const double> x) { return std::sin(13.0 * x[0]) * x[0]; }, lo, hi,
                        DirectOptions{30});
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : result.evaluations) {
        best = std::min(best, e.value);
    }
    CHECK(result.best_value == best);
}

TEST_CASE("optimized placement on a uniform grid") {
    const auto pts = grid_points(50, 40);
    const std::size_t n = 100;
    const auto profile = centrality_profile(knn_self(pts, n));
    PlacementOptions options;
    options.neighborhood_size = n;
    options.locality_count = locality_count(pts.rows(), 4.0, n);
    options.seed = 11;
    const auto [localities, report] = optimize_placement(pts, profile, options);
    const auto at_origin = evaluate_placement(pts, profile, 0.0, 0.0, options).second;

    CHECK(report.evaluations.front().alpha == 0.0);
    CHECK(report.evaluations.front().beta == 0.0);
    CHECK(report.best_loss <= at_origin);
    CHECK(report.best_loss == doctest::Approx(placement_loss(profile, localities, pts.rows())).epsilon(1e-12));
    CHECK(localities.size() == 80);
    CHECK(localities.neighborhood_size() == n);
    CHECK(report.evaluations.size() <= options.budget);
}

TEST_CASE("placement budget 0 is a parameter error") {
    const auto pts = grid_points(5, 5);
    const auto profile = centrality_profile(knn_self(pts, 3));
    PlacementOptions options;
    options.neighborhood_size = 3;
    options.locality_count = 4;
    options.budget = 0;
    CHECK_THROWS_AS(optimize_placement(pts, profile, options), ParameterError);
}

TEST_CASE("placement is deterministic for a fixed seed") {
    Rng rng(3);
    RealMatrix pts(300, 2);
    for (auto& v : pts.values()) {
        v = rng.normal();
    }
    const auto profile = centrality_profile(knn_self(pts, 20));
    PlacementOptions options;
    options.neighborhood_size = 20;
    options.locality_count = locality_count(300, 3.0, 20);
    options.budget = 15;
    options.seed = 99;
    const auto a = optimize_placement(pts, profile, options);
    const auto b = optimize_placement(pts, profile, options);
    CHECK(a.first.members == b.first.members);
    CHECK(a.first.probes == b.first.probes);
    CHECK(a.second.best_loss == b.second.best_loss);
}
