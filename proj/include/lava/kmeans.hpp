#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "lava/matrix.hpp"

namespace lava {

struct KMeansOptions {
    std::size_t max_iters = 300;
    std::size_t n_init = 1;  // independent k-means++ starts; lowest inertia wins
};

struct KMeansResult {
    RealMatrix centroids;
    double inertia = 0.0;  // weighted within-cluster sum of squares
    std::size_t iterations = 0;
};

// Lloyd's algorithm with weighted centroid updates and weighted k-means++
// seeding. A cluster that loses all its weight is re-seeded at the point with
// the largest weighted squared distance to its centroid.
KMeansResult weighted_kmeans(const RealMatrix& points, std::span<const double> weights, std::size_t k,
                             std::uint64_t seed, const KMeansOptions& options = {});

// Weighted inertia of `centroids` with each point assigned to its nearest centroid.
double weighted_inertia(const RealMatrix& points, std::span<const double> weights, const RealMatrix& centroids);

}  // namespace lava
