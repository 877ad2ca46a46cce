#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lava/data_io.hpp"
#include "lava/matrix.hpp"

namespace lava {

// Row q holds the indices of the n nearest points to query q, ascending by
// Euclidean distance, ties broken by lower index.
struct NeighborIndex {
    IndexMatrix neighbors;
    RealMatrix distances;
};

struct CentralityProfile {
    std::vector<std::size_t> in_neighborhood;
    std::vector<double> avg_n_distance;
};

// Exact k-NN of arbitrary query rows against `points`.
NeighborIndex knn(const RealMatrix& points, const RealMatrix& queries, std::size_t n);

// Exact k-NN of every point against the others (self excluded).
NeighborIndex knn_self(const RealMatrix& points, std::size_t n);

// Exact k-NN of the selected points, each excluding itself.
NeighborIndex knn_subset(const RealMatrix& points, std::span<const std::size_t> query_rows, std::size_t n);

CentralityProfile centrality_profile(const NeighborIndex& index);

struct JaccardCurve {
    std::vector<std::size_t> sizes;
    std::vector<double> mean_jaccard;
    std::size_t samples_used = 0;
};

// Mean Jaccard overlap between k-neighborhoods in the original feature space
// and in the latent space, over up to `sample_cap` seeded-random samples.
JaccardCurve neighborhood_jaccard(const RealMatrix& original, const RealMatrix& latent,
                                  std::span<const std::size_t> sizes, std::size_t sample_cap, std::uint64_t seed);

double jaccard(std::span<const std::size_t> a, std::span<const std::size_t> b);

namespace reference {

// Full argsort per query; kept as the correctness baseline for the blocked kernel.
NeighborIndex knn(const RealMatrix& points, const RealMatrix& queries, std::size_t n, bool exclude_self);

}  // namespace reference

}  // namespace lava
