#include "lava/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lava/random.hpp"

namespace lava {

namespace {

struct Candidate {
    double dist2;
    std::size_t index;

    friend bool operator<(const Candidate& a, const Candidate& b) noexcept {
        return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
    }
};

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

void check_shapes(const RealMatrix& points, std::size_t query_dim, std::size_t n) {
    if (points.cols() != query_dim) {
        throw ParameterError("points and queries differ in dimensionality");
    }
    if (n == 0 || n >= points.rows()) {
        throw ParameterError("neighborhood size n=" + std::to_string(n) + " must satisfy 1 <= n < point count (" +
                             std::to_string(points.rows()) + ")");
    }
}

// One query: blocked scan keeping a bounded max-heap of the n best candidates.
void query_row(const RealMatrix& points, std::span<const double> q, std::size_t n, std::size_t skip,
               std::vector<Candidate>& heap, std::span<std::size_t> out_idx, std::span<double> out_dist) {
    heap.clear();
    for (std::size_t j = 0; j < points.rows(); ++j) {
        if (j == skip) {
            continue;
        }
        const Candidate c{squared_distance(points.row(j), q), j};
        if (heap.size() < n) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = c;
            std::push_heap(heap.begin(), heap.end());
        }
    }
    std::sort_heap(heap.begin(), heap.end());
    for (std::size_t k = 0; k < n; ++k) {
        out_idx[k] = heap[k].index;
        out_dist[k] = std::sqrt(heap[k].dist2);
    }
}

template <typename QueryFn, typename SkipFn>
NeighborIndex knn_kernel(const RealMatrix& points, std::size_t query_count, std::size_t n, QueryFn query, SkipFn skip) {
    NeighborIndex index{IndexMatrix(query_count, n), RealMatrix(query_count, n)};
    const auto count = static_cast<std::ptrdiff_t>(query_count);
#pragma omp parallel
    {
        std::vector<Candidate> heap;
        heap.reserve(n + 1);
#pragma omp for schedule(static)
        for (std::ptrdiff_t qi = 0; qi < count; ++qi) {
            const auto q = static_cast<std::size_t>(qi);
            query_row(points, query(q), n, skip(q), heap, index.neighbors.row(q), index.distances.row(q));
        }
    }
    return index;
}

constexpr std::size_t kNoSkip = static_cast<std::size_t>(-1);

}  // namespace

NeighborIndex knn(const RealMatrix& points, const RealMatrix& queries, std::size_t n) {
    check_shapes(points, queries.cols(), n);
    return knn_kernel(
        points, queries.rows(), n, [&](std::size_t q) { return queries.row(q); }, [](std::size_t) { return kNoSkip; });
}

NeighborIndex knn_self(const RealMatrix& points, std::size_t n) {
    check_shapes(points, points.cols(), n);
    return knn_kernel(
        points, points.rows(), n, [&](std::size_t q) { return points.row(q); }, [](std::size_t q) { return q; });
}

NeighborIndex knn_subset(const RealMatrix& points, std::span<const std::size_t> query_rows, std::size_t n) {
    check_shapes(points, points.cols(), n);
    for (const auto r : query_rows) {
        if (r >= points.rows()) {
            throw ParameterError("query row out of range");
        }
    }
    return knn_kernel(
        points, query_rows.size(), n, [&](std::size_t q) { return points.row(query_rows[q]); },
        [&](std::size_t q) { return query_rows[q]; });
}

CentralityProfile centrality_profile(const NeighborIndex& index) {
    const std::size_t count = index.neighbors.rows();
    const std::size_t n = index.neighbors.cols();
    CentralityProfile profile{std::vector<std::size_t>(count, 0), std::vector<double>(count, 0.0)};
    for (std::size_t i = 0; i < count; ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto j = index.neighbors(i, k);
            if (j >= count) {
                throw ParameterError("centrality_profile needs an index built with queries == points");
            }
            ++profile.in_neighborhood[j];
            sum += index.distances(i, k);
        }
        profile.avg_n_distance[i] = sum / static_cast<double>(n);
    }
    return profile;
}

double jaccard(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    std::vector<std::size_t> sa(a.begin(), a.end());
    std::vector<std::size_t> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::vector<std::size_t> common;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
    const std::size_t uni = sa.size() + sb.size() - common.size();
    return uni == 0 ? 1.0 : static_cast<double>(common.size()) / static_cast<double>(uni);
}

JaccardCurve neighborhood_jaccard(const RealMatrix& original, const RealMatrix& latent,
                                  std::span<const std::size_t> sizes, std::size_t sample_cap, std::uint64_t seed) {
    if (original.rows() != latent.rows()) {
        throw ParameterError("original and latent matrices must have the same sample count");
    }
    const std::size_t count = latent.rows();
    for (const auto k : sizes) {
        if (k == 0 || k >= count) {
            throw ParameterError("neighborhood size " + std::to_string(k) + " must satisfy 1 <= k < E (" +
                                 std::to_string(count) + ")");
        }
    }
    std::vector<std::size_t> rows(count);
    std::iota(rows.begin(), rows.end(), 0);
    if (sample_cap > 0 && sample_cap < count) {
        Rng rng(seed);
        rng.shuffle(std::span<std::size_t>(rows));
        rows.resize(sample_cap);
        std::sort(rows.begin(), rows.end());
    }

    JaccardCurve curve;
    curve.sizes.assign(sizes.begin(), sizes.end());
    curve.samples_used = rows.size();
    if (sizes.empty()) {
        return curve;
    }
    // Neighbor lists are prefix-consistent in k, so one query at the largest size suffices.
    const std::size_t k_max = *std::max_element(sizes.begin(), sizes.end());
    const auto orig = knn_subset(original, rows, k_max);
    const auto lat = knn_subset(latent, rows, k_max);
    for (const auto k : sizes) {
        double total = 0.0;
        for (std::size_t q = 0; q < rows.size(); ++q) {
            total += jaccard(orig.neighbors.row(q).first(k), lat.neighbors.row(q).first(k));
        }
        curve.mean_jaccard.push_back(total / static_cast<double>(rows.size()));
    }
    return curve;
}

namespace reference {

NeighborIndex knn(const RealMatrix& points, const RealMatrix& queries, std::size_t n, bool exclude_self) {
    check_shapes(points, queries.cols(), n);
    NeighborIndex index{IndexMatrix(queries.rows(), n), RealMatrix(queries.rows(), n)};
    std::vector<Candidate> all;
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        all.clear();
        for (std::size_t j = 0; j < points.rows(); ++j) {
            if (exclude_self && j == q) {
                continue;
            }
            all.push_back({squared_distance(points.row(j), queries.row(q)), j});
        }
        std::sort(all.begin(), all.end());
        for (std::size_t k = 0; k < n; ++k) {
            index.neighbors(q, k) = all[k].index;
            index.distances(q, k) = std::sqrt(all[k].dist2);
        }
    }
    return index;
}

}  // namespace reference

}  // namespace lava
