#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lava/kmeans.hpp"
#include "lava/matrix.hpp"
#include "lava/neighbors.hpp"

namespace lava {

// Probe coordinates and, per probe, its n nearest samples (ascending distance).
struct LocalitySet {
    RealMatrix probes;
    IndexMatrix members;

    std::size_t size() const noexcept { return members.rows(); }
    std::size_t neighborhood_size() const noexcept { return members.cols(); }
};

struct PlacementEvaluation {
    double alpha;
    double beta;
    double loss;
};

struct PlacementReport {
    double best_alpha = 0.0;
    double best_beta = 0.0;
    double best_loss = 0.0;
    std::vector<PlacementEvaluation> evaluations;
    std::vector<std::size_t> locality_in_degree;
};

struct PlacementOptions {
    std::size_t neighborhood_size = 0;
    std::size_t locality_count = 0;
    std::size_t budget = 40;
    double half_width = 4.0;  // search box [-half_width, half_width] for alpha and beta
    KMeansOptions kmeans;
    std::uint64_t seed = 0;
};

// round(E * o / n), halves rounded away from zero.
std::size_t locality_count(std::size_t samples, double overlap, std::size_t n);

// w_i = (in_neighborhood_i / E)^alpha * (1 / avg_n_distance_i)^beta.
// Zero average distances and, for alpha < 0, zero in-degrees are replaced by
// the smallest positive value in the dataset before exponentiation.
std::vector<double> sample_weights(const CentralityProfile& profile, std::size_t samples, double alpha, double beta);

LocalitySet build_localities(const RealMatrix& embeddings, RealMatrix probes, std::size_t n);

// How many localities contain each sample.
std::vector<std::size_t> locality_in_degree(const LocalitySet& localities, std::size_t samples);

// Manhattan distance between relative neighborhood and locality in-degrees.
double placement_loss(const CentralityProfile& profile, const LocalitySet& localities, std::size_t samples);

// Loss, localities and report for one (alpha, beta); deterministic given options.seed.
std::pair<LocalitySet, double> evaluate_placement(const RealMatrix& embeddings, const CentralityProfile& profile,
                                                  double alpha, double beta, const PlacementOptions& options);

// DIRECT over (alpha, beta); localities are rebuilt from the best pair.
std::pair<LocalitySet, PlacementReport> optimize_placement(const RealMatrix& embeddings,
                                                           const CentralityProfile& profile,
                                                           const PlacementOptions& options);

}  // namespace lava
