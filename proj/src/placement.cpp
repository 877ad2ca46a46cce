#include "lava/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lava/direct.hpp"
#include "lava/error.hpp"

namespace lava {

std::size_t locality_count(std::size_t samples, double overlap, std::size_t n) {
    if (n == 0 || !(overlap > 0.0)) {
        throw ParameterError("locality count needs n >= 1 and o > 0");
    }
    const auto ell = std::llround(static_cast<double>(samples) * overlap / static_cast<double>(n));
    if (ell < 1) {
        throw ParameterError("round(E * o / n) is 0; increase o or decrease n");
    }
    return static_cast<std::size_t>(ell);
}

std::vector<double> sample_weights(const CentralityProfile& profile, std::size_t samples, double alpha, double beta) {
    const std::size_t count = profile.in_neighborhood.size();
    if (profile.avg_n_distance.size() != count || samples == 0) {
        throw ParameterError("centrality profile is inconsistent");
    }
    double min_dist = std::numeric_limits<double>::infinity();
    std::size_t min_degree = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < count; ++i) {
        if (profile.avg_n_distance[i] > 0.0) {
            min_dist = std::min(min_dist, profile.avg_n_distance[i]);
        }
        if (profile.in_neighborhood[i] > 0) {
            min_degree = std::min(min_degree, profile.in_neighborhood[i]);
        }
    }
    if (!std::isfinite(min_dist)) {
        min_dist = 1.0;  // all samples coincide
    }

    std::vector<double> weights(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t degree = profile.in_neighborhood[i];
        if (degree == 0 && alpha < 0.0) {
            degree = min_degree;
        }
        const double dist = profile.avg_n_distance[i] > 0.0 ? profile.avg_n_distance[i] : min_dist;
        // pow(0, 0) == 1 and pow(0, positive) == 0 as required.
        const double centrality = std::pow(static_cast<double>(degree) / static_cast<double>(samples), alpha);
        weights[i] = centrality * std::pow(1.0 / dist, beta);
    }
    return weights;
}

LocalitySet build_localities(const RealMatrix& embeddings, RealMatrix probes, std::size_t n) {
    auto index = knn(embeddings, probes, n);
    return LocalitySet{std::move(probes), std::move(index.neighbors)};
}

std::vector<std::size_t> locality_in_degree(const LocalitySet& localities, std::size_t samples) {
    std::vector<std::size_t> degree(samples, 0);
    for (const auto i : localities.members.values()) {
        if (i >= samples) {
            throw ParameterError("locality member index out of range");
        }
        ++degree[i];
    }
    return degree;
}

double placement_loss(const CentralityProfile& profile, const LocalitySet& localities, std::size_t samples) {
    if (profile.in_neighborhood.size() != samples || localities.size() == 0) {
        throw ParameterError("placement_loss: profile and localities must cover the same samples");
    }
    const auto degree = locality_in_degree(localities, samples);
    const double ell = static_cast<double>(localities.size());
    const double e = static_cast<double>(samples);
    double loss = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        loss += std::abs(static_cast<double>(profile.in_neighborhood[i]) / e - static_cast<double>(degree[i]) / ell);
    }
    return loss;
}

std::pair<LocalitySet, double> evaluate_placement(const RealMatrix& embeddings, const CentralityProfile& profile,
                                                  double alpha, double beta, const PlacementOptions& options) {
    const std::size_t samples = embeddings.rows();
    const auto weights = sample_weights(profile, samples, alpha, beta);
    const auto positive = static_cast<std::size_t>(std::count_if(weights.begin(), weights.end(),
                                                                 [](double w) { return w > 0.0; }));
    const bool finite = std::all_of(weights.begin(), weights.end(), [](double w) { return std::isfinite(w); });
    if (positive < options.locality_count || !finite) {
        // Infeasible weighting: score it at the loss upper bound 2n.
        return {LocalitySet{}, 2.0 * static_cast<double>(options.neighborhood_size)};
    }
    auto km = weighted_kmeans(embeddings, weights, options.locality_count, options.seed, options.kmeans);
    auto localities = build_localities(embeddings, std::move(km.centroids), options.neighborhood_size);
    const double loss = placement_loss(profile, localities, samples);
    return {std::move(localities), loss};
}

std::pair<LocalitySet, PlacementReport> optimize_placement(const RealMatrix& embeddings,
                                                           const CentralityProfile& profile,
                                                           const PlacementOptions& options) {
    const std::size_t samples = embeddings.rows();
    if (options.neighborhood_size == 0 || options.neighborhood_size >= samples) {
        throw ParameterError("neighborhood size n=" + std::to_string(options.neighborhood_size) +
                             " must satisfy n < E (" + std::to_string(samples) + ")");
    }
    if (options.locality_count == 0) {
        throw ParameterError("locality count must be >= 1");
    }
    if (options.budget < 1) {
        throw ParameterError("DIRECT evaluation budget must be >= 1");
    }
    if (profile.in_neighborhood.size() != samples) {
        throw ParameterError("centrality profile does not match the embeddings");
    }

    const double lo[2] = {-options.half_width, -options.half_width};
    const double hi[2] = {options.half_width, options.half_width};
    const auto objective = [&](std::span<const double> x) {
        return evaluate_placement(embeddings, profile, x[0], x[1], options).second;
    };
    const auto direct = direct_minimize(objective, lo, hi, DirectOptions{options.budget, 1e-4});

    PlacementReport report;
    for (const auto& e : direct.evaluations) {
        report.evaluations.push_back({e.x[0], e.x[1], e.value});
    }
    report.best_alpha = direct.best_x[0];
    report.best_beta = direct.best_x[1];
    auto [localities, loss] = evaluate_placement(embeddings, profile, report.best_alpha, report.best_beta, options);
    if (localities.size() == 0) {
        throw DataError("no feasible locality placement found in the search box");
    }
    report.best_loss = loss;
    report.locality_in_degree = locality_in_degree(localities, samples);
    return {std::move(localities), std::move(report)};
}

}  // namespace lava
