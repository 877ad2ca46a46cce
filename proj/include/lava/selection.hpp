#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lava/amf.hpp"
#include "lava/config.hpp"
#include "lava/matrix.hpp"

namespace lava {

// 1 - cosine similarity; a zero vector has similarity 0 with everything.
double cosine_distance(std::span<const double> a, std::span<const double> b);

struct KMedoidsResult {
    std::vector<std::size_t> medoids;      // row indices, ascending
    std::vector<std::size_t> assignments;  // cluster position in `medoids` per row
    double cost = 0.0;
};

// PAM: greedy BUILD then best-improvement SWAP. Restart 0 starts from BUILD,
// later restarts from seeded random medoid sets; the cheapest result wins.
KMedoidsResult k_medoids_cosine(const RealMatrix& vectors, std::size_t k, std::size_t restarts, std::uint64_t seed);

// Mean silhouette width under cosine distance; singleton clusters score 0.
double silhouette_cosine(const RealMatrix& vectors, std::span<const std::size_t> assignments);

struct CandidateSummary {
    std::size_t module_count = 0;
    double cosine_mean = 0.0;
    double cosine_std = 0.0;
    double overestimation_mean = 0.0;
    double overestimation_std = 0.0;
    double loss_mean = 0.0;
    double loss_std = 0.0;
    std::optional<double> silhouette;  // undefined with fewer than 2 usable clusters
    std::size_t pooled_modules = 0;    // nonzero module rows clustered
    std::size_t best_run = 0;          // lowest final_loss
    std::vector<double> run_losses;
};

struct SelectionReport {
    std::vector<CandidateSummary> candidates;
    std::size_t chosen_module_count = 0;
    std::size_t chosen_candidate = 0;
    std::size_t chosen_run = 0;
};

struct SelectionOutcome {
    SelectionReport report;
    std::vector<std::vector<AmfRunResult>> runs;  // [candidate][run]
};

std::uint64_t run_seed(std::uint64_t base, std::size_t module_count, std::size_t run);

// Default choice: smallest candidate whose mean cosine term is within
// tolerance_fraction of the best one; higher silhouette breaks ties.
std::size_t default_choice(std::span<const CandidateSummary> candidates, double tolerance_fraction);

SelectionOutcome select_modules(const FloatMatrix& correlations, const SelectionConfig& selection,
                                const AmfConfig& amf);

}  // namespace lava
