#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lava/amf.hpp"
#include "lava/correlation.hpp"
#include "lava/data_io.hpp"
#include "lava/placement.hpp"

namespace lava {

// Cosine similarity of every locality to `reference`, over `pair_subset`
// (all pairs when empty optional). Rows with zero restricted norm score 0.
std::vector<double> locality_similarity(const FloatMatrix& correlations, std::size_t reference,
                                        const std::optional<std::vector<std::size_t>>& pair_subset = std::nullopt);

struct PresenceStats {
    std::vector<double> summed_presence;
    std::vector<std::optional<double>> entropy_bits;  // nullopt for localities below the floor
    std::size_t retained = 0;
    double mean = 0.0;
    double std = 0.0;
    double presence_floor = 0.5;
    bool empty = true;  // no locality reached the floor
};

// Shannon entropy (bits) of each locality's presences scaled to sum 1.
PresenceStats presence_entropy(const AmfModel& model, double presence_floor = 0.5);

double shannon_entropy_bits(std::span<const double> probabilities);

// sum_i P_im C_i / sum_i P_im.
std::vector<double> presence_weighted_average(const FloatMatrix& correlations, const AmfModel& model,
                                              std::size_t module);

struct ModuleAssociation {
    std::size_t module = 0;
    std::size_t localities = 0;  // presence above the inclusion threshold
    bool defined = false;        // needs at least 3 localities
    double pearson_r = 0.0;
    double pearson_p = 1.0;
    double spearman_r = 0.0;
    double spearman_p = 1.0;
};

struct MetadataAssociation {
    std::string target_label;
    double presence_threshold = 0.01;
    std::vector<double> locality_ratio;  // share of members carrying the target label
    std::vector<ModuleAssociation> modules;
};

MetadataAssociation metadata_association(const AmfModel& model, const SampleLabels& labels,
                                         const LocalitySet& localities, const std::string& target_label,
                                         double presence_threshold = 0.01);

struct FeatureRanking {
    std::vector<std::pair<std::size_t, double>> ordered;  // (feature, correlation sum), descending
    std::vector<std::size_t> retained;                    // sum >= cutoff * max sum
    bool all_zero = false;
};

FeatureRanking module_feature_ranking(const AmfModel& model, const PairIndex& pairs, std::size_t module,
                                      double fraction_cutoff);

// Per-feature sums of a pair-length vector.
std::vector<double> feature_sums(std::span<const double> pair_values, const PairIndex& pairs);

// Statistics helpers.
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);
// Two-sided p-value of a correlation coefficient over k observations (t test, k-2 dof).
double correlation_p_value(double r, std::size_t k);

}  // namespace lava
