#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lava/config.hpp"
#include "lava/matrix.hpp"

namespace lava {

// Modules (M x pairs) and presences (localities x M), all entries in [0, 1].
struct AmfModel {
    RealMatrix modules;
    RealMatrix presences;

    std::size_t module_count() const noexcept { return modules.rows(); }
};

struct AmfGradients {
    RealMatrix presences;
    RealMatrix modules;
};

struct AmfRunResult {
    AmfModel model;
    double final_loss = 0.0;
    std::vector<double> loss_curve;  // full-dataset loss after each epoch
    double overestimation_ratio = 0.0;
    double cosine_similarity_mean = 0.0;
    std::size_t epochs_run = 0;
};

// C_hat(i, j) = max_m P(i, m) * M(m, j).
RealMatrix reconstruct(const AmfModel& model);

// nu where the reconstruction exceeds the data, 1 elsewhere.
std::vector<double> overestimation_mask(std::span<const float> observed, std::span<const double> reconstructed,
                                        double nu);

// ||C_i|| / sum_{j != i} ||C_j|| per locality. A single nonzero locality gets weight 1.
std::vector<double> norm_weights(const FloatMatrix& correlations);

// Sum over localities of norm-weighted masked cosine distance plus gamma * MAE.
double amf_loss(const FloatMatrix& correlations, const AmfModel& model, const AmfConfig& config);

// Mean of the per-locality terms over `rows`; `weights` from norm_weights().
double batch_loss(const FloatMatrix& correlations, const AmfModel& model, std::span<const std::size_t> rows,
                  std::span<const double> weights, const AmfConfig& config);

// Subgradient of batch_loss. The max routes each entry's gradient to the lowest
// index argmax module; the overestimation mask is held constant.
AmfGradients loss_gradients(const FloatMatrix& correlations, const AmfModel& model, std::span<const std::size_t> rows,
                            std::span<const double> weights, const AmfConfig& config);

// Share of total absolute error coming from entries where C_hat > C.
double overestimation_ratio(const FloatMatrix& correlations, const RealMatrix& reconstruction);

// 1 - (norm-weighted mean masked cosine distance): the main loss term as a similarity.
double cosine_similarity_term(const FloatMatrix& correlations, const AmfModel& model, const AmfConfig& config);

// Minibatch Adam with clamping to [0, 1]; returns the lowest-loss iterate.
AmfRunResult fit(const FloatMatrix& correlations, const AmfConfig& config);

// Pinball loss sum_c rho_tau(C_ic - C_hat_ic), averaged over pairs and summed over localities.
double pinball_loss(const FloatMatrix& correlations, const AmfModel& model, double tau);

// Re-fits presences under the pinball loss with the modules frozen.
AmfModel fine_tune_presences(const FloatMatrix& correlations, const AmfModel& model, double tau,
                             const AmfConfig& config);

AmfModel random_model(std::size_t localities, std::size_t pairs, std::size_t modules, std::uint64_t seed);

namespace reference {

RealMatrix reconstruct(const AmfModel& model);

}  // namespace reference

}  // namespace lava
