#include "lava/amf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lava/error.hpp"
#include "lava/random.hpp"

namespace lava {

namespace {

void check_shapes(const FloatMatrix& correlations, const AmfModel& model) {
    if (model.modules.cols() != correlations.cols() || model.presences.rows() != correlations.rows() ||
        model.presences.cols() != model.modules.rows()) {
        throw ParameterError("AMF model shape does not match the correlation matrix");
    }
}

// Reconstructed row plus the winning module per entry (lowest index on ties).
void reconstruct_row(const AmfModel& model, std::size_t i, std::span<double> out, std::span<std::size_t> argmax) {
    const auto p = model.presences.row(i);
    std::fill(out.begin(), out.end(), -1.0);
    for (std::size_t m = 0; m < model.modules.rows(); ++m) {
        const auto mod = model.modules.row(m);
        for (std::size_t c = 0; c < out.size(); ++c) {
            const double v = p[m] * mod[c];
            if (v > out[c]) {
                out[c] = v;
                argmax[c] = m;
            }
        }
    }
}

// Value-only variant for callers that do not need the winning module.
void max_row(const AmfModel& model, std::size_t i, std::span<double> out) {
    const auto p = model.presences.row(i);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t m = 0; m < model.modules.rows(); ++m) {
        const auto mod = model.modules.row(m);
        const double pm = p[m];
        for (std::size_t c = 0; c < out.size(); ++c) {
            out[c] = std::max(out[c], pm * mod[c]);
        }
    }
}

struct RowTerms {
    double cosine_distance = 0.0;  // 0 when the observed row is all zero
    double mae = 0.0;
    bool cosine_defined = false;
};

RowTerms row_terms(std::span<const float> observed, std::span<const double> recon, double nu) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    double abs_err = 0.0;
    for (std::size_t c = 0; c < observed.size(); ++c) {
        const double x = observed[c];
        const double w = recon[c] > x ? nu : 1.0;
        const double a = w * x;
        const double b = w * recon[c];
        dot += a * b;
        na += a * a;
        nb += b * b;
        abs_err += std::abs(recon[c] - x);
    }
    RowTerms t;
    t.mae = abs_err / static_cast<double>(observed.size());
    if (na > 0.0) {
        t.cosine_defined = true;
        t.cosine_distance = nb > 0.0 ? 1.0 - dot / std::sqrt(na * nb) : 1.0;
    }
    return t;
}

// d(row loss)/d(C_hat_ic) for one locality.
void row_gradient(std::span<const float> observed, std::span<const double> recon, double weight, double nu,
                  double gamma, std::span<double> grad) {
    const std::size_t k = observed.size();
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const double w = recon[c] > observed[c] ? nu : 1.0;
        const double a = w * observed[c];
        const double b = w * recon[c];
        dot += a * b;
        na += a * a;
        nb += b * b;
    }
    const double mae_scale = gamma / static_cast<double>(k);
    const double norm_a = std::sqrt(na);
    const double norm_b = std::sqrt(nb);
    for (std::size_t c = 0; c < k; ++c) {
        const double x = observed[c];
        const double w = recon[c] > x ? nu : 1.0;
        double g = 0.0;
        if (na > 0.0 && weight > 0.0) {
            const double a = w * x;
            if (nb > 0.0) {
                const double cosine = dot / (norm_a * norm_b);
                const double dcos_db = a / (norm_a * norm_b) - cosine * (w * recon[c]) / nb;
                g = -weight * w * dcos_db;
            } else {
                // Zero reconstruction: cosine is undefined; push toward the data direction.
                g = -weight * w * a / norm_a;
            }
        }
        const double diff = recon[c] - x;
        g += mae_scale * (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0));
        grad[c] = g;
    }
}

void clamp_unit(RealMatrix& m) {
    for (auto& v : m.values()) {
        v = std::clamp(v, 0.0, 1.0);
    }
}

class Adam {
  public:
    Adam(std::size_t size, const AmfConfig& config) : m_(size, 0.0), v_(size, 0.0), config_(config) {}

    void step(std::span<double> params, std::span<const double> grads, std::size_t t) {
        const double b1 = config_.beta1;
        const double b2 = config_.beta2;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
            v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i] * grads[i];
            const double mhat = m_[i] / c1;
            const double vhat = v_[i] / c2;
            params[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.adam_epsilon);
        }
    }

  private:
    std::vector<double> m_;
    std::vector<double> v_;
    AmfConfig config_;
};

struct TrainOutcome {
    AmfModel best;
    std::vector<double> curve;
    double best_loss = std::numeric_limits<double>::infinity();
};

// Shared minibatch loop: shuffle, Adam step, clamp, full-loss bookkeeping, patience stop.
template <typename GradFn, typename LossFn>
TrainOutcome train(AmfModel model, bool update_modules, std::size_t localities, const AmfConfig& config, Rng& rng,
                   GradFn&& gradients, LossFn&& full_loss) {
    Adam adam_p(model.presences.size(), config);
    Adam adam_m(model.modules.size(), config);
    std::vector<std::size_t> order(localities);
    std::iota(order.begin(), order.end(), 0);

    TrainOutcome out;
    double reference = std::numeric_limits<double>::infinity();
    std::size_t reference_epoch = 0;
    std::size_t step = 0;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t start = 0; start < localities; start += config.batch_size) {
            const std::size_t end = std::min(localities, start + config.batch_size);
            const std::span<const std::size_t> batch(order.data() + start, end - start);
            const auto g = gradients(model, batch);
            ++step;
            adam_p.step(model.presences.values(), g.presences.values(), step);
            clamp_unit(model.presences);
            if (update_modules) {
                adam_m.step(model.modules.values(), g.modules.values(), step);
                clamp_unit(model.modules);
            }
        }
        const double loss = full_loss(model);
        if (!std::isfinite(loss)) {
            throw DataError("AMF loss became non-finite at epoch " + std::to_string(epoch));
        }
        out.curve.push_back(loss);
        if (loss < out.best_loss) {
            out.best_loss = loss;
            out.best = model;
        }
        if (loss < reference * (1.0 - config.improvement_tol)) {
            reference = loss;
            reference_epoch = epoch;
        } else if (epoch - reference_epoch >= config.patience_epochs) {
            break;
        }
    }
    return out;
}

}  // namespace

RealMatrix reconstruct(const AmfModel& model) {
    const std::size_t rows = model.presences.rows();
    const std::size_t cols = model.modules.cols();
    if (model.presences.cols() != model.modules.rows()) {
        throw ParameterError("presence columns must equal module count");
    }
    RealMatrix out(rows, cols, 0.0);
    const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        max_row(model, static_cast<std::size_t>(ii), out.row(static_cast<std::size_t>(ii)));
    }
    return out;
}

std::vector<double> overestimation_mask(std::span<const float> observed, std::span<const double> reconstructed,
                                        double nu) {
    if (observed.size() != reconstructed.size()) {
        throw ParameterError("overestimation_mask: lengths differ");
    }
    std::vector<double> w(observed.size());
    for (std::size_t c = 0; c < w.size(); ++c) {
        w[c] = reconstructed[c] > observed[c] ? nu : 1.0;
    }
    return w;
}

std::vector<double> norm_weights(const FloatMatrix& correlations) {
    std::vector<double> norms(correlations.rows());
    double total = 0.0;
    for (std::size_t i = 0; i < norms.size(); ++i) {
        double s = 0.0;
        for (const float v : correlations.row(i)) {
            s += static_cast<double>(v) * v;
        }
        norms[i] = std::sqrt(s);
        total += norms[i];
    }
    std::vector<double> weights(norms.size());
    for (std::size_t i = 0; i < norms.size(); ++i) {
        const double others = total - norms[i];
        weights[i] = others > 0.0 ? norms[i] / others : (norms[i] > 0.0 ? 1.0 : 0.0);
    }
    return weights;
}

double batch_loss(const FloatMatrix& correlations, const AmfModel& model, std::span<const std::size_t> rows,
                  std::span<const double> weights, const AmfConfig& config) {
    check_shapes(correlations, model);
    if (rows.empty()) {
        return 0.0;
    }
    std::vector<double> recon(correlations.cols());
    std::vector<std::size_t> argmax(correlations.cols());
    double total = 0.0;
    for (const auto i : rows) {
        reconstruct_row(model, i, recon, argmax);
        const auto t = row_terms(correlations.row(i), recon, config.nu);
        total += (t.cosine_defined ? weights[i] * t.cosine_distance : 0.0) + config.gamma * t.mae;
    }
    return total / static_cast<double>(rows.size());
}

double amf_loss(const FloatMatrix& correlations, const AmfModel& model, const AmfConfig& config) {
    check_shapes(correlations, model);
    const auto weights = norm_weights(correlations);
    const std::size_t rows = correlations.rows();
    std::vector<double> per_row(rows);
    const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel
    {
        std::vector<double> recon(correlations.cols());
        std::vector<std::size_t> argmax(correlations.cols());
#pragma omp for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            reconstruct_row(model, i, recon, argmax);
            const auto t = row_terms(correlations.row(i), recon, config.nu);
            per_row[i] = (t.cosine_defined ? weights[i] * t.cosine_distance : 0.0) + config.gamma * t.mae;
        }
    }
    // Fixed summation order keeps the loss bit-reproducible across thread counts.
    return std::accumulate(per_row.begin(), per_row.end(), 0.0);
}

AmfGradients loss_gradients(const FloatMatrix& correlations, const AmfModel& model, std::span<const std::size_t> rows,
                            std::span<const double> weights, const AmfConfig& config) {
    check_shapes(correlations, model);
    const std::size_t k = correlations.cols();
    AmfGradients g{RealMatrix(model.presences.rows(), model.presences.cols(), 0.0),
                   RealMatrix(model.modules.rows(), model.modules.cols(), 0.0)};
    if (rows.empty()) {
        return g;
    }
    const double scale = 1.0 / static_cast<double>(rows.size());
    std::vector<double> recon(k);
    std::vector<std::size_t> argmax(k);
    std::vector<double> grad(k);
    for (const auto i : rows) {
        reconstruct_row(model, i, recon, argmax);
        row_gradient(correlations.row(i), recon, weights[i], config.nu, config.gamma, grad);
        auto gp = g.presences.row(i);
        const auto p = model.presences.row(i);
        for (std::size_t c = 0; c < k; ++c) {
            const double gh = grad[c] * scale;
            const auto m = argmax[c];
            gp[m] += gh * model.modules(m, c);
            g.modules(m, c) += gh * p[m];
        }
    }
    return g;
}

double overestimation_ratio(const FloatMatrix& correlations, const RealMatrix& reconstruction) {
    double over = 0.0;
    double total = 0.0;
    for (std::size_t idx = 0; idx < correlations.size(); ++idx) {
        const double diff = reconstruction.values()[idx] - correlations.values()[idx];
        if (diff > 0.0) {
            over += diff;
        }
        total += std::abs(diff);
    }
    return total > 0.0 ? over / total : 0.0;
}

double cosine_similarity_term(const FloatMatrix& correlations, const AmfModel& model, const AmfConfig& config) {
    check_shapes(correlations, model);
    const auto weights = norm_weights(correlations);
    const auto recon = reconstruct(model);
    double weighted = 0.0;
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < correlations.rows(); ++i) {
        const auto t = row_terms(correlations.row(i), recon.row(i), config.nu);
        if (t.cosine_defined) {
            weighted += weights[i] * t.cosine_distance;
            weight_sum += weights[i];
        }
    }
    return weight_sum > 0.0 ? 1.0 - weighted / weight_sum : 0.0;
}

AmfModel random_model(std::size_t localities, std::size_t pairs, std::size_t modules, std::uint64_t seed) {
    Rng rng(seed);
    AmfModel model{RealMatrix(modules, pairs), RealMatrix(localities, modules)};
    for (auto& v : model.modules.values()) {
        v = rng.uniform();
    }
    for (auto& v : model.presences.values()) {
        v = rng.uniform();
    }
    return model;
}

AmfRunResult fit(const FloatMatrix& correlations, const AmfConfig& config) {
    config.validate();
    if (correlations.rows() == 0 || correlations.cols() == 0) {
        throw ParameterError("AMF needs a nonempty correlation matrix");
    }
    Rng rng(config.seed);
    AmfModel model{RealMatrix(config.num_modules, correlations.cols()),
                   RealMatrix(correlations.rows(), config.num_modules)};
    for (auto& v : model.modules.values()) {
        v = rng.uniform();
    }
    for (auto& v : model.presences.values()) {
        v = rng.uniform();
    }
    const auto weights = norm_weights(correlations);

    auto outcome = train(
        std::move(model), true, correlations.rows(), config, rng,
        [&](const AmfModel& m, std::span<const std::size_t> batch) {
            return loss_gradients(correlations, m, batch, weights, config);
        },
        [&](const AmfModel& m) { return amf_loss(correlations, m, config); });

    AmfRunResult result;
    result.model = std::move(outcome.best);
    result.final_loss = outcome.best_loss;
    result.loss_curve = std::move(outcome.curve);
    result.epochs_run = result.loss_curve.size();
    result.overestimation_ratio = overestimation_ratio(correlations, reconstruct(result.model));
    result.cosine_similarity_mean = cosine_similarity_term(correlations, result.model, config);
    return result;
}

double pinball_loss(const FloatMatrix& correlations, const AmfModel& model, double tau) {
    check_shapes(correlations, model);
    const auto recon = reconstruct(model);
    double total = 0.0;
    for (std::size_t i = 0; i < correlations.rows(); ++i) {
        double row = 0.0;
        for (std::size_t c = 0; c < correlations.cols(); ++c) {
            const double u = correlations(i, c) - recon(i, c);
            row += u >= 0.0 ? tau * u : (tau - 1.0) * u;
        }
        total += row / static_cast<double>(correlations.cols());
    }
    return total;
}

AmfModel fine_tune_presences(const FloatMatrix& correlations, const AmfModel& model, double tau,
                             const AmfConfig& config) {
    config.validate();
    check_shapes(correlations, model);
    if (!(tau > 0.0 && tau < 1.0)) {
        throw ParameterError("tau must lie in (0, 1)");
    }
    const std::size_t k = correlations.cols();
    Rng rng(config.seed);
    auto outcome = train(
        model, false, correlations.rows(), config, rng,
        [&](const AmfModel& m, std::span<const std::size_t> batch) {
            AmfGradients g{RealMatrix(m.presences.rows(), m.presences.cols(), 0.0), RealMatrix()};
            const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(k));
            std::vector<double> recon(k);
            std::vector<std::size_t> argmax(k);
            for (const auto i : batch) {
                reconstruct_row(m, i, recon, argmax);
                for (std::size_t c = 0; c < k; ++c) {
                    const double u = correlations(i, c) - recon[c];
                    const double dh = u > 0.0 ? -tau : (u < 0.0 ? 1.0 - tau : 0.0);
                    g.presences(i, argmax[c]) += scale * dh * m.modules(argmax[c], c);
                }
            }
            return g;
        },
        [&](const AmfModel& m) { return pinball_loss(correlations, m, tau); });
    return std::move(outcome.best);
}

namespace reference {

RealMatrix reconstruct(const AmfModel& model) {
    RealMatrix out(model.presences.rows(), model.modules.cols(), 0.0);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) {
            double best = 0.0;
            for (std::size_t m = 0; m < model.modules.rows(); ++m) {
                best = std::max(best, model.presences(i, m) * model.modules(m, j));
            }
            out(i, j) = best;
        }
    }
    return out;
}

}  // namespace reference

}  // namespace lava
