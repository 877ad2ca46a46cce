#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lava/amf.hpp"

namespace lava::testing {

// Ranks by stable sort, ties averaged, then Pearson on the ranks by the textbook formula.
inline double rank_then_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            idx[i] = i;
        }
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        std::size_t i = 0;
        while (i < idx.size()) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
                ++j;
            }
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i] / n;
        my += ry[i] / n;
    }
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        return 0.0;
    }
    return std::abs(sxy / std::sqrt(sxx * syy));
}

// Student t CDF for integer dof from the finite trigonometric series.
inline long double t_cdf_series(long double t, int dof) {
    const long double theta = std::atan(std::fabs(t) / std::sqrt(static_cast<long double>(dof)));
    const long double s = std::sin(theta);
    const long double c = std::cos(theta);
    long double a = 0.0L;
    if (dof % 2 == 1) {
        long double term = 0.0L;
        if (dof > 1) {
            long double coef = 1.0L;
            long double cpow = c;
            term = coef * cpow;
            for (int k = 3; k <= dof - 2; k += 2) {
                coef *= static_cast<long double>(k - 1) / static_cast<long double>(k);
                cpow *= c * c;
                term += coef * cpow;
            }
        }
        a = 2.0L / std::numbers::pi_v<long double> * (theta + s * term);
    } else {
        long double coef = 1.0L;
        long double cpow = 1.0L;
        long double sum = 1.0L;
        for (int k = 2; k <= dof - 2; k += 2) {
            coef *= static_cast<long double>(k - 1) / static_cast<long double>(k);
            cpow *= c * c;
            sum += coef * cpow;
        }
        a = s * sum;
    }
    return t >= 0 ? 0.5L + a / 2.0L : 0.5L - a / 2.0L;
}

inline RealMatrix triple_loop(const AmfModel& model) {
    RealMatrix out(model.presences.rows(), model.modules.cols());
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) {
            double best = model.presences(i, 0) * model.modules(0, j);
            for (std::size_t m = 1; m < model.modules.rows(); ++m) {
                best = std::max(best, model.presences(i, m) * model.modules(m, j));
            }
            out(i, j) = best;
        }
    }
    return out;
}

// Interior point with no argmax ties and no reconstruction entry near the data.
inline bool non_degenerate(const FloatMatrix& c, const AmfModel& model) {
    const auto interior = [](const RealMatrix& m) {
        return std::all_of(m.values().begin(), m.values().end(), [](double v) { return v >= 0.05 && v <= 0.95; });
    };
    if (!interior(model.presences) || !interior(model.modules)) {
        return false;
    }
    for (std::size_t i = 0; i < c.rows(); ++i) {
        for (std::size_t j = 0; j < c.cols(); ++j) {
            std::vector<double> products;
            for (std::size_t m = 0; m < model.module_count(); ++m) {
                products.push_back(model.presences(i, m) * model.modules(m, j));
            }
            std::sort(products.rbegin(), products.rend());
            if (products.size() > 1 && products[0] - products[1] < 1e-4) {
                return false;
            }
            if (std::abs(products[0] - double(c(i, j))) < 1e-3) {
                return false;
            }
        }
    }
    return true;
}

// ||analytic - central difference|| / ||central difference|| over all parameters of a batch loss.
inline double gradient_relative_error(const FloatMatrix& c, AmfModel model, const AmfConfig& config,
                                      double step = 1e-6) {
    std::vector<std::size_t> rows(c.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = i;
    }
    const auto weights = norm_weights(c);
    const auto g = loss_gradients(c, model, rows, weights, config);
    std::vector<double> analytic(g.presences.values().begin(), g.presences.values().end());
    analytic.insert(analytic.end(), g.modules.values().begin(), g.modules.values().end());
    std::vector<double*> params;
    for (auto& v : model.presences.values()) {
        params.push_back(&v);
    }
    for (auto& v : model.modules.values()) {
        params.push_back(&v);
    }
    double diff2 = 0.0, ref2 = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double saved = *params[k];
        *params[k] = saved + step;
        const double up = batch_loss(c, model, rows, weights, config);
        *params[k] = saved - step;
        const double down = batch_loss(c, model, rows, weights, config);
        *params[k] = saved;
        const double fd = (up - down) / (2.0 * step);
        diff2 += (fd - analytic[k]) * (fd - analytic[k]);
        ref2 += fd * fd;
    }
    return std::sqrt(diff2 / ref2);
}

}  // namespace lava::testing
