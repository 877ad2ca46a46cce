#include "lava/direct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lava/error.hpp"

namespace lava {

namespace {

// Hyperrectangle in the unit cube; side length along d is 3^-levels[d].
struct Rect {
    std::vector<double> center;
    std::vector<int> levels;
    double value;

    double size() const {
        double s = 0.0;
        for (const int l : levels) {
            const double side = std::pow(3.0, -l);
            s += side * side;
        }
        return 0.5 * std::sqrt(s);
    }
};

struct Divide {
    std::size_t rect;
    std::vector<std::size_t> dims;
    std::size_t first_sample;
};

std::vector<std::size_t> potentially_optimal(const std::vector<Rect>& rects, double f_min, double epsilon) {
    // Lowest value per distinct size; ties keep the earliest rectangle.
    std::vector<std::pair<double, std::size_t>> groups;
    {
        std::vector<std::size_t> order(rects.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> sizes(rects.size());
        for (std::size_t i = 0; i < rects.size(); ++i) {
            sizes[i] = rects[i].size();
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sizes[a] < sizes[b]; });
        for (const auto i : order) {
            if (!groups.empty() && std::abs(groups.back().first - sizes[i]) <= 1e-12 * sizes[i]) {
                if (rects[i].value < rects[groups.back().second].value) {
                    groups.back().second = i;
                }
            } else {
                groups.emplace_back(sizes[i], i);
            }
        }
    }

    std::vector<std::size_t> selected;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double dj = groups[g].first;
        const double fj = rects[groups[g].second].value;
        double k_low = 0.0;
        double k_high = std::numeric_limits<double>::infinity();
        for (std::size_t h = 0; h < groups.size(); ++h) {
            if (h == g) {
                continue;
            }
            const double di = groups[h].first;
            const double fi = rects[groups[h].second].value;
            if (di < dj) {
                k_low = std::max(k_low, (fj - fi) / (dj - di));
            } else {
                k_high = std::min(k_high, (fi - fj) / (di - dj));
            }
        }
        if (k_low > k_high || k_high <= 0.0) {
            continue;
        }
        if (std::isfinite(k_high) && fj - k_high * dj > f_min - epsilon * std::abs(f_min)) {
            continue;
        }
        selected.push_back(groups[g].second);
    }
    // Largest rectangles first.
    std::reverse(selected.begin(), selected.end());
    return selected;
}

}  // namespace

DirectResult direct_minimize(const DirectObjective& objective, std::span<const double> lower,
                             std::span<const double> upper, const DirectOptions& options) {
    const std::size_t dim = lower.size();
    if (dim == 0 || upper.size() != dim) {
        throw ParameterError("DIRECT bounds must be nonempty and of equal length");
    }
    for (std::size_t d = 0; d < dim; ++d) {
        if (!(upper[d] > lower[d])) {
            throw ParameterError("DIRECT bounds must satisfy lower < upper");
        }
    }
    if (options.max_evaluations < 1) {
        throw ParameterError("DIRECT evaluation budget must be >= 1");
    }

    const auto to_box = [&](std::span<const double> unit) {
        std::vector<double> x(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            x[d] = lower[d] + unit[d] * (upper[d] - lower[d]);
        }
        return x;
    };

    DirectResult result;
    std::vector<Rect> rects;
    {
        Rect root{std::vector<double>(dim, 0.5), std::vector<int>(dim, 0), 0.0};
        auto x = to_box(root.center);
        root.value = objective(x);
        result.evaluations.push_back({std::move(x), root.value});
        rects.push_back(std::move(root));
    }
    double f_min = rects[0].value;

    while (result.evaluations.size() < options.max_evaluations) {
        const auto chosen = potentially_optimal(rects, f_min, options.epsilon);

        // Plan the divisions that fit in the remaining budget.
        std::vector<Divide> plan;
        std::vector<std::vector<double>> samples;
        std::size_t budget_left = options.max_evaluations - result.evaluations.size();
        for (const auto r : chosen) {
            const auto& rect = rects[r];
            const int min_level = *std::min_element(rect.levels.begin(), rect.levels.end());
            Divide div{r, {}, samples.size()};
            for (std::size_t d = 0; d < dim; ++d) {
                if (rect.levels[d] == min_level) {
                    div.dims.push_back(d);
                }
            }
            if (2 * div.dims.size() > budget_left) {
                break;
            }
            budget_left -= 2 * div.dims.size();
            const double delta = std::pow(3.0, -(min_level + 1));
            for (const auto d : div.dims) {
                auto plus = rect.center;
                auto minus = rect.center;
                plus[d] += delta;
                minus[d] -= delta;
                samples.push_back(std::move(plus));
                samples.push_back(std::move(minus));
            }
            plan.push_back(std::move(div));
        }
        if (plan.empty()) {
            break;
        }

        std::vector<std::vector<double>> points(samples.size());
        std::vector<double> values(samples.size());
        for (std::size_t s = 0; s < samples.size(); ++s) {
            points[s] = to_box(samples[s]);
        }
        const auto count = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t s = 0; s < count; ++s) {
            values[static_cast<std::size_t>(s)] = objective(points[static_cast<std::size_t>(s)]);
        }
        for (std::size_t s = 0; s < samples.size(); ++s) {
            result.evaluations.push_back({points[s], values[s]});
            f_min = std::min(f_min, values[s]);
        }

        for (const auto& div : plan) {
            // Split the dimension with the best sample first so it lands in the largest piece.
            std::vector<std::size_t> order(div.dims.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const double wa = std::min(values[div.first_sample + 2 * a], values[div.first_sample + 2 * a + 1]);
                const double wb = std::min(values[div.first_sample + 2 * b], values[div.first_sample + 2 * b + 1]);
                return wa < wb;
            });
            for (const auto k : order) {
                const auto d = div.dims[k];
                rects[div.rect].levels[d] += 1;
                const auto levels = rects[div.rect].levels;
                for (std::size_t side = 0; side < 2; ++side) {
                    const auto s = div.first_sample + 2 * k + side;
                    rects.push_back(Rect{samples[s], levels, values[s]});
                }
            }
        }
    }

    const auto best = std::min_element(result.evaluations.begin(), result.evaluations.end(),
                                       [](const auto& a, const auto& b) { return a.value < b.value; });
    result.best_x = best->x;
    result.best_value = best->value;
    return result;
}

}  // namespace lava
