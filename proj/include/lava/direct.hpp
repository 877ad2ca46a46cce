#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace lava {

struct DirectEvaluation {
    std::vector<double> x;
    double value;
};

struct DirectResult {
    std::vector<double> best_x;
    double best_value = 0.0;
    std::vector<DirectEvaluation> evaluations;  // in evaluation order
};

struct DirectOptions {
    std::size_t max_evaluations = 40;
    double epsilon = 1e-4;
};

using DirectObjective = std::function<double(std::span<const double>)>;

// DIviding RECTangles global minimization over the box [lower, upper]
// (Jones, Perttunen & Stuckman 1993). The first evaluation is the box center.
// Sample points generated in one iteration are evaluated concurrently; the
// objective must be safe to call from several threads.
DirectResult direct_minimize(const DirectObjective& objective, std::span<const double> lower,
                             std::span<const double> upper, const DirectOptions& options);

}  // namespace lava
