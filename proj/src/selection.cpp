#include "lava/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lava/error.hpp"
#include "lava/random.hpp"

namespace lava {

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) {
        return 1.0;
    }
    return std::max(0.0, 1.0 - dot / std::sqrt(na * nb));
}

namespace {

RealMatrix distance_matrix(const RealMatrix& vectors) {
    const std::size_t n = vectors.rows();
    RealMatrix d(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            d(i, j) = d(j, i) = cosine_distance(vectors.row(i), vectors.row(j));
        }
    }
    return d;
}

double total_cost(const RealMatrix& d, std::span<const std::size_t> medoids) {
    double cost = 0.0;
    for (std::size_t j = 0; j < d.rows(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto m : medoids) {
            best = std::min(best, d(m, j));
        }
        cost += best;
    }
    return cost;
}

std::vector<std::size_t> build(const RealMatrix& d, std::size_t k) {
    const std::size_t n = d.rows();
    std::vector<std::size_t> medoids;
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::vector<bool> chosen(n, false);
    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = n;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < n; ++c) {
            if (chosen[c]) {
                continue;
            }
            double cost = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                cost += std::min(nearest[j], d(c, j));
            }
            if (cost < best_cost) {
                best_cost = cost;
                best = c;
            }
        }
        chosen[best] = true;
        medoids.push_back(best);
        for (std::size_t j = 0; j < n; ++j) {
            nearest[j] = std::min(nearest[j], d(best, j));
        }
    }
    return medoids;
}

double swap_phase(const RealMatrix& d, std::vector<std::size_t>& medoids) {
    const std::size_t n = d.rows();
    double cost = total_cost(d, medoids);
    while (true) {
        std::vector<bool> is_medoid(n, false);
        for (const auto m : medoids) {
            is_medoid[m] = true;
        }
        double best_cost = cost;
        std::size_t best_pos = 0;
        std::size_t best_candidate = n;
        for (std::size_t pos = 0; pos < medoids.size(); ++pos) {
            for (std::size_t c = 0; c < n; ++c) {
                if (is_medoid[c]) {
                    continue;
                }
                auto trial = medoids;
                trial[pos] = c;
                const double t = total_cost(d, trial);
                if (t < best_cost - 1e-12) {
                    best_cost = t;
                    best_pos = pos;
                    best_candidate = c;
                }
            }
        }
        if (best_candidate == n) {
            return cost;
        }
        medoids[best_pos] = best_candidate;
        cost = best_cost;
    }
}

double sample_std(std::span<const double> xs, double mean) {
    if (xs.size() < 2) {
        return 0.0;
    }
    double s = 0.0;
    for (const double x : xs) {
        s += (x - mean) * (x - mean);
    }
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

double mean_of(std::span<const double> xs) {
    return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

KMedoidsResult k_medoids_cosine(const RealMatrix& vectors, std::size_t k, std::size_t restarts, std::uint64_t seed) {
    const std::size_t n = vectors.rows();
    if (k == 0 || k > n) {
        throw ParameterError("k-medoids needs 1 <= k <= N (k=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
    }
    const auto d = distance_matrix(vectors);
    KMedoidsResult best;
    best.cost = std::numeric_limits<double>::infinity();
    Rng rng(seed);
    for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
        std::vector<std::size_t> medoids;
        if (r == 0) {
            medoids = build(d, k);
        } else {
            std::vector<std::size_t> all(n);
            std::iota(all.begin(), all.end(), 0);
            rng.shuffle(std::span<std::size_t>(all));
            medoids.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
        }
        const double cost = swap_phase(d, medoids);
        if (cost < best.cost - 1e-12) {
            best.cost = cost;
            best.medoids = medoids;
        }
    }
    std::sort(best.medoids.begin(), best.medoids.end());
    best.assignments.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t arg = 0;
        for (std::size_t pos = 1; pos < k; ++pos) {
            if (d(best.medoids[pos], j) < d(best.medoids[arg], j)) {
                arg = pos;
            }
        }
        best.assignments[j] = arg;
    }
    // A medoid always belongs to its own cluster.
    for (std::size_t pos = 0; pos < k; ++pos) {
        best.assignments[best.medoids[pos]] = pos;
    }
    return best;
}

double silhouette_cosine(const RealMatrix& vectors, std::span<const std::size_t> assignments) {
    const std::size_t n = vectors.rows();
    if (assignments.size() != n) {
        throw ParameterError("silhouette: one assignment per vector required");
    }
    const std::size_t clusters = n == 0 ? 0 : *std::max_element(assignments.begin(), assignments.end()) + 1;
    std::vector<std::size_t> sizes(clusters, 0);
    for (const auto a : assignments) {
        ++sizes[a];
    }
    const auto nonempty = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
    if (nonempty < 2) {
        throw ParameterError("silhouette needs at least 2 nonempty clusters");
    }
    const auto d = distance_matrix(vectors);
    double total = 0.0;
    std::vector<double> sums(clusters);
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = assignments[i];
        if (sizes[own] <= 1) {
            continue;
        }
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                sums[assignments[j]] += d(i, j);
            }
        }
        const double a = sums[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < clusters; ++c) {
            if (c != own && sizes[c] > 0) {
                b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
            }
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

std::uint64_t run_seed(std::uint64_t base, std::size_t module_count, std::size_t run) {
    return derive_seed(derive_seed(base, module_count), run);
}

std::size_t default_choice(std::span<const CandidateSummary> candidates, double tolerance_fraction) {
    if (candidates.empty()) {
        throw ParameterError("no candidates to choose from");
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
        best = std::max(best, c.cosine_mean);
    }
    const double bar = best - tolerance_fraction * std::abs(best);
    std::size_t chosen = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (c.cosine_mean < bar) {
            continue;
        }
        if (chosen == candidates.size() || c.module_count < candidates[chosen].module_count) {
            chosen = i;
        } else if (c.module_count == candidates[chosen].module_count &&
                   c.silhouette.value_or(-2.0) > candidates[chosen].silhouette.value_or(-2.0)) {
            chosen = i;
        }
    }
    return chosen;
}

SelectionOutcome select_modules(const FloatMatrix& correlations, const SelectionConfig& selection,
                                const AmfConfig& amf) {
    selection.validate();
    amf.validate();
    std::vector<std::size_t> counts = selection.candidates;
    if (counts.empty()) {
        counts.push_back(amf.num_modules);
    }

    SelectionOutcome outcome;
    outcome.runs.resize(counts.size());
    for (std::size_t ci = 0; ci < counts.size(); ++ci) {
        const std::size_t module_count = counts[ci];
        auto& runs = outcome.runs[ci];
        runs.resize(selection.num_runs);
        const auto r_count = static_cast<std::ptrdiff_t>(selection.num_runs);
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t r = 0; r < r_count; ++r) {
            AmfConfig cfg = amf;
            cfg.num_modules = module_count;
            cfg.seed = run_seed(amf.seed, module_count, selection.shared_run_seed ? 0 : static_cast<std::size_t>(r));
            runs[static_cast<std::size_t>(r)] = fit(correlations, cfg);
        }

        CandidateSummary summary;
        summary.module_count = module_count;
        std::vector<double> cosines;
        std::vector<double> overs;
        for (std::size_t r = 0; r < runs.size(); ++r) {
            cosines.push_back(runs[r].cosine_similarity_mean);
            overs.push_back(runs[r].overestimation_ratio);
            summary.run_losses.push_back(runs[r].final_loss);
            if (runs[r].final_loss < runs[summary.best_run].final_loss) {
                summary.best_run = r;
            }
        }
        summary.cosine_mean = mean_of(cosines);
        summary.cosine_std = sample_std(cosines, summary.cosine_mean);
        summary.overestimation_mean = mean_of(overs);
        summary.overestimation_std = sample_std(overs, summary.overestimation_mean);
        summary.loss_mean = mean_of(summary.run_losses);
        summary.loss_std = sample_std(summary.run_losses, summary.loss_mean);

        // Pool every nonzero module row across runs.
        std::vector<double> pooled;
        std::size_t rows = 0;
        for (const auto& run : runs) {
            for (std::size_t m = 0; m < run.model.modules.rows(); ++m) {
                const auto row = run.model.modules.row(m);
                if (std::any_of(row.begin(), row.end(), [](double v) { return v != 0.0; })) {
                    pooled.insert(pooled.end(), row.begin(), row.end());
                    ++rows;
                }
            }
        }
        summary.pooled_modules = rows;
        if (module_count >= 2 && rows > module_count) {
            const RealMatrix vectors(rows, correlations.cols(), std::move(pooled));
            const auto clusters = k_medoids_cosine(vectors, module_count, selection.medoid_restarts,
                                                   derive_seed(selection.seed, module_count));
            summary.silhouette = silhouette_cosine(vectors, clusters.assignments);
        }
        outcome.report.candidates.push_back(std::move(summary));
    }

    auto& report = outcome.report;
    if (selection.chosen) {
        const auto it = std::find(counts.begin(), counts.end(), *selection.chosen);
        if (it == counts.end()) {
            throw ParameterError("chosen module count " + std::to_string(*selection.chosen) +
                                 " is not among the candidates");
        }
        report.chosen_candidate = static_cast<std::size_t>(it - counts.begin());
    } else {
        report.chosen_candidate = default_choice(report.candidates, selection.tolerance_fraction);
    }
    report.chosen_module_count = counts[report.chosen_candidate];
    report.chosen_run = report.candidates[report.chosen_candidate].best_run;
    return outcome;
}

}  // namespace lava
