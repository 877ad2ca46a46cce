#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lava/amf.hpp"
#include "lava/matrix.hpp"
#include "lava/random.hpp"

namespace lava::testing {

struct PlantedData {
    AmfModel truth;
    FloatMatrix correlations;
};

// Modules with disjoint strong blocks over a faint shared background, so the
// planted modules are near-orthogonal. Each locality mixes one or two modules.
inline PlantedData planted_data(std::size_t localities, std::size_t pairs, std::size_t modules, double noise_sd,
                                std::uint64_t seed) {
    Rng rng(seed);
    PlantedData data;
    data.truth.modules = RealMatrix(modules, pairs);
    const std::size_t block = pairs / modules;
    for (std::size_t m = 0; m < modules; ++m) {
        for (std::size_t j = 0; j < pairs; ++j) {
            const bool strong = j / block == m;
            data.truth.modules(m, j) = strong ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.05);
        }
    }
    data.truth.presences = RealMatrix(localities, modules);
    for (std::size_t i = 0; i < localities; ++i) {
        const std::size_t first = rng.below(modules);
        data.truth.presences(i, first) = rng.uniform(0.5, 1.0);
        if (rng.uniform() < 0.5) {
            const std::size_t second = (first + 1 + rng.below(modules - 1)) % modules;
            data.truth.presences(i, second) = rng.uniform(0.3, 1.0);
        }
    }
    const RealMatrix clean = reconstruct(data.truth);
    data.correlations = FloatMatrix(localities, pairs);
    for (std::size_t i = 0; i < localities; ++i) {
        for (std::size_t j = 0; j < pairs; ++j) {
            const double v = clean(i, j) + noise_sd * rng.normal();
            data.correlations(i, j) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return data;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        dot += a[j] * b[j];
        na += a[j] * a[j];
        nb += b[j] * b[j];
    }
    return na > 0.0 && nb > 0.0 ? dot / std::sqrt(na * nb) : 0.0;
}

// Greedy one-to-one matching by descending cosine; returns the matched cosine per planted module.
inline std::vector<double> greedy_match(const RealMatrix& planted, const RealMatrix& recovered) {
    struct Candidate {
        double score;
        std::size_t p;
        std::size_t r;
    };
    std::vector<Candidate> all;
    for (std::size_t p = 0; p < planted.rows(); ++p) {
        for (std::size_t r = 0; r < recovered.rows(); ++r) {
            all.push_back({cosine(planted.row(p), recovered.row(r)), p, r});
        }
    }
    std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    std::vector<double> matched(planted.rows(), 0.0);
    std::vector<bool> used_p(planted.rows(), false), used_r(recovered.rows(), false);
    for (const auto& c : all) {
        if (!used_p[c.p] && !used_r[c.r]) {
            used_p[c.p] = used_r[c.r] = true;
            matched[c.p] = c.score;
        }
    }
    return matched;
}

}  // namespace lava::testing
