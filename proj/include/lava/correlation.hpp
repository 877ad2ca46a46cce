#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "lava/data_io.hpp"
#include "lava/matrix.hpp"
#include "lava/placement.hpp"

namespace lava {

// Lexicographic bijection between pair ids in [0, D(D-1)/2) and feature pairs (i, j), i < j.
class PairIndex {
  public:
    PairIndex() = default;
    explicit PairIndex(std::size_t features) : features_(features) {}

    // Recovers D from a pair count; throws if the count is not D choose 2.
    static PairIndex from_pair_count(std::size_t pairs);

    std::size_t features() const noexcept { return features_; }
    std::size_t size() const noexcept { return features_ * (features_ - (features_ > 0 ? 1 : 0)) / 2; }

    std::size_t id(std::size_t i, std::size_t j) const;
    std::pair<std::size_t, std::size_t> pair(std::size_t id) const;

  private:
    std::size_t features_ = 0;
};

struct CorrelationDataset {
    FloatMatrix values;  // localities x pairs, entries in [0, 1]
    PairIndex pairs;
    double filter_threshold = 0.75;
};

// Ranks starting at 1; tied values share the average of their ranks.
std::vector<double> average_ranks(std::span<const double> x);

// |Pearson correlation of average ranks|; 0 when either side has no rank variance.
double spearman_abs(std::span<const double> x, std::span<const double> y);

// Share of entries equal to the most frequent value.
double constant_fraction(std::span<const double> x);

// Pairs involving a feature whose constant fraction over the locality exceeds
// `threshold` are set to 0.
CorrelationDataset locality_correlations(const FeatureMatrix& features, const LocalitySet& localities,
                                         double threshold);

std::size_t correlation_bytes(std::size_t localities, std::size_t features);

namespace reference {

// Per-pair evaluation with no rank reuse.
CorrelationDataset locality_correlations(const FeatureMatrix& features, const LocalitySet& localities,
                                         double threshold);

}  // namespace reference

}  // namespace lava
