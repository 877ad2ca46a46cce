#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace lava {

// splitmix64 finalizer; combines a base seed with a stream id.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// mt19937_64 with distribution code written out so draws are identical on
// every standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, bound).
    std::size_t below(std::size_t bound) noexcept {
        return static_cast<std::size_t>(uniform() * static_cast<double>(bound)) % bound;
    }

    // Box-Muller standard normal.
    double normal() noexcept;

    template <typename T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace lava
