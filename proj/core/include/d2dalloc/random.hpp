#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>

#include "d2dalloc/model.hpp"

namespace d2dalloc {

// Deterministic random source with independently seeded named substreams.
// The k-th draw from a substream is a function of (master seed, substream
// name, k) alone, so interleaving draws across substreams cannot perturb any
// of them. Distribution sampling is written out on top of the raw engine
// output; std::mt19937_64 output is pinned by the standard, so whole streams
// are byte-stable across standard library implementations.
class RandomStream {
  public:
    class Substream {
      public:
        explicit Substream(std::uint64_t seed) : engine_(seed) {}

        // Uniform on [0, 1) with 53 random bits.
        double uniform01() {
            return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        }
        double uniform(double lo, double hi) {
            return lo + (hi - lo) * uniform01();
        }
        // Unit-mean exponential (Rayleigh fading power).
        double exponential_unit_mean() {
            return -std::log1p(-uniform01());
        }
        // Box-Muller; consumes two uniforms per fresh pair.
        double normal(double mean, double stddev);
        // Uniform over the disc of the given radius around the center.
        Point in_disc(Point center, double radius);

      private:
        std::mt19937_64 engine_;
        bool have_spare_ = false;
        double spare_ = 0.0;
    };

    explicit RandomStream(std::uint64_t master_seed)
        : master_seed_(master_seed) {}

    // Creates the substream on first use; later calls return the same
    // instance with its draw position preserved.
    Substream& substream(std::string_view name);

    std::uint64_t master_seed() const { return master_seed_; }

    // splitmix64 finalizer; used for substream seed derivation and for
    // deriving per-task seeds in the sweep harness.
    static std::uint64_t mix(std::uint64_t x);

  private:
    std::uint64_t master_seed_;
    std::map<std::string, Substream, std::less<>> substreams_;
};

}  // namespace d2dalloc
