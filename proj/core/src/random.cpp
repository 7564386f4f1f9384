#include "d2dalloc/random.hpp"

#include <cmath>
#include <numbers>

namespace d2dalloc {

double RandomStream::Substream::normal(double mean, double stddev) {
    if (have_spare_) {
        have_spare_ = false;
        return mean + stddev * spare_;
    }
    // 1 - u keeps the log argument in (0, 1].
    const double r = std::sqrt(-2.0 * std::log(1.0 - uniform01()));
    const double theta = 2.0 * std::numbers::pi * uniform01();
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return mean + stddev * r * std::cos(theta);
}

Point RandomStream::Substream::in_disc(Point center, double radius) {
    const double r = radius * std::sqrt(uniform01());
    const double theta = 2.0 * std::numbers::pi * uniform01();
    return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

std::uint64_t RandomStream::mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream::Substream& RandomStream::substream(std::string_view name) {
    auto it = substreams_.find(name);
    if (it != substreams_.end()) return it->second;
    // FNV-1a over the name, mixed with the master seed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    const std::uint64_t seed = mix(master_seed_ ^ mix(h));
    return substreams_.emplace(std::string(name), Substream(seed))
        .first->second;
}

}  // namespace d2dalloc
