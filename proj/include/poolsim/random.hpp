#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace poolsim {

enum class StreamId : std::uint32_t { arrivals = 0, services = 1, selections = 2 };

/// Independent random stream keyed by (seed, replication, stream id).
///
/// Each key seeds its own engine through std::seed_seq, so the streams of a
/// run never share state and a run is reproducible from its key alone.
class Stream {
public:
  Stream(std::uint64_t seed, std::uint64_t replication, StreamId id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32),
                      static_cast<std::uint32_t>(id), 0x9e3779b9u};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
  std::mt19937_64 engine_;
};

}  // namespace poolsim
