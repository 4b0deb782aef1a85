#pragma once

#include <cstdint>
#include <random>

namespace relaysim {

// splitmix64 finalizer; decorrelates engine seeds derived from
// (master seed, stream index, salt) tuples.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t salt = 0) {
    return mix64(mix64(mix64(master) ^ stream) ^ (salt * 0xD1B54A32D192ED03ULL));
}

/// Deterministic random stream. Every consumer owns its stream; trials map to
/// independent substreams via (master seed, trial index), so results do not
/// depend on scheduling or worker count.
class Rng {
public:
    explicit Rng(std::uint64_t engine_seed) : gen_(engine_seed) {}

    static Rng substream(std::uint64_t master, std::uint64_t stream, std::uint64_t salt = 0) {
        return Rng(substream_seed(master, stream, salt));
    }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform on (0, 1]; never returns 0, so -log(u) is always finite.
    double uniform01() {
        return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    }

    double normal() { return normal_(gen_); }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Salt layout for per-trial substreams. Channel gains live on their own
// stream so that strategies consuming decision randomness (RandomStop) still
// see the same fading realization as every other strategy for that trial.
inline constexpr std::uint64_t kChannelSalt = 0;
inline constexpr std::uint64_t kDecisionSaltBase = 1;
inline constexpr std::uint64_t kSymbolSaltBase = 1u << 20;

/// The random streams one simulated transmission may draw from.
/// `slot` distinguishes strategies sharing the trial's channel draw.
struct TrialStreams {
    Rng channels;
    Rng decisions;
    Rng symbols;

    TrialStreams(std::uint64_t master, std::uint64_t trial, std::uint64_t slot = 0)
        : channels(Rng::substream(master, trial, kChannelSalt)),
          decisions(Rng::substream(master, trial, kDecisionSaltBase + slot)),
          symbols(Rng::substream(master, trial, kSymbolSaltBase + slot)) {}
};

}  // namespace relaysim
