#ifndef OPBW_RNG_HPP
#define OPBW_RNG_HPP

#include <cstdint>
#include <span>

namespace opbw {

// All randomness in this project is derived from 64-bit mixing of explicit
// integer keys, so every result is a pure function of (master seed, keys)
// and is reproducible regardless of thread count or evaluation order.
//
// The scheme is fixed and must not change between versions:
//   mix64      : the splitmix64 finalizer
//   hash_words : h = mix64(seed ^ kDomain); h = mix64(h ^ mix64(w_i + i)) per word
//   derive_seed: hash_words(master, {stream_tag, index})

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr uint64_t kHashDomain = 0x4f50425731ULL;  // "OPBW1"

inline uint64_t hash_words(uint64_t seed, std::span<const uint64_t> words) {
    uint64_t h = mix64(seed ^ kHashDomain);
    uint64_t i = 0;
    for (uint64_t w : words) h = mix64(h ^ mix64(w + i++));
    return h;
}

inline uint64_t hash2(uint64_t seed, uint64_t a, uint64_t b) {
    const uint64_t w[2] = {a, b};
    return hash_words(seed, {w, 2});
}

// Counter-stream value at position u under a row prefix: the splitmix64
// construction with the prefix as stream origin. Used for per-site
// Bernoulli states along the fastest lattice axis.
inline uint64_t site_mix(uint64_t prefix, uint64_t u) {
    return mix64(prefix + u * 0x9e3779b97f4a7c15ULL);
}

// open iff (h >> 11) < threshold, identical to u01(h) < p
inline uint64_t bernoulli_threshold(double p) {
    double t = p * 0x1.0p53;  // exact: scaling by a power of two
    uint64_t fl = static_cast<uint64_t>(t);
    return fl + (t != static_cast<double>(fl) ? 1 : 0);
}

// Stream tags keep independent uses of one master seed decoupled. Adding a
// tag never perturbs existing streams.
enum StreamTag : uint64_t {
    kStreamEnvSite = 1,       // per-site Bernoulli states
    kStreamWalk = 2,          // walk step sampling
    kStreamReplicaEnv = 3,    // per-replica environment seeds
    kStreamAnnealedEnv = 4,   // environments backing averaged laws
    kStreamPairWalk = 5,      // second walker of a pair
    kStreamChain = 6,         // environment-seen-from-particle sampling
    kStreamScan = 7,          // survival scan replicas
};

inline uint64_t derive_seed(uint64_t master, uint64_t stream_tag, uint64_t index) {
    return hash2(master, stream_tag, index);
}

// u in [0,1) with 53 random bits
inline double u01(uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Small deterministic stream generator (splitmix64). One next() per draw,
// so consumers have a fixed, documented consumption pattern.
class SplitMix64 {
  public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double next_u01() { return u01(next()); }

    // uniform in [0, n), n >= 1; Lemire's multiply-shift reduction
    uint32_t next_below(uint32_t n) {
        return static_cast<uint32_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

  private:
    uint64_t state_;
};

}  // namespace opbw

#endif
