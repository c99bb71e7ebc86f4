#include "opbw/environment.hpp"

#include <cstring>
#include <istream>
#include <ostream>

#include "opbw/rng.hpp"

namespace opbw {

BitField::BitField(const LatticeGeometry& g)
    : spatial_count_(g.spatial_count()),
      words_per_slice_((g.spatial_count() + 63) / 64),
      words_(static_cast<size_t>(((g.spatial_count() + 63) / 64) * g.slice_count()), 0) {}

EnvironmentWindow::EnvironmentWindow(const LatticeGeometry& g, double p, uint64_t seed)
    : geom_(g), p_(p), seed_(seed), bits_(g) {}

EnvironmentWindow EnvironmentWindow::generate(const LatticeGeometry& g, double p, uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("generate_environment: p out of [0,1]");
    EnvironmentWindow env(g, p, seed);

    const int d = g.d();
    const int64_t spatial = g.spatial_count();
    const uint64_t site_seed = derive_seed(seed, kStreamEnvSite, 0);

    if (p == 1.0) {
        for (int64_t i = 0, n = g.site_count(); i < n; ++i) env.bits_.set(i, true);
        return env;
    }
    if (p == 0.0) return env;

    // Per-site counter derivation keyed by absolute coordinates, so the
    // result does not depend on iteration order or thread count. A row
    // prefix is hashed from (seed, n, x_1..x_{d-1}); along the fastest
    // axis the state is site_mix(prefix, x_d).
    auto absorb = [](uint64_t h, uint64_t word, uint64_t index) { return mix64(h ^ mix64(word + index)); };
    const uint64_t thr = bernoulli_threshold(p);
    std::vector<uint64_t> prefix(static_cast<size_t>(d) + 1);
    for (int32_t n = g.t_min(); n <= g.t_max(); ++n) {
        const int64_t slice = n - g.t_min();
        uint64_t* row = env.bits_.slice_words(slice);
        prefix[0] = absorb(mix64(site_seed ^ kHashDomain), static_cast<uint64_t>(static_cast<int64_t>(n)), 0);
        Coord x{};
        for (int i = 0; i < d; ++i) x[static_cast<size_t>(i)] = -g.half_width();
        for (int i = 0; i + 1 < d; ++i)
            prefix[static_cast<size_t>(i) + 1] =
                absorb(prefix[static_cast<size_t>(i)],
                       static_cast<uint64_t>(static_cast<int64_t>(x[static_cast<size_t>(i)])),
                       static_cast<uint64_t>(i) + 1);

        const int64_t row_len = g.width();
        const int64_t rows = spatial / row_len;
        for (int64_t r = 0; r < rows; ++r) {
            const uint64_t pre = prefix[static_cast<size_t>(d) - 1];
            uint64_t ux = static_cast<uint64_t>(static_cast<int64_t>(-g.half_width()));
            int64_t s = r * row_len;
            int64_t done = 0;
            while (done < row_len) {
                uint64_t word = row[s / 64];
                int b = static_cast<int>(s % 64);
                for (; b < 64 && done < row_len; ++b, ++done, ++s, ++ux)
                    word |= static_cast<uint64_t>((site_mix(pre, ux) >> 11) < thr) << b;
                row[(s - 1) / 64] = word;
            }
            if (r + 1 < rows) {
                int i = d - 2;
                while (x[static_cast<size_t>(i)] == g.half_width()) {
                    x[static_cast<size_t>(i)] = -g.half_width();
                    --i;
                }
                ++x[static_cast<size_t>(i)];
                for (int j = i; j + 1 < d; ++j)
                    prefix[static_cast<size_t>(j) + 1] =
                        absorb(prefix[static_cast<size_t>(j)],
                               static_cast<uint64_t>(static_cast<int64_t>(x[static_cast<size_t>(j)])),
                               static_cast<uint64_t>(j) + 1);
            }
        }
    }
    return env;
}

EnvironmentWindow EnvironmentWindow::from_bits(const LatticeGeometry& g, double p, uint64_t seed,
                                               const std::vector<uint8_t>& site_states) {
    if (static_cast<int64_t>(site_states.size()) != g.site_count())
        throw std::invalid_argument("from_bits: state vector size does not match site count");
    EnvironmentWindow env(g, p, seed);
    for (int64_t i = 0; i < g.site_count(); ++i)
        if (site_states[static_cast<size_t>(i)]) env.bits_.set(i, true);
    return env;
}

int64_t EnvironmentWindow::open_count() const {
    int64_t c = 0;
    for (int64_t i = 0, n = geom_.site_count(); i < n; ++i) c += bits_.get(i);
    return c;
}

namespace {

template <typename T>
void write_le(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

constexpr char kMagic[5] = {'O', 'P', 'B', 'W', '1'};

}  // namespace

void EnvironmentWindow::dump(std::ostream& out) const {
    out.write(kMagic, 5);
    write_le<uint32_t>(out, static_cast<uint32_t>(geom_.d()));
    write_le<int32_t>(out, geom_.half_width());
    write_le<int32_t>(out, geom_.t_min());
    write_le<int32_t>(out, geom_.t_max());
    write_le<double>(out, p_);
    write_le<uint64_t>(out, seed_);

    const int64_t sites = geom_.site_count();
    uint8_t byte = 0;
    int fill = 0;
    for (int64_t i = 0; i < sites; ++i) {
        if (bits_.get(i)) byte |= static_cast<uint8_t>(1u << fill);
        if (++fill == 8) {
            out.put(static_cast<char>(byte));
            byte = 0;
            fill = 0;
        }
    }
    if (fill > 0) out.put(static_cast<char>(byte));
}

EnvironmentWindow EnvironmentWindow::load(std::istream& in) {
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kMagic, 5) != 0)
        throw std::runtime_error("EnvironmentWindow::load: bad magic, not an OPBW1 stream");
    uint32_t d = read_le<uint32_t>(in);
    int32_t L = read_le<int32_t>(in);
    int32_t t_min = read_le<int32_t>(in);
    int32_t t_max = read_le<int32_t>(in);
    double p = read_le<double>(in);
    uint64_t seed = read_le<uint64_t>(in);
    if (!in) throw std::runtime_error("EnvironmentWindow::load: truncated header");

    LatticeGeometry g = LatticeGeometry::create(static_cast<int>(d), L, t_min, t_max);
    EnvironmentWindow env(g, p, seed);
    const int64_t sites = g.site_count();
    int64_t i = 0;
    while (i < sites) {
        int c = in.get();
        if (c == std::char_traits<char>::eof())
            throw std::runtime_error("EnvironmentWindow::load: truncated bit payload");
        for (int b = 0; b < 8 && i < sites; ++b, ++i)
            if ((c >> b) & 1) env.bits_.set(i, true);
    }
    return env;
}

}  // namespace opbw
