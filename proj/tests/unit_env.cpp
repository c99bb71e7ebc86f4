#include <doctest.h>

#include <cmath>
#include <sstream>

#include "opbw/backbone.hpp"
#include "opbw/environment.hpp"
#include "opbw/rng.hpp"
#include "opbw/survival.hpp"
#include "opbw/view.hpp"

using namespace opbw;

TEST_CASE("geometry indexing round-trips and rejects oversized windows") {
    LatticeGeometry g = LatticeGeometry::create(2, 3, -2, 5);
    CHECK(g.spatial_count() == 49);
    CHECK(g.site_count() == 49 * 8);
    for (int64_t s = 0; s < g.spatial_count(); ++s) {
        Coord x = g.coord_at(s);
        CHECK(g.spatial_index(x) == s);
    }
    CHECK_THROWS_AS(LatticeGeometry::create(8, 2000000, 0, 1000), CapacityError);
    CHECK_THROWS_AS(LatticeGeometry::create(0, 3, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(LatticeGeometry::create(1, 3, 2, 1), std::invalid_argument);
}

TEST_CASE("degenerate Bernoulli fields") {
    LatticeGeometry g = LatticeGeometry::create(1, 5, 0, 9);
    EnvironmentWindow all_open = EnvironmentWindow::generate(g, 1.0, 7);
    EnvironmentWindow all_closed = EnvironmentWindow::generate(g, 0.0, 7);
    CHECK(all_open.open_count() == g.site_count());
    CHECK(all_closed.open_count() == 0);
}

TEST_CASE("generation is reproducible and matches coordinates, not iteration order") {
    LatticeGeometry g = LatticeGeometry::create(1, 40, -3, 30);
    EnvironmentWindow a = EnvironmentWindow::generate(g, 0.37, 123456);
    EnvironmentWindow b = EnvironmentWindow::generate(g, 0.37, 123456);
    CHECK(a.bits() == b.bits());

    // a window with a different frame agrees on the shared absolute sites
    LatticeGeometry g2 = LatticeGeometry::create(1, 25, 0, 20);
    EnvironmentWindow c = EnvironmentWindow::generate(g2, 0.37, 123456);
    for (int32_t n = 0; n <= 20; ++n)
        for (int32_t x = -25; x <= 25; ++x)
            CHECK(c.open(make_coord({x}), n) == a.open(make_coord({x}), n));
}

TEST_CASE("empirical open fraction sits inside the 99.9% binomial interval") {
    // p = 0.5, d = 1, L = 500, 200 slices, fixed seed
    LatticeGeometry g = LatticeGeometry::create(1, 500, 0, 199);
    EnvironmentWindow env = EnvironmentWindow::generate(g, 0.5, 98765);
    double n = static_cast<double>(g.site_count());
    double frac = static_cast<double>(env.open_count()) / n;
    double z999 = 3.290526731491926;  // two-sided 99.9% normal quantile
    double half = z999 * std::sqrt(0.25 / n);
    CHECK(frac > 0.5 - half);
    CHECK(frac < 0.5 + half);
}

TEST_CASE("p validation") {
    LatticeGeometry g = LatticeGeometry::create(1, 2, 0, 2);
    CHECK_THROWS_WITH_AS(EnvironmentWindow::generate(g, 1.5, 1), "generate_environment: p out of [0,1]",
                         std::invalid_argument);
    CHECK_THROWS_AS(EnvironmentWindow::generate(g, -0.1, 1), std::invalid_argument);
}

TEST_CASE("binary dump/load round-trips bit-exactly") {
    LatticeGeometry g = LatticeGeometry::create(2, 6, -4, 11);
    EnvironmentWindow env = EnvironmentWindow::generate(g, 0.42, 2024);
    std::stringstream buf;
    env.dump(buf);
    EnvironmentWindow back = EnvironmentWindow::load(buf);
    CHECK(back.geometry() == env.geometry());
    CHECK(back.p() == env.p());
    CHECK(back.seed() == env.seed());
    CHECK(back.bits() == env.bits());

    std::stringstream bad("NOTOPBW....");
    CHECK_THROWS(EnvironmentWindow::load(bad));
}

TEST_CASE("backbone of the full environment is everything below the horizon") {
    LatticeGeometry g = LatticeGeometry::create(1, 6, 0, 8);
    EnvironmentWindow env = EnvironmentWindow::generate(g, 1.0, 3);
    BackboneField bb = BackboneField::compute(env, 8);
    for (int32_t n = 0; n <= 8; ++n)
        for (int32_t x = -6; x <= 6; ++x) CHECK(bb.on_backbone(make_coord({x}), n));
}

TEST_CASE("closed sites are never on the backbone") {
    LatticeGeometry g = LatticeGeometry::create(1, 8, 0, 12);
    EnvironmentWindow env = EnvironmentWindow::generate(g, 0.7, 99);
    BackboneField bb = BackboneField::compute(env, 12);
    for (int32_t n = 0; n <= 12; ++n)
        for (int32_t x = -8; x <= 8; ++x) {
            Coord c = make_coord({x});
            if (!env.open(c, n)) CHECK_FALSE(bb.on_backbone(c, n));
            if (bb.on_backbone(c, n)) CHECK(env.open(c, n));
        }
}

TEST_CASE("single open column survives, everything else dies") {
    LatticeGeometry g = LatticeGeometry::create(1, 3, 0, 4);
    std::vector<uint8_t> states(static_cast<size_t>(g.site_count()), 0);
    for (int32_t n = 0; n <= 4; ++n) states[static_cast<size_t>(g.site_index(make_coord({1}), n))] = 1;
    EnvironmentWindow env = EnvironmentWindow::from_bits(g, 0.5, 0, states);
    BackboneField bb = brute_force_backbone(env, 4);
    for (int32_t n = 0; n <= 4; ++n)
        for (int32_t x = -3; x <= 3; ++x) CHECK(bb.on_backbone(make_coord({x}), n) == (x == 1));
}

TEST_CASE("dynamic programming equals path enumeration on every 3x4 environment") {
    LatticeGeometry g = LatticeGeometry::create(1, 1, 0, 3);
    REQUIRE(g.site_count() == 12);
    for (uint32_t mask = 0; mask < (1u << 12); ++mask) {
        std::vector<uint8_t> states(12, 0);
        for (int b = 0; b < 12; ++b) states[static_cast<size_t>(b)] = (mask >> b) & 1;
        EnvironmentWindow env = EnvironmentWindow::from_bits(g, 0.5, mask, states);
        BackboneField dp = BackboneField::compute(env, 3);
        BackboneField oracle = brute_force_backbone(env, 3);
        REQUIRE(dp == oracle);
    }
}

TEST_CASE("brute force refuses windows beyond enumeration size") {
    LatticeGeometry g = LatticeGeometry::create(1, 30, 0, 3);
    EnvironmentWindow env = EnvironmentWindow::generate(g, 0.5, 1);
    CHECK_THROWS_AS(brute_force_backbone(env, 3), CapacityError);
}

TEST_CASE("raising the horizon can only clear backbone bits") {
    LatticeGeometry g = LatticeGeometry::create(1, 20, 0, 20);
    for (uint64_t seed = 0; seed < 6; ++seed) {
        EnvironmentWindow env = EnvironmentWindow::generate(g, 0.65, seed);
        BackboneField low = BackboneField::compute(env, 12);
        BackboneField high = BackboneField::compute(env, 20);
        for (int32_t n = 0; n <= 12; ++n)
            for (int32_t x = -20; x <= 20; ++x) {
                Coord c = make_coord({x});
                if (high.on_backbone(c, n)) CHECK(low.on_backbone(c, n));
            }
    }
}

TEST_CASE("backbone horizon must lie inside the window, reads above it throw") {
    LatticeGeometry g = LatticeGeometry::create(1, 4, 0, 6);
    EnvironmentWindow env = EnvironmentWindow::generate(g, 0.8, 5);
    CHECK_THROWS_AS(BackboneField::compute(env, 7), RangeError);
    BackboneField bb = BackboneField::compute(env, 4);
    CHECK_THROWS_AS(bb.on_backbone(make_coord({0}), 5), RangeError);
}

TEST_CASE("backbone computation commutes with spatial shifts on the shared region") {
    // carve two sub-windows of one large environment, offset by y, and
    // compare their backbone fields where both cones are complete
    LatticeGeometry big = LatticeGeometry::create(1, 40, 0, 10);
    EnvironmentWindow base = EnvironmentWindow::generate(big, 0.6, 4242);

    const int32_t y = 7;
    LatticeGeometry sub = LatticeGeometry::create(1, 25, 0, 10);
    std::vector<uint8_t> s0(static_cast<size_t>(sub.site_count())), s1(static_cast<size_t>(sub.site_count()));
    for (int32_t n = 0; n <= 10; ++n)
        for (int32_t x = -25; x <= 25; ++x) {
            s0[static_cast<size_t>(sub.site_index(make_coord({x}), n))] = base.open(make_coord({x}), n);
            s1[static_cast<size_t>(sub.site_index(make_coord({x}), n))] = base.open(make_coord({x + y}), n);
        }
    EnvironmentWindow w0 = EnvironmentWindow::from_bits(sub, 0.6, 0, s0);
    EnvironmentWindow w1 = EnvironmentWindow::from_bits(sub, 0.6, 1, s1);
    BackboneField b0 = BackboneField::compute(w0, 10);
    BackboneField b1 = BackboneField::compute(w1, 10);
    // sites whose forward cone fits in both windows: |x| + (10 - n) <= 25 - y
    for (int32_t n = 0; n <= 10; ++n)
        for (int32_t x = -(18 - (10 - n)); x <= 18 - (10 - n); ++x)
            CHECK(b1.on_backbone(make_coord({x}), n) == b0.on_backbone(make_coord({x + y}), n));
}

TEST_CASE("shifted views compose and read the base window") {
    LatticeGeometry g = LatticeGeometry::create(2, 8, 0, 8);
    EnvironmentWindow env = EnvironmentWindow::generate(g, 0.55, 31337);
    BackboneField bb = BackboneField::compute(env, 8);

    EnvironmentView id = shift_view(env, bb, origin_coord(), 0);
    EnvironmentView v = shift_view(env, bb, make_coord({2, -1}), 3);
    EnvironmentView roundtrip = v.shifted(make_coord({-2, 1}), -3);

    SplitMix64 rng(11);
    for (int k = 0; k < 200; ++k) {
        Coord x = make_coord({static_cast<int32_t>(rng.next_below(9)) - 4,
                              static_cast<int32_t>(rng.next_below(9)) - 4});
        int32_t n = static_cast<int32_t>(rng.next_below(5));
        CHECK(id.open(x, n) == env.open(x, n));
        CHECK(v.open(x, n) == env.open(make_coord({x[0] + 2, x[1] - 1}), n + 3));
        CHECK(roundtrip.open(x, n) == env.open(x, n));
    }
    CHECK_THROWS_AS(v.open(make_coord({7, 0}), 0), RangeError);
}

TEST_CASE("survival scan endpoints and monotone trend") {
    SurvivalScan scan = survival_scan(1, {0.0, 1.0}, 30, 50, 2025);
    CHECK(scan.points[0].fraction == 0.0);
    CHECK(scan.points[1].fraction == 1.0);

    SurvivalScan grid = survival_scan(1, {0.45, 0.65, 0.85}, 40, 400, 7);
    CHECK(grid.points[0].fraction <= grid.points[1].fraction + 0.05);
    CHECK(grid.points[1].fraction <= grid.points[2].fraction + 0.05);
}

TEST_CASE("seed derivation separates streams") {
    CHECK(derive_seed(1, kStreamWalk, 0) != derive_seed(1, kStreamWalk, 1));
    CHECK(derive_seed(1, kStreamWalk, 0) != derive_seed(1, kStreamPairWalk, 0));
    CHECK(derive_seed(1, kStreamWalk, 5) == derive_seed(1, kStreamWalk, 5));
}
