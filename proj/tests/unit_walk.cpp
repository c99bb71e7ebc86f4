#include <doctest.h>

#include <cmath>

#include "opbw/rng.hpp"
#include "opbw/view.hpp"
#include "opbw/walk.hpp"
#include "test_util.hpp"

using namespace opbw;

namespace {

EnvironmentWindow full_env(int d, int32_t L, int32_t T) {
    return EnvironmentWindow::generate(LatticeGeometry::create(d, L, 0, T), 1.0, 0);
}

}  // namespace

TEST_CASE("off-backbone kernel is uniform over the 3^d neighbourhood") {
    LatticeGeometry g = LatticeGeometry::create(1, 5, 0, 5);
    EnvironmentWindow env = EnvironmentWindow::generate(g, 0.0, 1);
    BackboneField bb = BackboneField::compute(env, 5);
    LocalKernel k = step_distribution(bb, env, Site{origin_coord(), 0});
    REQUIRE(k.weights.size() == 3);
    for (double w : k.weights) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("on-backbone kernel splits over exactly the open successors") {
    // column of open sites at x in {0,1} up to the horizon; start on it
    LatticeGeometry g = LatticeGeometry::create(1, 3, 0, 4);
    std::vector<uint8_t> states(static_cast<size_t>(g.site_count()), 0);
    for (int32_t n = 0; n <= 4; ++n) {
        states[static_cast<size_t>(g.site_index(make_coord({0}), n))] = 1;
        states[static_cast<size_t>(g.site_index(make_coord({1}), n))] = 1;
    }
    EnvironmentWindow env = EnvironmentWindow::from_bits(g, 0.5, 0, states);
    BackboneField bb = BackboneField::compute(env, 4);
    REQUIRE(bb.on_backbone(make_coord({0}), 0));

    LocalKernel k = step_distribution(bb, env, Site{origin_coord(), 0});
    CHECK(k.weights[0] == 0.0);                                   // z = -1 closed
    CHECK(k.weights[1] == doctest::Approx(0.5).epsilon(1e-15));   // z = 0
    CHECK(k.weights[2] == doctest::Approx(0.5).epsilon(1e-15));   // z = +1
}

TEST_CASE("kernels normalise and stay on the neighbourhood for random environments") {
    LatticeGeometry g = LatticeGeometry::create(2, 6, 0, 8);
    for (uint64_t seed = 0; seed < 4; ++seed) {
        EnvironmentWindow env = EnvironmentWindow::generate(g, 0.6, seed);
        BackboneField bb = BackboneField::compute(env, 8);
        SplitMix64 rng(seed + 77);
        for (int trial = 0; trial < 50; ++trial) {
            Coord x = make_coord({static_cast<int32_t>(rng.next_below(9)) - 4,
                                  static_cast<int32_t>(rng.next_below(9)) - 4});
            int32_t n = static_cast<int32_t>(rng.next_below(7));
            LocalKernel k = step_distribution(bb, env, Site{x, n});
            CHECK(std::abs(k.sum() - 1.0) <= 1e-12);
            for (double w : k.weights) CHECK(w >= 0.0);
        }
    }
}

TEST_CASE("kernel evaluation requires the neighbourhood and successor slice in range") {
    LatticeGeometry g = LatticeGeometry::create(1, 3, 0, 3);
    EnvironmentWindow env = EnvironmentWindow::generate(g, 0.5, 3);
    BackboneField bb = BackboneField::compute(env, 3);
    CHECK_THROWS_AS(step_distribution(bb, env, Site{make_coord({3}), 0}), RangeError);
    CHECK_THROWS_AS(step_distribution(bb, env, Site{origin_coord(), 3}), RangeError);
}

TEST_CASE("g kernel branches") {
    SUBCASE("closed origin gives the uniform branch") {
        LatticeGeometry g = LatticeGeometry::create(1, 4, 0, 4);
        EnvironmentWindow env = EnvironmentWindow::generate(g, 0.0, 2);
        BackboneField bb = BackboneField::compute(env, 4);
        LocalKernel k = g_kernel(shift_view(env, bb, origin_coord(), 0));
        for (double w : k.weights) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("full environment gives the uniform branch through the survivors") {
        EnvironmentWindow env = full_env(1, 4, 4);
        BackboneField bb = BackboneField::compute(env, 4);
        LocalKernel k = g_kernel(shift_view(env, bb, origin_coord(), 0));
        for (double w : k.weights) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("matches the walk kernel at shifted sites") {
        LatticeGeometry g = LatticeGeometry::create(1, 10, 0, 10);
        for (uint64_t seed = 10; seed < 14; ++seed) {
            EnvironmentWindow env = EnvironmentWindow::generate(g, 0.62, seed);
            BackboneField bb = BackboneField::compute(env, 10);
            SplitMix64 rng(seed);
            for (int trial = 0; trial < 40; ++trial) {
                Coord y = make_coord({static_cast<int32_t>(rng.next_below(17)) - 8});
                int32_t m = static_cast<int32_t>(rng.next_below(9));
                LocalKernel via_view = g_kernel(shift_view(env, bb, y, m));
                LocalKernel via_site = step_distribution(bb, env, Site{y, m});
                for (size_t j = 0; j < via_view.weights.size(); ++j)
                    CHECK(via_view.weights[j] == doctest::Approx(via_site.weights[j]).epsilon(1e-15));
            }
        }
    }
}

TEST_CASE("environment chain: shifts advance time and follow unique successors") {
    SUBCASE("full cluster advances time by one per step") {
        EnvironmentWindow env = full_env(1, 12, 12);
        BackboneField bb = BackboneField::compute(env, 12);
        EnvironmentView v = shift_view(env, bb, origin_coord(), 0);
        SplitMix64 rng(5);
        for (int k = 0; k < 10; ++k) {
            v = environment_chain_step(v, rng);
            CHECK(v.time_offset() == k + 1);
            CHECK(std::abs(v.offset()[0]) <= k + 1);
        }
    }
    SUBCASE("a single open successor forces the move") {
        LatticeGeometry g = LatticeGeometry::create(1, 3, 0, 3);
        std::vector<uint8_t> states(static_cast<size_t>(g.site_count()), 0);
        // diagonal open line x = n
        for (int32_t n = 0; n <= 3; ++n) states[static_cast<size_t>(g.site_index(make_coord({n}), n))] = 1;
        EnvironmentWindow env = EnvironmentWindow::from_bits(g, 0.5, 0, states);
        BackboneField bb = BackboneField::compute(env, 3);
        REQUIRE(bb.on_backbone(origin_coord(), 0));
        SplitMix64 rng(1);
        EnvironmentView v = environment_chain_step(shift_view(env, bb, origin_coord(), 0), rng);
        CHECK(v.offset()[0] == 1);
        CHECK(v.time_offset() == 1);
    }
    SUBCASE("one-step functional averages match the kernel sum") {
        // f = indicator of a cylinder: omega(o,1) = 1 on the shifted view
        LatticeGeometry g = LatticeGeometry::create(1, 8, 0, 8);
        EnvironmentWindow env = EnvironmentWindow::generate(g, 0.7, 321);
        BackboneField bb = BackboneField::compute(env, 8);
        EnvironmentView v = shift_view(env, bb, origin_coord(), 0);
        auto f = [&](const EnvironmentView& view) { return view.open(origin_coord(), 1) ? 1.0 : 0.0; };

        LocalKernel gk = g_kernel(v);
        const std::vector<Coord> disp = neighborhood_displacements(1);
        double exact = 0.0;
        for (size_t j = 0; j < disp.size(); ++j)
            if (gk.weights[j] > 0.0) exact += gk.weights[j] * f(v.shifted(disp[j], 1));

        SplitMix64 rng(9);
        const int reps = 20000;
        double mc = 0.0;
        for (int r = 0; r < reps; ++r) mc += f(environment_chain_step(v, rng));
        mc /= reps;
        CHECK(std::abs(mc - exact) < 0.02);  // ~5 sigma at this sample size
    }
}

TEST_CASE("zero-step path is the start; paths respect speed and backbone absorption") {
    LatticeGeometry g = LatticeGeometry::create(1, 30, 0, 30);
    EnvironmentWindow env = EnvironmentWindow::generate(g, 0.65, 17);
    BackboneField bb = BackboneField::compute(env, 30);
    SplitMix64 rng(3);

    WalkPath none = sample_path(bb, env, Site{origin_coord(), 0}, 0, rng);
    CHECK(none.positions.size() == 1);
    CHECK(none.positions[0][0] == 0);

    for (int rep = 0; rep < 200; ++rep) {
        WalkPath path = sample_path(bb, env, Site{origin_coord(), 0}, 20, rng);
        bool on = false;
        for (int k = 0; k <= 20; ++k) {
            if (k > 0) CHECK(std::abs(path.positions[static_cast<size_t>(k)][0] -
                                      path.positions[static_cast<size_t>(k) - 1][0]) <= 1);
            bool now = bb.on_backbone(path.positions[static_cast<size_t>(k)], k);
            if (on) CHECK(now);  // once on the backbone the walk never leaves it
            on = now;
        }
    }
}

TEST_CASE("sampled endpoints match the exact law (full cluster and fixed random env)") {
    SUBCASE("p = 1: against the closed-form convolution") {
        EnvironmentWindow env = full_env(1, 21, 25);
        BackboneField bb = BackboneField::compute(env, 25);
        SplitMix64 rng(1234);
        SpatialPmf emp = test::empirical_endpoints(bb, env, Site{origin_coord(), 0}, 20, 100000, rng);
        SpatialPmf exact = analytic_uniform_law(1, Site{origin_coord(), 0}, 20);
        CHECK(test::total_variation(emp, exact) < 0.01);
    }
    SUBCASE("fixed environment: against the transfer-matrix law") {
        LatticeGeometry g = LatticeGeometry::create(1, 25, 0, 25);
        EnvironmentWindow env = EnvironmentWindow::generate(g, 0.65, 888);
        BackboneField bb = BackboneField::compute(env, 25);
        SplitMix64 rng(4321);
        SpatialPmf emp = test::empirical_endpoints(bb, env, Site{origin_coord(), 0}, 20, 100000, rng);
        SpatialPmf exact = quenched_law(bb, env, Site{origin_coord(), 0}, 20);
        CHECK(test::total_variation(emp, exact) < 0.02);
    }
}

TEST_CASE("quenched law basics") {
    LatticeGeometry g = LatticeGeometry::create(1, 8, 0, 8);
    EnvironmentWindow env = EnvironmentWindow::generate(g, 1.0, 0);
    BackboneField bb = BackboneField::compute(env, 8);

    SpatialPmf at0 = quenched_law(bb, env, Site{origin_coord(), 0}, 0);
    CHECK(at0.value(origin_coord()) == 1.0);

    SpatialPmf at1 = quenched_law(bb, env, Site{origin_coord(), 0}, 1);
    for (int32_t z = -1; z <= 1; ++z)
        CHECK(at1.value(make_coord({z})) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("quenched law equals exhaustive path enumeration on every relevant environment") {
    // window wide enough to hold the 3-step cone; sweep all assignments of
    // the 16 sites the law can depend on, other sites closed
    LatticeGeometry g = LatticeGeometry::create(1, 3, 0, 3);
    std::vector<std::pair<int32_t, int32_t>> cone;  // (x, n) with |x| <= n
    for (int32_t n = 0; n <= 3; ++n)
        for (int32_t x = -n; x <= n; ++x) cone.push_back({x, n});
    REQUIRE(cone.size() == 16);

    for (uint32_t mask = 0; mask < (1u << 16); mask += 7) {  // stride keeps runtime modest
        std::vector<uint8_t> states(static_cast<size_t>(g.site_count()), 0);
        for (size_t b = 0; b < cone.size(); ++b)
            if ((mask >> b) & 1)
                states[static_cast<size_t>(g.site_index(make_coord({cone[b].first}), cone[b].second))] = 1;
        EnvironmentWindow env = EnvironmentWindow::from_bits(g, 0.5, mask, states);
        BackboneField bb = BackboneField::compute(env, 3);
        SpatialPmf law = quenched_law(bb, env, Site{origin_coord(), 0}, 3);
        auto oracle = test::enumerate_quenched_law(bb, env, Site{origin_coord(), 0}, 3);
        for (int32_t x = -3; x <= 3; ++x) {
            double expect = 0.0;
            auto it = oracle.find(g.spatial_index(make_coord({x})));
            if (it != oracle.end()) expect = it->second;
            REQUIRE(law.value(make_coord({x})) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("chapman-kolmogorov: restarting the transfer matrix mid-way changes nothing") {
    LatticeGeometry g = LatticeGeometry::create(1, 60, 0, 60);
    for (uint64_t seed = 40; seed < 44; ++seed) {
        EnvironmentWindow env = EnvironmentWindow::generate(g, 0.6, seed);
        BackboneField bb = BackboneField::compute(env, 60);
        SpatialPmf direct = quenched_law(bb, env, Site{origin_coord(), 0}, 50);
        for (int k : {1, 12, 25}) {
            SpatialPmf head = quenched_law(bb, env, Site{origin_coord(), 0}, 50 - k);
            SpatialPmf composed = forward_evolve(bb, env, head, k);
            double l1 = 0.0;
            for (int32_t x = -50; x <= 50; ++x)
                l1 += std::abs(composed.value(make_coord({x})) - direct.value(make_coord({x})));
            CHECK(l1 <= 1e-10);
        }
    }
}

TEST_CASE("quenched law commutes with spatial translation of the environment") {
    LatticeGeometry big = LatticeGeometry::create(1, 40, 0, 14);
    EnvironmentWindow base = EnvironmentWindow::generate(big, 0.6, 2121);
    const int32_t shift = 5;
    LatticeGeometry sub = LatticeGeometry::create(1, 20, 0, 14);
    std::vector<uint8_t> s0(static_cast<size_t>(sub.site_count())), s1(static_cast<size_t>(sub.site_count()));
    for (int32_t n = 0; n <= 14; ++n)
        for (int32_t x = -20; x <= 20; ++x) {
            s0[static_cast<size_t>(sub.site_index(make_coord({x}), n))] = base.open(make_coord({x}), n);
            s1[static_cast<size_t>(sub.site_index(make_coord({x}), n))] = base.open(make_coord({x + shift}), n);
        }
    EnvironmentWindow w0 = EnvironmentWindow::from_bits(sub, 0.6, 0, s0);
    EnvironmentWindow w1 = EnvironmentWindow::from_bits(sub, 0.6, 1, s1);
    BackboneField b0 = BackboneField::compute(w0, 14);
    BackboneField b1 = BackboneField::compute(w1, 14);

    // walk of 8 steps: cone from (shift, 0) in w0 = cone from origin in w1,
    // both with complete horizons inside their windows
    SpatialPmf on_base = quenched_law(b0, w0, Site{make_coord({shift}), 0}, 8);
    SpatialPmf on_shifted = quenched_law(b1, w1, Site{origin_coord(), 0}, 8);
    for (int32_t z = -8; z <= 8; ++z)
        CHECK(on_shifted.value(make_coord({z})) ==
              doctest::Approx(on_base.value(make_coord({z + shift}))).epsilon(1e-14));
}

TEST_CASE("cone support and normalisation at depth") {
    LatticeGeometry g = LatticeGeometry::create(1, 160, 0, 160);
    EnvironmentWindow env = EnvironmentWindow::generate(g, 0.58, 9);
    BackboneField bb = BackboneField::compute(env, 160);
    SpatialPmf law = quenched_law(bb, env, Site{origin_coord(), 0}, 150);
    CHECK(std::abs(law.total() - 1.0) <= 1e-10);
    CHECK(law.support().lo[0] == -150);
    CHECK(law.support().extent[0] == 301);
}

TEST_CASE("averaged law: degenerate environments and symmetry") {
    SUBCASE("p = 1 averages to the closed form with zero error") {
        AveragedLaw law = annealed_law(1, 1.0, Site{origin_coord(), 0}, 10, 8, 5);
        SpatialPmf exact = analytic_uniform_law(1, Site{origin_coord(), 0}, 10);
        for (int64_t i = 0; i < law.mean.size(); ++i) {
            CHECK(law.mean.at_flat(i) == doctest::Approx(exact.at_flat(i)).epsilon(1e-13));
            CHECK(law.stderrs[static_cast<size_t>(i)] == 0.0);
        }
    }
    SUBCASE("p = 0 gives the same law as p = 1") {
        AveragedLaw zero = annealed_law(1, 0.0, Site{origin_coord(), 0}, 10, 8, 5);
        SpatialPmf exact = analytic_uniform_law(1, Site{origin_coord(), 0}, 10);
        for (int64_t i = 0; i < zero.mean.size(); ++i)
            CHECK(zero.mean.at_flat(i) == doctest::Approx(exact.at_flat(i)).epsilon(1e-13));
    }
    SUBCASE("estimated mean displacement is within 3 standard errors of zero") {
        AveragedLaw law = annealed_law(1, 0.65, Site{origin_coord(), 0}, 30, 400, 77);
        double mean = 0.0, var_of_mean = 0.0;
        for (int64_t i = 0; i < law.mean.size(); ++i) {
            double x = static_cast<double>(law.mean.coord_of(i)[0]);
            mean += x * law.mean.at_flat(i);
            double se = law.stderrs[static_cast<size_t>(i)];
            var_of_mean += x * x * se * se;  // conservative: ignores negative cross-site covariance
        }
        CHECK(std::abs(mean) <= 3.0 * std::sqrt(var_of_mean));
    }
}

TEST_CASE("averaged law family is consistent with single calls") {
    std::vector<AveragedLaw> fam = annealed_law_family(1, 0.6, Site{origin_coord(), 0}, {5, 12}, 40, 99);
    AveragedLaw lone = annealed_law(1, 0.6, Site{origin_coord(), 0}, 12, 40, 99);
    REQUIRE(fam.size() == 2);
    for (int64_t i = 0; i < lone.mean.size(); ++i)
        CHECK(fam[1].mean.at_flat(i) == doctest::Approx(lone.mean.at_flat(i)).epsilon(1e-15));
}

TEST_CASE("analytic law sanity") {
    SpatialPmf law = analytic_uniform_law(1, Site{origin_coord(), 0}, 40);
    CHECK(std::abs(law.total() - 1.0) <= 1e-12);
    for (int32_t x = 0; x <= 40; ++x)
        CHECK(law.value(make_coord({x})) == doctest::Approx(law.value(make_coord({-x}))).epsilon(1e-15));
    SpatialPmf d2 = analytic_uniform_law(2, Site{origin_coord(), 0}, 6);
    CHECK(std::abs(d2.total() - 1.0) <= 1e-12);
    CHECK(d2.value(make_coord({1, -2})) ==
          doctest::Approx(law.value(make_coord({1})) / law.value(make_coord({1})) *
                          analytic_uniform_law(1, Site{origin_coord(), 0}, 6).value(make_coord({1})) *
                          analytic_uniform_law(1, Site{origin_coord(), 0}, 6).value(make_coord({-2}))));
}
