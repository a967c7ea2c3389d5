#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "gm1/lattice.hpp"
#include "gm1/rng.hpp"

using gm1::Couplings;
using gm1::GaugeTransform;
using gm1::LadderLattice;
using gm1::Rng;
using gm1::Site;

namespace {

LadderLattice random_lattice(int n, unsigned seed, double spread = 1.0) {
    Rng rng(seed);
    return LadderLattice::random_init(n, spread, rng);
}

GaugeTransform random_gauge(int n, unsigned seed, double spread = 1.0) {
    Rng rng(seed);
    GaugeTransform g;
    g.h0.resize(static_cast<std::size_t>(n));
    g.h1.resize(static_cast<std::size_t>(n));
    for (double& h : g.h0) h = rng.uniform_sym(spread);
    for (double& h : g.h1) h = rng.uniform_sym(spread);
    return g;
}

}  // namespace

TEST_CASE("random_init degenerate spread, determinism, and size guard") {
    Rng rng(1);
    const LadderLattice zero = LadderLattice::random_init(8, 0.0, rng);
    for (int j = 0; j < 8; ++j) {
        CHECK(zero.theta0(0, j) == 0.0);
        CHECK(zero.theta0(1, j) == 0.0);
        CHECK(zero.theta1(j) == 0.0);
        CHECK(zero.phi(0, j) == 0.0);
        CHECK(zero.phi(1, j) == 0.0);
    }
    CHECK_FALSE(zero.axis_frozen());

    const LadderLattice a = random_lattice(8, 42);
    const LadderLattice b = random_lattice(8, 42);
    CHECK(a.snapshot_text() == b.snapshot_text());

    Rng r3(1);
    CHECK_THROWS_AS(LadderLattice::random_init(3, 1.0, r3), std::invalid_argument);
    CHECK_THROWS_AS(LadderLattice::random_init(8, -0.5, r3), std::invalid_argument);
}

TEST_CASE("plaquette reproduces the four-link combination") {
    Rng rng(1);
    LadderLattice lat = LadderLattice::random_init(8, 0.0, rng);
    for (int j = 0; j < 8; ++j) CHECK(lat.plaquette(j) == doctest::Approx(1.0).epsilon(1e-15));

    lat.set_theta1(0, 0.1);
    lat.set_theta0(1, 0, 0.2);
    lat.set_theta1(1, 0.05);
    lat.set_theta0(0, 0, 0.15);
    CHECK(lat.plaquette(0) == doctest::Approx(std::exp(0.1)).epsilon(1e-14));
    CHECK(std::exp(0.1) == doctest::Approx(1.105171).epsilon(1e-6));
}

TEST_CASE("gauge_link reproduces the hop combination and its topology guard") {
    Rng rng(1);
    LadderLattice lat = LadderLattice::random_init(8, 0.0, rng);
    CHECK(lat.gauge_link(Site{1, 3}, 0) == doctest::Approx(1.0));

    lat.set_phi(1, 3, 0.1);
    lat.set_theta0(1, 3, 0.05);
    lat.set_phi(1, 4, 0.2);
    CHECK(lat.gauge_link(Site{1, 3}, 0) == doctest::Approx(std::exp(0.15)).epsilon(1e-14));
    CHECK(std::exp(0.15) == doctest::Approx(1.161834).epsilon(1e-6));

    CHECK_THROWS_AS(lat.gauge_link(Site{1, 0}, 1), std::invalid_argument);  // no rung from i=1
    CHECK_THROWS_AS(lat.gauge_link(Site{0, 0}, 2), std::invalid_argument);
}

TEST_CASE("log_return matches its definition and the asset temporal link") {
    Rng rng(1);
    LadderLattice lat = LadderLattice::random_init(8, 0.0, rng);
    for (int j = 0; j < 8; ++j) CHECK(lat.log_return(j) == 0.0);

    lat.set_phi(1, 2, 0.1);
    lat.set_theta0(1, 2, 0.05);
    lat.set_phi(1, 3, 0.2);
    CHECK(lat.log_return(3) == doctest::Approx(0.15).epsilon(1e-15));

    const LadderLattice rnd = random_lattice(16, 77);
    for (int j = 0; j < 16; ++j)
        CHECK(std::exp(rnd.log_return(j)) ==
              doctest::Approx(rnd.gauge_link(Site{1, (j + 15) % 16}, 0)).epsilon(1e-14));
}

TEST_CASE("action: zero minimum and the one-link worked value") {
    Rng rng(1);
    LadderLattice lat = LadderLattice::random_init(6, 0.0, rng);
    const Couplings c;
    CHECK(lat.action(c) == doctest::Approx(0.0).epsilon(1e-15));

    lat.set_theta0(1, 0, 0.1);
    // one plaquette term + one temporal link term, both 2cosh(0.1)-2
    const double expected = 2.0 * (2.0 * std::cosh(0.1) - 2.0);
    CHECK(lat.action(c) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(expected == doctest::Approx(0.02001667).epsilon(1e-6));

    const LadderLattice rnd = random_lattice(12, 5);
    CHECK(rnd.action(c) >= 0.0);
}

TEST_CASE("gauge invariance of action, plaquettes, links, and returns") {
    for (unsigned seed = 0; seed < 100; ++seed) {
        LadderLattice lat = random_lattice(10, 1000 + seed);
        const Couplings c;
        const double s0 = lat.action(c);
        std::vector<double> p0(10), r0(10), link0(10);
        for (int j = 0; j < 10; ++j) {
            p0[static_cast<std::size_t>(j)] = lat.plaquette(j);
            r0[static_cast<std::size_t>(j)] = lat.log_return(j);
            link0[static_cast<std::size_t>(j)] = lat.gauge_link(Site{0, j}, 1);
        }
        lat.apply_gauge(random_gauge(10, 2000 + seed));
        CHECK(lat.action(c) == doctest::Approx(s0).epsilon(1e-12));
        for (int j = 0; j < 10; ++j) {
            CHECK(lat.plaquette(j) ==
                  doctest::Approx(p0[static_cast<std::size_t>(j)]).epsilon(1e-12));
            CHECK(lat.log_return(j) ==
                  doctest::Approx(r0[static_cast<std::size_t>(j)]).epsilon(1e-12));
            CHECK(lat.gauge_link(Site{0, j}, 1) ==
                  doctest::Approx(link0[static_cast<std::size_t>(j)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("apply_gauge: identity, constant shift, and composition") {
    LadderLattice lat = random_lattice(8, 9);
    const std::string before = lat.snapshot_text();

    GaugeTransform zero;
    zero.h0.assign(8, 0.0);
    zero.h1.assign(8, 0.0);
    lat.apply_gauge(zero);
    CHECK(lat.snapshot_text() == before);

    LadderLattice shifted = random_lattice(8, 9);
    GaugeTransform constant;
    constant.h0.assign(8, 0.7);
    constant.h1.assign(8, 0.7);
    shifted.apply_gauge(constant);
    for (int j = 0; j < 8; ++j) {
        CHECK(shifted.theta0(0, j) == doctest::Approx(lat.theta0(0, j)).epsilon(1e-15));
        CHECK(shifted.theta1(j) == doctest::Approx(lat.theta1(j)).epsilon(1e-15));
        CHECK(shifted.phi(0, j) == doctest::Approx(lat.phi(0, j) + 0.7).epsilon(1e-15));
        CHECK(shifted.phi(1, j) == doctest::Approx(lat.phi(1, j) + 0.7).epsilon(1e-15));
    }

    // group law: g2 after g1 equals the sum transform
    LadderLattice two_step = random_lattice(8, 11);
    LadderLattice one_step = random_lattice(8, 11);
    const GaugeTransform g1 = random_gauge(8, 21);
    const GaugeTransform g2 = random_gauge(8, 22);
    GaugeTransform sum;
    sum.h0.resize(8);
    sum.h1.resize(8);
    for (std::size_t j = 0; j < 8; ++j) {
        sum.h0[j] = g1.h0[j] + g2.h0[j];
        sum.h1[j] = g1.h1[j] + g2.h1[j];
    }
    two_step.apply_gauge(g1);
    two_step.apply_gauge(g2);
    one_step.apply_gauge(sum);
    for (int j = 0; j < 8; ++j) {
        CHECK(two_step.theta0(1, j) == doctest::Approx(one_step.theta0(1, j)).epsilon(1e-13));
        CHECK(two_step.theta1(j) == doctest::Approx(one_step.theta1(j)).epsilon(1e-13));
        CHECK(two_step.phi(1, j) == doctest::Approx(one_step.phi(1, j)).epsilon(1e-13));
    }

    GaugeTransform bad;
    bad.h0.assign(4, 0.0);
    bad.h1.assign(8, 0.0);
    CHECK_THROWS_AS(lat.apply_gauge(bad), std::invalid_argument);
}

TEST_CASE("fix_cash_axis pins the cash rail and freezes it") {
    LadderLattice lat = random_lattice(8, 33);
    std::vector<double> asset_theta(8), asset_phi(8), returns0(8), plaq0(8);
    for (int j = 0; j < 8; ++j) {
        asset_theta[static_cast<std::size_t>(j)] = lat.theta0(1, j);
        asset_phi[static_cast<std::size_t>(j)] = lat.phi(1, j);
        returns0[static_cast<std::size_t>(j)] = lat.log_return(j);
    }
    lat.fix_cash_axis(1.0003);
    CHECK(lat.axis_frozen());
    CHECK(lat.rho() == doctest::Approx(1.0003));
    for (int j = 0; j < 8; ++j) {
        CHECK(lat.phi(0, j) == 0.0);
        CHECK(lat.theta0(0, j) == doctest::Approx(std::log(1.0003)).epsilon(1e-15));
        // cash-rail temporal hop is exactly the interest factor
        CHECK(lat.gauge_link(Site{0, j}, 0) == doctest::Approx(1.0003).epsilon(1e-14));
        // asset-rail fields and the returns are untouched
        CHECK(lat.theta0(1, j) == asset_theta[static_cast<std::size_t>(j)]);
        CHECK(lat.phi(1, j) == asset_phi[static_cast<std::size_t>(j)]);
        CHECK(lat.log_return(j) == returns0[static_cast<std::size_t>(j)]);
    }

    CHECK_THROWS_AS(lat.fix_cash_axis(1.0), std::logic_error);        // double freeze
    CHECK_THROWS_AS(lat.set_theta0(0, 2, 0.5), std::logic_error);     // frozen link
    CHECK_THROWS_AS(lat.set_phi(0, 2, 0.5), std::logic_error);        // frozen matter
    lat.set_theta0(1, 2, 0.5);                                        // asset rail stays free
    lat.set_phi(1, 2, 0.5);

    LadderLattice flat = random_lattice(8, 34);
    CHECK_THROWS_AS(flat.fix_cash_axis(0.99), std::invalid_argument);
    flat.fix_cash_axis(1.0);
    for (int j = 0; j < 8; ++j)
        CHECK(flat.gauge_link(Site{0, j}, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("returns telescope to the sum of asset temporal links") {
    const LadderLattice lat = random_lattice(16, 55);
    double sum_r = 0.0, sum_theta = 0.0;
    for (int j = 0; j < 16; ++j) {
        sum_r += lat.log_return(j);
        sum_theta += lat.theta0(1, j);
    }
    CHECK(sum_r == doctest::Approx(sum_theta).epsilon(1e-12));
}

TEST_CASE("anchor_asset_gauge zeroes asset matter but changes no observable") {
    LadderLattice lat = random_lattice(12, 60);
    lat.fix_cash_axis(1.0);
    std::vector<double> r0(12), p0(12);
    for (int j = 0; j < 12; ++j) {
        r0[static_cast<std::size_t>(j)] = lat.log_return(j);
        p0[static_cast<std::size_t>(j)] = lat.plaquette(j);
    }
    lat.anchor_asset_gauge();
    for (int j = 0; j < 12; ++j) {
        CHECK(lat.phi(1, j) == 0.0);
        CHECK(lat.phi(0, j) == 0.0);  // cash axis untouched
        CHECK(lat.log_return(j) == doctest::Approx(r0[static_cast<std::size_t>(j)]).epsilon(1e-13));
        CHECK(lat.plaquette(j) == doctest::Approx(p0[static_cast<std::size_t>(j)]).epsilon(1e-13));
    }
    CHECK(lat.axis_frozen());
}

TEST_CASE("snapshot text round-trips bit-exactly") {
    LadderLattice lat = random_lattice(9, 71);
    lat.fix_cash_axis(1.0003);
    const std::string text = lat.snapshot_text();
    const LadderLattice back = LadderLattice::parse_snapshot(text);
    CHECK(back.n() == 9);
    CHECK(back.axis_frozen());
    CHECK(back.rho() == lat.rho());
    for (int j = 0; j < 9; ++j) {
        CHECK(back.theta0(0, j) == lat.theta0(0, j));
        CHECK(back.theta0(1, j) == lat.theta0(1, j));
        CHECK(back.theta1(j) == lat.theta1(j));
        CHECK(back.phi(0, j) == lat.phi(0, j));
        CHECK(back.phi(1, j) == lat.phi(1, j));
    }
    CHECK(back.snapshot_text() == text);

    CHECK_THROWS_AS(LadderLattice::parse_snapshot("bogus header\n"), std::runtime_error);

    const std::string path = "/tmp/gm1_test_snapshot.txt";
    lat.save_snapshot(path);
    const LadderLattice loaded = LadderLattice::load_snapshot(path);
    CHECK(loaded.snapshot_text() == text);
    std::remove(path.c_str());
}

TEST_CASE("index arithmetic wraps periodically") {
    const LadderLattice lat = random_lattice(8, 3);
    CHECK(lat.mod(-1) == 7);
    CHECK(lat.mod(8) == 0);
    CHECK(lat.mod(-9) == 7);
    CHECK(lat.mod(17) == 1);
    CHECK(lat.log_return(0) == doctest::Approx(-lat.phi(1, 7) + lat.theta0(1, 7) + lat.phi(1, 0))
                                   .epsilon(1e-15));
}
