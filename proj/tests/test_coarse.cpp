#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "solvgeo/coarse.hpp"
#include "solvgeo/models.hpp"
#include "solvgeo/rng.hpp"

using namespace solvgeo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec vec1(double x) {
    Vec v(1);
    v[0] = x;
    return v;
}

SolTypeModel sol() { return SolTypeModel::make({1.0}, {1.0}, 1.0); }

// Random SOL point with log-uniform coordinate magnitudes and occasional
// exact zeros, so the critical-height sentinels get exercised too.
GroupPoint random_sol_point(Rng& rng) {
    auto coord = [&](double span) {
        if (rng.unit() < 0.1) return 0.0;
        return rng.sign() * std::exp(rng.uniform(-span, span));
    };
    return GroupPoint(vec1(coord(6.0)), vec1(coord(6.0)), rng.uniform(-6.0, 6.0));
}

}  // namespace

TEST_CASE("hyperbolic distance: closed form basics") {
    CHECK(hyperbolic_distance(1.0, 0.5, 2.0, 0.5, 2.0) == 0.0);
    CHECK(hyperbolic_distance(1.0, 0.0, 0.0, 0.0, 3.0) == 3.0);  // vertical, exact
    CHECK(hyperbolic_distance(2.5, 1.0, 7.0, 1.0, -4.0) == 11.0);
    CHECK(hyperbolic_distance(1.0, 0.0, 0.0, 1.0, 0.0) ==
          doctest::Approx(std::acosh(1.5)).epsilon(1e-12));
    CHECK_THROWS_AS(hyperbolic_distance(0.0, 0.0, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("hyperbolic distance: symmetry and eigenvalue scaling") {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        double a = rng.uniform(0.3, 4.0);
        double x = rng.uniform(-20.0, 20.0), y = rng.uniform(-20.0, 20.0);
        double t = rng.uniform(-8.0, 8.0), s = rng.uniform(-8.0, 8.0);
        double d = hyperbolic_distance(a, x, t, y, s);
        CHECK(d == hyperbolic_distance(a, y, s, x, t));
        // Rescaling (x,t) -> (ax, at) reduces to the unit eigenvalue.
        double d1 = hyperbolic_distance(1.0, a * x, a * t, a * y, a * s);
        CHECK(d == doctest::Approx(d1 / a).epsilon(1e-12));
    }
}

TEST_CASE("hyperbolic distance: invariance under the group action") {
    // (x,t) -> (x0 + e^{a t0} x, t0 + t) is a left translation, so an isometry.
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
        double a = rng.uniform(0.3, 3.0);
        double x = rng.uniform(-5.0, 5.0), y = rng.uniform(-5.0, 5.0);
        double t = rng.uniform(-4.0, 4.0), s = rng.uniform(-4.0, 4.0);
        double x0 = rng.uniform(-5.0, 5.0), t0 = rng.uniform(-3.0, 3.0);
        double d = hyperbolic_distance(a, x, t, y, s);
        double dshift = hyperbolic_distance(a, x0 + std::exp(a * t0) * x, t0 + t,
                                            x0 + std::exp(a * t0) * y, t0 + s);
        CHECK(d == doctest::Approx(dshift).epsilon(1e-10));
    }
}

TEST_CASE("hyperbolic distance: triangle inequality on random triples") {
    Rng rng(13);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        double a = rng.uniform(0.5, 2.0);
        double xs[3], ts[3];
        for (int k = 0; k < 3; ++k) {
            xs[k] = rng.sign() * std::exp(rng.uniform(-4.0, 4.0));
            ts[k] = rng.uniform(-5.0, 5.0);
        }
        double dab = hyperbolic_distance(a, xs[0], ts[0], xs[1], ts[1]);
        double dbc = hyperbolic_distance(a, xs[1], ts[1], xs[2], ts[2]);
        double dac = hyperbolic_distance(a, xs[0], ts[0], xs[2], ts[2]);
        if (dac > dab + dbc + 1e-9) ++checked;
    }
    CHECK(checked == 0);
}

TEST_CASE("critical heights: forced one-dimensional values") {
    HeintzeModel up{{1.0}};
    CHECK(critical_height_up(up, vec1(std::exp(1.0)), vec1(0.0)) ==
          doctest::Approx(1.0).epsilon(1e-11));
    CHECK(critical_height_up(up, vec1(1.0), vec1(0.0)) == doctest::Approx(0.0).epsilon(1e-11));
    CHECK(critical_height_up(up, vec1(0.0), vec1(std::exp(-2.0))) ==
          doctest::Approx(-2.0).epsilon(1e-11));

    HeintzeModel down{{1.0}};
    CHECK(critical_height_down(down, 1.0, vec1(std::exp(2.0)), vec1(0.0)) ==
          doctest::Approx(-2.0).epsilon(1e-11));
    CHECK(critical_height_down(down, 1.0, vec1(1.0), vec1(0.0)) ==
          doctest::Approx(0.0).epsilon(1e-11));
    // b = 2 after normalization stays 1 with doubled lambda; pass it directly.
    CHECK(critical_height_down(down, 2.0, vec1(std::exp(2.0)), vec1(0.0)) ==
          doctest::Approx(-1.0).epsilon(1e-11));
}

TEST_CASE("critical heights: two-eigenvalue root against the closed form") {
    // e^{-2t} + e^{-4t} = 1 means u + u^2 = 1 for u = e^{-2t}, the golden
    // ratio conjugate, so t = -log((sqrt(5)-1)/2)/2.
    HeintzeModel up{{1.0, 2.0}};
    Vec x(2), y(2);
    x << 1.0, 1.0;
    y << 0.0, 0.0;
    double expected = -0.5 * std::log(0.5 * (std::sqrt(5.0) - 1.0));
    double t = critical_height_up(up, x, y);
    CHECK(t == doctest::Approx(expected).epsilon(1e-11));
    CHECK(t == doctest::Approx(0.2406).epsilon(1e-3));
}

TEST_CASE("critical heights: sentinels and residuals") {
    HeintzeModel up{{1.0, 3.0}};
    Vec z = Vec::Zero(2);
    CHECK(critical_height_up(up, z, z) == -kInf);
    CHECK(critical_height_down(up, 1.5, z, z) == kInf);

    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        int k = rng.uniform_int(1, 3);
        std::vector<double> eigs{1.0};
        for (int l = 1; l < k; ++l) eigs.push_back(rng.uniform(1.0, 6.0));
        HeintzeModel m{eigs};
        Vec x(k), y(k);
        for (int l = 0; l < k; ++l) {
            x[l] = rng.sign() * std::exp(rng.uniform(-10.0, 10.0));
            y[l] = rng.sign() * std::exp(rng.uniform(-10.0, 10.0));
        }
        double tu = critical_height_up(m, x, y);
        double ru = 0.0;
        for (int l = 0; l < k; ++l)
            ru += std::exp(-2.0 * eigs[l] * tu) * (x[l] - y[l]) * (x[l] - y[l]);
        CHECK(std::abs(std::sqrt(ru) - 1.0) <= 1e-10);

        double lambda = rng.uniform(0.5, 2.5);
        double td = critical_height_down(m, lambda, x, y);
        double rd = 0.0;
        for (int l = 0; l < k; ++l)
            rd += std::exp(2.0 * lambda * eigs[l] * td) * (x[l] - y[l]) * (x[l] - y[l]);
        CHECK(std::abs(std::sqrt(rd) - 1.0) <= 1e-10);
    }
}

TEST_CASE("critical heights: monotone in the separation") {
    HeintzeModel m{{1.0}};
    double prev_up = -kInf, prev_down = kInf;
    for (double mag : {0.01, 0.5, 1.0, 10.0, 1e4}) {
        double tu = critical_height_up(m, vec1(mag), vec1(0.0));
        double td = critical_height_down(m, 1.0, vec1(mag), vec1(0.0));
        CHECK(tu > prev_up);
        CHECK(td < prev_down);
        prev_up = tu;
        prev_down = td;
    }
}

TEST_CASE("factor pseudo-distances: frozen examples") {
    HeintzeModel up{{1.0}};
    CHECK(rho_tilde_1(up, vec1(0.0), 0.0, vec1(0.0), 5.0) == 6.0);
    CHECK(rho_tilde_1(up, vec1(0.0), 0.0, vec1(std::exp(3.0)), 0.0) ==
          doctest::Approx(7.0).epsilon(1e-11));
    CHECK(rho_tilde_1(up, vec1(0.0), 0.0, vec1(1.0), 10.0) ==
          doctest::Approx(11.0).epsilon(1e-11));

    HeintzeModel down{{1.0}};
    CHECK(rho_tilde_2(down, 1.0, vec1(0.0), 0.0, vec1(0.0), 5.0) == 6.0);
    CHECK(rho_tilde_2(down, 1.0, vec1(0.0), 0.0, vec1(std::exp(2.0)), 0.0) ==
          doctest::Approx(5.0).epsilon(1e-11));
    CHECK(rho_tilde_2(down, 1.0, vec1(0.0), 0.0, vec1(1.0), 10.0) ==
          doctest::Approx(11.0).epsilon(1e-11));
}

TEST_CASE("rho_tilde: frozen examples and case dispatch") {
    SolTypeModel m = sol();
    GroupPoint e(vec1(0.0), vec1(0.0), 0.0);
    CHECK(rho_tilde(m, e, GroupPoint(vec1(0.0), vec1(0.0), 5.0)) == 7.0);
    CHECK(rho_tilde(m, e, GroupPoint(vec1(std::exp(3.0)), vec1(std::exp(2.0)), 0.0)) ==
          doctest::Approx(12.0).epsilon(1e-11));
    CHECK(rho_tilde(m, e, GroupPoint(vec1(1.0), vec1(1.0), 4.0)) ==
          doctest::Approx(6.0).epsilon(1e-11));
}

TEST_CASE("rho_tilde: symmetry, factor decomposition, height lower bound") {
    SolTypeModel m = sol();
    Rng rng(31);
    for (int i = 0; i < 10000; ++i) {
        GroupPoint p = random_sol_point(rng), q = random_sol_point(rng);
        double rt = rho_tilde(m, p, q);
        CHECK(rt == rho_tilde(m, q, p));
        double dh = std::abs(p.height - q.height);
        CHECK(rt >= dh + 2.0 - 1e-12);
        double split = rho_tilde_1(m.up, p.n1, p.height, q.n1, q.height) +
                       rho_tilde_2(m.down, m.lambda, p.n2, p.height, q.n2, q.height) - dh;
        CHECK(rt == doctest::Approx(split).epsilon(1e-12));
    }
}

TEST_CASE("rho: frozen examples") {
    SolTypeModel m = sol();
    FactorEvaluators ev = FactorEvaluators::closed_form(m);
    GroupPoint e(vec1(0.0), vec1(0.0), 0.0);
    CHECK(rho(m, ev, e, e) == 0.0);
    CHECK(rho(m, ev, e, GroupPoint(vec1(0.0), vec1(0.0), 5.0)) == 5.0);
    CHECK(rho(m, ev, e, GroupPoint(vec1(1.0), vec1(0.0), 0.0)) ==
          doctest::Approx(std::acosh(1.5)).epsilon(1e-12));
    CHECK_THROWS_AS(FactorEvaluators::closed_form(SolTypeModel::make({1.0, 2.0}, {1.0}, 1.0)),
                    std::invalid_argument);
}

TEST_CASE("rho and rho_tilde agree within the coarse constant") {
    SolTypeModel m = sol();
    FactorEvaluators ev = FactorEvaluators::closed_form(m);
    Rng rng(32);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        GroupPoint p = random_sol_point(rng), q = random_sol_point(rng);
        worst = std::max(worst, std::abs(rho(m, ev, p, q) - rho_tilde(m, p, q)));
    }
    CHECK(worst <= 4.0);
}

TEST_CASE("coarse path: frozen SOL example") {
    SolTypeModel m = sol();
    GroupPoint p(vec1(0.0), vec1(0.0), 0.0);
    GroupPoint q(vec1(std::exp(3.0)), vec1(std::exp(2.0)), 0.0);
    CoarsePath path = coarse_path(m, p, q);
    REQUIRE(path.waypoints.size() == 6);
    CHECK(path.waypoints[1].height == doctest::Approx(-2.0).epsilon(1e-11));
    CHECK(path.waypoints[2].height == doctest::Approx(-2.0).epsilon(1e-11));
    CHECK(path.waypoints[3].height == doctest::Approx(3.0).epsilon(1e-11));
    CHECK(path.waypoints[4].height == doctest::Approx(3.0).epsilon(1e-11));
    CHECK(std::abs(path.length - 12.0) <= 2.0);
    CHECK(path.length == doctest::Approx(12.0).epsilon(1e-9));
}

TEST_CASE("coarse path: degenerate and vertical pairs") {
    SolTypeModel m = sol();
    GroupPoint p(vec1(0.4), vec1(-1.2), 0.7);
    CoarsePath same = coarse_path(m, p, p);
    CHECK(same.length == 0.0);

    for (double s : {3.5, -2.25}) {
        GroupPoint q(p.n1, p.n2, s);
        CoarsePath path = coarse_path(m, p, q);
        CHECK(path.length == doctest::Approx(std::abs(s - p.height)).epsilon(1e-12));
        for (const GroupPoint& w : path.waypoints) {
            CHECK((w.n1 - p.n1).cwiseAbs().maxCoeff() == 0.0);
            CHECK((w.n2 - p.n2).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("coarse path: length stays within 2 of rho_tilde") {
    SolTypeModel m = sol();
    Rng rng(41);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        GroupPoint p = random_sol_point(rng), q = random_sol_point(rng);
        CoarsePath path = coarse_path(m, p, q);
        worst = std::max(worst, std::abs(path.length - rho_tilde(m, p, q)));

        // Endpoints are the queried points; interior moves alternate between
        // vertical segments and single-block crossings.
        CHECK((path.waypoints.front().n_all() - p.n_all()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((path.waypoints.back().n_all() - q.n_all()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(path.waypoints.front().height == p.height);
        CHECK(path.waypoints.back().height == q.height);
        CHECK(path.length == coarse_path(m, q, p).length);
    }
    CHECK(worst <= 2.0 + 1e-9);
}

TEST_CASE("coarse path: multi-eigenvalue model stays within 2 of rho_tilde") {
    SolTypeModel m = SolTypeModel::make({1.0, 1.6}, {1.0, 2.3}, 0.8);
    Rng rng(42);
    double worst = 0.0;
    for (int i = 0; i < 4000; ++i) {
        auto coords = [&](int k) {
            Vec v(k);
            for (int l = 0; l < k; ++l)
                v[l] = rng.unit() < 0.1 ? 0.0 : rng.sign() * std::exp(rng.uniform(-5.0, 5.0));
            return v;
        };
        GroupPoint p(coords(2), coords(2), rng.uniform(-5.0, 5.0));
        GroupPoint q(coords(2), coords(2), rng.uniform(-5.0, 5.0));
        worst = std::max(worst, std::abs(coarse_path(m, p, q).length - rho_tilde(m, p, q)));
    }
    CHECK(worst <= 2.0 + 1e-9);
}

TEST_CASE("coarse path: diagonal metric weighting") {
    SolTypeModel m = sol();
    Rng rng(43);
    FrameMetric id = FrameMetric::identity(3);
    for (int i = 0; i < 200; ++i) {
        GroupPoint p = random_sol_point(rng), q = random_sol_point(rng);
        CHECK(coarse_path(m, p, q, id).length == coarse_path(m, p, q).length);
    }

    // Heavier up-coordinate pushes the crossing height up by log(2).
    Mat w = Mat::Identity(3, 3);
    w(0, 0) = 4.0;
    GroupPoint p(vec1(0.0), vec1(0.0), 0.0);
    GroupPoint q(vec1(std::exp(3.0)), vec1(0.0), 0.0);
    CoarsePath path = coarse_path(m, p, q, FrameMetric(w));
    double thi = 3.0 + std::log(2.0);
    CHECK(path.length == doctest::Approx(2.0 * thi + 1.0).epsilon(1e-9));

    Mat skew = Mat::Identity(3, 3);
    skew(0, 1) = skew(1, 0) = 0.2;
    CHECK_THROWS_AS(coarse_path(m, p, q, FrameMetric(skew)), std::invalid_argument);
}

TEST_CASE("shadow coset: frozen 2D example") {
    HeintzeModel m{{1.0}};
    Mat q2(2, 2);
    q2 << 1.0, -1.0, -1.0, 2.0;  // perpendicular section (1, 1)
    FrameMetric Q1 = FrameMetric::identity(2), Q2{q2};
    Vec v2 = perpendicular_section(derivation(m), Q2);
    CHECK(v2[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(v2[1] == 1.0);

    GroupPoint base(vec1(0.0), Vec(0), 0.0);
    GroupPoint out = shadow_coset(m, Q1, Q2, base);
    CHECK(out.n1[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.height == 0.0);

    // Oracle: the two coset traces stay a bounded hyperbolic distance apart;
    // here that distance is the constant arcosh(1.5).
    Derivation d = derivation(m);
    Vec v1 = perpendicular_section(d, Q1);
    double sup = 0.0;
    for (int t = -20; t <= 20; ++t) {
        GroupPoint a = coset_point_at_height(d, base, v1, static_cast<double>(t));
        GroupPoint b = coset_point_at_height(d, out, v2, static_cast<double>(t));
        sup = std::max(sup, hyperbolic_distance(1.0, a.n1[0], a.height, b.n1[0], b.height));
    }
    CHECK(sup == doctest::Approx(std::acosh(1.5)).epsilon(1e-9));
}

TEST_CASE("shadow coset: identity and vertical-shift invariance") {
    SolTypeModel m = SolTypeModel::make({1.0}, {1.0, 1.4}, 1.2);
    Derivation d = derivation(m);
    Mat q2 = Mat::Identity(4, 4);
    q2(0, 3) = q2(3, 0) = -0.3;
    q2(2, 3) = q2(3, 2) = 0.25;
    q2(3, 3) = 2.0;
    FrameMetric Q1 = FrameMetric::identity(4), Q2{q2};

    Vec n1 = vec1(0.7), n2(2);
    n2 << -1.1, 0.4;
    GroupPoint base(n1, n2, 0.0);
    GroupPoint fixed = shadow_coset(m, Q1, Q1, base);
    CHECK((fixed.n_all() - base.n_all()).cwiseAbs().maxCoeff() <= 1e-12);

    // Moving the base along its own coset leaves the answer unchanged.
    GroupPoint out = shadow_coset(m, Q1, Q2, base);
    Vec v1 = perpendicular_section(d, Q1);
    for (double tau : {-2.0, 1.5, 4.0}) {
        GroupPoint moved = coset_point_at_height(d, base, v1, tau);
        GroupPoint out2 = shadow_coset(m, Q1, Q2, moved);
        CHECK((out2.n_all() - out.n_all()).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(out2.height == 0.0);
    }

    // The group element joining same-height points of the two cosets is
    // constant, so the cosets are parallel in the invariant metric.
    GroupPoint ref;
    Vec v2 = perpendicular_section(d, Q2);
    bool first = true;
    for (int t = -10; t <= 10; ++t) {
        GroupPoint a = coset_point_at_height(d, base, v1, static_cast<double>(t));
        GroupPoint b = coset_point_at_height(d, out, v2, static_cast<double>(t));
        GroupPoint g = group_multiply(m, group_inverse(m, a), b);
        if (first) {
            ref = g;
            first = false;
        } else {
            CHECK((g.n_all() - ref.n_all()).cwiseAbs().maxCoeff() <= 1e-8);
            CHECK(g.height == doctest::Approx(ref.height).epsilon(1e-12));
        }
    }
}
