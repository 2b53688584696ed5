#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "solvgeo/models.hpp"
#include "solvgeo/rng.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace solvgeo;

namespace {

SolTypeModel sol() { return SolTypeModel::make({1.0}, {1.0}, 1.0); }

// Affine (k+1)x(k+1) representation of a point: [[diag(e^{r t}), n], [0, 1]].
// Multiplying these matrices realizes the group law, which gives an
// independent oracle for group_multiply built only on plain matrix algebra.
Mat affine_rep(const Derivation& d, const GroupPoint& p) {
    int k = d.n_dim();
    Mat m = Mat::Zero(k + 1, k + 1);
    Vec n = p.n_all();
    for (int l = 0; l < k; ++l) {
        m(l, l) = std::exp(d.rates[l] * p.height);
        m(l, k) = n[l];
    }
    m(k, k) = 1.0;
    return m;
}

GroupPoint from_affine(const Derivation& d, const Mat& m, double t) {
    int k = d.n_dim();
    return make_point(d, m.topRightCorner(k, 1), t);
}

GroupPoint random_point(const Derivation& d, Rng& rng, double nmax = 2.0, double tmax = 1.5) {
    Vec n(d.n_dim());
    for (int l = 0; l < d.n_dim(); ++l) n[l] = rng.uniform(-nmax, nmax);
    return make_point(d, n, rng.uniform(-tmax, tmax));
}

Mat random_spd(int n, Rng& rng) {
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
    return a * a.transpose() + 0.3 * Mat::Identity(n, n);
}

}  // namespace

TEST_CASE("model construction enforces the eigenvalue normalization") {
    CHECK_NOTHROW(HeintzeModel({1.0, 2.0, 3.5}));
    CHECK_THROWS_AS(HeintzeModel({}), std::invalid_argument);
    CHECK_THROWS_AS(HeintzeModel({2.0, 3.0}), std::invalid_argument);  // min != 1
    CHECK_THROWS_AS(HeintzeModel({1.0, -2.0}), std::invalid_argument);
    CHECK_THROWS_AS(HeintzeModel({0.0}), std::invalid_argument);
}

TEST_CASE("soltype make() renormalizes the down factor into lambda") {
    SolTypeModel m = SolTypeModel::make({1.0}, {2.0}, 1.0);
    CHECK(m.down.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(m.lambda == doctest::Approx(2.0));
    // Derivation rates must be unchanged by the renormalization.
    Derivation d = derivation(m);
    CHECK(d.rates[0] == doctest::Approx(1.0));
    CHECK(d.rates[1] == doctest::Approx(-2.0));
    CHECK_FALSE(m.unimodular());

    CHECK(sol().unimodular());
    CHECK(SolTypeModel::make({1.0, 2.0}, {1.0, 1.0}, 1.5).unimodular());
}

TEST_CASE("group law on SOL: frozen example and identities") {
    SolTypeModel m = sol();
    Derivation d = derivation(m);

    GroupPoint p = make_point(d, Vec::Zero(2), 1.0);
    Vec qn(2);
    qn << 1.0, 0.0;
    GroupPoint q = make_point(d, qn, 0.0);
    GroupPoint pq = group_multiply(m, p, q);
    CHECK(pq.n1[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(pq.n2[0] == doctest::Approx(0.0));
    CHECK(pq.height == doctest::Approx(1.0));

    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        GroupPoint x = random_point(d, rng);
        GroupPoint e = identity_point(d);
        GroupPoint ex = group_multiply(m, e, x);
        CHECK((ex.n_all() - x.n_all()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(ex.height == x.height);

        GroupPoint xi = group_multiply(m, x, group_inverse(m, x));
        CHECK(xi.n_all().cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(xi.height == 0.0);
    }
}

TEST_CASE("group law agrees with the affine matrix representation") {
    SolTypeModel m = SolTypeModel::make({1.0, 1.7}, {1.0, 2.2}, 1.3);
    Derivation d = derivation(m);
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        GroupPoint p = random_point(d, rng);
        GroupPoint q = random_point(d, rng);
        GroupPoint pq = group_multiply(d, p, q);
        GroupPoint oracle = from_affine(d, affine_rep(d, p) * affine_rep(d, q), p.height + q.height);
        CHECK((pq.n_all() - oracle.n_all()).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("associativity and height homomorphism") {
    SolTypeModel m = SolTypeModel::make({1.0, 2.0}, {1.0}, 1.2);
    Derivation d = derivation(m);
    Rng rng(13);
    for (int i = 0; i < 1000; ++i) {
        GroupPoint a = random_point(d, rng);
        GroupPoint b = random_point(d, rng);
        GroupPoint c = random_point(d, rng);
        GroupPoint left = group_multiply(d, group_multiply(d, a, b), c);
        GroupPoint right = group_multiply(d, a, group_multiply(d, b, c));
        CHECK((left.n_all() - right.n_all()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(std::abs(left.height - right.height) <= 1e-14);

        GroupPoint ab = group_multiply(d, a, b);
        CHECK(height(ab) == height(a) + height(b));
    }
}

TEST_CASE("dimension mismatches are rejected") {
    SolTypeModel m = sol();
    Derivation d = derivation(m);
    GroupPoint bad(Vec::Zero(2), Vec::Zero(1), 0.0);
    CHECK_THROWS_AS(group_multiply(d, identity_point(d), bad), std::invalid_argument);
    CHECK_THROWS_AS(metric_tensor_at(d, FrameMetric::identity(3), bad), std::invalid_argument);
    CHECK_THROWS_AS(metric_tensor_at(d, FrameMetric::identity(4), identity_point(d)),
                    std::invalid_argument);
}

TEST_CASE("frame metric validation") {
    Mat q(2, 2);
    q << 1.0, 0.5, 0.5, 2.0;
    CHECK_NOTHROW(FrameMetric{q});
    q(0, 1) = 0.7;  // asymmetric
    CHECK_THROWS_AS(FrameMetric{q}, std::invalid_argument);
    Mat neg(2, 2);
    neg << 1.0, 3.0, 3.0, 1.0;  // indefinite
    CHECK_THROWS_AS(FrameMetric{neg}, std::invalid_argument);
    Mat nan = Mat::Identity(2, 2);
    nan(0, 0) = std::nan("");
    CHECK_THROWS_AS(FrameMetric{nan}, std::invalid_argument);
}

TEST_CASE("metric tensor in coordinates") {
    SolTypeModel m = sol();
    Derivation d = derivation(m);
    FrameMetric id = FrameMetric::identity(3);

    Mat g0 = metric_tensor_at_height(d, id, 0.0);
    CHECK((g0 - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);

    Mat g1 = metric_tensor_at_height(d, id, 1.0);
    CHECK(g1(0, 0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK(g1(1, 1) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
    CHECK(g1(2, 2) == doctest::Approx(1.0));
    CHECK(std::abs(g1(0, 1)) + std::abs(g1(0, 2)) + std::abs(g1(1, 2)) == 0.0);

    Mat qt = Mat::Identity(3, 3);
    qt(2, 2) = 4.0;
    Mat gt = metric_tensor_at_height(d, FrameMetric(qt), -2.3);
    CHECK(gt(2, 2) == doctest::Approx(4.0));

    // Left-invariance in the nilradical: the tensor is a function of height only.
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        GroupPoint p = random_point(d, rng);
        GroupPoint q = random_point(d, rng);
        q.height = p.height;
        Mat gp = metric_tensor_at(d, id, p);
        Mat gq = metric_tensor_at(d, id, q);
        CHECK((gp - gq).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("perpendicular section: frozen example and orthogonality oracle") {
    HeintzeModel h({1.0});
    Derivation d = derivation(h);

    CHECK(perpendicular_section(d, FrameMetric::identity(2))[0] == 0.0);

    Mat q(2, 2);
    q << 1.0, 0.5, 0.5, 2.0;
    Vec v = perpendicular_section(d, FrameMetric(q));
    CHECK(v[0] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(v[1] == 1.0);

    Mat q9 = Mat::Identity(4, 4);
    q9(3, 3) = 9.0;
    SolTypeModel m = SolTypeModel::make({1.0, 1.5}, {1.0}, 1.0);
    Vec v9 = perpendicular_section(m, FrameMetric(q9));
    CHECK(v9.head(3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(v9[3] == 1.0);

    // Random SPD metrics: residual of the defining linear system.
    Rng rng(5);
    Derivation ds = derivation(m);
    for (int i = 0; i < 100; ++i) {
        FrameMetric fq(random_spd(4, rng));
        Vec vv = perpendicular_section(ds, fq);
        CHECK(vv[3] == 1.0);
        Vec resid = (fq.Q * vv).head(3);
        CHECK(resid.cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("normalize_metric scales to unit vertical speed and is idempotent") {
    HeintzeModel h({1.0});
    Derivation d = derivation(h);

    Mat q4 = Mat::Identity(2, 2);
    q4(1, 1) = 4.0;
    FrameMetric n4 = normalize_metric(d, FrameMetric(q4));
    CHECK(n4.Q(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(n4.Q(1, 1) == doctest::Approx(1.0).epsilon(1e-14));

    Mat q(2, 2);
    q << 1.0, 0.5, 0.5, 2.0;
    FrameMetric nq = normalize_metric(d, FrameMetric(q));
    CHECK((nq.Q - q / 1.75).cwiseAbs().maxCoeff() <= 1e-14);

    Rng rng(17);
    SolTypeModel m = SolTypeModel::make({1.0}, {1.0, 3.0}, 2.0);
    Derivation ds = derivation(m);
    for (int i = 0; i < 50; ++i) {
        FrameMetric fq(random_spd(4, rng));
        FrameMetric nf = normalize_metric(ds, fq);
        Vec v = perpendicular_section(ds, nf);
        CHECK(v.dot(nf.Q * v) == doctest::Approx(1.0).epsilon(1e-12));
        FrameMetric nn = normalize_metric(ds, nf);
        CHECK((nn.Q - nf.Q).cwiseAbs().maxCoeff() <= 1e-12 * nf.Q.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("one-parameter subgroups: frozen values, homomorphism, matrix-exp oracle") {
    HeintzeModel h({1.0});
    Derivation d2 = derivation(h);
    Vec vert(2);
    vert << 0.0, 1.0;
    GroupPoint c5 = one_param_subgroup(d2, vert, 5.0);
    CHECK(c5.n1[0] == 0.0);
    CHECK(c5.height == 5.0);

    Vec v11(2);
    v11 << 1.0, 1.0;
    GroupPoint limit = one_param_subgroup(d2, v11, -30.0);
    CHECK(std::abs(limit.n1[0] - (-1.0)) <= 1e-12);

    Vec zero_dt(2);
    zero_dt << 1.0, 0.0;
    CHECK_THROWS_AS(one_param_subgroup(d2, zero_dt, 1.0), std::invalid_argument);

    SolTypeModel m = SolTypeModel::make({1.0, 1.4}, {1.0}, 0.8);
    Derivation d = derivation(m);
    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        Vec v(4);
        for (int l = 0; l < 4; ++l) v[l] = rng.uniform(-1.5, 1.5);
        if (std::abs(v[3]) < 0.1) v[3] = 0.5;
        double tau = rng.uniform(-2.0, 2.0);

        GroupPoint a = one_param_subgroup(d, v, tau);
        GroupPoint b = one_param_subgroup(d, v, tau / 2.0);
        GroupPoint bb = group_multiply(d, b, b);
        CHECK((a.n_all() - bb.n_all()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(a.height == doctest::Approx(bb.height).epsilon(1e-14));

        // Oracle: exponential of the affine Lie algebra matrix
        // [[diag(r v_t), v_n], [0, 0]] computed by a general-purpose routine.
        Mat x = Mat::Zero(4, 4);
        for (int l = 0; l < 3; ++l) {
            x(l, l) = d.rates[l] * v[3];
            x(l, 3) = v[l];
        }
        Mat ex = (tau * x).exp();
        CHECK((a.n_all() - ex.topRightCorner(3, 1)).cwiseAbs().maxCoeff() <= 1e-10);
    }
}
