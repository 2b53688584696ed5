#include "solvgeo/models.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace solvgeo {

namespace {

void check_eigenvalues(const std::vector<double>& eigs) {
    if (eigs.empty()) throw std::invalid_argument("model needs at least one eigenvalue");
    double mn = std::numeric_limits<double>::infinity();
    for (double a : eigs) {
        if (!(a > 0.0) || !std::isfinite(a))
            throw std::invalid_argument("derivation eigenvalues must be positive reals");
        mn = std::min(mn, a);
    }
    if (std::abs(mn - 1.0) > 1e-12)
        throw std::invalid_argument("smallest derivation eigenvalue must equal 1");
}

void check_dims(const Derivation& d, const GroupPoint& p) {
    if (p.n1.size() != d.k1 || p.n2.size() != d.k2)
        throw std::invalid_argument("point dimensions do not match the model");
}

}  // namespace

HeintzeModel::HeintzeModel(std::vector<double> eigs) : eigenvalues(std::move(eigs)) {
    check_eigenvalues(eigenvalues);
}

SolTypeModel::SolTypeModel(HeintzeModel up_, HeintzeModel down_, double lambda_)
    : up(std::move(up_)), down(std::move(down_)), lambda(lambda_) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("lambda must be a positive real");
}

SolTypeModel SolTypeModel::make(std::vector<double> up_eigs,
                                std::vector<double> down_eigs, double lambda) {
    if (down_eigs.empty()) throw std::invalid_argument("down factor needs at least one eigenvalue");
    double mn = *std::min_element(down_eigs.begin(), down_eigs.end());
    if (!(mn > 0.0)) throw std::invalid_argument("derivation eigenvalues must be positive reals");
    // Normalize min b to 1 and absorb the scale into lambda; -lambda' b'
    // equals -lambda b coordinatewise, so the group is the same one.
    for (double& b : down_eigs) b /= mn;
    return SolTypeModel(HeintzeModel(std::move(up_eigs)), HeintzeModel(std::move(down_eigs)),
                        lambda * mn);
}

bool SolTypeModel::unimodular(double tol) const {
    double tr_up = 0.0, tr_down = 0.0;
    for (double a : up.eigenvalues) tr_up += a;
    for (double b : down.eigenvalues) tr_down += b;
    return std::abs(tr_up - lambda * tr_down) <= tol * std::max(1.0, std::abs(tr_up));
}

Derivation derivation(const HeintzeModel& m) {
    Derivation d;
    d.rates = m.eigenvalues;
    d.k1 = m.dim();
    d.k2 = 0;
    return d;
}

Derivation derivation(const SolTypeModel& m) {
    Derivation d;
    d.rates = m.up.eigenvalues;
    for (double b : m.down.eigenvalues) d.rates.push_back(-m.lambda * b);
    d.k1 = m.up.dim();
    d.k2 = m.down.dim();
    return d;
}

Vec GroupPoint::n_all() const {
    Vec n(n1.size() + n2.size());
    if (n1.size() > 0) n.head(n1.size()) = n1;
    if (n2.size() > 0) n.tail(n2.size()) = n2;
    return n;
}

double height(const GroupPoint& p) { return p.height; }

GroupPoint identity_point(const Derivation& d) {
    return GroupPoint(Vec::Zero(d.k1), Vec::Zero(d.k2), 0.0);
}

GroupPoint make_point(const Derivation& d, const Vec& n_all, double t) {
    if (n_all.size() != d.n_dim()) throw std::invalid_argument("coordinate count mismatch");
    return GroupPoint(n_all.head(d.k1), n_all.tail(d.k2), t);
}

GroupPoint group_multiply(const Derivation& d, const GroupPoint& p, const GroupPoint& q) {
    check_dims(d, p);
    check_dims(d, q);
    Vec n = p.n_all();
    Vec qn = q.n_all();
    for (int l = 0; l < d.n_dim(); ++l) n[l] += std::exp(d.rates[l] * p.height) * qn[l];
    return make_point(d, n, p.height + q.height);
}

GroupPoint group_inverse(const Derivation& d, const GroupPoint& p) {
    check_dims(d, p);
    Vec n = p.n_all();
    for (int l = 0; l < d.n_dim(); ++l) n[l] = -std::exp(-d.rates[l] * p.height) * n[l];
    return make_point(d, n, -p.height);
}

FrameMetric::FrameMetric(Mat q) : Q(std::move(q)) {
    if (Q.rows() != Q.cols() || Q.rows() < 2)
        throw std::invalid_argument("frame metric must be square of dimension >= 2");
    double scale = Q.cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || !Q.allFinite())
        throw std::invalid_argument("frame metric entries must be finite");
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("frame metric must be symmetric");
    Eigen::LLT<Mat> llt(Q);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("frame metric must be positive definite");
}

bool FrameMetric::is_diagonal(double tol) const {
    for (int i = 0; i < Q.rows(); ++i)
        for (int j = 0; j < Q.cols(); ++j)
            if (i != j && std::abs(Q(i, j)) > tol) return false;
    return true;
}

Mat metric_tensor_at_height(const Derivation& d, const FrameMetric& Q, double t) {
    int n = d.dim();
    if (Q.dim() != n) throw std::invalid_argument("metric dimension does not match the model");
    Vec j(n);
    for (int l = 0; l < d.n_dim(); ++l) j[l] = std::exp(-d.rates[l] * t);
    j[n - 1] = 1.0;
    return j.asDiagonal() * Q.Q * j.asDiagonal();
}

Mat metric_tensor_at(const Derivation& d, const FrameMetric& Q, const GroupPoint& p) {
    check_dims(d, p);
    return metric_tensor_at_height(d, Q, p.height);
}

Vec perpendicular_section(const Derivation& d, const FrameMetric& Q) {
    int n = d.dim();
    if (Q.dim() != n) throw std::invalid_argument("metric dimension does not match the model");
    int k = n - 1;
    Vec v = Vec::Zero(n);
    v[k] = 1.0;
    if (k > 0) {
        Mat qnn = Q.Q.topLeftCorner(k, k);
        Vec qnt = Q.Q.topRightCorner(k, 1);
        v.head(k) = qnn.ldlt().solve(-qnt);
    }
    return v;
}

FrameMetric normalize_metric(const Derivation& d, const FrameMetric& Q) {
    Vec v = perpendicular_section(d, Q);
    double speed2 = v.dot(Q.Q * v);
    return FrameMetric(Q.Q / speed2);
}

GroupPoint one_param_subgroup(const Derivation& d, const Vec& v, double tau) {
    if (v.size() != d.dim()) throw std::invalid_argument("vector dimension does not match the model");
    double vt = v[d.dim() - 1];
    if (vt == 0.0) throw std::invalid_argument("one-parameter subgroup needs a nonzero dt component");
    Vec n(d.n_dim());
    for (int l = 0; l < d.n_dim(); ++l) {
        // integral of e^{r u} v_l du over [0, tau v_t], i.e. (e^{r tau v_t} - 1) / r,
        // scaled by v_l; expm1 keeps small-argument accuracy.
        double r = d.rates[l];
        n[l] = v[l] * std::expm1(r * tau * vt) / (r * vt);
    }
    return make_point(d, n, tau * vt);
}

}  // namespace solvgeo
