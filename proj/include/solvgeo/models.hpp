#pragma once

// Model groups: abelian-nilradical Heintze groups N x| R and Sol-type groups
// (N1 x N2) x| R with a diagonal derivation, together with left-invariant
// metrics given by a constant matrix in the left-invariant frame.
//
// Conventions used throughout the library:
//   * A point is (n, t) with n the nilradical coordinates and t the height.
//   * Group law:  (n, t) * (n', t') = (n + exp(t D) n', t + t').
//   * The derivation D acts diagonally with rate r_l per coordinate:
//     r_l = a_l > 0 on expanding ("up") coordinates and r_l = -lambda b_l < 0
//     on contracting ("down") coordinates.
//   * The left-invariant frame at height t is (e^{r_l t} d/dn_l, d/dt); a
//     FrameMetric is the Gram matrix of the metric in that frame, so the
//     coordinate metric tensor at height t is J(t)^T Q J(t) with
//     J(t) = diag(e^{-r_l t}, 1).
//   * Lie algebra vectors are written in the same frame (n-part, dt-part).

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <vector>

namespace solvgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct HeintzeModel {
    std::vector<double> eigenvalues;  // a_1..a_k, all > 0, min normalized to 1

    explicit HeintzeModel(std::vector<double> eigs);
    int dim() const { return static_cast<int>(eigenvalues.size()); }
};

struct SolTypeModel {
    HeintzeModel up;    // D1 eigenvalues a_i
    HeintzeModel down;  // D2 eigenvalues b_j
    double lambda;      // contraction rate multiplier

    SolTypeModel(HeintzeModel up_, HeintzeModel down_, double lambda_);

    // Builds a model from raw eigenvalue lists. The down list may arrive
    // unnormalized (min b != 1); the surplus scale is moved into lambda,
    // which leaves the derivation D = D1 (+) (-lambda D2) unchanged.
    static SolTypeModel make(std::vector<double> up_eigs,
                             std::vector<double> down_eigs, double lambda);

    bool unimodular(double tol = 1e-12) const;
};

// Uniform view of either model kind: the full list of diagonal derivation
// rates (positive = expanding, negative = contracting) plus the split point.
struct Derivation {
    std::vector<double> rates;  // size k1 + k2
    int k1 = 0;                 // number of up coordinates
    int k2 = 0;                 // number of down coordinates

    int n_dim() const { return k1 + k2; }
    int dim() const { return k1 + k2 + 1; }  // + height
};

Derivation derivation(const HeintzeModel& m);
Derivation derivation(const SolTypeModel& m);

struct GroupPoint {
    Vec n1;         // up coordinates (size k1)
    Vec n2;         // down coordinates (size k2; empty for Heintze models)
    double height = 0.0;

    GroupPoint() = default;
    GroupPoint(Vec n1_, Vec n2_, double t) : n1(std::move(n1_)), n2(std::move(n2_)), height(t) {}

    // Flattened nilradical coordinates in derivation order.
    Vec n_all() const;
};

double height(const GroupPoint& p);

GroupPoint identity_point(const Derivation& d);
GroupPoint group_multiply(const Derivation& d, const GroupPoint& p, const GroupPoint& q);
GroupPoint group_inverse(const Derivation& d, const GroupPoint& p);

template <class Model>
GroupPoint group_multiply(const Model& m, const GroupPoint& p, const GroupPoint& q) {
    return group_multiply(derivation(m), p, q);
}
template <class Model>
GroupPoint group_inverse(const Model& m, const GroupPoint& p) {
    return group_inverse(derivation(m), p);
}

// Positive-definite metric in the left-invariant frame.
struct FrameMetric {
    Mat Q;

    explicit FrameMetric(Mat q);
    static FrameMetric identity(int dim) { return FrameMetric(Mat::Identity(dim, dim)); }
    int dim() const { return static_cast<int>(Q.rows()); }
    bool is_diagonal(double tol = 0.0) const;
};

// Coordinate metric tensor J(t)^T Q J(t); depends on the point only
// through its height.
Mat metric_tensor_at(const Derivation& d, const FrameMetric& Q, const GroupPoint& p);
Mat metric_tensor_at_height(const Derivation& d, const FrameMetric& Q, double t);

// The Lie algebra direction (v_n, 1) that is Q-orthogonal to the nilradical
// frame directions. Its one-parameter subgroup is the geodesic "vertical"
// section; h composed with it is the identity.
Vec perpendicular_section(const Derivation& d, const FrameMetric& Q);

// Rescales Q so the perpendicular section has unit speed.
FrameMetric normalize_metric(const Derivation& d, const FrameMetric& Q);

// c(tau) = exp(tau * v) for a Lie algebra vector v with nonzero dt-part.
GroupPoint one_param_subgroup(const Derivation& d, const Vec& v, double tau);

template <class Model>
Mat metric_tensor_at(const Model& m, const FrameMetric& Q, const GroupPoint& p) {
    return metric_tensor_at(derivation(m), Q, p);
}
template <class Model>
Vec perpendicular_section(const Model& m, const FrameMetric& Q) {
    return perpendicular_section(derivation(m), Q);
}
template <class Model>
FrameMetric normalize_metric(const Model& m, const FrameMetric& Q) {
    return normalize_metric(derivation(m), Q);
}
template <class Model>
GroupPoint one_param_subgroup(const Model& m, const Vec& v, double tau) {
    return one_param_subgroup(derivation(m), v, tau);
}

// Splits a flat nilradical vector back into (n1, n2) for the given derivation.
GroupPoint make_point(const Derivation& d, const Vec& n_all, double t);

}  // namespace solvgeo
