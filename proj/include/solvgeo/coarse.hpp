#pragma once

// Coarse distance calculus on Sol-type models: closed-form hyperbolic
// distances for one-dimensional factors, critical heights, the coarse
// distances rho_tilde_1 / rho_tilde_2 / rho_tilde / rho, the explicit
// three-coset path whose length tracks rho_tilde within 2, and coset
// shadowing between two metrics.
//
// Critical heights of degenerate pairs (equal nilradical coordinates) are
// the sentinels -infinity (up factor) and +infinity (down factor); the
// sentinel forces the "crossing already free" case of the two-case formulas.

#include "solvgeo/models.hpp"

#include <functional>
#include <vector>

namespace solvgeo {

// Distance in the 2D Heintze group with eigenvalue a and Q = I, which is
// isometric to (1/a) * H^2 under (x, t) -> (a x, e^{a t}).
double hyperbolic_distance(double a, double x, double t, double y, double s);

// Unique t with sqrt(sum_i e^{-2 a_i t} (x_i - y_i)^2) = 1, or -infinity
// when x == y exactly.
double critical_height_up(const HeintzeModel& up, const Vec& x, const Vec& y);

// Mirror: unique t with sqrt(sum_j e^{2 lambda b_j t} (x_j - y_j)^2) = 1,
// or +infinity when x == y.
double critical_height_down(const HeintzeModel& down, double lambda, const Vec& x, const Vec& y);

// Horocyclic (horosphere path-metric) distances at a given height for the
// orthonormal frame metric.
double horocyclic_up(const HeintzeModel& up, double t, const Vec& x, const Vec& y);
double horocyclic_down(const HeintzeModel& down, double lambda, double t, const Vec& x,
                       const Vec& y);

// Coarse distance in one Heintze factor: |t-s|+1 when the critical height is
// at most max(t,s), else climb to the critical height from both endpoints.
double rho_tilde_1(const HeintzeModel& up, const Vec& x, double t, const Vec& y, double s);
double rho_tilde_2(const HeintzeModel& down, double lambda, const Vec& x, double t, const Vec& y,
                   double s);

// Four-case coarse distance on a Sol-type model; equals
// rho_tilde_1 + rho_tilde_2 - |h(p) - h(q)|.
double rho_tilde(const SolTypeModel& m, const GroupPoint& p, const GroupPoint& q);

// Distance evaluators for the two factor groups, used by rho. Arguments are
// (factor coordinates, height) pairs.
struct FactorEvaluators {
    std::function<double(const Vec&, double, const Vec&, double)> d1;
    std::function<double(const Vec&, double, const Vec&, double)> d2;

    // Closed forms; only available when both factors are one-dimensional.
    static FactorEvaluators closed_form(const SolTypeModel& m);
};

double rho(const SolTypeModel& m, const FactorEvaluators& ev, const GroupPoint& p,
           const GroupPoint& q);

struct CoarsePath {
    std::vector<GroupPoint> waypoints;  // p, p1, z1, z2, q2, q
    double length = 0.0;
};

// The three-coset path: drop to the lower crossing height, cross the down
// coordinates, climb to the upper crossing height, cross the up coordinates,
// then move to q. Built for the orthonormal frame metric; an explicitly
// diagonal normalized metric is accepted and reweights the crossings.
CoarsePath coarse_path(const SolTypeModel& m, const GroupPoint& p, const GroupPoint& q);
CoarsePath coarse_path(const SolTypeModel& m, const GroupPoint& p, const GroupPoint& q,
                       const FrameMetric& Q);

// Base point (at height 0) of the coset of Q2's perpendicular section that
// shadows base * c1, matching nilradical limit points factor by factor.
GroupPoint shadow_coset(const Derivation& d, const FrameMetric& Q1, const FrameMetric& Q2,
                        const GroupPoint& base);
template <class Model>
GroupPoint shadow_coset(const Model& m, const FrameMetric& Q1, const FrameMetric& Q2,
                        const GroupPoint& base) {
    return shadow_coset(derivation(m), Q1, Q2, base);
}

// Point of the coset through `base` with direction v (a perpendicular
// section, v_t = 1) at the requested height.
GroupPoint coset_point_at_height(const Derivation& d, const GroupPoint& base, const Vec& v,
                                 double t);

}  // namespace solvgeo
