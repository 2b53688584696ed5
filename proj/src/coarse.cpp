#include "solvgeo/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace solvgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Root of sum_i w_i e^{-2 a_i t} dx_i^2 = 1 (monotone decreasing in t).
// Bracket around the single-eigenvalue estimate, then bisect to 1e-12.
double crit_root_up(const std::vector<double>& a, const Vec& dx, const Vec* w) {
    double amin = *std::min_element(a.begin(), a.end());
    double c_total = 0.0;
    for (int i = 0; i < dx.size(); ++i) {
        double wi = w ? (*w)[i] : 1.0;
        c_total += wi * dx[i] * dx[i];
    }
    auto f = [&](double t) {
        double s = 0.0;
        for (int i = 0; i < dx.size(); ++i) {
            double wi = w ? (*w)[i] : 1.0;
            s += wi * dx[i] * dx[i] * std::exp(-2.0 * a[i] * t);
        }
        return s;
    };
    double t0 = std::log(c_total) / (2.0 * amin);
    double half = 60.0 / amin;
    double lo = t0 - half, hi = t0 + half;
    for (int guard = 0; guard < 8 && !(f(lo) >= 1.0 && f(hi) <= 1.0); ++guard) {
        half *= 2.0;
        lo = t0 - half;
        hi = t0 + half;
    }
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (f(mid) >= 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double hyperbolic_distance(double a, double x, double t, double y, double s) {
    if (!(a > 0.0)) throw std::invalid_argument("eigenvalue must be positive");
    if (x == y) return std::abs(t - s);  // vertical geodesic, exact
    double delta = std::abs(t - s);  // the height term depends only on |t-s|, keep it symmetric
    // u = cosh(a d) - 1, assembled from overflow-safe pieces:
    // a^2 dx^2 e^{-a(t+s)} / 2 + expm1(a delta)^2 e^{-a delta} / 2.
    double dx = x - y;
    double em = std::expm1(a * delta);
    double u = 0.5 * a * a * dx * dx * std::exp(-a * (t + s)) + 0.5 * em * em * std::exp(-a * delta);
    return std::log1p(u + std::sqrt(u * (u + 2.0))) / a;
}

double critical_height_up(const HeintzeModel& up, const Vec& x, const Vec& y) {
    if (x.size() != up.dim() || y.size() != up.dim())
        throw std::invalid_argument("coordinate dimension mismatch");
    Vec dx = x - y;
    if (dx.cwiseAbs().maxCoeff() == 0.0) return -kInf;
    return crit_root_up(up.eigenvalues, dx, nullptr);
}

double critical_height_down(const HeintzeModel& down, double lambda, const Vec& x, const Vec& y) {
    if (x.size() != down.dim() || y.size() != down.dim())
        throw std::invalid_argument("coordinate dimension mismatch");
    Vec dy = x - y;
    if (dy.cwiseAbs().maxCoeff() == 0.0) return kInf;
    // Mirror through t -> -t: rates lambda*b_j, decreasing in the mirrored
    // variable, so reuse the up-factor solver.
    std::vector<double> rates;
    for (double b : down.eigenvalues) rates.push_back(lambda * b);
    return -crit_root_up(rates, dy, nullptr);
}

double horocyclic_up(const HeintzeModel& up, double t, const Vec& x, const Vec& y) {
    double s = 0.0;
    for (int i = 0; i < up.dim(); ++i) {
        double d = x[i] - y[i];
        s += std::exp(-2.0 * up.eigenvalues[i] * t) * d * d;
    }
    return std::sqrt(s);
}

double horocyclic_down(const HeintzeModel& down, double lambda, double t, const Vec& x,
                       const Vec& y) {
    double s = 0.0;
    for (int j = 0; j < down.dim(); ++j) {
        double d = x[j] - y[j];
        s += std::exp(2.0 * lambda * down.eigenvalues[j] * t) * d * d;
    }
    return std::sqrt(s);
}

double rho_tilde_1(const HeintzeModel& up, const Vec& x, double t, const Vec& y, double s) {
    double tstar = critical_height_up(up, x, y);
    if (tstar <= std::max(t, s)) return std::abs(t - s) + 1.0;
    return (tstar - t) + (tstar - s) + 1.0;
}

double rho_tilde_2(const HeintzeModel& down, double lambda, const Vec& x, double t, const Vec& y,
                   double s) {
    double tstar = critical_height_down(down, lambda, x, y);
    if (tstar >= std::min(t, s)) return std::abs(t - s) + 1.0;
    return (t - tstar) + (s - tstar) + 1.0;
}

double rho_tilde(const SolTypeModel& m, const GroupPoint& p, const GroupPoint& q) {
    double t = p.height, s = q.height;
    double t1 = critical_height_up(m.up, p.n1, q.n1);
    double t2 = critical_height_down(m.down, m.lambda, p.n2, q.n2);
    double mn = std::min(t, s), mx = std::max(t, s);
    if (t2 >= mn && t1 <= mx) return std::abs(t - s) + 2.0;
    if (t2 >= mn) return 2.0 * t1 - (s + t) + 2.0;
    if (t1 <= mx) return (s + t) - 2.0 * t2 + 2.0;
    return 2.0 * t1 - 2.0 * t2 - std::abs(t - s) + 2.0;
}

FactorEvaluators FactorEvaluators::closed_form(const SolTypeModel& m) {
    if (m.up.dim() != 1 || m.down.dim() != 1)
        throw std::invalid_argument("closed-form factor distances need one-dimensional factors");
    double a = m.up.eigenvalues[0];
    double c = m.lambda * m.down.eigenvalues[0];
    FactorEvaluators ev;
    ev.d1 = [a](const Vec& x, double t, const Vec& y, double s) {
        return hyperbolic_distance(a, x[0], t, y[0], s);
    };
    // The down factor with heights negated is again a 2D Heintze group,
    // with eigenvalue lambda * b.
    ev.d2 = [c](const Vec& x, double t, const Vec& y, double s) {
        return hyperbolic_distance(c, x[0], -t, y[0], -s);
    };
    return ev;
}

double rho(const SolTypeModel& m, const FactorEvaluators& ev, const GroupPoint& p,
           const GroupPoint& q) {
    return ev.d1(p.n1, p.height, q.n1, q.height) + ev.d2(p.n2, p.height, q.n2, q.height) -
           std::abs(p.height - q.height);
}

namespace {

CoarsePath coarse_path_impl(const SolTypeModel& m, const GroupPoint& p, const GroupPoint& q,
                            const FrameMetric* Q) {
    // Build from the lower endpoint so the down-factor crossing happens on
    // the way down and the up-factor crossing on the way up; reversing keeps
    // the length exactly symmetric.
    if (p.height > q.height) {
        CoarsePath rev = coarse_path_impl(m, q, p, Q);
        std::reverse(rev.waypoints.begin(), rev.waypoints.end());
        return rev;
    }

    Vec w_up, w_down;
    double w_vert = 1.0;
    if (Q) {
        if (!Q->is_diagonal(1e-14))
            throw std::invalid_argument("coarse_path needs a diagonal frame metric");
        int k1 = m.up.dim(), k2 = m.down.dim();
        w_up = Q->Q.diagonal().head(k1);
        w_down = Q->Q.diagonal().segment(k1, k2);
        w_vert = std::sqrt(Q->Q(k1 + k2, k1 + k2));
    }

    auto cross_up = [&](double t) {
        double s = 0.0;
        for (int i = 0; i < m.up.dim(); ++i) {
            double d = p.n1[i] - q.n1[i];
            double wi = Q ? w_up[i] : 1.0;
            s += wi * std::exp(-2.0 * m.up.eigenvalues[i] * t) * d * d;
        }
        return std::sqrt(s);
    };
    auto cross_down = [&](double t) {
        double s = 0.0;
        for (int j = 0; j < m.down.dim(); ++j) {
            double d = p.n2[j] - q.n2[j];
            double wj = Q ? w_down[j] : 1.0;
            s += wj * std::exp(2.0 * m.lambda * m.down.eigenvalues[j] * t) * d * d;
        }
        return std::sqrt(s);
    };

    // Crossing heights: the critical heights (where the crossing costs 1),
    // unless the endpoints already bracket them.
    double t1, t2;
    if (!Q) {
        t1 = critical_height_up(m.up, p.n1, q.n1);
        t2 = critical_height_down(m.down, m.lambda, p.n2, q.n2);
    } else {
        Vec dx = p.n1 - q.n1, dy = p.n2 - q.n2;
        t1 = dx.cwiseAbs().maxCoeff() == 0.0 ? -kInf
                                             : crit_root_up(m.up.eigenvalues, dx, &w_up);
        std::vector<double> rates;
        for (double b : m.down.eigenvalues) rates.push_back(m.lambda * b);
        t2 = dy.cwiseAbs().maxCoeff() == 0.0 ? kInf : -crit_root_up(rates, dy, &w_down);
    }

    double t = p.height, s = q.height;
    double t_lo = std::min({t, s, t2});
    double t_hi = std::max({t, s, t1});

    CoarsePath path;
    path.waypoints = {
        p,
        GroupPoint(p.n1, p.n2, t_lo),
        GroupPoint(p.n1, q.n2, t_lo),
        GroupPoint(p.n1, q.n2, t_hi),
        GroupPoint(q.n1, q.n2, t_hi),
        q,
    };
    path.length = w_vert * ((t - t_lo) + (t_hi - t_lo) + (t_hi - s)) + cross_down(t_lo) +
                  cross_up(t_hi);
    return path;
}

}  // namespace

CoarsePath coarse_path(const SolTypeModel& m, const GroupPoint& p, const GroupPoint& q) {
    return coarse_path_impl(m, p, q, nullptr);
}

CoarsePath coarse_path(const SolTypeModel& m, const GroupPoint& p, const GroupPoint& q,
                       const FrameMetric& Q) {
    return coarse_path_impl(m, p, q, &Q);
}

GroupPoint coset_point_at_height(const Derivation& d, const GroupPoint& base, const Vec& v,
                                 double t) {
    double tau = t - base.height;
    Vec n = base.n_all();
    for (int l = 0; l < d.n_dim(); ++l) {
        double r = d.rates[l];
        n[l] += std::exp(r * base.height) * v[l] * std::expm1(r * tau) / r;
    }
    return make_point(d, n, t);
}

GroupPoint shadow_coset(const Derivation& d, const FrameMetric& Q1, const FrameMetric& Q2,
                        const GroupPoint& base) {
    Vec v1 = perpendicular_section(d, Q1);
    Vec v2 = perpendicular_section(d, Q2);
    // Nilradical limit point of base * c1, factor by factor (tau -> -inf on
    // expanding coordinates, tau -> +inf on contracting ones), then the
    // height-0 base point of the c2-coset with the same limits.
    Vec n(d.n_dim());
    for (int l = 0; l < d.n_dim(); ++l) {
        double r = d.rates[l];
        double limit = base.n_all()[l] - std::exp(r * base.height) * v1[l] / r;
        n[l] = limit + v2[l] / r;
    }
    return make_point(d, n, 0.0);
}

}  // namespace solvgeo
