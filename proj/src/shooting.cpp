#include "solvgeo/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

namespace solvgeo {

namespace {

using State = std::vector<double>;  // (z, u, arclength) with u in frame components

// Geodesic flow written in the left-invariant frame: with momentum m = Q u
// the velocity obeys the Euler-Arnold equations
//   m_l' = r_l u_t m_l,   m_t' = -sum_l r_l u_l m_l,
// whose coefficients do not depend on the position. Coordinate momenta pick
// up factors e^{2|r t|} at contracted heights and wreck the Newton
// conditioning; the frame components stay of order one along the geodesic.
struct GeodesicOde {
    const Derivation* d;
    Mat qmat;
    Mat qinv;
    int dim;

    GeodesicOde(const Derivation& d_, const FrameMetric& Q_)
        : d(&d_), qmat(Q_.Q), qinv(Q_.Q.inverse()), dim(d_.dim()) {}

    void operator()(const State& y, State& dydt, double) const {
        Vec u(dim);
        for (int l = 0; l < dim; ++l) u[l] = y[dim + l];
        double t = y[dim - 1];
        Vec mom = qmat * u;
        Vec mdot = Vec::Zero(dim);
        double ut = u[dim - 1];
        for (int l = 0; l < dim - 1; ++l) {
            double r = d->rates[l];
            mdot[l] = r * ut * mom[l];
            mdot[dim - 1] -= r * u[l] * mom[l];
        }
        Vec udot = qinv * mdot;
        for (int l = 0; l < dim - 1; ++l)
            dydt[l] = std::exp(std::min(700.0, d->rates[l] * t)) * u[l];
        dydt[dim - 1] = ut;
        for (int l = 0; l < dim; ++l) dydt[dim + l] = udot[l];
        dydt[2 * dim] = std::sqrt(std::max(0.0, u.dot(mom)));
    }
};

// Flow of one shooting segment; returns end position/velocity and the
// accumulated length.
State flow_segment(const GeodesicOde& ode, const Vec& z, const Vec& u, double du) {
    namespace odeint = boost::numeric::odeint;
    State y(2 * ode.dim + 1, 0.0);
    for (int l = 0; l < ode.dim; ++l) {
        y[l] = z[l];
        y[ode.dim + l] = u[l];
    }
    auto stepper = odeint::make_controlled(1e-9, 1e-9, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_adaptive(stepper, ode, y, 0.0, du, du / 16.0);
    return y;
}

Vec full_coords(const GroupPoint& p) {
    Vec z(p.n1.size() + p.n2.size() + 1);
    z << p.n1, p.n2, p.height;
    return z;
}

double segment_length_mid(const Derivation& d, const FrameMetric& Q, const Vec& za, const Vec& zb) {
    Vec delta = zb - za;
    if (delta.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    Mat g = metric_tensor_at_height(d, Q, 0.5 * (za[za.size() - 1] + zb[zb.size() - 1]));
    return std::sqrt(delta.dot(g * delta));
}

// Piecewise-linear sample of the seed polyline at the given length fraction.
Vec sample_polyline(const std::vector<Vec>& pts, const std::vector<double>& cum, double frac) {
    double target = frac * cum.back();
    auto it = std::lower_bound(cum.begin(), cum.end(), target);
    std::size_t j = std::min(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
    if (j == 0) return pts.front();
    double seg = cum[j] - cum[j - 1];
    double alpha = seg > 0.0 ? (target - cum[j - 1]) / seg : 0.0;
    return pts[j - 1] + alpha * (pts[j] - pts[j - 1]);
}

}  // namespace

DistanceEstimate shooting_refine(const Derivation& d, const FrameMetric& Q, const GroupPoint& p,
                                 const GroupPoint& q, const DistanceEstimate& initial) {
    int dim = d.dim();
    if (Q.dim() != dim) throw std::invalid_argument("metric dimension mismatch");
    Vec zp = full_coords(p), zq = full_coords(q);

    DistanceEstimate out = initial;
    if ((zq - zp).cwiseAbs().maxCoeff() == 0.0) {
        out.value = 0.0;
        out.refined = true;
        return out;
    }

    // Seed polyline: the lattice path when present, else the straight chord.
    std::vector<Vec> pts;
    if (initial.path.size() >= 2) {
        for (const GroupPoint& g : initial.path) pts.push_back(full_coords(g));
    } else {
        pts = {zp, zq};
    }
    std::vector<double> cum{0.0};
    for (std::size_t i = 1; i < pts.size(); ++i)
        cum.push_back(cum.back() + segment_length_mid(d, Q, pts[i - 1], pts[i]));
    if (cum.back() <= 0.0) {
        out.warning = true;
        return out;
    }

    int m = std::clamp(static_cast<int>(std::ceil(cum.back() / 1.5)), 4, 12);
    double du = 1.0 / m;
    GeodesicOde ode(d, Q);

    // Unknowns X = [u_0 | z_1 u_1 | ... | z_{m-1} u_{m-1}]; endpoints fixed.
    int n_unknowns = (2 * m - 1) * dim;
    auto col_z = [&](int j) { return dim + (j - 1) * 2 * dim; };
    auto col_w = [&](int j) { return j == 0 ? 0 : col_z(j) + dim; };

    Vec X(n_unknowns);
    std::vector<Vec> samples;
    for (int j = 0; j <= m; ++j) samples.push_back(sample_polyline(pts, cum, double(j) / m));
    samples.front() = zp;
    samples.back() = zq;
    for (int j = 0; j < m; ++j) {
        if (j > 0) X.segment(col_z(j), dim) = samples[j];
        Vec v = (samples[j + 1] - samples[j]) * double(m);
        Vec u(dim);
        for (int l = 0; l < dim - 1; ++l)
            u[l] = std::exp(std::min(700.0, -d.rates[l] * samples[j][dim - 1])) * v[l];
        u[dim - 1] = v[dim - 1];
        X.segment(col_w(j), dim) = u;
    }

    auto seg_inputs = [&](const Vec& x, int j, Vec& z, Vec& w) {
        if (j == 0)
            z = zp;
        else
            z = x.segment(col_z(j), dim);
        w = x.segment(col_w(j), dim);
    };

    auto residual = [&](const Vec& x, std::vector<State>* ends) {
        Vec f((2 * m - 1) * dim);
        for (int j = 0; j < m; ++j) {
            Vec z, w;
            seg_inputs(x, j, z, w);
            State end = flow_segment(ode, z, w, du);
            if (ends) (*ends)[j] = end;
            if (j < m - 1) {
                for (int l = 0; l < dim; ++l) {
                    f[j * 2 * dim + l] = end[l] - x[col_z(j + 1) + l];
                    f[j * 2 * dim + dim + l] = end[dim + l] - x[col_w(j + 1) + l];
                }
            } else {
                for (int l = 0; l < dim; ++l) f[(m - 1) * 2 * dim + l] = end[l] - zq[l];
            }
        }
        return f;
    };

    double scale = std::max({1.0, zp.cwiseAbs().maxCoeff(), zq.cwiseAbs().maxCoeff()});
    double tol = 1e-9 * scale;
    std::vector<State> ends(m);
    Vec F = residual(X, &ends);
    bool converged = F.cwiseAbs().maxCoeff() <= tol;

    for (int iter = 0; iter < 40 && !converged; ++iter) {
        // Block finite-difference Jacobian: each segment's end state against
        // its own inputs, plus the identity couplings to the next node.
        Mat J = Mat::Zero((2 * m - 1) * dim, n_unknowns);
        for (int j = 0; j < m; ++j) {
            int rows = j < m - 1 ? 2 * dim : dim;
            int row0 = j * 2 * dim;
            Vec z0, w0;
            seg_inputs(X, j, z0, w0);
            int n_in = j == 0 ? dim : 2 * dim;  // w only for the first segment
            for (int c = 0; c < n_in; ++c) {
                Vec z = z0, w = w0;
                bool is_w = j == 0 || c >= dim;
                int l = is_w ? (j == 0 ? c : c - dim) : c;
                double base = is_w ? w[l] : z[l];
                double eps = 1e-7 * std::max(1.0, std::abs(base));
                (is_w ? w[l] : z[l]) += eps;
                State pe = flow_segment(ode, z, w, du);
                int col = j == 0 ? c : (c < dim ? col_z(j) + c : col_w(j) + c - dim);
                for (int r = 0; r < rows; ++r) J(row0 + r, col) = (pe[r] - ends[j][r]) / eps;
            }
            if (j < m - 1) {
                for (int l = 0; l < dim; ++l) {
                    J(row0 + l, col_z(j + 1) + l) = -1.0;
                    J(row0 + dim + l, col_w(j + 1) + l) = -1.0;
                }
            }
        }
        Vec step = J.colPivHouseholderQr().solve(-F);
        if (!step.allFinite()) break;

        double f0 = F.cwiseAbs().maxCoeff();
        bool accepted = false;
        for (double damp = 1.0; damp >= 1.0 / 64.0; damp *= 0.5) {
            Vec Xn = X + damp * step;
            std::vector<State> ends_n(m);
            Vec Fn = residual(Xn, &ends_n);
            if (Fn.allFinite() && Fn.cwiseAbs().maxCoeff() < f0) {
                X = Xn;
                F = Fn;
                ends = ends_n;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        converged = F.cwiseAbs().maxCoeff() <= tol;
    }

    if (!converged) {
        out.warning = true;
        return out;
    }

    double length = 0.0;
    for (int j = 0; j < m; ++j) length += ends[j][2 * dim];
    out.value = std::min(initial.value, length);
    out.refined = true;
    return out;
}

}  // namespace solvgeo
