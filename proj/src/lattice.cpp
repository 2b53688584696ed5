#include "solvgeo/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>

#include "solvgeo/coarse.hpp"

namespace solvgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kMaxNodes = 60'000'000;

// Monotone root of sum_l e^{sign 2 r_l t} c_l = 1 over the given axes;
// +-inf when the separation vanishes there.
double crossing_height(const std::vector<double>& rates, const Vec& delta, bool up) {
    std::vector<double> a;
    std::vector<double> c;
    for (int l = 0; l < delta.size(); ++l) {
        bool is_up = rates[l] > 0.0;
        if (is_up != up) continue;
        a.push_back(std::abs(rates[l]));
        c.push_back(delta[l] * delta[l]);
    }
    if (a.empty()) return up ? -kInf : kInf;
    double total = 0.0;
    for (double ci : c) total += ci;
    if (total == 0.0) return up ? -kInf : kInf;
    double amin = *std::min_element(a.begin(), a.end());
    // Solve sum c_i e^{-2 a_i u} = 1 in the mirrored variable u (= t for the
    // up block, -t for the down block).
    auto f = [&](double u) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += c[i] * std::exp(-2.0 * a[i] * u);
        return s;
    };
    double u0 = std::log(total) / (2.0 * amin);
    double half = 60.0 / amin;
    double lo = u0 - half, hi = u0 + half;
    for (int guard = 0; guard < 8 && !(f(lo) >= 1.0 && f(hi) <= 1.0); ++guard) {
        half *= 2.0;
        lo = u0 - half;
        hi = u0 + half;
    }
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (f(mid) >= 1.0 ? lo : hi) = mid;
    }
    double u = 0.5 * (lo + hi);
    return up ? u : -u;
}

struct Grid {
    const GridSpec& spec;
    int dim;
    std::vector<int> n_nodes;          // per axis
    std::vector<double> step;          // fitted per-axis spacing, at most the requested h
    std::vector<double> anchor;        // exact coordinate of the anchored node
    std::vector<int> anchor_idx;       // node coordinate = anchor + (idx - anchor_idx) * step
    std::vector<std::int64_t> stride;  // node id = sum idx[l] * stride[l]
    std::int64_t total = 1;

    // The grid is anchored at the query endpoints: on each axis the spacing
    // is shrunk so both endpoint coordinates are exact nodes whenever the
    // residual of nearest-node snapping would be metrically visible. A
    // coordinate residual of size eps at height t costs about eps * e^{-r t},
    // which dwarfs h at contracted heights, so plain snapping is not an
    // option there. Coordinates are produced relative to the anchor node for
    // the same reason: rebuilding the anchor as origin + idx * step rounds
    // at the last bit, and one ulp blows up to an O(e^{|t|}) stub cost.
    Grid(const GridSpec& g, const Derivation& d, const Vec& zp, const Vec& zq)
        : spec(g), dim(static_cast<int>(g.lo.size())) {
        if (g.h <= 0.0) throw std::invalid_argument("grid step must be positive");
        n_nodes.resize(dim);
        step.resize(dim);
        anchor.resize(dim);
        anchor_idx.resize(dim);
        stride.resize(dim);
        int taxis = dim - 1;
        for (int l = 0; l < dim; ++l) {
            if (g.hi[l] - g.lo[l] < 0.0) throw std::invalid_argument("grid box is empty");
            for (const Vec* z : {&zp, &zq}) {
                if ((*z)[l] < g.lo[l] - 1e-9 || (*z)[l] > g.hi[l] + 1e-9)
                    throw std::invalid_argument("query point outside the grid box");
            }
            double r = l == taxis ? 0.0 : d.rates[l];
            double fp = std::exp(std::min(700.0, -r * zp[taxis]));
            double fq = std::exp(std::min(700.0, -r * zq[taxis]));
            double a = zp[l], b = zq[l];
            // Anchor at the endpoint whose residual would cost more; ties go
            // to the smaller coordinate so the node set ignores argument order.
            if (fq > fp || (fq == fp && b < a)) std::swap(a, b);
            double delta = std::abs(b - a);
            // Effective frame length of the gap: its coordinate size priced
            // at the height where a path would actually cross it, which is
            // the axis critical height clamped to the box and the endpoint
            // heights. This decides both whether the gap deserves exact
            // endpoint alignment at all and how many steps resolve it:
            // coordinate-scale h on an axis that is exponentially wide in
            // coordinates (but cheap at its crossing height) would blow the
            // node budget for nothing, while a sub-h debris gap next to a
            // contracted endpoint must not shrink the step to its own size.
            double eff = delta * std::max(fp, fq);
            if (r != 0.0 && delta > 0.0) {
                double t_ax = std::log(0.5 * std::abs(r) * delta) / r;
                double t_use =
                    r > 0.0 ? std::clamp(t_ax, std::max(zp[taxis], zq[taxis]), g.hi[taxis])
                            : std::clamp(t_ax, g.lo[taxis], std::min(zp[taxis], zq[taxis]));
                eff = delta * std::exp(std::min(700.0, -r * t_use));
            }
            double st = g.h;
            if (eff > 0.25 * g.h) {
                auto cap = std::max<std::int64_t>(
                    static_cast<std::int64_t>(std::ceil(delta / g.h - 1e-9)), 1);
                auto k = static_cast<std::int64_t>(
                    std::ceil(std::min(eff, delta) / g.h - 1e-9));
                st = delta / static_cast<double>(std::clamp<std::int64_t>(k, 1, cap));
            }
            auto below = static_cast<std::int64_t>(std::ceil((a - g.lo[l]) / st - 1e-9));
            below = std::max<std::int64_t>(below, 0);
            auto above = static_cast<std::int64_t>(std::floor((g.hi[l] - a) / st + 1e-9));
            above = std::max<std::int64_t>(above, 0);
            std::int64_t n = below + above + 1;
            if (n > kMaxNodes)
                throw std::runtime_error("grid exceeds the node budget; coarsen h or the box");
            step[l] = st;
            anchor[l] = a;
            anchor_idx[l] = static_cast<int>(below);
            n_nodes[l] = static_cast<int>(n);
        }
        for (int l = dim - 1; l >= 0; --l) {
            stride[l] = total;
            total *= n_nodes[l];
            if (total > kMaxNodes)
                throw std::runtime_error("grid exceeds the node budget; coarsen h or the box");
        }
    }

    double coord(int axis, int idx) const {
        return anchor[axis] + (idx - anchor_idx[axis]) * step[axis];
    }

    std::vector<int> snap(const Vec& z) const {
        std::vector<int> idx(dim);
        for (int l = 0; l < dim; ++l) {
            if (z[l] < spec.lo[l] - 1e-9 || z[l] > spec.hi[l] + 1e-9)
                throw std::invalid_argument("query point outside the grid box");
            auto rel = static_cast<int>(std::lround((z[l] - anchor[l]) / step[l]));
            idx[l] = std::clamp(anchor_idx[l] + rel, 0, n_nodes[l] - 1);
        }
        return idx;
    }

    std::int64_t id(const std::vector<int>& idx) const {
        std::int64_t u = 0;
        for (int l = 0; l < dim; ++l) u += idx[l] * stride[l];
        return u;
    }

    Vec point(std::int64_t u) const {
        Vec z(dim);
        for (int l = 0; l < dim; ++l) {
            z[l] = coord(l, static_cast<int>(u / stride[l]) % n_nodes[l]);
        }
        return z;
    }
};

Vec full_coords(const GroupPoint& p) {
    Vec z(p.n1.size() + p.n2.size() + 1);
    z << p.n1, p.n2, p.height;
    return z;
}

GroupPoint point_from_coords(const Derivation& d, const Vec& z) {
    return make_point(d, z.head(z.size() - 1), z[z.size() - 1]);
}

// Straight-segment length, endpoint-averaged like the edge weights so the
// snap stubs keep the upper-bound semantics.
double segment_length(const Derivation& d, const FrameMetric& Q, const Vec& za, const Vec& zb) {
    Vec delta = zb - za;
    if (delta.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    Mat ga = metric_tensor_at_height(d, Q, za[za.size() - 1]);
    Mat gb = metric_tensor_at_height(d, Q, zb[zb.size() - 1]);
    return 0.5 * (std::sqrt(delta.dot(ga * delta)) + std::sqrt(delta.dot(gb * delta)));
}

DistanceEstimate run_dijkstra(const Derivation& d, const FrameMetric& Q, const GroupPoint& p,
                              const GroupPoint& q, const GridSpec& grid,
                              const RegionPredicate* region, bool want_path) {
    if (Q.dim() != d.dim()) throw std::invalid_argument("metric dimension mismatch");
    if (static_cast<int>(grid.lo.size()) != d.dim())
        throw std::invalid_argument("grid dimension mismatch");
    Vec zp = full_coords(p), zq = full_coords(q);
    Grid g(grid, d, zp, zq);
    int taxis = g.dim - 1;

    std::vector<int> ip = g.snap(zp), iq = g.snap(zq);
    std::int64_t source = g.id(ip), target = g.id(iq);

    // Edge weight: trapezoid average of the offset's metric length at the two
    // endpoint heights. Endpoint averaging over-estimates convex integrands,
    // so subdividing an edge never gets more expensive and refinement is
    // monotone. The speeds depend only on the height level, so precompute
    // one per (level, offset) and flatten the stencil for the relaxation loop.
    int n_off = static_cast<int>(grid.stencil.size());
    if (n_off == 0) throw std::invalid_argument("empty stencil");
    std::vector<int> sten(static_cast<std::size_t>(n_off) * g.dim);
    for (int o = 0; o < n_off; ++o)
        for (int l = 0; l < g.dim; ++l) sten[static_cast<std::size_t>(o) * g.dim + l] =
            grid.stencil[o][l];
    int n_lev = g.n_nodes[taxis];
    std::vector<double> wtab(static_cast<std::size_t>(n_lev) * n_off);
    for (int k = 0; k < n_lev; ++k) {
        Mat gt = metric_tensor_at_height(d, Q, g.coord(taxis, k));
        for (int o = 0; o < n_off; ++o) {
            Vec off(g.dim);
            for (int l = 0; l < g.dim; ++l) off[l] = grid.stencil[o][l] * g.step[l];
            wtab[static_cast<std::size_t>(k) * n_off + o] = 0.5 * std::sqrt(off.dot(gt * off));
        }
    }
    std::vector<std::int64_t> id_delta(n_off);
    for (int o = 0; o < n_off; ++o) {
        std::int64_t du = 0;
        for (int l = 0; l < g.dim; ++l)
            du += static_cast<std::int64_t>(grid.stencil[o][l]) * g.stride[l];
        id_delta[o] = du;
    }

    std::vector<std::uint8_t> allowed;
    if (region) {
        allowed.assign(g.total, 0);
        for (std::int64_t u = 0; u < g.total; ++u)
            allowed[u] = (*region)(point_from_coords(d, g.point(u))) ? 1 : 0;
        if (!allowed[source] || !allowed[target])
            throw std::invalid_argument("query point violates the region constraint");
    }

    std::vector<double> dist(g.total, kInf);
    std::vector<std::int64_t> pred;
    if (want_path) pred.assign(g.total, -1);
    using HeapItem = std::pair<double, std::int64_t>;
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<HeapItem>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, source);

    std::vector<int> idx(g.dim);
    while (!heap.empty()) {
        auto [du, u] = heap.top();
        heap.pop();
        if (du > dist[u]) continue;
        if (u == target) break;
        std::int64_t rem = u;
        for (int l = 0; l < g.dim; ++l) {
            idx[l] = static_cast<int>(rem / g.stride[l]);
            rem %= g.stride[l];
        }
        for (int o = 0; o < n_off; ++o) {
            const int* off = &sten[static_cast<std::size_t>(o) * g.dim];
            bool ok = true;
            for (int l = 0; l < g.dim; ++l) {
                int j = idx[l] + off[l];
                if (j < 0 || j >= g.n_nodes[l]) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            std::int64_t v = u + id_delta[o];
            if (region && !allowed[v]) continue;
            double w = wtab[static_cast<std::size_t>(idx[taxis]) * n_off + o] +
                       wtab[static_cast<std::size_t>(idx[taxis] + off[taxis]) * n_off + o];
            double nd = du + w;
            if (nd < dist[v]) {
                dist[v] = nd;
                if (want_path) pred[v] = u;
                heap.emplace(nd, v);
            }
        }
    }

    if (dist[target] == kInf) throw std::runtime_error("grid disconnected at this resolution");

    DistanceEstimate out;
    out.value = dist[target] + segment_length(d, Q, zp, g.point(source)) +
                segment_length(d, Q, g.point(target), zq);
    out.upper_bound_flag = true;
    if (want_path) {
        std::vector<GroupPoint> rev;
        for (std::int64_t u = target; u != -1; u = pred[u])
            rev.push_back(point_from_coords(d, g.point(u)));
        out.path.assign(rev.rbegin(), rev.rend());
        if ((full_coords(out.path.front()) - zp).cwiseAbs().maxCoeff() > 0)
            out.path.insert(out.path.begin(), p);
        if ((full_coords(out.path.back()) - zq).cwiseAbs().maxCoeff() > 0) out.path.push_back(q);
    }
    return out;
}

}  // namespace

std::vector<std::vector<int>> default_stencil(int dim) {
    if (dim < 2) throw std::invalid_argument("stencil needs dimension at least 2");
    std::vector<std::vector<int>> out;
    std::vector<int> off(dim, -1);
    // {-1,0,1}^dim minus the origin
    while (true) {
        bool all_zero = std::all_of(off.begin(), off.end(), [](int v) { return v == 0; });
        if (!all_zero) out.push_back(off);
        int l = dim - 1;
        while (l >= 0 && off[l] == 1) off[l--] = -1;
        if (l < 0) break;
        ++off[l];
    }
    // Knight moves in every coordinate plane. In 2D the grids are small, so
    // the longer (1,3) and (2,3) knights are affordable; they cut the
    // residual angular error to well under the tightest closed-form
    // tolerances.
    std::vector<std::pair<int, int>> moves{{1, 2}, {2, 1}};
    if (dim == 2) {
        moves.emplace_back(1, 3);
        moves.emplace_back(3, 1);
        moves.emplace_back(2, 3);
        moves.emplace_back(3, 2);
    }
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
            for (int si : {-1, 1}) {
                for (int sj : {-1, 1}) {
                    for (auto [mi, mj] : moves) {
                        std::vector<int> v(dim, 0);
                        v[i] = si * mi;
                        v[j] = sj * mj;
                        out.push_back(v);
                    }
                }
            }
        }
    }
    return out;
}

GridSpec make_grid(const Derivation& d, const FrameMetric& Q, const GroupPoint& p,
                   const GroupPoint& q, double h) {
    if (h <= 0.0) throw std::invalid_argument("grid step must be positive");
    int nd = d.n_dim();
    Vec v = perpendicular_section(d, Q);
    double t = p.height, s = q.height;

    // Coset-adjusted separations: the perpendicular cosets through p and q
    // differ by a constant coordinate vector, which is what the crossing
    // heights must be computed from when the sections are slanted.
    Vec adj(nd);
    Vec np = p.n_all(), nq = q.n_all();
    for (int l = 0; l < nd; ++l) {
        double r = d.rates[l];
        adj[l] = (nq[l] - np[l]) - v[l] * (std::exp(r * s) - std::exp(r * t)) / r;
    }
    double t1 = crossing_height(d.rates, adj, true);
    double t2 = crossing_height(d.rates, adj, false);

    double t_lo = std::min({t, s, t2}) - 2.0;
    double t_hi = std::max({t, s, t1}) + 2.0;

    GridSpec grid;
    grid.h = h;
    grid.lo = Vec(nd + 1);
    grid.hi = Vec(nd + 1);
    for (int l = 0; l < nd; ++l) {
        double r = d.rates[l];
        auto trace = [&](const GroupPoint& base, double at) {
            return base.n_all()[l] +
                   std::exp(r * base.height) * v[l] * std::expm1(r * (at - base.height)) / r;
        };
        double lo = std::min({np[l], nq[l], trace(p, t_lo), trace(p, t_hi), trace(q, t_lo),
                              trace(q, t_hi)});
        double hi = std::max({np[l], nq[l], trace(p, t_lo), trace(p, t_hi), trace(q, t_lo),
                              trace(q, t_hi)});
        double pad = 5.0 * h + 0.05 * (hi - lo);
        if (std::abs(v[l]) > 1e-12) {
            // Slanted sections drift while crossing; pad by the coordinate
            // width of a unit frame ball at the crossing height.
            double cross = r > 0.0 ? std::clamp(t1, t_lo, t_hi) : std::clamp(t2, t_lo, t_hi);
            pad += 2.0 * std::exp(r * cross);
        }
        grid.lo[l] = lo - pad;
        grid.hi[l] = hi + pad;
    }
    grid.lo[nd] = t_lo;
    grid.hi[nd] = t_hi;
    // Snap box corners to absolute multiples of h so the node set depends
    // only on the box, not on the argument order.
    for (int l = 0; l <= nd; ++l) {
        grid.lo[l] = std::floor(grid.lo[l] / h) * h;
        grid.hi[l] = std::ceil(grid.hi[l] / h) * h;
    }
    grid.stencil = default_stencil(nd + 1);
    return grid;
}

DistanceEstimate lattice_distance(const Derivation& d, const FrameMetric& Q, const GroupPoint& p,
                                  const GroupPoint& q, const GridSpec& grid, bool want_path) {
    return run_dijkstra(d, Q, p, q, grid, nullptr, want_path);
}

DistanceEstimate constrained_lattice_distance(const Derivation& d, const FrameMetric& Q,
                                              const GroupPoint& p, const GroupPoint& q,
                                              const GridSpec& grid, const RegionPredicate& region,
                                              bool want_path) {
    if (!region) throw std::invalid_argument("region predicate is empty");
    return run_dijkstra(d, Q, p, q, grid, &region, want_path);
}

std::pair<double, double> path_height_extremes(const std::vector<GroupPoint>& path) {
    if (path.empty()) throw std::invalid_argument("empty path");
    double lo = path.front().height, hi = lo;
    for (const GroupPoint& w : path) {
        lo = std::min(lo, w.height);
        hi = std::max(hi, w.height);
    }
    return {lo, hi};
}

}  // namespace solvgeo
