#include "solvgeo/roughsim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "solvgeo/coarse.hpp"
#include "solvgeo/lattice.hpp"
#include "solvgeo/rng.hpp"

namespace solvgeo {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::RoughIsometry: return "rough-isometry";
        case Verdict::RoughSimilarity: return "rough-similarity";
        case Verdict::NotRoughlySimilar: return "not-roughly-similar";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::optional<double> fit_lambda(const std::vector<std::pair<double, double>>& d12,
                                 double separation_scale, int min_long) {
    if (d12.empty()) return std::nullopt;
    int long_count = 0;
    for (const auto& [d1, d2] : d12)
        if (d2 >= 0.5 * separation_scale) ++long_count;
    if (long_count < min_long) return std::nullopt;

    std::vector<std::size_t> idx(d12.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t i, std::size_t j) { return d12[i].second > d12[j].second; });
    std::size_t quartile = std::max<std::size_t>(1, (d12.size() + 3) / 4);

    std::vector<double> ratios;
    ratios.reserve(quartile);
    for (std::size_t r = 0; r < quartile; ++r) {
        const auto& [d1, d2] = d12[idx[r]];
        if (d2 > 0.0) ratios.push_back(d1 / d2);
    }
    if (ratios.empty()) return std::nullopt;
    std::sort(ratios.begin(), ratios.end());
    return ratios[(ratios.size() - 1) / 2];  // lower median, an order statistic
}

namespace {

double ls_slope(const std::vector<std::pair<double, double>>& pts) {
    double n = static_cast<double>(pts.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    if (denom <= 0.0) return 0.0;
    return (n * sxy - sx * sy) / denom;
}

}  // namespace

SimilarityReport compare(const DistanceEval& e1, const DistanceEval& e2, const SampleSet& samples,
                         const CompareOptions& opts) {
    std::vector<SampleRow> rows;
    rows.reserve(samples.pairs.size());
    for (const auto& sp : samples.pairs) {
        double d1 = e1(sp.p, sp.q);
        double d2 = e2(sp.p, sp.q);
        double sep = sp.separation > 0.0 ? sp.separation : d2;
        rows.push_back({sep, d1, d2});
    }
    return compare_rows(std::move(rows), samples.separation_scale, opts);
}

SimilarityReport compare_rows(std::vector<SampleRow> rows, double separation_scale,
                              const CompareOptions& opts) {
    SimilarityReport rep;
    rep.sample_count = static_cast<int>(rows.size());
    if (rows.empty()) {
        rep.note = "no samples";
        return rep;
    }
    rep.rows = std::move(rows);

    std::vector<std::pair<double, double>> d12;
    d12.reserve(rep.rows.size());
    for (const auto& r : rep.rows) d12.emplace_back(r.d1, r.d2);

    auto lam = fit_lambda(d12, separation_scale, opts.min_long_samples);
    if (!lam) {
        rep.note = "too few long-range samples for the constant fit";
        return rep;
    }
    rep.lambda_hat = *lam;

    double smin = std::numeric_limits<double>::infinity();
    double smax = -smin;
    for (const auto& r : rep.rows) {
        smin = std::min(smin, r.separation);
        smax = std::max(smax, r.separation);
    }

    int nb = std::max(1, opts.n_buckets);
    double width = (smax - smin) / static_cast<double>(nb);
    rep.buckets.assign(static_cast<std::size_t>(nb), ResidualBucket{});
    for (int b = 0; b < nb; ++b) {
        rep.buckets[b].lo = smin + b * width;
        rep.buckets[b].hi = b + 1 == nb ? smax : smin + (b + 1) * width;
    }
    std::vector<double> residuals(rep.rows.size());
    std::vector<double> seps(rep.rows.size());
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        double res = std::abs(r.d1 - rep.lambda_hat * r.d2);
        residuals[i] = res;
        seps[i] = r.separation;
        int b = width > 0.0
                    ? std::min(nb - 1, static_cast<int>((r.separation - smin) / width))
                    : 0;
        rep.buckets[b].max_residual = std::max(rep.buckets[b].max_residual, res);
        rep.buckets[b].count += 1;
    }

    // Additive constant visible at short range: the worst residual among the
    // lower-half separations, after the systematic-error allowance.
    std::vector<double> sorted_seps = seps;
    std::sort(sorted_seps.begin(), sorted_seps.end());
    double sep_median = sorted_seps[(sorted_seps.size() - 1) / 2];
    double cemp = 0.0;
    for (std::size_t i = 0; i < residuals.size(); ++i)
        if (seps[i] <= sep_median)
            cemp = std::max(cemp, std::max(0.0, residuals[i] - opts.disc.at(seps[i])));
    rep.empirical_constant = cemp;
    rep.discretization_at_far = opts.disc.at(smax);
    rep.residual_budget = rep.discretization_at_far + cemp + opts.headroom;

    std::vector<std::pair<double, double>> pts;  // (bucket mid, adjusted max)
    for (const auto& b : rep.buckets) {
        if (b.count == 0) continue;
        double mid = 0.5 * (b.lo + b.hi);
        pts.emplace_back(mid, std::max(0.0, b.max_residual - opts.disc.at(mid)));
    }
    if (pts.size() < 2) {
        rep.note = "degenerate separation range";
        return rep;
    }
    rep.trend_slope = ls_slope(pts);

    bool bounded = true;
    bool monotone = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].second > cemp + opts.headroom + 1e-12) bounded = false;
        if (i > 0 && pts[i].second < pts[i - 1].second - 1e-9) monotone = false;
    }

    if (rep.trend_slope <= opts.flat_slope && bounded) {
        rep.verdict = std::abs(rep.lambda_hat - 1.0) <= opts.iso_lambda_tol
                          ? Verdict::RoughIsometry
                          : Verdict::RoughSimilarity;
    } else if (rep.trend_slope >= opts.growth_slope && monotone) {
        rep.verdict = Verdict::NotRoughlySimilar;
    } else {
        rep.verdict = Verdict::Inconclusive;
        rep.note = "residual trend between the flat and growth thresholds";
    }
    return rep;
}

DiscretizationModel fit_discretization(const DistanceEval& coarse, const DistanceEval& fine,
                                       const SampleSet& controls) {
    DiscretizationModel model;
    if (controls.pairs.empty()) return model;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(controls.pairs.size());
    for (const auto& sp : controls.pairs) {
        double dc = coarse(sp.p, sp.q);
        double df = fine(sp.p, sp.q);
        pts.emplace_back(sp.separation, 2.0 * std::max(0.0, dc - df));
    }
    double slope = ls_slope(pts);
    model.alpha = std::max(0.0, slope);
    double mean_e = 0.0, mean_s = 0.0;
    for (const auto& [s, e] : pts) {
        mean_s += s;
        mean_e += e;
    }
    mean_s /= static_cast<double>(pts.size());
    mean_e /= static_cast<double>(pts.size());
    model.beta = mean_e - model.alpha * mean_s;
    return model;
}

namespace {

// Polar point at hyperbolic distance dist and direction theta from i in the
// upper half-plane (theta = pi/2 is straight up), pulled back to the (x, t)
// coordinates of the eigenvalue-a group. The Cayley image of the disk point
// tanh(s) e^{i phi} (phi measured from vertical) is expanded so the height
// stays finite past s ~ 19 where tanh rounds to 1:
//   z = [-2 r sin(phi) + i (1 - r^2)] / [(1 - r)^2 + 4 r sin^2(phi / 2)].
std::pair<double, double> polar_point(double a, double dist, double theta) {
    double s = 0.5 * a * dist;
    double phi = 0.5 * std::acos(-1.0) - theta;
    double r = std::tanh(s);
    double one_minus_r = 2.0 * std::exp(-2.0 * s) / (1.0 + std::exp(-2.0 * s));
    double half_sin = std::sin(0.5 * phi);
    double denom = one_minus_r * one_minus_r + 4.0 * r * half_sin * half_sin;
    double x = -2.0 * r * std::sin(phi) / denom;
    double log_im = 2.0 * (std::log(2.0) - s - std::log1p(std::exp(-2.0 * s))) - std::log(denom);
    return {x / a, log_im / a};
}

}  // namespace

SampleSet sample_pairs(const HeintzeModel& m, int count, std::uint64_t seed,
                       double separation_scale) {
    SampleSet out;
    out.separation_scale = separation_scale;
    out.seed = seed;
    if (count <= 0) return out;
    Rng rng(seed);
    int k = m.dim();
    const double pi = std::acos(-1.0);
    for (int i = 0; i < count; ++i) {
        double len = rng.log_uniform(1.0, std::max(1.0, separation_scale));
        int ax = i % k;
        double a = m.eigenvalues[static_cast<std::size_t>(ax)];
        double x = 0.0, t = 0.0;
        for (int tries = 0; tries < 64; ++tries) {
            double theta = rng.uniform(pi / 36.0, pi - pi / 36.0);
            std::tie(x, t) = polar_point(a, len, theta);
            if (std::abs(x) <= 20.0) break;  // keeps the lattice box small
        }
        Vec xp = Vec::Zero(k), xq = Vec::Zero(k);
        xq[ax] = x;
        GroupPoint p(xp, Vec(), 0.0), q(xq, Vec(), t);
        double sep = hyperbolic_distance(a, 0.0, 0.0, x, t);
        out.pairs.push_back({p, q, sep});
    }
    return out;
}

SampleSet sample_pairs(const SolTypeModel& m, int count, std::uint64_t seed,
                       double separation_scale) {
    SampleSet out;
    out.separation_scale = separation_scale;
    out.seed = seed;
    if (count <= 0) return out;
    Rng rng(seed);
    int k1 = m.up.dim(), k2 = m.down.dim();
    for (int i = 0; i < count; ++i) {
        double len = rng.log_uniform(1.0, std::max(1.0, separation_scale));
        int mode = i % 4;
        int ax1 = (i / 4) % k1, ax2 = (i / 4) % k2;
        double a = m.up.eigenvalues[static_cast<std::size_t>(ax1)];
        double lb = m.lambda * m.down.eigenvalues[static_cast<std::size_t>(ax2)];
        double cap_up = 2.0 / a;  // crossing heights that keep |dx| <= e^2
        double cap_dn = 2.0 / lb;
        if (mode == 3 && len > 9.0) mode = (i / 4) % 2 == 0 ? 1 : 2;
        if (mode != 0 && len < 2.5) mode = 0;

        double tp = 0.0, tq = 0.0, dx = 0.0, dy = 0.0;
        switch (mode) {
            case 0: {  // both crossings inside the height range: vertical pair
                double dt = std::max(0.0, len - 2.0);
                tp = rng.uniform(-0.3, 0.3);
                tq = tp + rng.sign() * dt;
                double mn = std::min(tp, tq), mx = std::max(tp, tq);
                double t1 = rng.uniform(mn, std::max(mn, std::min(mx, cap_up)));
                dx = rng.sign() * std::exp(a * t1);
                double t2 = std::max(mx, 0.0) + rng.uniform(0.0, 1.0);
                dy = rng.sign() * std::exp(-lb * t2);
                break;
            }
            case 1: {  // crossing above both heights: climb over the up offset
                double t1 = rng.uniform(0.5 * cap_up, cap_up);
                double asym = rng.uniform(0.0, std::min(1.0, 0.4 * (len - 2.0)));
                tp = t1 + 1.0 - 0.5 * len + asym;
                tq = t1 + 1.0 - 0.5 * len - asym;
                dx = rng.sign() * std::exp(a * t1);
                break;
            }
            case 2: {  // crossing below both heights: dive under the down offset
                double t2 = -rng.uniform(0.5 * cap_dn, cap_dn);
                double asym = rng.uniform(0.0, std::min(1.0, 0.4 * (len - 2.0)));
                tp = t2 - 1.0 + 0.5 * len + asym;
                tq = t2 - 1.0 + 0.5 * len - asym;
                dy = rng.sign() * std::exp(-lb * t2);
                break;
            }
            default: {  // both crossings outside the heights: straddle
                double dt = rng.uniform(0.0, std::min(1.0, 0.8 * std::max(0.0, len - 2.0)));
                double gap = 0.5 * (len - 2.0 + dt);  // t1 - t2
                double lo = std::max(0.0, gap - cap_dn), hi = std::min(cap_up, gap);
                if (lo > hi) lo = hi;
                double t1 = rng.uniform(lo, hi);
                double t2 = t1 - gap;
                double mid = 0.5 * (t1 + t2), sg = rng.sign();
                tp = mid + sg * 0.5 * dt;
                tq = mid - sg * 0.5 * dt;
                dx = rng.sign() * std::exp(a * t1);
                dy = rng.sign() * std::exp(-lb * t2);
                break;
            }
        }

        Vec x1 = Vec::Zero(k1), x2 = Vec::Zero(k2);
        x1[ax1] = rng.uniform(-0.2, 0.2);
        x2[ax2] = rng.uniform(-0.2, 0.2);
        Vec y1 = x1, y2 = x2;
        y1[ax1] += dx;
        y2[ax2] += dy;
        GroupPoint p(x1, x2, tp), q(y1, y2, tq);
        out.pairs.push_back({p, q, rho_tilde(m, p, q)});
    }
    return out;
}

namespace {

DistanceEval lattice_eval(const Derivation& d, const FrameMetric& Q, double h) {
    return [d, Q, h](const GroupPoint& p, const GroupPoint& q) {
        GridSpec grid = make_grid(d, Q, p, q, h);
        return lattice_distance(d, Q, p, q, grid).value;
    };
}

double control_ratio(const DistanceEval& e1, const DistanceEval& e2, const SampleSet& controls) {
    std::vector<double> ratios;
    for (const auto& sp : controls.pairs) {
        double d2 = e2(sp.p, sp.q);
        if (d2 > 0.0) ratios.push_back(e1(sp.p, sp.q) / d2);
    }
    if (ratios.empty()) return 1.0;
    std::sort(ratios.begin(), ratios.end());
    return ratios[(ratios.size() - 1) / 2];
}

template <class Model>
SimilarityReport verify_two_metrics(const Model& m, const FrameMetric& Q1, const FrameMetric& Q2,
                                    double h, const SampleSet& samples, CompareOptions opts) {
    Derivation d = derivation(m);
    DistanceEval e1 = lattice_eval(d, Q2, h);
    DistanceEval e2 = lattice_eval(d, Q1, h);
    SampleSet controls =
        sample_pairs(m, 20, samples.seed + 1, std::min(4.5, samples.separation_scale));
    DiscretizationModel disc1 = fit_discretization(e1, lattice_eval(d, Q2, 0.5 * h), controls);
    DiscretizationModel disc2 = fit_discretization(e2, lattice_eval(d, Q1, 0.5 * h), controls);
    double lam0 = control_ratio(e1, e2, controls);
    opts.disc.alpha = disc1.alpha + lam0 * disc2.alpha;
    opts.disc.beta = disc1.beta + lam0 * disc2.beta;
    return compare(e1, e2, samples, opts);
}

}  // namespace

SimilarityReport verify_heintze(const HeintzeModel& m, const FrameMetric& Q1,
                                const FrameMetric& Q2, double h, const SampleSet& samples,
                                CompareOptions opts) {
    return verify_two_metrics(m, Q1, Q2, h, samples, opts);
}

SimilarityReport verify_soltype(const SolTypeModel& m, const FrameMetric& Q1,
                                const FrameMetric& Q2, double h, const SampleSet& samples,
                                CompareOptions opts) {
    return verify_two_metrics(m, Q1, Q2, h, samples, opts);
}

SimilarityReport verify_sol(const SolTypeModel& m, const FrameMetric& Q, double h,
                            const SampleSet& samples, CompareOptions opts) {
    Derivation d = derivation(m);
    FactorEvaluators ev = FactorEvaluators::closed_form(m);
    DistanceEval e1 = lattice_eval(d, Q, h);
    DistanceEval e2 = [m, ev](const GroupPoint& p, const GroupPoint& q) {
        return rho(m, ev, p, q);
    };
    SampleSet controls =
        sample_pairs(m, 20, samples.seed + 1, std::min(4.5, samples.separation_scale));
    opts.disc = fit_discretization(e1, lattice_eval(d, Q, 0.5 * h), controls);
    return compare(e1, e2, samples, opts);
}

}  // namespace solvgeo
