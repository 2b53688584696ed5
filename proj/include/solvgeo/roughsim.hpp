#pragma once

// Empirical rough-similarity analysis: given two distance evaluators on the
// same point set, fit the multiplicative constant on long-range samples,
// bucket the residuals by separation, and turn the residual trend into a
// verdict. Also provides deterministic pair samplers whose grid boxes stay
// small enough for the lattice solver, and the metric-comparison experiments
// built from them.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "solvgeo/models.hpp"

namespace solvgeo {

enum class Verdict { RoughIsometry, RoughSimilarity, NotRoughlySimilar, Inconclusive };

std::string to_string(Verdict v);

struct SamplePair {
    GroupPoint p, q;
    double separation = 0.0;  // coarse reference scale of the pair
};

struct SampleSet {
    std::vector<SamplePair> pairs;
    double separation_scale = 0.0;
    std::uint64_t seed = 0;
};

struct ResidualBucket {
    double lo = 0.0, hi = 0.0;  // separation range
    double max_residual = 0.0;  // max |d1 - lambda_hat * d2| among members
    int count = 0;
};

struct SampleRow {
    double separation = 0.0;
    double d1 = 0.0, d2 = 0.0;
};

// Affine-in-separation allowance for systematic evaluator error (for lattice
// evaluators: the discretization error, estimated by grid halving).
struct DiscretizationModel {
    double alpha = 0.0, beta = 0.0;
    double at(double s) const { return std::max(0.0, alpha * s + beta); }
};

struct CompareOptions {
    double flat_slope = 0.05;      // at or below: residuals count as non-trending
    double growth_slope = 0.2;     // at or above, with monotone maxima: divergence
    double iso_lambda_tol = 0.05;  // |lambda_hat - 1| tolerance for rough isometry
    double headroom = 1.0;         // sampling-noise allowance added to the budget
    int n_buckets = 8;
    int min_long_samples = 10;  // required count of d2-large samples for the fit
    DiscretizationModel disc;   // subtracted from residuals before the trend test
};

struct SimilarityReport {
    Verdict verdict = Verdict::Inconclusive;
    double lambda_hat = 1.0;
    double trend_slope = 0.0;
    double residual_budget = 0.0;        // allowance at the far end of the range
    double empirical_constant = 0.0;     // additive constant seen at short range
    double discretization_at_far = 0.0;  // disc model evaluated at max separation
    std::vector<ResidualBucket> buckets;
    std::vector<SampleRow> rows;
    int sample_count = 0;
    std::string note;
};

using DistanceEval = std::function<double(const GroupPoint&, const GroupPoint&)>;

// Multiplicative constant: lower median of d1/d2 over the samples whose d2
// lies in the top quartile. Empty when fewer than min_long samples have
// d2 >= separation_scale / 2. Scale-equivariant in d1, being an order
// statistic of the ratios.
std::optional<double> fit_lambda(const std::vector<std::pair<double, double>>& d12,
                                 double separation_scale, int min_long = 10);

// Evaluate both distances on every pair, fit the constant, bucket the
// residuals |d1 - lambda_hat * d2| by separation into equal-width buckets,
// and classify. The constant maps the second evaluator's distances onto the
// first's: d1 ~ lambda_hat * d2 + C.
SimilarityReport compare(const DistanceEval& e1, const DistanceEval& e2, const SampleSet& samples,
                         const CompareOptions& opts = {});

// Same analysis on already-evaluated rows, for callers whose distances do
// not come from Lie-group evaluators.
SimilarityReport compare_rows(std::vector<SampleRow> rows, double separation_scale,
                              const CompareOptions& opts = {});

// Fit the affine error allowance for one evaluator from a coarse/fine pair
// of resolutions: a first-order method halves its error with the step, so
// the full error is about twice the observed drop.
DiscretizationModel fit_discretization(const DistanceEval& coarse, const DistanceEval& fine,
                                       const SampleSet& controls);

// Deterministic pair families based near the identity, with coarse
// separations log-uniform in [1, separation_scale] (clamped below by the
// additive constant of the coarse distance) and nilradical offsets capped so
// the lattice boxes stay small. The stored separation is the recomputed
// coarse distance of the pair.
SampleSet sample_pairs(const HeintzeModel& m, int count, std::uint64_t seed,
                       double separation_scale);
SampleSet sample_pairs(const SolTypeModel& m, int count, std::uint64_t seed,
                       double separation_scale);

// Metric-comparison experiments: lattice distances for Q2 against lattice
// distances for Q1 on the sampled pairs, with the discretization allowance
// fitted by grid halving on short control pairs. lambda_hat maps
// Q1-distances onto Q2-distances; identical metrics are expected to come
// back RoughIsometry.
SimilarityReport verify_heintze(const HeintzeModel& m, const FrameMetric& Q1,
                                const FrameMetric& Q2, double h, const SampleSet& samples,
                                CompareOptions opts = {});
SimilarityReport verify_soltype(const SolTypeModel& m, const FrameMetric& Q1,
                                const FrameMetric& Q2, double h, const SampleSet& samples,
                                CompareOptions opts = {});

// Lattice distances against the closed-form coarse distance rho on a
// Sol-type model with one-dimensional factors; checks that the residual
// stays bounded as the separation grows.
SimilarityReport verify_sol(const SolTypeModel& m, const FrameMetric& Q, double h,
                            const SampleSet& samples, CompareOptions opts = {});

}  // namespace solvgeo
