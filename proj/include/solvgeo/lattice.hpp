#pragma once

// Numerical left-invariant distances: anisotropic lattice Dijkstra over a
// box around the query pair, with optional region constraints. Grid boxes
// follow the critical heights of the pair, so the graph contains the
// near-optimal coarse paths.

#include <functional>
#include <vector>

#include "solvgeo/models.hpp"

namespace solvgeo {

struct GridSpec {
    Vec lo, hi;  // box corners, axis order (n..., t); nodes at lo + i*h
    double h = 0.1;
    std::vector<std::vector<int>> stencil;  // offsets, symmetric under negation
};

struct DistanceEstimate {
    double value = 0.0;
    bool upper_bound_flag = true;  // lattice paths overestimate the true distance
    bool refined = false;
    bool warning = false;
    std::vector<GroupPoint> path;  // optional polyline, empty unless requested
};

// Axis-aligned unit box moves plus knight moves in every coordinate plane;
// 2D additionally gets the (1,3) and (2,3) knights for finer angular
// resolution. 32 offsets in 2D, 50 in 3D.
std::vector<std::vector<int>> default_stencil(int dim);

// Box construction: heights span the pair's critical heights plus a fixed
// margin of 2, nilradical axes cover the endpoints and their perpendicular
// coset traces with resolution-dependent padding.
GridSpec make_grid(const Derivation& d, const FrameMetric& Q, const GroupPoint& p,
                   const GroupPoint& q, double h);

using RegionPredicate = std::function<bool(const GroupPoint&)>;

DistanceEstimate lattice_distance(const Derivation& d, const FrameMetric& Q, const GroupPoint& p,
                                  const GroupPoint& q, const GridSpec& grid,
                                  bool want_path = false);

DistanceEstimate constrained_lattice_distance(const Derivation& d, const FrameMetric& Q,
                                              const GroupPoint& p, const GroupPoint& q,
                                              const GridSpec& grid, const RegionPredicate& region,
                                              bool want_path = false);

// Exact height extremes (h-, h+) of a polyline; heights along straight
// segments are linear, so vertices suffice.
std::pair<double, double> path_height_extremes(const std::vector<GroupPoint>& path);

template <typename Model>
GridSpec make_grid(const Model& m, const FrameMetric& Q, const GroupPoint& p, const GroupPoint& q,
                   double h) {
    return make_grid(derivation(m), Q, p, q, h);
}

template <typename Model>
DistanceEstimate lattice_distance(const Model& m, const FrameMetric& Q, const GroupPoint& p,
                                  const GroupPoint& q, const GridSpec& grid,
                                  bool want_path = false) {
    return lattice_distance(derivation(m), Q, p, q, grid, want_path);
}

template <typename Model>
DistanceEstimate constrained_lattice_distance(const Model& m, const FrameMetric& Q,
                                              const GroupPoint& p, const GroupPoint& q,
                                              const GridSpec& grid, const RegionPredicate& region,
                                              bool want_path = false) {
    return constrained_lattice_distance(derivation(m), Q, p, q, grid, region, want_path);
}

}  // namespace solvgeo
