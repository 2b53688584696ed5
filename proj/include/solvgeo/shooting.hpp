#pragma once

// Geodesic boundary-value refinement: integrates the geodesic flow in
// left-invariant frame components (Euler-Arnold form, so the velocity
// equations have constant coefficients) and solves the two-point problem by
// damped multiple shooting seeded with a lattice path.

#include "solvgeo/lattice.hpp"

namespace solvgeo {

DistanceEstimate shooting_refine(const Derivation& d, const FrameMetric& Q, const GroupPoint& p,
                                 const GroupPoint& q, const DistanceEstimate& initial);

template <typename Model>
DistanceEstimate shooting_refine(const Model& m, const FrameMetric& Q, const GroupPoint& p,
                                 const GroupPoint& q, const DistanceEstimate& initial) {
    return shooting_refine(derivation(m), Q, p, q, initial);
}

}  // namespace solvgeo
