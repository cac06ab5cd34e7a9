#pragma once

#include <array>

#include "odenet/bounds.hpp"
#include "odenet/controls.hpp"

namespace odenet {

// The standard bump eta(s) = C exp(-1 / (1 - s^2)) on (-1, 1), zero outside,
// normalised to unit integral, scaled to width delta:
// eta_delta(s) = eta(s / delta) / delta.
class Mollifier {
public:
    explicit Mollifier(double width);

    double width() const { return width_; }

    // eta_delta(s)
    double operator()(double s) const;

    // Unit-width eta(s).
    static double shape(double s);

    // integral of eta_delta over [lo, hi] by a fixed Gauss-Legendre rule with
    // `points` nodes; exact 0 / 1 shortcuts outside and across the full
    // support.
    double mass(double lo, double hi, int points = 32) const;

    // integral of |s| eta(s) ds over (-1, 1) at unit width.
    static double abs_moment();

private:
    double width_;
};

// Convolves each piecewise-constant control with eta_delta after zero
// extension outside [0, horizon], then samples the result on a uniform grid
// (spacing <= delta / 8, capped at 2^17 cells) as sampled-continuous
// controls. Each sample is a finite sum of per-piece bump masses, each by a
// fixed quadrature_points-node rule. The returned interpolant is the object
// all later stages use; its distance to c is what control_l1_gaps measures.
NeuronControls mollify_controls(const NeuronControls& c, double delta,
                                int quadrature_points = 32);

// L1-in-time gaps between c and its smoothed version, one per control:
// { alpha (euclidean), beta (operator norm), gamma (euclidean) }. Midpoint
// rule on the union of both time grids refined fourfold.
std::array<double, 3> control_l1_gaps(const NeuronControls& c,
                                      const NeuronControls& smooth);

// Largest width delta, halving from horizon / 4, whose mollified controls
// keep max(control_l1_gaps) below l1_budget. Throws ApproximationError when
// the floor 1e-9 * horizon is reached first.
double choose_delta(const NeuronControls& c, double l1_budget);

// Certified vs measured flow distance between the field of c and the field
// of its smoothed controls over d:
//   measured sup distance <= m3 * eps * e^(m4 t)
// with eps = max L1 gap, m3 = m2 + sup|alpha| Lip(sigma) (m1 + 1),
// m4 = sup|alpha| sup|beta| Lip(sigma), and m1, m2 the certified state and
// activation bounds of the smoothed flow.
BoundReport mollified_flow_error(const NeuronControls& c, const NeuronControls& smooth,
                                 const Domain& d, const BoundOptions& opts = {});

}  // namespace odenet
