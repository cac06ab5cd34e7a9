#pragma once

#include <array>
#include <map>
#include <string>

#include "odenet/controls.hpp"
#include "odenet/domain.hpp"
#include "odenet/field.hpp"
#include "odenet/solver.hpp"

namespace odenet {

// One certified/measured pair. "certified" comes from a closed formula whose
// inputs are exact norms or sampled sups; "measured" from numerical flows.
// The invariant under test is always measured <= certified.
struct BoundReport {
    std::string name;
    double certified = 0.0;
    double measured = 0.0;
    std::map<std::string, double> inputs;  // formula inputs, for reporting

    double slack() const { return certified - measured; }
    bool holds(double rel = 1e-6, double abs = 1e-9) const {
        return measured <= certified * (1.0 + rel) + abs;
    }
};

struct BoundOptions {
    SolverConfig solver;
    int tube_samples_per_axis = 0;   // 0 = pick by dimension
    int time_samples = 33;           // nodes for sampled sups over [0, t]
    double pair_radius_factor = 0.9; // offset size as a fraction of the allowed radius
    std::uint64_t pair_seed = 0x7ab3;
};

// Successive Picard iterates contract like f0 * lip^(n-1) * t^n / n!.
double picard_gap_certificate(double f0, double lip, double t, int n);

// The flow from xi stays within f0 * t * e^(lip t) of xi, where f0 bounds
// |f(xi, s)| for s in [0, t].
double solution_range_certificate(double f0, double lip, double t_end);

// Flows of two fields started at the same point stay within
// sup|f - g| * t * e^(lip_f t), the sup taken over a tube containing the
// g-flow.
double flow_distance_certificate(double sup_gap, double lip_f, double t_end);

// Error envelope e^(c t) * eps / c for an explicit Euler network whose
// controls have modulus of continuity eps over one step.
double resnet_error_envelope(double c, double t_end, double eps);

// Certified vs measured reach of the flow from xi over [0, t_end].
BoundReport solution_range_bound(const VectorField& f, const Eigen::VectorXd& xi,
                                 double t_end, const BoundOptions& opts = {});

// Certified vs measured distance at t_end between the flows of f and g from
// every grid point of d. The certificate samples sup|f - g| over a box that
// contains the reach of g from d and applies the Gronwall factor of f.
BoundReport flow_distance_bound(const VectorField& f, const VectorField& g,
                                const Domain& d, double t_end,
                                const BoundOptions& opts = {});

// Tube containment: when sup|f - g| over the inflated box stays below
// a / (2 t e^(lip t)) and the starting points differ by less than
// a / (2 e^(lip t)), the two flows stay within a of each other. Throws
// PreconditionError when the closeness hypothesis fails on the sampled sup,
// otherwise reports certified = a against the measured pairwise sup.
BoundReport tube_bound_check(const VectorField& f, const VectorField& g,
                             const Domain& d, double a, double t_end,
                             const BoundOptions& opts = {});

// State and activation bounds for the field driven by the mollified version
// of piecewise-constant controls c at width delta:
//   [0] reach of the mollified flow over d, certified by
//       max|xi| + t sup|alpha| sup|sigma| e^(sup|alpha| sup|beta| Lip(sigma) t);
//   [1] sup of |sigma(beta x + gamma)| along those flows, certified by the
//       activation sup at radius sup|beta| * state_bound + sup|gamma|.
std::array<BoundReport, 2> mollified_control_bounds(const NeuronControls& c,
                                                    double delta, const Domain& d,
                                                    const BoundOptions& opts = {});

}  // namespace odenet
