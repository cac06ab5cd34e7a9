#pragma once

#include <Eigen/Core>
#include <vector>

#include "odenet/domain.hpp"
#include "odenet/field.hpp"
#include "odenet/trajectory.hpp"

namespace odenet {

enum class SolveMethod { picard, euler, rk4_reference };

struct SolverConfig {
    SolveMethod method = SolveMethod::rk4_reference;
    // Uniform step count before breakpoint refinement.
    int time_steps = 256;
    // Picard: iteration cap and sup-norm gap between successive iterates at
    // which the iteration stops early.
    int picard_iterations = 12;
    double picard_tolerance = 1e-12;
};

// Integration aborts (DivergenceError) once |x| exceeds this.
inline constexpr double kDivergenceThreshold = 1e12;

// Uniform nodes on [0, t_end] refined so every field breakpoint inside
// (0, t_end) is a node. Near-coincident uniform nodes are dropped in favour
// of the exact breakpoint.
std::vector<double> integration_grid(const VectorField& f, double t_end, int steps);

// x' = f(x, t), x(0) = xi, integrated to t_end on the refined grid.
//
// Piecewise-constant fields are evaluated at step midpoints (strictly inside
// the active piece); continuous fields use the textbook stage times, which
// for the Euler method means the left endpoint — this is what makes an
// extracted explicit-Euler network bitwise-comparable to the solver.
Trajectory solve_flow(const VectorField& f, const Eigen::VectorXd& xi, double t_end,
                      const SolverConfig& cfg = {});

struct PicardResult {
    // x_0 (constant at xi) through x_n, all on the shared refined grid.
    std::vector<Trajectory> iterates;
    // sup_t |x_k - x_{k-1}| for k = 1..n.
    std::vector<double> successive_gaps;
};

// Successive approximation x_k(t) = xi + integral of f(x_{k-1}(s), s), the
// integral evaluated by composite midpoint on the refined grid.
PicardResult picard_iterates(const VectorField& f, const Eigen::VectorXd& xi,
                             double t_end, const SolverConfig& cfg = {});

// Flow from every grid point of d, in grid order. Thread-count only changes
// scheduling, never values or order.
std::vector<Trajectory> flow_on_domain(const VectorField& f, const Domain& d,
                                       double t_end, const SolverConfig& cfg = {},
                                       int threads = 1);

// Euler or RK4 on a caller-supplied strictly increasing grid starting at 0.
// Used to compare flows of different fields node by node; the caller is
// responsible for aligning the grid with any field breakpoints (merge the
// integration_grid outputs of both fields).
Trajectory solve_flow_on_grid(const VectorField& f, const Eigen::VectorXd& xi,
                              const std::vector<double>& grid,
                              SolveMethod method = SolveMethod::rk4_reference);

// Sorted union with near-duplicate collapse.
std::vector<double> merge_time_grids(const std::vector<double>& a,
                                     const std::vector<double>& b);

}  // namespace odenet
