#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "odenet/domain.hpp"
#include "odenet/errors.hpp"

namespace odenet {

// A Lipschitz-in-x vector field f(x, t) on t in [0, horizon], carrying the
// certificate every Gronwall-type bound consumes: lipschitz_x must dominate
// |f(x,t) - f(y,t)| / |x - y| for all x, y and admissible t.
//
// Fields are either continuous in t or piecewise constant in t. Piecewise
// fields follow the left-open convention: the value on (t_{l-1}, t_l] applies
// at t_l, and t = 0 takes the first interval's value. Integrators align their
// grids with the breakpoints and sample strictly inside each piece.
class VectorField {
public:
    using Fn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;

    // Continuous-in-time field.
    VectorField(int dim, double lipschitz_x, double horizon, Fn fn);
    // Piecewise-constant-in-time field; breakpoints are the interior jump
    // times, strictly increasing, inside (0, horizon).
    VectorField(int dim, double lipschitz_x, double horizon, Fn fn,
                std::vector<double> breakpoints);

    int dimension() const { return dim_; }
    double lipschitz_x() const { return lipschitz_; }
    double horizon() const { return horizon_; }
    bool piecewise_constant() const { return piecewise_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    Eigen::VectorXd operator()(const Eigen::VectorXd& x, double t) const;

private:
    int dim_;
    double lipschitz_;
    double horizon_;
    Fn fn_;
    bool piecewise_ = false;
    std::vector<double> breakpoints_;
};

// Explicit step-in-time field: autonomous piece fields f_i apply on
// (times[i], times[i+1]], with times[0] = 0 and times.back() = horizon.
struct PiecewiseField {
    std::vector<double> times;
    std::vector<VectorField> pieces;

    PiecewiseField(std::vector<double> ts, std::vector<VectorField> ps);

    int dimension() const { return pieces.front().dimension(); }
    double horizon() const { return times.back(); }
    std::size_t piece_index(double t) const;

    // Max of the per-piece certificates.
    double lipschitz() const;

    VectorField as_field() const;

    // (1/T) integral of the step function: the weighted sum of the pieces.
    VectorField averaged() const;

    // Value pattern of t -> f(x, m t) on the same horizon, treating *this as
    // one period: the piece layout tiled m times, compressed by m.
    PiecewiseField accelerated(int m) const;
};

// Built-in fields for experiments and tests.
namespace fields {

// f(x, t) = c
VectorField constant(const Eigen::VectorXd& c, double horizon = 1.0);

// f(x, t) = a x, certificate |a|_2
VectorField linear(const Eigen::MatrixXd& a, double horizon = 1.0);

// f(x, t) = c ⊙ tanh(a x), certificate max|c_i| |a|_2
VectorField scaled_tanh(const Eigen::VectorXd& c, const Eigen::MatrixXd& a,
                        double horizon = 1.0);

// f(x, t) = -tanh(x) componentwise
VectorField neg_tanh(int dim = 1, double horizon = 1.0);

// 2-D, f(x, t) = tanh(R(turn_rate * t) x) with R a rotation matrix.
VectorField tanh_rotation(double turn_rate, double horizon = 1.0);

// 1-D mean-zero switch: +level on the first half period, -level on the second.
PiecewiseField alternating_constant(double level, double period);

// A1 x on the first half period, A2 x on the second.
PiecewiseField alternating_linear(const Eigen::MatrixXd& a1,
                                  const Eigen::MatrixXd& a2, double period);

}  // namespace fields

// Max sampled Lipschitz quotient of f over pairs of D's grid points at shared
// times: t_samples midpoints of [0, horizon] for continuous fields, piece
// midpoints for piecewise ones. All grid pairs are enumerated when the grid
// is small; otherwise a seeded sample of pairs is used.
double estimate_lipschitz(const VectorField& f, const Domain& d, int t_samples);

}  // namespace odenet
