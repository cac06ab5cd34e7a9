#pragma once

#include <Eigen/Core>
#include <vector>

#include "odenet/activation.hpp"
#include "odenet/field.hpp"

namespace odenet {

enum class ControlRepresentation { piecewise_constant, sampled_continuous };

// Shared arithmetic kernel for alpha ⊙ sigma(beta x + gamma). The explicit
// Euler network and the continuous solver both call this, so identical
// parameter values produce bitwise-identical right-hand sides.
Eigen::VectorXd neuron_rhs(const Activation& sigma, const Eigen::VectorXd& alpha,
                           const Eigen::MatrixXd& beta, const Eigen::VectorXd& gamma,
                           const Eigen::VectorXd& x);

// Time-dependent single-neuron parameters on [0, horizon]; the induced field
// is h(x, t) = alpha(t) ⊙ sigma(beta(t) x + gamma(t)).
//
// piecewise_constant: times = breakpoints 0 = t_0 < ... < t_M = horizon,
//   values[l] applies on (t_l, t_{l+1}] and at t = 0 (left-open convention).
// sampled_continuous: times = sample instants t_0 = 0 < ... < t_{M-1} =
//   horizon; values are interpolated linearly between neighbours.
class NeuronControls {
public:
    NeuronControls(Activation sigma, ControlRepresentation repr,
                   std::vector<double> times,
                   std::vector<Eigen::VectorXd> alpha,
                   std::vector<Eigen::MatrixXd> beta,
                   std::vector<Eigen::VectorXd> gamma);

    // Single segment holding (alpha, beta, gamma) on all of [0, horizon].
    static NeuronControls constant(Activation sigma, const Eigen::VectorXd& alpha,
                                   const Eigen::MatrixXd& beta,
                                   const Eigen::VectorXd& gamma, double horizon);

    int dimension() const { return static_cast<int>(alpha_.front().size()); }
    double horizon() const { return times_.back(); }
    ControlRepresentation representation() const { return repr_; }
    const Activation& sigma() const { return sigma_; }
    const std::vector<double>& times() const { return times_; }
    std::size_t value_count() const { return alpha_.size(); }

    const Eigen::VectorXd& alpha_value(std::size_t i) const { return alpha_[i]; }
    const Eigen::MatrixXd& beta_value(std::size_t i) const { return beta_[i]; }
    const Eigen::VectorXd& gamma_value(std::size_t i) const { return gamma_[i]; }

    // Control lookups; throw TimeRangeError outside [0, horizon].
    Eigen::VectorXd alpha_at(double t) const;
    Eigen::MatrixXd beta_at(double t) const;
    Eigen::VectorXd gamma_at(double t) const;

    // h(x, t)
    Eigen::VectorXd eval(const Eigen::VectorXd& x, double t) const;

    // Exact sup norms over [0, horizon]: the max over stored values. For the
    // sampled representation the interpolant is a convex combination of
    // neighbours, so the sample max still dominates.
    double sup_alpha() const;  // euclidean norm
    double sup_beta() const;   // spectral norm
    double sup_gamma() const;  // euclidean norm

    // sup|alpha| * sup|beta| * Lip(sigma)
    double lipschitz_x() const;

    VectorField as_field() const;

private:
    std::size_t segment_of(double t) const;

    Activation sigma_;
    ControlRepresentation repr_;
    std::vector<double> times_;
    std::vector<Eigen::VectorXd> alpha_;
    std::vector<Eigen::MatrixXd> beta_;
    std::vector<Eigen::VectorXd> gamma_;
};

// Spec'd free-function spelling of NeuronControls::eval.
inline Eigen::VectorXd eval_neuron_field(const NeuronControls& c,
                                         const Eigen::VectorXd& x, double t) {
    return c.eval(x, t);
}

// Joins piecewise-constant slices end to end. Each slice must start at 0;
// consecutive horizons accumulate. Slice boundaries must match bitwise when
// the caller precomputed global times (see pipeline assembly).
NeuronControls concat_controls(const std::vector<NeuronControls>& slices,
                               const std::vector<double>& offsets);

}  // namespace odenet
