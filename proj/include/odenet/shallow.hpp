#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "odenet/activation.hpp"
#include "odenet/domain.hpp"
#include "odenet/field.hpp"

namespace odenet {

// One random feature a * sigma(b . x + c) of a scalar fit.
struct ScalarTerm {
    double weight = 0.0;
    Eigen::VectorXd direction;
    double offset = 0.0;
};

struct ScalarFit {
    std::vector<ScalarTerm> terms;
    double train_sup_error = 0.0;
};

// One vector neuron alpha ⊙ sigma(beta x + gamma).
struct ShallowTerm {
    Eigen::VectorXd alpha;
    Eigen::MatrixXd beta;
    Eigen::VectorXd gamma;
};

// Sum of neuron terms sharing one activation, evaluated in storage order.
// Component j of a term only reads row j of that term, so stacked scalar
// fits decouple exactly.
class ShallowField {
public:
    ShallowField(Activation sigma, std::vector<ShallowTerm> terms);

    int dimension() const { return static_cast<int>(terms_.front().alpha.size()); }
    std::size_t width() const { return terms_.size(); }
    const Activation& sigma() const { return sigma_; }
    const std::vector<ShallowTerm>& terms() const { return terms_; }

    Eigen::VectorXd eval(const Eigen::VectorXd& x) const;

    // Sum over terms of |alpha| |beta| Lip(sigma).
    double lipschitz_x() const;

    // Autonomous field evaluating the term sum.
    VectorField as_field(double horizon) const;

private:
    Activation sigma_;
    std::vector<ShallowTerm> terms_;
};

struct FitConfig {
    int width_per_component = 8;
    double feature_scale = 2.0;  // direction entries drawn from U[-scale, scale]
    double ridge = 1e-10;        // Tikhonov weight per sample; 0 = plain least squares
    std::uint64_t seed = 1;
    double target_sup_error = 1e-2;
    int max_escalations = 6;  // width doublings allowed
};

// Least-squares fit of fn on the grid of region using `width` random
// features from the seeded stream. Offsets are drawn at feature_scale times
// the largest coordinate radius of region. Throws ConditioningError when
// ridge = 0 and the feature matrix is rank deficient.
ScalarFit fit_scalar(const std::function<double(const Eigen::VectorXd&)>& fn,
                     const Domain& region, const Activation& sigma, int width,
                     double feature_scale, double ridge, std::uint64_t seed);

// Merges per-component scalar fits into max_j(width_j) vector neurons:
// neuron k carries term k of every component, shorter components padded with
// zero rows. All-zero neurons are dropped (at least one is kept).
ShallowField stack_components(const std::vector<ScalarFit>& fits, Activation sigma);

struct VectorFitResult {
    ShallowField field;
    double validation_sup_error = 0.0;
    int width_used = 0;
};

// Component-wise random-feature fit with width escalation: doubles the
// per-component width until the sup error on a refined validation grid
// meets cfg.target_sup_error; throws ApproximationError past
// cfg.max_escalations doublings.
VectorFitResult fit_vector_field(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn,
    const Domain& region, const Activation& sigma, const FitConfig& cfg);

}  // namespace odenet
