#pragma once

#include <Eigen/Core>
#include <string>

namespace odenet {

enum class ActivationKind { tanh, sigmoid, relu, softplus, truncated_power };

// Scalar nonlinearity applied componentwise, bundled with a certified
// Lipschitz constant. tanh/sigmoid/relu/softplus are globally Lipschitz;
// truncated_power s -> max(s,0)^p for p >= 2 only on [-valid_radius,
// valid_radius], where the certificate is p * valid_radius^(p-1).
class Activation {
public:
    static Activation tanh();
    static Activation sigmoid();
    static Activation relu();
    static Activation softplus();
    static Activation truncated_power(int power, double valid_radius);

    ActivationKind kind() const { return kind_; }
    int power() const { return power_; }
    double lipschitz() const { return lipschitz_; }
    double valid_radius() const { return valid_radius_; }

    double operator()(double s) const;
    Eigen::VectorXd operator()(const Eigen::VectorXd& v) const;

    // Exact sup of |sigma| over [-r, r]; every supported kind is
    // nondecreasing, so the sup sits at an endpoint.
    double sup_on_radius(double r) const;

    // Upper bound for |sigma(x)|_2 over the euclidean ball of radius r in
    // R^dim (componentwise: |x_i| <= |x|_2 <= r).
    double sup_on_ball(double r, int dim) const;

    // "tanh", "sigmoid", "relu", "softplus", "truncated_power"
    std::string name() const;

    bool operator==(const Activation& other) const;

private:
    Activation(ActivationKind kind, double lipschitz, int power, double valid_radius)
        : kind_(kind), lipschitz_(lipschitz), power_(power), valid_radius_(valid_radius) {}

    ActivationKind kind_;
    double lipschitz_;
    int power_ = 0;
    double valid_radius_;
};

}  // namespace odenet
