#include "odenet/activation.hpp"

#include <cmath>
#include <limits>

#include "odenet/errors.hpp"

namespace odenet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + e^s) without overflow for large |s|.
double softplus_stable(double s) {
    if (s > 0.0) return s + std::log1p(std::exp(-s));
    return std::log1p(std::exp(s));
}
}  // namespace

Activation Activation::tanh() { return Activation(ActivationKind::tanh, 1.0, 0, kInf); }
Activation Activation::sigmoid() { return Activation(ActivationKind::sigmoid, 0.25, 0, kInf); }
Activation Activation::relu() { return Activation(ActivationKind::relu, 1.0, 0, kInf); }
Activation Activation::softplus() { return Activation(ActivationKind::softplus, 1.0, 0, kInf); }

Activation Activation::truncated_power(int power, double valid_radius) {
    if (power < 1)
        throw PreconditionError("Activation: truncated_power needs power >= 1");
    if (!(valid_radius > 0.0))
        throw PreconditionError("Activation: truncated_power needs valid_radius > 0");
    // max(s,0)^p has derivative p s^(p-1) on [0, r]; p = 1 is relu.
    double lip = power == 1 ? 1.0 : power * std::pow(valid_radius, power - 1);
    return Activation(ActivationKind::truncated_power, lip, power, valid_radius);
}

double Activation::operator()(double s) const {
    switch (kind_) {
        case ActivationKind::tanh: return std::tanh(s);
        case ActivationKind::sigmoid: return 1.0 / (1.0 + std::exp(-s));
        case ActivationKind::relu: return s > 0.0 ? s : 0.0;
        case ActivationKind::softplus: return softplus_stable(s);
        case ActivationKind::truncated_power:
            return s > 0.0 ? std::pow(s, power_) : 0.0;
    }
    return 0.0;
}

Eigen::VectorXd Activation::operator()(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = (*this)(v[i]);
    return out;
}

double Activation::sup_on_radius(double r) const {
    if (r < 0.0) throw PreconditionError("Activation: sup radius must be >= 0");
    return std::max(std::abs((*this)(r)), std::abs((*this)(-r)));
}

double Activation::sup_on_ball(double r, int dim) const {
    if (dim < 1) throw PreconditionError("Activation: ball dimension must be >= 1");
    return std::sqrt(static_cast<double>(dim)) * sup_on_radius(r);
}

std::string Activation::name() const {
    switch (kind_) {
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::sigmoid: return "sigmoid";
        case ActivationKind::relu: return "relu";
        case ActivationKind::softplus: return "softplus";
        case ActivationKind::truncated_power: return "truncated_power";
    }
    return "unknown";
}

bool Activation::operator==(const Activation& other) const {
    return kind_ == other.kind_ && power_ == other.power_ &&
           lipschitz_ == other.lipschitz_ && valid_radius_ == other.valid_radius_;
}

}  // namespace odenet
