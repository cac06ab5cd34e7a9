#include "odenet/controls.hpp"

#include <algorithm>
#include <cmath>

#include "odenet/linalg.hpp"

namespace odenet {

Eigen::VectorXd neuron_rhs(const Activation& sigma, const Eigen::VectorXd& alpha,
                           const Eigen::MatrixXd& beta, const Eigen::VectorXd& gamma,
                           const Eigen::VectorXd& x) {
    if (beta.rows() != beta.cols() || beta.rows() != alpha.size() ||
        gamma.size() != alpha.size() || x.size() != alpha.size())
        throw DimensionError("neuron_rhs: alpha/beta/gamma/x sizes disagree");
    return hadamard(alpha, sigma(beta * x + gamma));
}

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

NeuronControls::NeuronControls(Activation sigma, ControlRepresentation repr,
                               std::vector<double> times,
                               std::vector<Eigen::VectorXd> alpha,
                               std::vector<Eigen::MatrixXd> beta,
                               std::vector<Eigen::VectorXd> gamma)
    : sigma_(sigma), repr_(repr), times_(std::move(times)),
      alpha_(std::move(alpha)), beta_(std::move(beta)), gamma_(std::move(gamma)) {
    const std::size_t expected_times =
        repr_ == ControlRepresentation::piecewise_constant ? alpha_.size() + 1
                                                           : alpha_.size();
    if (alpha_.empty() || beta_.size() != alpha_.size() || gamma_.size() != alpha_.size())
        throw DimensionError("NeuronControls: alpha/beta/gamma counts disagree or empty");
    if (times_.size() != expected_times || times_.size() < 2)
        throw PreconditionError("NeuronControls: wrong number of time points");
    if (times_.front() != 0.0)
        throw PreconditionError("NeuronControls: times must start at 0");
    for (std::size_t i = 0; i + 1 < times_.size(); ++i)
        if (!(times_[i] < times_[i + 1]))
            throw PreconditionError("NeuronControls: times must increase strictly");
    if (!(times_.back() > 0.0) || !std::isfinite(times_.back()))
        throw PreconditionError("NeuronControls: horizon must be finite and > 0");

    const Eigen::Index n = alpha_.front().size();
    if (n < 1) throw DimensionError("NeuronControls: dimension must be >= 1");
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
        if (alpha_[i].size() != n || gamma_[i].size() != n ||
            beta_[i].rows() != n || beta_[i].cols() != n)
            throw DimensionError("NeuronControls: value " + std::to_string(i) +
                                 " has inconsistent dimensions");
        if (!all_finite(alpha_[i]) || !all_finite(beta_[i]) || !all_finite(gamma_[i]))
            throw PreconditionError("NeuronControls: value " + std::to_string(i) +
                                    " contains non-finite entries");
    }
}

NeuronControls NeuronControls::constant(Activation sigma, const Eigen::VectorXd& alpha,
                                        const Eigen::MatrixXd& beta,
                                        const Eigen::VectorXd& gamma, double horizon) {
    return NeuronControls(sigma, ControlRepresentation::piecewise_constant,
                          {0.0, horizon}, {alpha}, {beta}, {gamma});
}

std::size_t NeuronControls::segment_of(double t) const {
    if (t < 0.0 || t > horizon())
        throw TimeRangeError("NeuronControls: t = " + std::to_string(t) +
                             " outside [0, " + std::to_string(horizon()) + "]");
    if (repr_ == ControlRepresentation::piecewise_constant) {
        if (t <= times_.front()) return 0;
        auto it = std::lower_bound(times_.begin() + 1, times_.end(), t);
        return static_cast<std::size_t>(it - times_.begin()) - 1;
    }
    // Interpolation cell index: t in [times[j], times[j+1]].
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t j = static_cast<std::size_t>(it - times_.begin());
    if (j == 0) return 0;
    if (j >= times_.size()) return times_.size() - 2;
    return j - 1;
}

Eigen::VectorXd NeuronControls::alpha_at(double t) const {
    std::size_t j = segment_of(t);
    if (repr_ == ControlRepresentation::piecewise_constant) return alpha_[j];
    double w = (t - times_[j]) / (times_[j + 1] - times_[j]);
    return (1.0 - w) * alpha_[j] + w * alpha_[j + 1];
}

Eigen::MatrixXd NeuronControls::beta_at(double t) const {
    std::size_t j = segment_of(t);
    if (repr_ == ControlRepresentation::piecewise_constant) return beta_[j];
    double w = (t - times_[j]) / (times_[j + 1] - times_[j]);
    return (1.0 - w) * beta_[j] + w * beta_[j + 1];
}

Eigen::VectorXd NeuronControls::gamma_at(double t) const {
    std::size_t j = segment_of(t);
    if (repr_ == ControlRepresentation::piecewise_constant) return gamma_[j];
    double w = (t - times_[j]) / (times_[j + 1] - times_[j]);
    return (1.0 - w) * gamma_[j] + w * gamma_[j + 1];
}

Eigen::VectorXd NeuronControls::eval(const Eigen::VectorXd& x, double t) const {
    std::size_t j = segment_of(t);
    if (repr_ == ControlRepresentation::piecewise_constant)
        return neuron_rhs(sigma_, alpha_[j], beta_[j], gamma_[j], x);
    double w = (t - times_[j]) / (times_[j + 1] - times_[j]);
    return neuron_rhs(sigma_, (1.0 - w) * alpha_[j] + w * alpha_[j + 1],
                      (1.0 - w) * beta_[j] + w * beta_[j + 1],
                      (1.0 - w) * gamma_[j] + w * gamma_[j + 1], x);
}

double NeuronControls::sup_alpha() const {
    double m = 0.0;
    for (const auto& a : alpha_) m = std::max(m, a.norm());
    return m;
}

double NeuronControls::sup_beta() const {
    double m = 0.0;
    for (const auto& b : beta_) m = std::max(m, operator_norm(b));
    return m;
}

double NeuronControls::sup_gamma() const {
    double m = 0.0;
    for (const auto& g : gamma_) m = std::max(m, g.norm());
    return m;
}

double NeuronControls::lipschitz_x() const {
    return sup_alpha() * sup_beta() * sigma_.lipschitz();
}

VectorField NeuronControls::as_field() const {
    NeuronControls self = *this;
    auto fn = [self](const Eigen::VectorXd& x, double t) { return self.eval(x, t); };
    if (repr_ == ControlRepresentation::piecewise_constant) {
        std::vector<double> interior(times_.begin() + 1, times_.end() - 1);
        return VectorField(dimension(), lipschitz_x(), horizon(), fn, std::move(interior));
    }
    return VectorField(dimension(), lipschitz_x(), horizon(), fn);
}

NeuronControls concat_controls(const std::vector<NeuronControls>& slices,
                               const std::vector<double>& offsets) {
    if (slices.empty() || offsets.size() != slices.size())
        throw PreconditionError("concat_controls: need one offset per slice");
    if (offsets.front() != 0.0)
        throw PreconditionError("concat_controls: first offset must be 0");

    std::vector<double> times{0.0};
    std::vector<Eigen::VectorXd> alpha;
    std::vector<Eigen::MatrixXd> beta;
    std::vector<Eigen::VectorXd> gamma;
    for (std::size_t l = 0; l < slices.size(); ++l) {
        const auto& s = slices[l];
        if (s.representation() != ControlRepresentation::piecewise_constant)
            throw PreconditionError("concat_controls: slices must be piecewise constant");
        if (!(s.sigma() == slices.front().sigma()))
            throw PreconditionError("concat_controls: slices disagree on activation");
        const auto& lt = s.times();
        for (std::size_t i = 0; i + 1 < lt.size(); ++i) {
            alpha.push_back(s.alpha_value(i));
            beta.push_back(s.beta_value(i));
            gamma.push_back(s.gamma_value(i));
            // Interior boundaries take the *next* slice's exact offset so
            // adjacent slices share one breakpoint bitwise.
            bool last_in_slice = (i + 2 == lt.size());
            double global = last_in_slice
                                ? (l + 1 < slices.size() ? offsets[l + 1]
                                                         : offsets[l] + lt.back())
                                : offsets[l] + lt[i + 1];
            times.push_back(global);
        }
    }
    return NeuronControls(slices.front().sigma(),
                          ControlRepresentation::piecewise_constant,
                          std::move(times), std::move(alpha), std::move(beta),
                          std::move(gamma));
}

}  // namespace odenet
