#include "odenet/domain.hpp"

#include <cmath>

namespace odenet {

Domain::Domain(Eigen::VectorXd lo, Eigen::VectorXd up, int samples)
    : lower(std::move(lo)), upper(std::move(up)), samples_per_axis(samples) {
    if (lower.size() == 0 || lower.size() != upper.size())
        throw DimensionError("Domain: lower/upper must be nonempty and equal-length");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] > upper[i])
            throw PreconditionError("Domain: bounds must be finite with lower <= upper");
    }
    if (samples_per_axis < 1)
        throw PreconditionError("Domain: samples_per_axis must be >= 1");
}

Domain Domain::centered_box(int dim, double radius, int samples) {
    if (dim < 1) throw PreconditionError("Domain: dimension must be >= 1");
    if (radius < 0.0) throw PreconditionError("Domain: radius must be >= 0");
    Eigen::VectorXd r = Eigen::VectorXd::Constant(dim, radius);
    return Domain(-r, r, samples);
}

double Domain::max_point_norm() const {
    const int n = dimension();
    double best = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double sq = 0.0;
        for (int i = 0; i < n; ++i) {
            double c = (mask >> i) & 1 ? upper[i] : lower[i];
            sq += c * c;
        }
        best = std::max(best, sq);
    }
    return std::sqrt(best);
}

Domain Domain::inflated(double margin) const {
    if (margin < 0.0) throw PreconditionError("Domain: inflation margin must be >= 0");
    Domain d = *this;
    d.lower.array() -= margin;
    d.upper.array() += margin;
    return d;
}

Domain Domain::with_samples(int samples) const {
    Domain d = *this;
    d.samples_per_axis = samples;
    if (samples < 1) throw PreconditionError("Domain: samples_per_axis must be >= 1");
    return d;
}

bool Domain::contains(const Eigen::VectorXd& x, double slack) const {
    if (x.size() != lower.size())
        throw DimensionError("Domain::contains: point dimension mismatch");
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] < lower[i] - slack || x[i] > upper[i] + slack) return false;
    }
    return true;
}

std::vector<Eigen::VectorXd> Domain::grid() const {
    const int n = dimension();
    const int k = samples_per_axis;
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(k);

    std::vector<Eigen::VectorXd> pts;
    pts.reserve(total);
    std::vector<int> idx(n, 0);
    Eigen::VectorXd x(n);
    for (std::size_t p = 0; p < total; ++p) {
        for (int i = 0; i < n; ++i) {
            if (k == 1) {
                x[i] = 0.5 * (lower[i] + upper[i]);
            } else {
                double t = static_cast<double>(idx[i]) / static_cast<double>(k - 1);
                x[i] = lower[i] + t * (upper[i] - lower[i]);
            }
        }
        pts.push_back(x);
        for (int i = 0; i < n; ++i) {  // axis 0 fastest
            if (++idx[i] < k) break;
            idx[i] = 0;
        }
    }
    return pts;
}

}  // namespace odenet
