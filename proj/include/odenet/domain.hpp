#pragma once

#include <Eigen/Core>
#include <vector>

#include "odenet/errors.hpp"

namespace odenet {

// Axis-aligned box [lower, upper] in R^N with a uniform sampling resolution.
// Grids are the measurement backbone: sup norms over the box are approximated
// by maxima over grid(), while max_point_norm() is exact (boxes attain norm
// maxima at corners).
struct Domain {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    int samples_per_axis = 9;

    Domain() = default;
    Domain(Eigen::VectorXd lo, Eigen::VectorXd up, int samples);

    // [-radius, radius]^dim
    static Domain centered_box(int dim, double radius, int samples);

    int dimension() const { return static_cast<int>(lower.size()); }

    // Exact max of |x|_2 over the box (evaluated at the 2^N corners).
    double max_point_norm() const;

    // Box grown by margin on every axis; sampling resolution kept.
    Domain inflated(double margin) const;

    Domain with_samples(int samples) const;

    // True if x lies in the box, within slack per axis.
    bool contains(const Eigen::VectorXd& x, double slack = 0.0) const;

    // samples_per_axis^N points in lexicographic order, axis 0 fastest.
    // Endpoints are included; samples_per_axis == 1 degenerates to the center.
    std::vector<Eigen::VectorXd> grid() const;
};

}  // namespace odenet
