#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <vector>

#include "odenet/errors.hpp"

namespace odenet {

// Solution samples x(t_k) on a strictly increasing grid starting at 0.
struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;

    std::size_t size() const { return times.size(); }
    const Eigen::VectorXd& initial() const { return states.front(); }
    const Eigen::VectorXd& final_state() const { return states.back(); }

    // Linear interpolation between grid nodes; exact at nodes.
    Eigen::VectorXd state_at(double t) const {
        if (times.empty()) throw PreconditionError("Trajectory: empty");
        if (t < times.front() || t > times.back())
            throw TimeRangeError("Trajectory: t outside sampled range");
        auto it = std::upper_bound(times.begin(), times.end(), t);
        if (it == times.begin()) return states.front();
        if (it == times.end()) return states.back();
        std::size_t j = static_cast<std::size_t>(it - times.begin()) - 1;
        double w = (t - times[j]) / (times[j + 1] - times[j]);
        return (1.0 - w) * states[j] + w * states[j + 1];
    }

    double max_norm() const {
        double m = 0.0;
        for (const auto& s : states) m = std::max(m, s.norm());
        return m;
    }
};

// Max node distance between trajectories sharing one grid.
inline double sup_distance(const Trajectory& a, const Trajectory& b) {
    if (a.times.size() != b.times.size())
        throw PreconditionError("sup_distance: trajectories on different grids");
    double m = 0.0;
    for (std::size_t k = 0; k < a.states.size(); ++k)
        m = std::max(m, (a.states[k] - b.states[k]).norm());
    return m;
}

}  // namespace odenet
