#pragma once

#include <vector>

#include "odenet/activation.hpp"
#include "odenet/controls.hpp"
#include "odenet/domain.hpp"
#include "odenet/solver.hpp"
#include "odenet/trajectory.hpp"

namespace odenet {

// One explicit Euler layer x + step * alpha ⊙ sigma(beta x + gamma).
struct ResNetLayer {
    Eigen::VectorXd alpha;
    Eigen::MatrixXd beta;
    Eigen::VectorXd gamma;
};

// Finite-depth residual network: depth equal Euler steps across [0, horizon].
class ResNetModel {
public:
    ResNetModel(Activation sigma, double horizon, std::vector<ResNetLayer> layers);

    int dimension() const { return static_cast<int>(layers_.front().alpha.size()); }
    int depth() const { return static_cast<int>(layers_.size()); }
    double horizon() const { return horizon_; }
    double step() const { return horizon_ / depth(); }
    const Activation& sigma() const { return sigma_; }
    const std::vector<ResNetLayer>& layers() const { return layers_; }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

    // Layer states as a trajectory on the uniform layer grid.
    Trajectory forward_trajectory(const Eigen::VectorXd& x) const;

private:
    Activation sigma_;
    double horizon_;
    std::vector<ResNetLayer> layers_;
};

// Reads continuous controls at the left endpoint of each of depth equal
// steps. Piecewise-constant controls are rejected (smooth them first): their
// jumps make left-endpoint samples meaningless.
ResNetModel extract_resnet(const NeuronControls& controls, int depth);

struct DepthRow {
    int depth = 0;
    double sup_error = 0.0;  // max over grid starts and layers vs the flow
    double modulus = 0.0;    // field modulus of continuity over one step
    double envelope = 0.0;   // e^(c t) modulus / c
};

struct DepthStudy {
    double rate = 0.0;  // c = sup|alpha| sup|beta| Lip(sigma)
    std::vector<DepthRow> rows;
};

// Compares network layer states against the continuous flow of the controls
// from every grid point of d, one row per depth. The modulus is measured
// along the reference flow: the largest field-value change between reference
// nodes at most one layer step apart.
DepthStudy depth_convergence_study(const NeuronControls& controls, const Domain& d,
                                   const std::vector<int>& depths,
                                   const SolverConfig& cfg = {});

}  // namespace odenet
