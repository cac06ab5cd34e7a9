#include "odenet/resnet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "odenet/bounds.hpp"

namespace odenet {

ResNetModel::ResNetModel(Activation sigma, double horizon,
                         std::vector<ResNetLayer> layers)
    : sigma_(std::move(sigma)), horizon_(horizon), layers_(std::move(layers)) {
    if (layers_.empty())
        throw PreconditionError("ResNetModel: needs at least one layer");
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
        throw PreconditionError("ResNetModel: horizon must be finite and > 0");
    const auto dim = layers_.front().alpha.size();
    for (const auto& l : layers_) {
        if (l.alpha.size() != dim || l.gamma.size() != dim ||
            l.beta.rows() != dim || l.beta.cols() != dim)
            throw DimensionError("ResNetModel: inconsistent layer shapes");
        if (!l.alpha.allFinite() || !l.beta.allFinite() || !l.gamma.allFinite())
            throw PreconditionError("ResNetModel: non-finite layer");
    }
}

Eigen::VectorXd ResNetModel::forward(const Eigen::VectorXd& x) const {
    return forward_trajectory(x).final_state();
}

Trajectory ResNetModel::forward_trajectory(const Eigen::VectorXd& x) const {
    if (x.size() != dimension())
        throw DimensionError("ResNetModel: input dimension mismatch");
    const double h = step();
    Trajectory tr;
    tr.times.resize(layers_.size() + 1);
    for (std::size_t l = 0; l <= layers_.size(); ++l)
        tr.times[l] = horizon_ * (static_cast<double>(l) / depth());
    tr.states.reserve(layers_.size() + 1);
    tr.states.push_back(x);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const ResNetLayer& layer = layers_[l];
        Eigen::VectorXd next =
            tr.states.back() +
            h * neuron_rhs(sigma_, layer.alpha, layer.beta, layer.gamma,
                           tr.states.back());
        if (!next.allFinite() || next.norm() > kDivergenceThreshold)
            throw DivergenceError(
                "ResNetModel: forward pass diverged after layer " + std::to_string(l + 1),
                tr.times[l + 1]);
        tr.states.push_back(std::move(next));
    }
    return tr;
}

ResNetModel extract_resnet(const NeuronControls& controls, int depth) {
    if (depth < 1) throw PreconditionError("extract_resnet: depth must be >= 1");
    if (controls.representation() != ControlRepresentation::sampled_continuous)
        throw PreconditionError(
            "extract_resnet: controls must be continuous; smooth piecewise "
            "controls first");
    const double t_end = controls.horizon();
    std::vector<ResNetLayer> layers(depth);
    for (int l = 0; l < depth; ++l) {
        double t = t_end * (static_cast<double>(l) / depth);  // left endpoint
        layers[l] = {controls.alpha_at(t), controls.beta_at(t), controls.gamma_at(t)};
    }
    return ResNetModel(controls.sigma(), t_end, std::move(layers));
}

DepthStudy depth_convergence_study(const NeuronControls& controls, const Domain& d,
                                   const std::vector<int>& depths,
                                   const SolverConfig& cfg) {
    if (depths.empty())
        throw PreconditionError("depth_convergence_study: depths must not be empty");
    if (d.dimension() != controls.dimension())
        throw DimensionError("depth_convergence_study: domain dimension mismatch");

    const double t_end = controls.horizon();
    const VectorField field = controls.as_field();
    int max_depth = *std::max_element(depths.begin(), depths.end());
    int steps = std::max({cfg.time_steps, 8 * max_depth,
                          2 * (static_cast<int>(controls.value_count()) - 1)});
    steps = std::min(steps, 262144);

    SolverConfig ref = cfg;
    ref.method = SolveMethod::rk4_reference;
    ref.time_steps = steps;

    auto pts = d.grid();
    std::vector<Trajectory> flows;
    flows.reserve(pts.size());
    for (const auto& xi : pts) flows.push_back(solve_flow(field, xi, t_end, ref));

    // Field values along every reference flow, subsampled for the modulus scan.
    std::vector<std::vector<double>> mts(flows.size());
    std::vector<std::vector<Eigen::VectorXd>> mvs(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const Trajectory& probe = flows[i];
        std::size_t stride = std::max<std::size_t>(1, probe.size() / 2048);
        for (std::size_t k = 0; k < probe.size(); k += stride) {
            mts[i].push_back(probe.times[k]);
            mvs[i].push_back(field(probe.states[k], probe.times[k]));
        }
    }

    DepthStudy study;
    study.rate = controls.sup_alpha() * controls.sup_beta() *
                 controls.sigma().lipschitz();
    for (int depth : depths) {
        if (depth < 1)
            throw PreconditionError("depth_convergence_study: depth must be >= 1");
        ResNetModel model = extract_resnet(controls, depth);

        double err = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            Trajectory net = model.forward_trajectory(pts[i]);
            for (std::size_t l = 0; l < net.size(); ++l)
                err = std::max(err, (net.states[l] -
                                     flows[i].state_at(net.times[l])).norm());
        }

        double window = t_end / depth;
        double omega = 0.0;
        for (std::size_t i = 0; i < flows.size(); ++i) {
            const auto& mt = mts[i];
            const auto& mv = mvs[i];
            for (std::size_t a = 0; a < mt.size(); ++a)
                for (std::size_t b = a + 1;
                     b < mt.size() && mt[b] - mt[a] <= window * (1.0 + 1e-12); ++b)
                    omega = std::max(omega, (mv[b] - mv[a]).norm());
        }

        DepthRow row;
        row.depth = depth;
        row.sup_error = err;
        row.modulus = omega;
        // Rate 0 means the field ignores the state; the accumulated Euler
        // error is then at most t_end * omega, the limit the exponential
        // envelope approaches from above as the rate shrinks.
        row.envelope = study.rate > 0.0
                           ? resnet_error_envelope(study.rate, t_end, omega)
                           : t_end * omega;
        study.rows.push_back(row);
    }
    return study;
}

}  // namespace odenet
