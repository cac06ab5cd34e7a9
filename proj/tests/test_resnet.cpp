#include <cmath>
#include <vector>

#include "doctest.h"
#include "odenet/resnet.hpp"
#include "odenet/solver.hpp"

using namespace odenet;

namespace {

// Smooth 1-D controls sampled densely enough that interpolation error is
// negligible next to the Euler error under study.
NeuronControls smooth_controls(int samples, double horizon) {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> alpha, gamma;
    std::vector<Eigen::MatrixXd> beta;
    for (int i = 0; i < samples; ++i) {
        double t = horizon * i / (samples - 1);
        times.push_back(t);
        Eigen::VectorXd a(1), g(1);
        Eigen::MatrixXd b(1, 1);
        a << 0.8 * std::sin(6.28318530717958648 * t) - 0.3;
        b << 0.9 + 0.2 * std::cos(3.0 * t);
        g << 0.15 * std::sin(2.0 * t);
        alpha.push_back(a);
        beta.push_back(b);
        gamma.push_back(g);
    }
    return NeuronControls(Activation::tanh(),
                          ControlRepresentation::sampled_continuous, times,
                          alpha, beta, gamma);
}

NeuronControls constant_sampled(double a_val, double b_val, double g_val,
                                const Activation& sigma, double horizon) {
    Eigen::VectorXd a(1), g(1);
    Eigen::MatrixXd b(1, 1);
    a << a_val;
    b << b_val;
    g << g_val;
    return NeuronControls(sigma, ControlRepresentation::sampled_continuous,
                          {0.0, horizon}, {a, a}, {b, b}, {g, g});
}

}  // namespace

TEST_CASE("extraction rejects piecewise-constant controls") {
    Eigen::VectorXd a(1), g(1);
    Eigen::MatrixXd b(1, 1);
    a << 1.0;
    b << 1.0;
    g << 0.0;
    NeuronControls pc = NeuronControls::constant(Activation::tanh(), a, b, g, 1.0);
    CHECK_THROWS_AS(extract_resnet(pc, 8), PreconditionError);
}

TEST_CASE("layers sample the controls at left step endpoints") {
    NeuronControls c = smooth_controls(257, 1.0);
    int depth = 16;
    ResNetModel net = extract_resnet(c, depth);
    REQUIRE(net.depth() == depth);
    CHECK(net.step() == doctest::Approx(1.0 / depth));
    for (int l = 0; l < depth; ++l) {
        double t = 1.0 * l / depth;
        CHECK(net.layers()[static_cast<std::size_t>(l)].alpha ==
              c.alpha_at(t));
        CHECK(net.layers()[static_cast<std::size_t>(l)].beta == c.beta_at(t));
        CHECK(net.layers()[static_cast<std::size_t>(l)].gamma ==
              c.gamma_at(t));
    }
}

TEST_CASE("constant controls extract identical layers") {
    NeuronControls c = constant_sampled(0.5, 1.0, 0.2, Activation::tanh(), 1.0);
    ResNetModel net = extract_resnet(c, 8);
    for (const ResNetLayer& layer : net.layers()) {
        CHECK(layer.alpha == net.layers()[0].alpha);
        CHECK(layer.beta == net.layers()[0].beta);
        CHECK(layer.gamma == net.layers()[0].gamma);
    }
    ResNetModel one = extract_resnet(c, 1);
    Eigen::VectorXd xi(1);
    xi << 0.4;
    Eigen::VectorXd manual =
        xi + 1.0 * neuron_rhs(Activation::tanh(), net.layers()[0].alpha,
                              net.layers()[0].beta, net.layers()[0].gamma, xi);
    CHECK(one.forward(xi) == manual);
}

TEST_CASE("zero weights leave the input untouched") {
    NeuronControls c = constant_sampled(0.0, 0.7, 0.1, Activation::tanh(), 1.0);
    ResNetModel net = extract_resnet(c, 16);
    Eigen::VectorXd xi(1);
    xi << 0.83;
    CHECK(net.forward(xi) == xi);
}

TEST_CASE("relu layers on the positive orbit compound like interest") {
    // alpha = beta = 1, gamma = 0, relu: x -> x (1 + dt) while x > 0.
    for (int depth : {8, 64, 512}) {
        NeuronControls c = constant_sampled(1.0, 1.0, 0.0, Activation::relu(), 1.0);
        ResNetModel net = extract_resnet(c, depth);
        Eigen::VectorXd xi(1);
        xi << 1.0;
        double expected = std::pow(1.0 + 1.0 / depth, depth);
        CHECK(net.forward(xi)(0) == doctest::Approx(expected).epsilon(1e-12));
    }
    // (1 + T/L)^L approaches e^T from below.
    NeuronControls c = constant_sampled(1.0, 1.0, 0.0, Activation::relu(), 1.0);
    CHECK(extract_resnet(c, 4096).forward(Eigen::VectorXd::Ones(1))(0) ==
          doctest::Approx(std::exp(1.0)).epsilon(1e-3));
}

TEST_CASE("the network is the euler scheme, bitwise") {
    NeuronControls c = smooth_controls(257, 1.0);
    int depth = 16;
    ResNetModel net = extract_resnet(c, depth);
    Eigen::VectorXd xi(1);
    xi << 0.6;

    SolverConfig cfg;
    cfg.method = SolveMethod::euler;
    cfg.time_steps = depth;
    Trajectory solver_run = solve_flow(c.as_field(), xi, 1.0, cfg);
    Trajectory net_run = net.forward_trajectory(xi);

    REQUIRE(solver_run.size() == net_run.size());
    for (std::size_t k = 0; k < net_run.size(); ++k) {
        CHECK(solver_run.times[k] == net_run.times[k]);
        CHECK(solver_run.states[k] == net_run.states[k]);
    }
}

TEST_CASE("depth study errors shrink at first order under their envelope") {
    NeuronControls c = smooth_controls(2049, 1.0);
    Domain d = Domain::centered_box(1, 1.0, 5);
    DepthStudy study = depth_convergence_study(c, d, {32, 64, 128});
    REQUIRE(study.rows.size() == 3);
    CHECK(study.rate > 0.0);
    for (std::size_t i = 0; i < study.rows.size(); ++i) {
        const DepthRow& row = study.rows[i];
        CHECK(row.sup_error <= row.envelope * (1.0 + 1e-6));
        if (i > 0) CHECK(row.sup_error <= 0.6 * study.rows[i - 1].sup_error);
    }
}

TEST_CASE("zero controls study degenerates cleanly") {
    NeuronControls c = constant_sampled(0.0, 0.5, 0.0, Activation::tanh(), 1.0);
    Domain d = Domain::centered_box(1, 1.0, 3);
    DepthStudy study = depth_convergence_study(c, d, {4, 8});
    CHECK(study.rate == 0.0);
    for (const DepthRow& row : study.rows) {
        CHECK(row.sup_error == 0.0);
        CHECK(row.envelope == 0.0);  // t_end * omega with omega = 0
    }
}

TEST_CASE("depth must be positive and controls continuous") {
    NeuronControls c = smooth_controls(17, 1.0);
    CHECK_THROWS_AS(extract_resnet(c, 0), PreconditionError);
}
