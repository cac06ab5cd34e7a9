#include <cmath>

#include "doctest.h"
#include "odenet/activation.hpp"
#include "odenet/controls.hpp"
#include "odenet/domain.hpp"
#include "odenet/errors.hpp"
#include "odenet/field.hpp"
#include "odenet/rng.hpp"

using namespace odenet;

TEST_CASE("activation lipschitz certificates dominate sampled quotients") {
    struct Case {
        Activation sigma;
        double radius;
    };
    Case cases[] = {
        {Activation::tanh(), 5.0},
        {Activation::sigmoid(), 5.0},
        {Activation::relu(), 5.0},
        {Activation::softplus(), 5.0},
        {Activation::truncated_power(2, 1.5), 1.5},
        {Activation::truncated_power(3, 0.8), 0.8},
    };
    for (const Case& c : cases) {
        UniformSource rng(0x5eed + c.sigma.power());
        for (int i = 0; i < 10000; ++i) {
            double s = rng.symmetric(c.radius);
            double t = rng.symmetric(c.radius);
            if (s == t) continue;
            double quotient = std::abs(c.sigma(s) - c.sigma(t)) / std::abs(s - t);
            CHECK(quotient <= c.sigma.lipschitz());
        }
    }
}

TEST_CASE("activation sup_on_radius sits at an endpoint") {
    CHECK(Activation::tanh().sup_on_radius(2.0) == doctest::Approx(std::tanh(2.0)));
    CHECK(Activation::relu().sup_on_radius(3.0) == 3.0);
    CHECK(Activation::sigmoid().sup_on_radius(1.0) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("hadamard product commutes bitwise") {
    UniformSource rng(0xabc);
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd a(3), b(3);
        for (int j = 0; j < 3; ++j) {
            a(j) = rng.symmetric(10.0);
            b(j) = rng.symmetric(10.0);
        }
        Eigen::VectorXd ab = a.cwiseProduct(b);
        Eigen::VectorXd ba = b.cwiseProduct(a);
        for (int j = 0; j < 3; ++j) CHECK(ab(j) == ba(j));
    }
}

TEST_CASE("piecewise-constant controls follow the left-open convention") {
    Eigen::VectorXd a1(1), a2(1), g(1);
    a1 << 2.0;
    a2 << -3.0;
    g << 0.0;
    Eigen::MatrixXd b(1, 1);
    b << 1.0;
    NeuronControls c(Activation::tanh(), ControlRepresentation::piecewise_constant,
                     {0.0, 0.5, 1.0}, {a1, a2}, {b, b}, {g, g});

    CHECK(c.alpha_at(0.0)(0) == 2.0);     // t = 0 takes the first value
    CHECK(c.alpha_at(0.25)(0) == 2.0);
    CHECK(c.alpha_at(0.5)(0) == 2.0);     // value on (0, 0.5] applies at 0.5
    CHECK(c.alpha_at(0.500001)(0) == -3.0);
    CHECK(c.alpha_at(1.0)(0) == -3.0);
    CHECK_THROWS_AS(c.alpha_at(1.5), TimeRangeError);
    CHECK_THROWS_AS(c.alpha_at(-0.1), TimeRangeError);
}

TEST_CASE("neuron field evaluation matches the shared kernel") {
    Eigen::VectorXd alpha(2), gamma(2), x(2);
    alpha << 0.7, -1.2;
    gamma << 0.1, -0.4;
    x << 0.3, -0.9;
    Eigen::MatrixXd beta(2, 2);
    beta << 1.0, 0.2, -0.5, 0.8;
    NeuronControls c = NeuronControls::constant(Activation::tanh(), alpha, beta,
                                                gamma, 1.0);
    Eigen::VectorXd via_eval = c.eval(x, 0.3);
    Eigen::VectorXd via_kernel = neuron_rhs(Activation::tanh(), alpha, beta, gamma, x);
    CHECK(via_eval == via_kernel);

    Eigen::VectorXd manual =
        alpha.cwiseProduct((beta * x + gamma).array().tanh().matrix());
    CHECK((via_eval - manual).norm() <= 1e-15);
}

TEST_CASE("sup norms of controls are maxima over stored values") {
    Eigen::VectorXd a1(1), a2(1), g1(1), g2(1);
    a1 << 2.0;
    a2 << -5.0;
    g1 << 0.5;
    g2 << -0.25;
    Eigen::MatrixXd b1(1, 1), b2(1, 1);
    b1 << 3.0;
    b2 << -1.0;
    NeuronControls c(Activation::tanh(), ControlRepresentation::piecewise_constant,
                     {0.0, 0.4, 1.0}, {a1, a2}, {b1, b2}, {g1, g2});
    CHECK(c.sup_alpha() == 5.0);
    CHECK(c.sup_beta() == 3.0);
    CHECK(c.sup_gamma() == 0.5);
    CHECK(c.lipschitz_x() == doctest::Approx(5.0 * 3.0 * 1.0));
}

TEST_CASE("domain grid is lexicographic with axis 0 fastest") {
    Domain d = Domain::centered_box(2, 1.0, 3);
    auto g = d.grid();
    REQUIRE(g.size() == 9);
    CHECK(g[0](0) == -1.0);
    CHECK(g[0](1) == -1.0);
    CHECK(g[1](0) == 0.0);   // axis 0 advances first
    CHECK(g[1](1) == -1.0);
    CHECK(g[3](0) == -1.0);  // axis 1 advances after axis 0 wraps
    CHECK(g[3](1) == 0.0);
    CHECK(g[8](0) == 1.0);
    CHECK(g[8](1) == 1.0);
}

TEST_CASE("domain norm maximum is attained at a corner") {
    Eigen::VectorXd lo(2), up(2);
    lo << -1.0, -2.0;
    up << 0.5, 1.0;
    Domain d(lo, up, 3);
    CHECK(d.max_point_norm() == doctest::Approx(std::sqrt(1.0 + 4.0)));
    Domain grown = d.inflated(0.5);
    CHECK(grown.lower(0) == -1.5);
    CHECK(grown.upper(1) == 1.5);
    CHECK(grown.samples_per_axis == d.samples_per_axis);
    Eigen::VectorXd inside(2), outside(2);
    inside << 0.0, 0.0;
    outside << 2.0, 0.0;
    CHECK(d.contains(inside));
    CHECK(!d.contains(outside));
}

TEST_CASE("single-sample domains degenerate to the center") {
    Domain d = Domain::centered_box(2, 1.0, 1);
    auto g = d.grid();
    REQUIRE(g.size() == 1);
    CHECK(g[0](0) == 0.0);
    CHECK(g[0](1) == 0.0);
}

TEST_CASE("piecewise fields expose value on the left-open pieces") {
    PiecewiseField pf = fields::alternating_constant(2.0, 1.0);
    VectorField f = pf.as_field();
    Eigen::VectorXd x(1);
    x << 0.0;
    CHECK(f(x, 0.0)(0) == 2.0);
    CHECK(f(x, 0.5)(0) == 2.0);    // breakpoint belongs to the left piece
    CHECK(f(x, 0.50001)(0) == -2.0);
    CHECK(f(x, 1.0)(0) == -2.0);
    CHECK(f.piecewise_constant());
    REQUIRE(f.breakpoints().size() == 1);
    CHECK(f.breakpoints()[0] == 0.5);
}

TEST_CASE("time average of a step field is the weighted piece sum") {
    PiecewiseField pf = fields::alternating_constant(3.0, 1.0);
    VectorField avg = pf.averaged();
    Eigen::VectorXd x(1);
    x << 0.7;
    CHECK(avg(x, 0.3)(0) == doctest::Approx(0.0).epsilon(1e-15));

    Eigen::MatrixXd a1(1, 1), a2(1, 1);
    a1 << 2.0;
    a2 << -1.0;
    PiecewiseField lin = fields::alternating_linear(a1, a2, 1.0);
    VectorField lavg = lin.averaged();
    CHECK(lavg(x, 0.0)(0) == doctest::Approx(0.5 * (2.0 - 1.0) * 0.7));
}

TEST_CASE("accelerated fields tile the piece layout") {
    PiecewiseField pf = fields::alternating_constant(1.0, 1.0);
    PiecewiseField fast = pf.accelerated(4);
    CHECK(fast.horizon() == doctest::Approx(1.0));
    CHECK(fast.pieces.size() == 8);
    VectorField f = fast.as_field();
    Eigen::VectorXd x(1);
    x << 0.0;
    // Value pattern of t -> f(4t): up on (0, 1/8], down on (1/8, 2/8], ...
    CHECK(f(x, 0.10)(0) == 1.0);
    CHECK(f(x, 0.20)(0) == -1.0);
    CHECK(f(x, 0.35)(0) == 1.0);
    CHECK(f(x, 0.45)(0) == -1.0);
}

TEST_CASE("constructor preconditions reject malformed inputs") {
    Eigen::VectorXd a(1), g(1);
    a << 1.0;
    g << 0.0;
    Eigen::MatrixXd b(1, 1);
    b << 1.0;
    // times must start at zero and strictly increase
    CHECK_THROWS_AS(NeuronControls(Activation::tanh(),
                                   ControlRepresentation::piecewise_constant,
                                   {0.5, 1.0}, {a}, {b}, {g}),
                    PreconditionError);
    CHECK_THROWS_AS(NeuronControls(Activation::tanh(),
                                   ControlRepresentation::piecewise_constant,
                                   {0.0, 0.5, 0.5}, {a, a}, {b, b}, {g, g}),
                    PreconditionError);
    CHECK_THROWS_AS(Domain::centered_box(0, 1.0, 3), PreconditionError);
    CHECK_THROWS_AS(Domain::centered_box(2, -1.0, 3), PreconditionError);
    CHECK_THROWS_AS(Activation::truncated_power(0, 1.0), PreconditionError);
    CHECK_THROWS_AS(Activation::truncated_power(2, 0.0), PreconditionError);
}
