#include <cmath>

#include "doctest.h"
#include "odenet/bounds.hpp"
#include "odenet/field.hpp"
#include "odenet/pipeline.hpp"
#include "odenet/rng.hpp"

using namespace odenet;

namespace {

VectorField offset_partner(const VectorField& f, const Eigen::VectorXd& c) {
    return VectorField(f.dimension(), f.lipschitz_x(), f.horizon(),
                       [f, c](const Eigen::VectorXd& x, double t) {
                           return (f(x, t) + c).eval();
                       });
}

}  // namespace

TEST_CASE("certificate formulas evaluate their closed forms") {
    // f0 * lip^(n-1) * t^n / n!
    CHECK(picard_gap_certificate(2.0, 3.0, 0.5, 1) == doctest::Approx(2.0 * 0.5));
    CHECK(picard_gap_certificate(1.0, 2.0, 1.0, 3) ==
          doctest::Approx(1.0 * 4.0 / 6.0));
    // f0 * t * e^(lip t)
    CHECK(solution_range_certificate(1.5, 2.0, 0.5) ==
          doctest::Approx(1.5 * 0.5 * std::exp(1.0)));
    // gap * t * e^(lip t)
    CHECK(flow_distance_certificate(0.1, 1.0, 1.0) ==
          doctest::Approx(0.1 * std::exp(1.0)));
    // e^(c t) * eps / c
    CHECK(resnet_error_envelope(2.0, 1.0, 0.3) ==
          doctest::Approx(std::exp(2.0) * 0.3 / 2.0));
    CHECK_THROWS_AS(resnet_error_envelope(0.0, 1.0, 0.3), PreconditionError);
}

TEST_CASE("flow-distance certificate is monotone in horizon and stiffness") {
    double base = flow_distance_certificate(0.2, 1.0, 1.0);
    CHECK(flow_distance_certificate(0.2, 1.0, 1.5) > base);
    CHECK(flow_distance_certificate(0.2, 2.0, 1.0) > base);
    CHECK(flow_distance_certificate(0.3, 1.0, 1.0) > base);
}

TEST_CASE("slice budgets obey the geometric recursion exactly") {
    double eps = 0.3, lip = 1.0, tau = 0.25;
    int slice_count = 4;
    std::vector<double> b = slice_budgets(eps, lip, tau, slice_count);
    REQUIRE(b.size() == 5);
    CHECK(b[4] == doctest::Approx(eps / 3.0).epsilon(1e-15));
    double growth = 4.0 * std::exp(lip * tau);
    for (int l = 1; l <= 4; ++l)
        CHECK(b[l] / b[l - 1] == doctest::Approx(growth).epsilon(1e-12));
}

TEST_CASE("reach certificate covers the measured flow excursion") {
    Eigen::MatrixXd a(2, 2);
    a << 0.2, -0.9, 0.9, 0.2;
    VectorField f = fields::linear(a, 1.0);
    Eigen::VectorXd xi(2);
    xi << 0.8, -0.4;
    BoundReport r = solution_range_bound(f, xi, 1.0);
    CHECK(r.holds());
    CHECK(r.measured > 0.0);
    CHECK(r.inputs.count("f0") == 1);
}

TEST_CASE("flow-distance certificate covers measured divergence of flows") {
    VectorField f = fields::neg_tanh(2, 1.0);
    Eigen::VectorXd c(2);
    c << 0.05, -0.02;
    VectorField g = offset_partner(f, c);
    Domain d = Domain::centered_box(2, 1.0, 3);
    BoundReport r = flow_distance_bound(f, g, d, 1.0);
    CHECK(r.holds());
    CHECK(r.measured > 0.0);
    CHECK(r.certified >= r.measured);
}

TEST_CASE("tube containment holds under the closeness hypothesis") {
    VectorField f = fields::neg_tanh(1, 1.0);
    Eigen::VectorXd c(1);
    c << 0.01;
    VectorField g = offset_partner(f, c);
    Domain d = Domain::centered_box(1, 1.0, 5);
    // Hypothesis: sup|f-g| < a / (2 t e^(lip t)); 0.01 plus slack.
    double a = 0.01 * 2.0 * std::exp(1.0) * 1.5;
    BoundReport r = tube_bound_check(f, g, d, a, 1.0);
    CHECK(r.holds());
    CHECK(r.certified == doctest::Approx(a));
}

TEST_CASE("tube check rejects pairs that violate its hypothesis") {
    VectorField f = fields::neg_tanh(1, 1.0);
    Eigen::VectorXd c(1);
    c << 0.5;
    VectorField g = offset_partner(f, c);
    Domain d = Domain::centered_box(1, 1.0, 5);
    CHECK_THROWS_AS(tube_bound_check(f, g, d, 0.1, 1.0), PreconditionError);
}

TEST_CASE("mollified control bounds certify state and activation sups") {
    Eigen::VectorXd a1(1), a2(1), g1(1), g2(1);
    a1 << 0.8;
    a2 << -0.6;
    g1 << 0.2;
    g2 << -0.1;
    Eigen::MatrixXd b1(1, 1), b2(1, 1);
    b1 << 1.0;
    b2 << 0.5;
    NeuronControls c(Activation::tanh(), ControlRepresentation::piecewise_constant,
                     {0.0, 0.5, 1.0}, {a1, a2}, {b1, b2}, {g1, g2});
    Domain d = Domain::centered_box(1, 1.0, 5);
    auto reports = mollified_control_bounds(c, 0.05, d);
    CHECK(reports[0].holds());
    CHECK(reports[1].holds());
    CHECK(reports[0].measured >= d.max_point_norm() * 0.0);
    CHECK(reports[1].certified <= 1.0 + 1e-12);  // tanh is bounded by one
}

TEST_CASE("bound reports expose slack and tolerance semantics") {
    BoundReport r;
    r.certified = 1.0;
    r.measured = 1.0;
    CHECK(r.holds());
    CHECK(r.slack() == 0.0);
    r.measured = 1.0 + 2e-6;
    CHECK(!r.holds());
    r.measured = 1.0 + 5e-7;
    CHECK(r.holds());
    BoundReport tiny;
    tiny.certified = 0.0;
    tiny.measured = 5e-10;
    CHECK(tiny.holds());  // absolute floor absorbs round-off at zero
}

TEST_CASE("random corpus of linear and saturated fields never breaks a bound") {
    UniformSource rng(0x90ddf00d);
    for (int i = 0; i < 12; ++i) {
        int dim = 1 + (i % 3);
        Eigen::MatrixXd a(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int col = 0; col < dim; ++col) a(r, col) = rng.symmetric(0.8);
        VectorField f = (i % 2 == 0)
                            ? fields::linear(a, 1.0)
                            : fields::scaled_tanh(Eigen::VectorXd::Ones(dim), a, 1.0);
        Domain d = Domain::centered_box(dim, 1.0, 3);
        Eigen::VectorXd xi = d.grid().front();
        CHECK(solution_range_bound(f, xi, 1.0).holds());

        Eigen::VectorXd c(dim);
        for (int j = 0; j < dim; ++j) c(j) = rng.symmetric(0.05);
        CHECK(flow_distance_bound(f, offset_partner(f, c), d, 1.0).holds());
    }
}
