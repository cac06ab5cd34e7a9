#include <cmath>
#include <vector>

#include "doctest.h"
#include "odenet/field.hpp"
#include "odenet/solver.hpp"
#include "oracles.hpp"

using namespace odenet;

namespace {

Eigen::MatrixXd spiral_matrix() {
    Eigen::MatrixXd a(2, 2);
    a << -0.3, -1.1, 1.1, -0.3;
    return a;
}

Eigen::VectorXd start_point() {
    Eigen::VectorXd xi(2);
    xi << 1.0, -0.5;
    return xi;
}

double final_error(SolveMethod method, int steps) {
    VectorField f = fields::linear(spiral_matrix(), 1.0);
    SolverConfig cfg;
    cfg.method = method;
    cfg.time_steps = steps;
    Trajectory tr = solve_flow(f, start_point(), 1.0, cfg);
    Eigen::VectorXd exact = oracles::matexp_flow(spiral_matrix(), 1.0, start_point());
    return (tr.final_state() - exact).norm();
}

}  // namespace

TEST_CASE("euler halves its error when steps double") {
    double e1 = final_error(SolveMethod::euler, 128);
    double e2 = final_error(SolveMethod::euler, 256);
    double ratio = e1 / e2;
    CHECK(ratio > 1.8);
    CHECK(ratio < 2.2);
}

TEST_CASE("rk4 gains a factor of sixteen when steps double") {
    double e1 = final_error(SolveMethod::rk4_reference, 32);
    double e2 = final_error(SolveMethod::rk4_reference, 64);
    double ratio = e1 / e2;
    CHECK(ratio > 13.0);
    CHECK(ratio < 19.0);
}

TEST_CASE("picard iterates contract onto the reference flow") {
    Eigen::MatrixXd a(1, 1);
    a << 1.0;
    VectorField f = fields::linear(a, 1.0);
    Eigen::VectorXd xi(1);
    xi << 1.0;

    SolverConfig cfg;
    cfg.time_steps = 1024;
    cfg.picard_iterations = 18;
    cfg.picard_tolerance = 0.0;  // run the full budget
    PicardResult pr = picard_iterates(f, xi, 1.0, cfg);

    SolverConfig ref;
    ref.method = SolveMethod::rk4_reference;
    ref.time_steps = 1024;
    Trajectory truth = solve_flow(f, xi, 1.0, ref);

    // Contraction is toward the quadrature fixed point, so measure distance
    // to the last iterate; it decays geometrically until roundoff.
    const Trajectory& fixed = pr.iterates.back();
    std::vector<double> dist;
    for (const Trajectory& it : pr.iterates)
        dist.push_back(sup_distance(it, fixed));
    for (std::size_t k = 2; k + 1 < dist.size(); ++k)
        CHECK(dist[k] <= dist[k - 1] * (1.0 + 1e-12) + 1e-14);
    CHECK(dist[dist.size() - 2] < 1e-12);  // 18 iterates exhaust the tail

    // The fixed point itself carries the h^2 quadrature error, nothing more.
    CHECK(sup_distance(fixed, truth) < 1e-6);
    CHECK(pr.successive_gaps.back() < 1e-12);
}

TEST_CASE("picard stops early once successive gaps fall under tolerance") {
    Eigen::MatrixXd a(1, 1);
    a << 1.0;
    VectorField f = fields::linear(a, 1.0);
    Eigen::VectorXd xi(1);
    xi << 1.0;
    SolverConfig cfg;
    cfg.time_steps = 256;
    cfg.picard_iterations = 40;
    cfg.picard_tolerance = 1e-6;
    PicardResult pr = picard_iterates(f, xi, 1.0, cfg);
    CHECK(pr.successive_gaps.size() < 40);
    CHECK(pr.successive_gaps.back() < 1e-6);
}

TEST_CASE("integration grid contains every interior breakpoint exactly once") {
    PiecewiseField pf = fields::alternating_constant(1.0, 1.0);
    VectorField f = pf.as_field();
    std::vector<double> grid = integration_grid(f, 1.0, 4);
    // Uniform nodes {0, .25, .5, .75, 1}; the breakpoint 0.5 coincides.
    REQUIRE(grid.size() == 5);
    CHECK(grid[2] == 0.5);

    std::vector<double> odd = integration_grid(f, 1.0, 3);
    // Uniform nodes {0, 1/3, 2/3, 1} plus the breakpoint.
    REQUIRE(odd.size() == 5);
    CHECK(odd[2] == 0.5);
}

TEST_CASE("midpoint sampling integrates step fields exactly") {
    // The two half-period pieces cancel exactly when each step stays inside
    // one piece and the field is state-independent.
    PiecewiseField pf = fields::alternating_constant(2.0, 1.0);
    VectorField f = pf.as_field();
    Eigen::VectorXd xi(1);
    xi << 0.3;
    for (int steps : {4, 7, 32}) {
        SolverConfig cfg;
        cfg.method = SolveMethod::euler;
        cfg.time_steps = steps;
        Trajectory tr = solve_flow(f, xi, 1.0, cfg);
        CHECK(std::abs(tr.final_state()(0) - 0.3) <= 1e-15);
    }
}

TEST_CASE("grid refinement converges to one solution") {
    VectorField f = fields::neg_tanh(1, 1.0);
    Eigen::VectorXd xi(1);
    xi << 0.8;
    SolverConfig coarse, fine;
    coarse.method = fine.method = SolveMethod::rk4_reference;
    coarse.time_steps = 256;
    fine.time_steps = 2048;
    Trajectory a = solve_flow(f, xi, 1.0, coarse);
    Trajectory b = solve_flow(f, xi, 1.0, fine);
    CHECK((a.final_state() - b.final_state()).norm() < 1e-10);
}

TEST_CASE("divergence beyond the state threshold aborts") {
    VectorField f(1, 1e6, 1.0, [](const Eigen::VectorXd& x, double) {
        return Eigen::VectorXd(x.array().square().matrix());
    });
    Eigen::VectorXd xi(1);
    xi << 3.0;  // blow-up at t = 1/3 < horizon
    SolverConfig cfg;
    cfg.method = SolveMethod::euler;
    cfg.time_steps = 4096;
    CHECK_THROWS_AS(solve_flow(f, xi, 1.0, cfg), DivergenceError);
}

TEST_CASE("caller-supplied grids must start at zero and increase") {
    VectorField f = fields::neg_tanh(1, 1.0);
    Eigen::VectorXd xi(1);
    xi << 0.5;
    CHECK_THROWS_AS(solve_flow_on_grid(f, xi, {0.1, 0.5, 1.0}), PreconditionError);
    CHECK_THROWS_AS(solve_flow_on_grid(f, xi, {0.0, 0.5, 0.5}), PreconditionError);
    Trajectory ok = solve_flow_on_grid(f, xi, {0.0, 0.5, 1.0});
    CHECK(ok.size() == 3);
}

TEST_CASE("merged grids are sorted unions with near-duplicates collapsed") {
    std::vector<double> a{0.0, 0.25, 0.5, 1.0};
    std::vector<double> b{0.0, 0.5 + 1e-15, 0.75, 1.0};
    std::vector<double> m = merge_time_grids(a, b);
    REQUIRE(m.size() == 5);
    CHECK(m[0] == 0.0);
    CHECK(m[1] == 0.25);
    CHECK(m[3] == 0.75);
    for (std::size_t i = 1; i < m.size(); ++i) CHECK(m[i] > m[i - 1]);
}

TEST_CASE("domain sweeps preserve grid order regardless of thread count") {
    VectorField f = fields::neg_tanh(2, 1.0);
    Domain d = Domain::centered_box(2, 1.0, 3);
    auto one = flow_on_domain(f, d, 1.0, {}, 1);
    auto four = flow_on_domain(f, d, 1.0, {}, 4);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i)
        CHECK(one[i].final_state() == four[i].final_state());
}
