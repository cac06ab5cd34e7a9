#include <cmath>
#include <vector>

#include "doctest.h"
#include "odenet/pipeline.hpp"
#include "odenet/rng.hpp"

using namespace odenet;

namespace {

// f(x, t) = ramp * t, state-independent: freezing error is exactly ramp * tau.
VectorField ramp_field(double ramp, double horizon) {
    return VectorField(1, 0.0, horizon,
                       [ramp](const Eigen::VectorXd&, double t) {
                           Eigen::VectorXd v(1);
                           v << ramp * t;
                           return v;
                       });
}

ShallowField random_terms(int width, std::uint64_t seed) {
    UniformSource rng(seed);
    std::vector<ShallowTerm> terms;
    for (int k = 0; k < width; ++k) {
        ShallowTerm t;
        t.alpha = Eigen::VectorXd(1);
        t.gamma = Eigen::VectorXd(1);
        t.beta = Eigen::MatrixXd(1, 1);
        t.alpha(0) = rng.symmetric(0.8);
        t.beta(0, 0) = rng.symmetric(1.2);
        t.gamma(0) = rng.symmetric(0.5);
        terms.push_back(t);
    }
    return ShallowField(Activation::tanh(), terms);
}

FitConfig pinned_fit() {
    FitConfig cfg;
    cfg.width_per_component = 3;
    cfg.feature_scale = 1.3;
    cfg.ridge = 1e-4;
    cfg.seed = 10882;
    cfg.max_escalations = 0;
    return cfg;
}

}  // namespace

TEST_CASE("autonomous fields freeze with zero snapshot gap") {
    VectorField f = fields::neg_tanh(1, 1.0);
    Domain d = Domain::centered_box(1, 1.0, 5);
    SliceSchedule s = slice_time(f, 4, d);
    CHECK(s.snapshot_gap == 0.0);
    CHECK(s.snapshots.size() == 4);
    CHECK(s.tau == doctest::Approx(0.25));
    CHECK(choose_L(f, d, 0.3) == 1);
}

TEST_CASE("snapshots are frozen at right slice endpoints") {
    VectorField f = ramp_field(1.0, 1.0);
    Domain d = Domain::centered_box(1, 1.0, 3);
    SliceSchedule s = slice_time(f, 4, d);
    Eigen::VectorXd x(1);
    x << 0.2;
    for (int l = 0; l < 4; ++l) {
        double right = 0.25 * (l + 1);
        CHECK(s.snapshots[static_cast<std::size_t>(l)](x, 0.0)(0) ==
              doctest::Approx(right));
    }
    // State-independent ramp: the in-slice deviation approaches tau at the
    // (excluded) left endpoint, and the probe sits just inside it.
    CHECK(s.snapshot_gap <= 0.25);
    CHECK(s.snapshot_gap >= 0.25 * 0.998);
}

TEST_CASE("frozen schedules induce left-open piecewise fields") {
    VectorField f = ramp_field(1.0, 1.0);
    Domain d = Domain::centered_box(1, 1.0, 3);
    VectorField fl = frozen_field(slice_time(f, 2, d));
    Eigen::VectorXd x(1);
    x << 0.0;
    CHECK(fl(x, 0.0)(0) == doctest::Approx(0.5));   // first snapshot at t=0
    CHECK(fl(x, 0.5)(0) == doctest::Approx(0.5));   // boundary stays left
    CHECK(fl(x, 0.51)(0) == doctest::Approx(1.0));
    CHECK(fl.piecewise_constant());
}

TEST_CASE("slice count selection stops at the first adequate power of two") {
    VectorField f = ramp_field(1.0, 1.0);
    Domain d = Domain::centered_box(1, 1.0, 3);
    // lip = 0, threshold eps/3: gap 1/L < 0.3 first at L = 4.
    CHECK(choose_L(f, d, 0.9) == 4);
    CHECK_THROWS_AS(choose_L(f, d, 0.9, 9, 1), ApproximationError);
}

TEST_CASE("multiplexed controls cycle the terms with amplified weights") {
    ShallowField field = random_terms(3, 21);
    NeuronControls c = multiplex_slice(field, 0.5, 4);
    CHECK(c.value_count() == 12);
    CHECK(c.horizon() == doctest::Approx(0.5));
    for (std::size_t j = 0; j < c.value_count(); ++j) {
        const ShallowTerm& t = field.terms()[j % 3];
        CHECK(c.alpha_value(j) == (3.0 * t.alpha).eval());
        CHECK(c.beta_value(j) == t.beta);
        CHECK(c.gamma_value(j) == t.gamma);
    }
}

TEST_CASE("the time average of the switched field equals the term sum") {
    ShallowField field = random_terms(3, 22);
    double tau = 0.5;
    NeuronControls c = multiplex_slice(field, tau, 4);
    UniformSource rng(23);
    const auto& times = c.times();
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd x(1);
        x << rng.symmetric(1.0);
        Eigen::VectorXd avg = Eigen::VectorXd::Zero(1);
        for (std::size_t j = 0; j < c.value_count(); ++j) {
            double len = times[j + 1] - times[j];
            avg += len * neuron_rhs(c.sigma(), c.alpha_value(j), c.beta_value(j),
                                    c.gamma_value(j), x);
        }
        avg /= tau;
        CHECK((avg - field.eval(x)).norm() <= 1e-13);
    }
}

TEST_CASE("reordering terms preserves the term multiset") {
    ShallowField field = random_terms(5, 24);
    ShallowField ordered = reorder_terms(field);
    REQUIRE(ordered.width() == field.width());
    Eigen::VectorXd x(1);
    x << 0.3;
    CHECK((ordered.eval(x) - field.eval(x)).norm() <= 1e-15);
    // Every original term appears exactly once.
    std::vector<bool> used(field.width(), false);
    for (const ShallowTerm& t : ordered.terms()) {
        bool found = false;
        for (std::size_t i = 0; i < field.width(); ++i) {
            if (used[i]) continue;
            if (field.terms()[i].alpha == t.alpha &&
                field.terms()[i].beta == t.beta &&
                field.terms()[i].gamma == t.gamma) {
                used[i] = true;
                found = true;
                break;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("sweep selection meets its budget and skips single terms") {
    ShallowField field = random_terms(3, 25);
    std::vector<Eigen::VectorXd> starts;
    for (double v : {-0.8, 0.0, 0.8}) {
        Eigen::VectorXd xi(1);
        xi << v;
        starts.push_back(xi);
    }
    MultiplexChoice choice = choose_m(field, 0.5, starts, 0.02);
    CHECK(choice.distance <= 0.02);
    CHECK((choice.m & (choice.m - 1)) == 0);  // a power of two

    ShallowField single = random_terms(1, 26);
    MultiplexChoice trivial = choose_m(single, 0.5, starts, 1e-9);
    CHECK(trivial.m == 1);

    CHECK_THROWS_AS(choose_m(field, 0.5, starts, 1e-12, {}, 2),
                    ApproximationError);
}

TEST_CASE("switched flows approach the averaged flow at first order") {
    PiecewiseField pf = fields::alternating_constant(1.0, 1.0);
    Eigen::VectorXd xi(1);
    xi << 0.0;
    AveragingResult r = averaging_experiment(pf, xi, {4, 8, 16, 32, 64});
    REQUIRE(r.rows.size() == 5);
    for (std::size_t i = 1; i < r.rows.size(); ++i)
        CHECK(r.rows[i].distance <= 0.6 * r.rows[i - 1].distance);
    CHECK(r.log2_slope == doctest::Approx(-1.0).epsilon(0.15));
}

TEST_CASE("assembly keeps the budget chain and the final switch budget") {
    VectorField f = fields::neg_tanh(1, 1.0);
    Domain d = Domain::centered_box(1, 1.0, 9);
    AssembledControls out =
        assemble_h_L(f, d, 0.3, Activation::tanh(), pinned_fit(), {});
    const AssemblyReport& rep = out.report;
    REQUIRE(rep.slice_count == 1);
    REQUIRE(rep.slices.size() == 1);
    const SliceReport& s = rep.slices[0];
    CHECK(s.fit_error <= s.fit_tolerance);
    CHECK(s.fit_tolerance ==
          doctest::Approx(s.fit_tolerance_alt).epsilon(1e-12));
    CHECK(s.entry_gap <= rep.slices[0].budget / (4.0 * std::exp(rep.tau)));
    CHECK(s.exit_gap <= s.budget);
    CHECK(rep.switch_max <= 0.3 / 3.0);
    CHECK(out.controls.horizon() == doctest::Approx(1.0));
    CHECK(out.controls.representation() ==
          ControlRepresentation::piecewise_constant);
}

TEST_CASE("concatenated slices keep the half-open boundary convention") {
    Eigen::VectorXd a(1), b1(1), b2(1), g(1);
    a << 1.0;
    b1 << 2.0;
    b2 << 3.0;
    g << 0.0;
    Eigen::MatrixXd w(1, 1);
    w << 1.0;
    NeuronControls first(Activation::tanh(),
                         ControlRepresentation::piecewise_constant, {0.0, 0.5},
                         {a}, {w}, {g});
    NeuronControls second(Activation::tanh(),
                          ControlRepresentation::piecewise_constant,
                          {0.0, 0.25, 0.5}, {b1, b2}, {w, w}, {g, g});
    NeuronControls joined = concat_controls({first, second}, {0.0, 0.5});
    CHECK(joined.horizon() == doctest::Approx(1.0));
    CHECK(joined.value_count() == 3);
    CHECK(joined.alpha_at(0.5)(0) == 1.0);   // boundary belongs to slice one
    CHECK(joined.alpha_at(0.51)(0) == 2.0);
    CHECK(joined.alpha_at(0.75)(0) == 2.0);
    CHECK(joined.alpha_at(1.0)(0) == 3.0);
}
