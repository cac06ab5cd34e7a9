#include "odenet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "odenet/mollify.hpp"
#include "odenet/rng.hpp"

namespace odenet {

namespace {

int auto_tube_samples(int dim) {
    switch (dim) {
        case 1: return 65;
        case 2: return 13;
        case 3: return 7;
        default: return 5;
    }
}

// Uniform nodes over [0, t_end] plus interior piece midpoints of any
// piecewise field, so a sampled time sup sees every piece.
std::vector<double> sup_time_nodes(double t_end, int n, const VectorField* a,
                                   const VectorField* b) {
    std::vector<double> ts;
    n = std::max(n, 2);
    ts.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        ts.push_back(t_end * (static_cast<double>(k) / (n - 1)));
    for (const VectorField* f : {a, b}) {
        if (f == nullptr || !f->piecewise_constant()) continue;
        std::vector<double> edges = {0.0};
        for (double bk : f->breakpoints())
            if (bk < t_end) edges.push_back(bk);
        edges.push_back(t_end);
        for (std::size_t i = 0; i + 1 < edges.size() && ts.size() < 4096; ++i)
            ts.push_back(0.5 * (edges[i] + edges[i + 1]));
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

double sup_field_norm(const VectorField& f, const std::vector<Eigen::VectorXd>& pts,
                      const std::vector<double>& ts) {
    double sup = 0.0;
    for (const auto& x : pts)
        for (double t : ts) sup = std::max(sup, f(x, t).norm());
    return sup;
}

double sup_field_gap(const VectorField& f, const VectorField& g,
                     const std::vector<Eigen::VectorXd>& pts,
                     const std::vector<double>& ts) {
    double sup = 0.0;
    for (const auto& x : pts)
        for (double t : ts) sup = std::max(sup, (f(x, t) - g(x, t)).norm());
    return sup;
}

SolveMethod grid_method(const BoundOptions& opts) {
    return opts.solver.method == SolveMethod::euler ? SolveMethod::euler
                                                    : SolveMethod::rk4_reference;
}

}  // namespace

double picard_gap_certificate(double f0, double lip, double t, int n) {
    if (n < 1) throw PreconditionError("picard_gap_certificate: n must be >= 1");
    if (f0 < 0.0 || lip < 0.0 || t < 0.0)
        throw PreconditionError("picard_gap_certificate: negative input");
    double term = f0 * t;
    for (int i = 2; i <= n; ++i) term *= lip * t / i;
    return term;
}

double solution_range_certificate(double f0, double lip, double t_end) {
    return f0 * t_end * std::exp(lip * t_end);
}

double flow_distance_certificate(double sup_gap, double lip_f, double t_end) {
    return sup_gap * t_end * std::exp(lip_f * t_end);
}

double resnet_error_envelope(double c, double t_end, double eps) {
    if (!(c > 0.0)) throw PreconditionError("resnet_error_envelope: rate must be > 0");
    return std::exp(c * t_end) * eps / c;
}

BoundReport solution_range_bound(const VectorField& f, const Eigen::VectorXd& xi,
                                 double t_end, const BoundOptions& opts) {
    auto ts = sup_time_nodes(t_end, opts.time_samples, &f, nullptr);
    double f0 = 0.0;
    for (double t : ts) f0 = std::max(f0, f(xi, t).norm());

    BoundReport rep;
    rep.name = "solution_range";
    rep.certified = solution_range_certificate(f0, f.lipschitz_x(), t_end);
    rep.inputs = {{"f0", f0}, {"lip", f.lipschitz_x()}, {"t_end", t_end}};

    Trajectory tr = solve_flow(f, xi, t_end, opts.solver);
    double meas = 0.0;
    for (const auto& x : tr.states) meas = std::max(meas, (x - xi).norm());
    rep.measured = meas;
    return rep;
}

BoundReport flow_distance_bound(const VectorField& f, const VectorField& g,
                                const Domain& d, double t_end,
                                const BoundOptions& opts) {
    if (f.dimension() != g.dimension() || f.dimension() != d.dimension())
        throw DimensionError("flow_distance_bound: dimension mismatch");

    auto ts = sup_time_nodes(t_end, opts.time_samples, &f, &g);
    auto pts = d.grid();
    double f0_g = sup_field_norm(g, pts, ts);
    // Box guaranteed to contain the g-flow tube from d, padded 10%.
    double reach = 1.1 * solution_range_certificate(f0_g, g.lipschitz_x(), t_end);
    int samples = opts.tube_samples_per_axis > 0 ? opts.tube_samples_per_axis
                                                 : auto_tube_samples(d.dimension());
    Domain tube = d.inflated(reach).with_samples(samples);
    double sup_gap = sup_field_gap(f, g, tube.grid(), ts);

    BoundReport rep;
    rep.name = "flow_distance";
    rep.certified = flow_distance_certificate(sup_gap, f.lipschitz_x(), t_end);
    rep.inputs = {{"sup_gap", sup_gap},        {"lip_f", f.lipschitz_x()},
                  {"lip_g", g.lipschitz_x()},  {"f0_g", f0_g},
                  {"tube_radius", reach},      {"t_end", t_end}};

    auto grid = merge_time_grids(integration_grid(f, t_end, opts.solver.time_steps),
                                 integration_grid(g, t_end, opts.solver.time_steps));
    double meas = 0.0;
    for (const auto& xi : pts) {
        Trajectory tf = solve_flow_on_grid(f, xi, grid, grid_method(opts));
        Trajectory tg = solve_flow_on_grid(g, xi, grid, grid_method(opts));
        meas = std::max(meas, (tf.final_state() - tg.final_state()).norm());
    }
    rep.measured = meas;
    return rep;
}

BoundReport tube_bound_check(const VectorField& f, const VectorField& g,
                             const Domain& d, double a, double t_end,
                             const BoundOptions& opts) {
    if (f.dimension() != g.dimension() || f.dimension() != d.dimension())
        throw DimensionError("tube_bound_check: dimension mismatch");
    if (!(a > 0.0) || !std::isfinite(a))
        throw PreconditionError("tube_bound_check: tube radius must be finite and > 0");

    const double lip = f.lipschitz_x();
    const double growth = std::exp(lip * t_end);
    auto ts = sup_time_nodes(t_end, opts.time_samples, &f, &g);
    auto pts = d.grid();

    double f0_f = sup_field_norm(f, pts, ts);
    double reach = 1.1 * solution_range_certificate(f0_f, lip, t_end);
    int samples = opts.tube_samples_per_axis > 0 ? opts.tube_samples_per_axis
                                                 : auto_tube_samples(d.dimension());
    Domain ball = d.inflated(reach + a).with_samples(samples);

    double threshold = a / (2.0 * t_end * growth);
    double sup_gap = sup_field_gap(f, g, ball.grid(), ts);
    if (!(sup_gap < threshold))
        throw PreconditionError(
            "tube_bound_check: sup|f - g| over the inflated box does not meet "
            "the closeness hypothesis for this tube radius");

    double pair_radius = opts.pair_radius_factor * a / (2.0 * growth);
    auto grid = merge_time_grids(integration_grid(f, t_end, opts.solver.time_steps),
                                 integration_grid(g, t_end, opts.solver.time_steps));
    UniformSource rng(opts.pair_seed);
    double meas = 0.0;
    for (const auto& xi : pts) {
        Eigen::VectorXd dir(xi.size());
        for (int i = 0; i < dir.size(); ++i) dir[i] = rng.symmetric(1.0);
        if (dir.norm() < 1e-12) {
            dir.setZero();
            dir[0] = 1.0;
        }
        Eigen::VectorXd shifted = xi + dir * (pair_radius / dir.norm());
        Trajectory tf = solve_flow_on_grid(f, xi, grid, grid_method(opts));
        Trajectory tg = solve_flow_on_grid(g, shifted, grid, grid_method(opts));
        meas = std::max(meas, sup_distance(tf, tg));
    }

    BoundReport rep;
    rep.name = "tube_containment";
    rep.certified = a;
    rep.measured = meas;
    rep.inputs = {{"tube_radius", a},           {"lip_f", lip},
                  {"t_end", t_end},             {"sup_gap", sup_gap},
                  {"hypothesis_threshold", threshold},
                  {"pair_radius", pair_radius}};
    return rep;
}

std::array<BoundReport, 2> mollified_control_bounds(const NeuronControls& c,
                                                    double delta, const Domain& d,
                                                    const BoundOptions& opts) {
    if (c.dimension() != d.dimension())
        throw DimensionError("mollified_control_bounds: dimension mismatch");

    NeuronControls smooth = mollify_controls(c, delta);
    const double t_end = c.horizon();
    const int dim = c.dimension();
    const Activation& sigma = c.sigma();

    double max_xi = d.max_point_norm();
    double sa = c.sup_alpha(), sb = c.sup_beta(), sg = c.sup_gamma();
    double rate = sa * sb * sigma.lipschitz();
    double r_tilde = sb * max_xi + sg;
    double m1 = max_xi +
                t_end * sa * sigma.sup_on_ball(r_tilde, dim) * std::exp(rate * t_end);
    double r2 = sb * m1 + sg;
    double m2 = sigma.sup_on_ball(r2, dim);

    VectorField fs = smooth.as_field();
    int steps = std::max(opts.solver.time_steps,
                         static_cast<int>(std::min<std::size_t>(
                             2 * (smooth.value_count() - 1), 262144)));
    double m1_meas = 0.0, m2_meas = 0.0;
    for (const auto& xi : d.grid()) {
        SolverConfig cfg = opts.solver;
        cfg.method = SolveMethod::rk4_reference;
        cfg.time_steps = steps;
        Trajectory tr = solve_flow(fs, xi, t_end, cfg);
        for (std::size_t k = 0; k < tr.size(); ++k) {
            double t = tr.times[k];
            const Eigen::VectorXd& x = tr.states[k];
            m1_meas = std::max(m1_meas, x.norm());
            Eigen::VectorXd arg = smooth.beta_at(t) * x + smooth.gamma_at(t);
            m2_meas = std::max(m2_meas, sigma(arg).norm());
        }
    }

    std::map<std::string, double> shared = {
        {"delta", delta},       {"t_end", t_end},     {"max_xi", max_xi},
        {"sup_alpha", sa},      {"sup_beta", sb},     {"sup_gamma", sg},
        {"lip_sigma", sigma.lipschitz()}};

    BoundReport state;
    state.name = "mollified_state_bound";
    state.certified = m1;
    state.measured = m1_meas;
    state.inputs = shared;
    state.inputs["r_tilde"] = r_tilde;

    BoundReport act;
    act.name = "mollified_activation_bound";
    act.certified = m2;
    act.measured = m2_meas;
    act.inputs = shared;
    act.inputs["r2"] = r2;
    act.inputs["m1"] = m1;
    return {state, act};
}

}  // namespace odenet
