#include "odenet/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <vector>

#include "odenet/linalg.hpp"

namespace odenet {

namespace {

struct Quadrature {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre nodes by Newton iteration on the Legendre polynomial.
Quadrature gauss_legendre(int n) {
    Quadrature q;
    q.nodes.resize(n);
    q.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        q.nodes[i] = -x;
        q.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.weights[i] = w;
        q.weights[n - 1 - i] = w;
    }
    return q;
}

double raw_bump(double s) {
    double d = 1.0 - s * s;
    if (d <= 0.0) return 0.0;
    return std::exp(-1.0 / d);
}

// Composite Gauss-Legendre integral of fn over [a, b].
template <typename Fn>
double composite_gl(Fn&& fn, double a, double b, int panels, const Quadrature& q) {
    double total = 0.0;
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h;
        double mid = lo + 0.5 * h;
        double acc = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i)
            acc += q.weights[i] * fn(mid + 0.5 * h * q.nodes[i]);
        total += 0.5 * h * acc;
    }
    return total;
}

const Quadrature& gl32() {
    static const Quadrature q = gauss_legendre(32);
    return q;
}

// Cached rules for the runtime-selected point counts used by mass().
const Quadrature& gl_rule(int points) {
    static std::mutex guard;
    static std::map<int, Quadrature> rules;
    std::lock_guard<std::mutex> lock(guard);
    auto it = rules.find(points);
    if (it == rules.end()) it = rules.emplace(points, gauss_legendre(points)).first;
    return it->second;
}

double bump_norm() {
    static const double c = [] {
        double integral = 2.0 * composite_gl(raw_bump, 0.0, 1.0, 64, gl32());
        return 1.0 / integral;
    }();
    return c;
}

}  // namespace

Mollifier::Mollifier(double width) : width_(width) {
    if (!(width > 0.0) || !std::isfinite(width))
        throw PreconditionError("Mollifier: width must be finite and > 0");
}

double Mollifier::shape(double s) { return bump_norm() * raw_bump(s); }

double Mollifier::operator()(double s) const { return shape(s / width_) / width_; }

double Mollifier::mass(double lo, double hi, int points) const {
    if (points < 2 || points > 256)
        throw PreconditionError("Mollifier::mass: points must be in [2, 256]");
    double a = std::max(lo / width_, -1.0);
    double b = std::min(hi / width_, 1.0);
    if (b <= a) return 0.0;
    if (a <= -1.0 && b >= 1.0) return 1.0;
    double m = composite_gl(&Mollifier::shape, a, b, 1, gl_rule(points));
    return std::clamp(m, 0.0, 1.0);
}

double Mollifier::abs_moment() {
    static const double m = 2.0 * composite_gl(
        [](double s) { return s * shape(s); }, 0.0, 1.0, 64, gl32());
    return m;
}

NeuronControls mollify_controls(const NeuronControls& c, double delta,
                                int quadrature_points) {
    if (c.representation() != ControlRepresentation::piecewise_constant)
        throw PreconditionError("mollify_controls: controls must be piecewise constant");
    const double horizon = c.horizon();
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw PreconditionError("mollify_controls: delta must be finite and > 0");
    if (delta >= horizon)
        throw PreconditionError("mollify_controls: delta must be below the horizon");
    if (quadrature_points < 2 || quadrature_points > 256)
        throw PreconditionError("mollify_controls: quadrature_points must be in [2, 256]");

    Mollifier eta(delta);
    const auto& ts = c.times();
    const int dim = c.dimension();

    // Uniform sampling fine enough to resolve the delta-wide ramps; the cap
    // keeps the object tractable when delta is pushed very small, and the
    // interpolant stays a valid continuous control either way.
    long want = static_cast<long>(std::ceil(8.0 * horizon / delta));
    long cells = std::clamp(want, 8L, 131072L);

    std::vector<double> sample_times(cells + 1);
    std::vector<Eigen::VectorXd> alphas(cells + 1);
    std::vector<Eigen::MatrixXd> betas(cells + 1);
    std::vector<Eigen::VectorXd> gammas(cells + 1);

    for (long j = 0; j <= cells; ++j) {
        double t = horizon * (static_cast<double>(j) / static_cast<double>(cells));
        sample_times[j] = t;
        Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
        // First piece whose right endpoint can reach the window.
        auto it = std::lower_bound(ts.begin() + 1, ts.end(), t - delta);
        std::size_t i = static_cast<std::size_t>(it - ts.begin());
        for (; i <= c.value_count() && ts[i - 1] <= t + delta; ++i) {
            double m = eta.mass(std::max(t - ts[i], -delta),
                                std::min(t - ts[i - 1], delta), quadrature_points);
            if (m == 0.0) continue;
            a += m * c.alpha_value(i - 1);
            b += m * c.beta_value(i - 1);
            g += m * c.gamma_value(i - 1);
        }
        alphas[j] = std::move(a);
        betas[j] = std::move(b);
        gammas[j] = std::move(g);
    }
    sample_times.back() = horizon;
    return NeuronControls(c.sigma(), ControlRepresentation::sampled_continuous,
                          std::move(sample_times), std::move(alphas),
                          std::move(betas), std::move(gammas));
}

std::array<double, 3> control_l1_gaps(const NeuronControls& c,
                                      const NeuronControls& smooth) {
    if (c.dimension() != smooth.dimension())
        throw DimensionError("control_l1_gaps: control dimension mismatch");
    if (std::abs(c.horizon() - smooth.horizon()) > 1e-12 * c.horizon())
        throw PreconditionError("control_l1_gaps: horizons differ");

    auto grid = merge_time_grids(c.times(), smooth.times());
    std::array<double, 3> gaps{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        double p = grid[k], step = (grid[k + 1] - grid[k]) / 4.0;
        for (int r = 0; r < 4; ++r) {
            double m = p + (r + 0.5) * step;
            gaps[0] += step * (c.alpha_at(m) - smooth.alpha_at(m)).norm();
            gaps[1] += step * operator_norm(c.beta_at(m) - smooth.beta_at(m));
            gaps[2] += step * (c.gamma_at(m) - smooth.gamma_at(m)).norm();
        }
    }
    return gaps;
}

double choose_delta(const NeuronControls& c, double l1_budget) {
    if (!(l1_budget > 0.0) || !std::isfinite(l1_budget))
        throw PreconditionError("choose_delta: budget must be finite and > 0");
    const double floor = 1e-9 * c.horizon();
    double best = std::numeric_limits<double>::infinity();
    for (double delta = 0.25 * c.horizon(); delta >= floor; delta *= 0.5) {
        auto gaps = control_l1_gaps(c, mollify_controls(c, delta));
        double worst = std::max({gaps[0], gaps[1], gaps[2]});
        best = std::min(best, worst);
        if (worst < l1_budget) return delta;
    }
    throw ApproximationError("choose_delta: smoothing cannot meet the L1 budget", best);
}

BoundReport mollified_flow_error(const NeuronControls& c, const NeuronControls& smooth,
                                 const Domain& d, const BoundOptions& opts) {
    if (c.dimension() != d.dimension() || c.dimension() != smooth.dimension())
        throw DimensionError("mollified_flow_error: dimension mismatch");
    if (!(c.sigma() == smooth.sigma()))
        throw PreconditionError("mollified_flow_error: controls use different activations");

    const double t_end = c.horizon();
    const int dim = c.dimension();
    const Activation& sigma = c.sigma();
    auto gaps = control_l1_gaps(c, smooth);
    double eps = std::max({gaps[0], gaps[1], gaps[2]});

    double max_xi = d.max_point_norm();
    double sa = c.sup_alpha(), sb = c.sup_beta(), sg = c.sup_gamma();
    double m4 = sa * sb * sigma.lipschitz();
    double r_tilde = sb * max_xi + sg;
    double m1 = max_xi + t_end * sa * sigma.sup_on_ball(r_tilde, dim) * std::exp(m4 * t_end);
    double m2 = sigma.sup_on_ball(sb * m1 + sg, dim);
    double m3 = m2 + sa * sigma.lipschitz() * (m1 + 1.0);

    BoundReport rep;
    rep.name = "mollified_flow_error";
    rep.certified = m3 * eps * std::exp(m4 * t_end);
    rep.inputs = {{"eps_l1", eps},          {"gap_alpha", gaps[0]},
                  {"gap_beta", gaps[1]},    {"gap_gamma", gaps[2]},
                  {"m1", m1},               {"m2", m2},
                  {"m3", m3},               {"m4", m4},
                  {"t_end", t_end}};

    VectorField fc = c.as_field();
    VectorField fs = smooth.as_field();
    int smooth_steps = static_cast<int>(std::min<std::size_t>(
        2 * (smooth.value_count() - 1), 262144));
    int steps = std::max(opts.solver.time_steps, smooth_steps);
    auto grid = merge_time_grids(integration_grid(fc, t_end, steps),
                                 integration_grid(fs, t_end, steps));
    double measured = 0.0;
    for (const auto& xi : d.grid()) {
        Trajectory tc = solve_flow_on_grid(fc, xi, grid);
        Trajectory tsm = solve_flow_on_grid(fs, xi, grid);
        measured = std::max(measured, sup_distance(tc, tsm));
    }
    rep.measured = measured;
    return rep;
}

}  // namespace odenet
