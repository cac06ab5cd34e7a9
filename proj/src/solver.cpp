#include "odenet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "odenet/parallel.hpp"

namespace odenet {

namespace {

void check_solve_args(const VectorField& f, const Eigen::VectorXd& xi, double t_end,
                      const SolverConfig& cfg) {
    if (xi.size() != f.dimension())
        throw DimensionError("solve_flow: initial state dimension mismatch");
    if (!(t_end > 0.0) || !std::isfinite(t_end))
        throw PreconditionError("solve_flow: t_end must be finite and > 0");
    if (t_end > f.horizon() * (1.0 + 1e-12))
        throw TimeRangeError("solve_flow: t_end exceeds the field horizon");
    if (cfg.time_steps < 1)
        throw PreconditionError("solve_flow: time_steps must be >= 1");
}

void check_divergence(const Eigen::VectorXd& x, double t) {
    if (!x.allFinite() || x.norm() > kDivergenceThreshold)
        throw DivergenceError("integration diverged at t = " + std::to_string(t), t);
}

Trajectory euler_solve(const VectorField& f, const Eigen::VectorXd& xi,
                       const std::vector<double>& grid) {
    const bool pc = f.piecewise_constant();
    Trajectory tr;
    tr.times = grid;
    tr.states.reserve(grid.size());
    tr.states.push_back(xi);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        double t0 = grid[k], t1 = grid[k + 1];
        double h = t1 - t0;
        double te = pc ? 0.5 * (t0 + t1) : t0;
        Eigen::VectorXd x = tr.states.back() + h * f(tr.states.back(), te);
        check_divergence(x, t1);
        tr.states.push_back(std::move(x));
    }
    return tr;
}

Trajectory rk4_solve(const VectorField& f, const Eigen::VectorXd& xi,
                     const std::vector<double>& grid) {
    const bool pc = f.piecewise_constant();
    Trajectory tr;
    tr.times = grid;
    tr.states.reserve(grid.size());
    tr.states.push_back(xi);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        double t0 = grid[k], t1 = grid[k + 1];
        double h = t1 - t0;
        const Eigen::VectorXd& x = tr.states.back();
        // Piecewise fields are constant on (t0, t1]: freeze the stage time at
        // the midpoint so every stage reads the active piece.
        double ta = pc ? 0.5 * (t0 + t1) : t0;
        double tm = pc ? ta : t0 + 0.5 * h;
        double tb = pc ? ta : t1;
        Eigen::VectorXd k1 = f(x, ta);
        Eigen::VectorXd k2 = f(x + 0.5 * h * k1, tm);
        Eigen::VectorXd k3 = f(x + 0.5 * h * k2, tm);
        Eigen::VectorXd k4 = f(x + h * k3, tb);
        Eigen::VectorXd next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_divergence(next, t1);
        tr.states.push_back(std::move(next));
    }
    return tr;
}

}  // namespace

std::vector<double> integration_grid(const VectorField& f, double t_end, int steps) {
    const double merge_tol = 1e-13 * t_end;
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(steps) + f.breakpoints().size() + 2);
    grid.push_back(0.0);
    for (double b : f.breakpoints()) {
        if (b > merge_tol && b < t_end - merge_tol) grid.push_back(b);
    }
    grid.push_back(t_end);
    std::sort(grid.begin(), grid.end());

    // Uniform nodes joining, skipping anything that lands on a breakpoint.
    std::vector<double> merged;
    merged.reserve(grid.size() + static_cast<std::size_t>(steps));
    std::size_t gi = 0;
    for (int k = 0; k <= steps; ++k) {
        double u = t_end * (static_cast<double>(k) / static_cast<double>(steps));
        while (gi < grid.size() && grid[gi] < u - merge_tol) merged.push_back(grid[gi++]);
        if (gi < grid.size() && std::abs(grid[gi] - u) <= merge_tol) {
            merged.push_back(grid[gi++]);  // keep the exact breakpoint
        } else {
            merged.push_back(u);
        }
    }
    while (gi < grid.size()) merged.push_back(grid[gi++]);
    merged.front() = 0.0;
    merged.back() = t_end;
    return merged;
}

Trajectory solve_flow(const VectorField& f, const Eigen::VectorXd& xi, double t_end,
                      const SolverConfig& cfg) {
    check_solve_args(f, xi, t_end, cfg);
    check_divergence(xi, 0.0);
    auto grid = integration_grid(f, t_end, cfg.time_steps);
    switch (cfg.method) {
        case SolveMethod::euler: return euler_solve(f, xi, grid);
        case SolveMethod::rk4_reference: return rk4_solve(f, xi, grid);
        case SolveMethod::picard: {
            auto res = picard_iterates(f, xi, t_end, cfg);
            return std::move(res.iterates.back());
        }
    }
    throw PreconditionError("solve_flow: unknown method");
}

PicardResult picard_iterates(const VectorField& f, const Eigen::VectorXd& xi,
                             double t_end, const SolverConfig& cfg) {
    check_solve_args(f, xi, t_end, cfg);
    if (cfg.picard_iterations < 1)
        throw PreconditionError("picard_iterates: need at least one iteration");
    auto grid = integration_grid(f, t_end, cfg.time_steps);
    const std::size_t n = grid.size();

    PicardResult out;
    Trajectory x0;
    x0.times = grid;
    x0.states.assign(n, xi);
    out.iterates.push_back(std::move(x0));

    for (int it = 1; it <= cfg.picard_iterations; ++it) {
        const Trajectory& prev = out.iterates.back();
        const Trajectory* before =
            out.iterates.size() > 1 ? &out.iterates[out.iterates.size() - 2]
                                    : nullptr;
        Trajectory next;
        next.times = grid;
        next.states.reserve(n);
        next.states.push_back(xi);
        double gap = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            double h = grid[k + 1] - grid[k];
            double tm = 0.5 * (grid[k] + grid[k + 1]);
            // Midpoint value of the previous iterate, predicted from the left
            // node with that iterate's own slope f(x_{n-2}); a chord average
            // would overshoot convex iterates and push the measured
            // contraction gaps past the factorial certificate.
            Eigen::VectorXd xm = prev.states[k];
            if (before) xm += 0.5 * h * f(before->states[k], grid[k]);
            Eigen::VectorXd x = next.states.back() + h * f(xm, tm);
            check_divergence(x, grid[k + 1]);
            gap = std::max(gap, (x - prev.states[k + 1]).norm());
            next.states.push_back(std::move(x));
        }
        out.iterates.push_back(std::move(next));
        out.successive_gaps.push_back(gap);
        if (gap < cfg.picard_tolerance) break;
    }
    return out;
}

Trajectory solve_flow_on_grid(const VectorField& f, const Eigen::VectorXd& xi,
                              const std::vector<double>& grid, SolveMethod method) {
    if (xi.size() != f.dimension())
        throw DimensionError("solve_flow_on_grid: initial state dimension mismatch");
    if (grid.size() < 2 || grid.front() != 0.0)
        throw PreconditionError("solve_flow_on_grid: grid must start at 0 with >= 2 nodes");
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        if (!(grid[k] < grid[k + 1]))
            throw PreconditionError("solve_flow_on_grid: grid must be strictly increasing");
    }
    if (grid.back() > f.horizon() * (1.0 + 1e-12))
        throw TimeRangeError("solve_flow_on_grid: grid exceeds the field horizon");
    check_divergence(xi, 0.0);
    switch (method) {
        case SolveMethod::euler: return euler_solve(f, xi, grid);
        case SolveMethod::rk4_reference: return rk4_solve(f, xi, grid);
        default:
            throw PreconditionError("solve_flow_on_grid: only euler and rk4 run on a fixed grid");
    }
}

std::vector<double> merge_time_grids(const std::vector<double>& a,
                                     const std::vector<double>& b) {
    std::vector<double> all;
    all.reserve(a.size() + b.size());
    all.insert(all.end(), a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    if (all.empty()) return all;
    const double tol = 1e-13 * std::max(std::abs(all.front()), std::abs(all.back()));
    std::vector<double> out;
    out.reserve(all.size());
    for (double t : all) {
        if (out.empty() || t - out.back() > tol) out.push_back(t);
    }
    return out;
}

std::vector<Trajectory> flow_on_domain(const VectorField& f, const Domain& d,
                                       double t_end, const SolverConfig& cfg,
                                       int threads) {
    if (d.dimension() != f.dimension())
        throw DimensionError("flow_on_domain: domain/field dimension mismatch");
    auto pts = d.grid();
    std::vector<Trajectory> out(pts.size());
    std::exception_ptr failure;
    std::mutex guard;
    parallel_for(pts.size(), threads, [&](std::size_t i) {
        try {
            out[i] = solve_flow(f, pts[i], t_end, cfg);
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace odenet
