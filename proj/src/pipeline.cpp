#include "odenet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "odenet/parallel.hpp"

namespace odenet {

namespace {

// Uniform time nodes plus interior piece midpoints, for sampled sups.
std::vector<double> field_time_nodes(const VectorField& f, double t_end, int n) {
    std::vector<double> ts;
    n = std::max(n, 2);
    for (int k = 0; k < n; ++k)
        ts.push_back(t_end * (static_cast<double>(k) / (n - 1)));
    if (f.piecewise_constant()) {
        std::vector<double> edges = {0.0};
        for (double b : f.breakpoints())
            if (b < t_end) edges.push_back(b);
        edges.push_back(t_end);
        for (std::size_t i = 0; i + 1 < edges.size() && ts.size() < 4096; ++i)
            ts.push_back(0.5 * (edges[i] + edges[i + 1]));
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

}  // namespace

SliceSchedule slice_time(const VectorField& f, int slice_count,
                         const Domain& sample_region, int time_samples) {
    if (slice_count < 1)
        throw PreconditionError("slice_time: slice_count must be >= 1");
    if (sample_region.dimension() != f.dimension())
        throw DimensionError("slice_time: sampling region dimension mismatch");
    if (time_samples < 1)
        throw PreconditionError("slice_time: time_samples must be >= 1");

    const double t_end = f.horizon();
    const int l_count = slice_count;

    SliceSchedule out;
    out.horizon = t_end;
    out.tau = t_end / l_count;
    out.sample_region = sample_region;

    std::vector<double> boundaries(l_count + 1);
    for (int l = 0; l <= l_count; ++l)
        boundaries[l] = t_end * (static_cast<double>(l) / l_count);

    out.snapshots.reserve(l_count);
    for (int l = 1; l <= l_count; ++l) {
        double freeze_at = boundaries[l];
        double span = boundaries[l] - boundaries[l - 1];
        out.snapshots.emplace_back(
            f.dimension(), f.lipschitz_x(), span,
            [f, freeze_at](const Eigen::VectorXd& x, double) { return f(x, freeze_at); });
    }

    // Sampled sup of |f(x, t) - f(x, t_l)| over the region and each slice's
    // interior; the frozen value is exact at the right endpoint, so the gap
    // concentrates near the left one, which gets a dedicated node.
    auto pts = sample_region.grid();
    double gap = 0.0;
    for (int l = 1; l <= l_count; ++l) {
        double lo = boundaries[l - 1];
        double span = boundaries[l] - boundaries[l - 1];
        std::vector<double> nodes;
        nodes.push_back(lo + 1e-3 * span);
        for (int j = 0; j < time_samples; ++j)
            nodes.push_back(lo + span * ((j + 0.5) / time_samples));
        const VectorField& snap = out.snapshots[l - 1];
        for (const auto& x : pts) {
            Eigen::VectorXd frozen = snap(x, 0.0);
            for (double t : nodes)
                gap = std::max(gap, (f(x, t) - frozen).norm());
        }
    }
    out.snapshot_gap = gap;
    return out;
}

VectorField frozen_field(const SliceSchedule& schedule) {
    const int l_count = static_cast<int>(schedule.snapshots.size());
    std::vector<double> times(l_count + 1);
    for (int l = 0; l <= l_count; ++l)
        times[l] = schedule.horizon * (static_cast<double>(l) / l_count);
    return PiecewiseField(std::move(times), schedule.snapshots).as_field();
}

int choose_L(const VectorField& f, const Domain& sample_region, double eps,
             int time_samples, int max_exponent) {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw PreconditionError("choose_L: eps must be finite and > 0");
    const double t_end = f.horizon();
    const double threshold =
        eps / (3.0 * t_end * std::exp(f.lipschitz_x() * t_end));
    double best = std::numeric_limits<double>::infinity();
    for (int e = 0; e <= max_exponent; ++e) {
        int l_count = 1 << e;
        double gap = slice_time(f, l_count, sample_region, time_samples).snapshot_gap;
        best = std::min(best, gap);
        if (gap < threshold) return l_count;
    }
    throw ApproximationError(
        "choose_L: slicing cannot push the snapshot gap under the freeze "
        "threshold",
        best);
}

std::vector<double> slice_budgets(double eps, double lip, double tau,
                                  int slice_count) {
    if (!(eps > 0.0) || !(tau > 0.0) || lip < 0.0 || slice_count < 1)
        throw PreconditionError("slice_budgets: bad inputs");
    const double log_step = std::log(4.0) + lip * tau;
    const double log_top = std::log(eps / 3.0);
    std::vector<double> budgets(slice_count + 1);
    for (int l = 0; l <= slice_count; ++l)
        budgets[l] = std::exp(log_top - (slice_count - l) * log_step);
    if (!(budgets.front() > 0.0))
        throw ApproximationError(
            "slice_budgets: the first slice budget underflows; fewer slices "
            "or a larger eps are needed",
            budgets.front());
    return budgets;
}

NeuronControls multiplex_slice(const ShallowField& field, double tau, int m) {
    if (m < 1) throw PreconditionError("multiplex_slice: m must be >= 1");
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw PreconditionError("multiplex_slice: tau must be finite and > 0");
    const auto k_width = field.width();
    const std::size_t pieces = k_width * static_cast<std::size_t>(m);
    if (pieces > (1u << 22))
        throw PreconditionError("multiplex_slice: too many sub-intervals");

    std::vector<double> times(pieces + 1);
    for (std::size_t s = 0; s <= pieces; ++s)
        times[s] = tau * (static_cast<double>(s) / static_cast<double>(pieces));
    std::vector<Eigen::VectorXd> alpha;
    std::vector<Eigen::MatrixXd> beta;
    std::vector<Eigen::VectorXd> gamma;
    alpha.reserve(pieces);
    beta.reserve(pieces);
    gamma.reserve(pieces);
    const double scale = static_cast<double>(k_width);
    for (std::size_t s = 0; s < pieces; ++s) {
        const ShallowTerm& t = field.terms()[s % k_width];
        alpha.push_back(scale * t.alpha);
        beta.push_back(t.beta);
        gamma.push_back(t.gamma);
    }
    return NeuronControls(field.sigma(), ControlRepresentation::piecewise_constant,
                          std::move(times), std::move(alpha), std::move(beta),
                          std::move(gamma));
}

ShallowField reorder_terms(const ShallowField& field) {
    const auto& terms = field.terms();
    const std::size_t k_width = terms.size();
    Eigen::VectorXd total = Eigen::VectorXd::Zero(field.dimension());
    for (const auto& t : terms) total += t.alpha;

    std::vector<bool> used(k_width, false);
    std::vector<ShallowTerm> ordered;
    ordered.reserve(k_width);
    Eigen::VectorXd partial = Eigen::VectorXd::Zero(field.dimension());
    for (std::size_t s = 0; s < k_width; ++s) {
        Eigen::VectorXd share = ((s + 1.0) / static_cast<double>(k_width)) * total;
        double best = std::numeric_limits<double>::infinity();
        std::size_t pick = 0;
        for (std::size_t c = 0; c < k_width; ++c) {
            if (used[c]) continue;
            double excursion = (partial + terms[c].alpha - share).norm();
            if (excursion < best) {
                best = excursion;
                pick = c;
            }
        }
        used[pick] = true;
        partial += terms[pick].alpha;
        ordered.push_back(terms[pick]);
    }
    return ShallowField(field.sigma(), std::move(ordered));
}

namespace {

double switched_vs_averaged(const NeuronControls& controls,
                            const VectorField& averaged,
                            const std::vector<Eigen::VectorXd>& starts,
                            const SolverConfig& cfg) {
    VectorField switched = controls.as_field();
    const double tau = controls.horizon();
    int steps = std::max<int>(cfg.time_steps,
                              2 * static_cast<int>(controls.value_count()));
    auto grid = merge_time_grids(integration_grid(switched, tau, steps),
                                 integration_grid(averaged, tau, steps));
    double dist = 0.0;
    for (const auto& xi : starts) {
        Trajectory ts = solve_flow_on_grid(switched, xi, grid);
        Trajectory ta = solve_flow_on_grid(averaged, xi, grid);
        dist = std::max(dist, sup_distance(ts, ta));
    }
    return dist;
}

}  // namespace

MultiplexChoice choose_m(const ShallowField& field, double tau,
                         const std::vector<Eigen::VectorXd>& starts,
                         double budget, const SolverConfig& cfg, int max_exponent) {
    if (!(budget > 0.0))
        throw PreconditionError("choose_m: budget must be > 0");
    if (starts.empty())
        throw PreconditionError("choose_m: needs at least one start state");
    for (const auto& xi : starts)
        if (xi.size() != field.dimension())
            throw DimensionError("choose_m: start state dimension mismatch");

    VectorField averaged = field.as_field(tau);
    if (field.width() == 1) {
        // Switching a single term is the identity; no search needed.
        NeuronControls controls = multiplex_slice(field, tau, 1);
        double dist = switched_vs_averaged(controls, averaged, starts, cfg);
        return {1, dist, std::move(controls)};
    }

    double best = std::numeric_limits<double>::infinity();
    for (int e = 0; e <= max_exponent; ++e) {
        int m = 1 << e;
        NeuronControls controls = multiplex_slice(field, tau, m);
        double dist = switched_vs_averaged(controls, averaged, starts, cfg);
        best = std::min(best, dist);
        if (dist <= budget) return {m, dist, std::move(controls)};
    }
    throw ApproximationError(
        "choose_m: acceleration cannot bring the switched flow within budget",
        best);
}

AveragingResult averaging_experiment(const PiecewiseField& pf,
                                     const Eigen::VectorXd& xi,
                                     const std::vector<int>& m_list,
                                     const SolverConfig& cfg) {
    if (m_list.empty())
        throw PreconditionError("averaging_experiment: m_list must not be empty");
    VectorField averaged = pf.averaged();
    const double t_end = pf.horizon();

    AveragingResult out;
    for (int m : m_list) {
        if (m < 1)
            throw PreconditionError("averaging_experiment: m must be >= 1");
        VectorField switched = pf.accelerated(m).as_field();
        int steps = std::max<int>(
            cfg.time_steps,
            2 * static_cast<int>(switched.breakpoints().size() + 1));
        auto grid = merge_time_grids(integration_grid(switched, t_end, steps),
                                     integration_grid(averaged, t_end, steps));
        Trajectory ts = solve_flow_on_grid(switched, xi, grid);
        Trajectory ta = solve_flow_on_grid(averaged, xi, grid);
        out.rows.push_back({m, sup_distance(ts, ta)});
    }

    // Least-squares slope of log2 distance against log2 m, over positive rows.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (const auto& row : out.rows) {
        if (!(row.distance > 0.0)) continue;
        double x = std::log2(static_cast<double>(row.m));
        double y = std::log2(row.distance);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    double denom = n * sxx - sx * sx;
    out.log2_slope = (n >= 2 && denom > 0.0) ? (n * sxy - sx * sy) / denom : 0.0;
    return out;
}

AssembledControls assemble_h_L(const VectorField& f, const Domain& d, double eps,
                               const Activation& sigma, const FitConfig& fit_cfg,
                               const PipelineOptions& opts) {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw PreconditionError("assemble_h_L: eps must be finite and > 0");
    if (d.dimension() != f.dimension())
        throw DimensionError("assemble_h_L: domain dimension mismatch");

    const double t_end = f.horizon();
    const double lip = f.lipschitz_x();
    const int dim = f.dimension();

    // Reach box: every flow from d stays inside |x| <= R.
    auto ts = field_time_nodes(f, t_end, 33);
    double sup_f = 0.0;
    for (const auto& x : d.grid())
        for (double t : ts) sup_f = std::max(sup_f, f(x, t).norm());
    const double radius = d.max_point_norm() + t_end * std::exp(lip * t_end) * sup_f;

    Domain gap_region =
        Domain::centered_box(dim, radius, opts.gap_samples_per_axis);
    const int l_count = choose_L(f, gap_region, eps, opts.time_samples,
                                 opts.max_slice_exponent);
    SliceSchedule schedule =
        slice_time(f, l_count, gap_region, opts.time_samples);
    const double tau = t_end / l_count;
    auto budgets = slice_budgets(eps, lip, tau, l_count);

    std::vector<double> boundaries(l_count + 1);
    for (int l = 0; l <= l_count; ++l)
        boundaries[l] = t_end * (static_cast<double>(l) / l_count);

    AssemblyReport report;
    report.eps = eps;
    report.slice_count = l_count;
    report.tau = tau;
    report.freeze_threshold = eps / (3.0 * t_end * std::exp(lip * t_end));
    report.snapshot_gap = schedule.snapshot_gap;
    report.sample_radius = radius;

    // Propagated chains: xi runs through the frozen snapshots, zeta through
    // the assembled switching slices; their gap is the budget-chain witness.
    std::vector<Eigen::VectorXd> xi_chain = d.grid();
    std::vector<Eigen::VectorXd> zeta_chain = xi_chain;

    std::vector<NeuronControls> slices;
    std::vector<double> offsets;
    slices.reserve(l_count);
    for (int l = 1; l <= l_count; ++l) {
        Domain fit_region = Domain::centered_box(dim, radius + budgets[l],
                                                 opts.fit_samples_per_axis);
        FitConfig local = fit_cfg;
        local.target_sup_error = budgets[l - 1] / tau;
        const VectorField& snap = schedule.snapshots[l - 1];
        VectorFitResult fit = fit_vector_field(
            [&snap](const Eigen::VectorXd& x) { return snap(x, 0.0); },
            fit_region, sigma, local);

        ShallowField ordered = reorder_terms(fit.field);
        double span = boundaries[l] - boundaries[l - 1];
        MultiplexChoice choice =
            choose_m(ordered, span, zeta_chain, 0.5 * budgets[l], opts.solver,
                     opts.max_sweep_exponent);

        SliceReport row;
        row.index = l;
        row.width = static_cast<int>(ordered.width());
        row.m = choice.m;
        row.budget = budgets[l];
        row.fit_tolerance = local.target_sup_error;
        row.fit_tolerance_alt =
            budgets[l] / (4.0 * tau * std::exp(lip * tau));
        row.fit_error = fit.validation_sup_error;
        row.multiplex_distance = choice.distance;
        for (std::size_t i = 0; i < xi_chain.size(); ++i)
            row.entry_gap =
                std::max(row.entry_gap, (xi_chain[i] - zeta_chain[i]).norm());

        VectorField switched = choice.controls.as_field();
        SolverConfig scfg = opts.solver;
        scfg.method = SolveMethod::rk4_reference;
        scfg.time_steps = std::max<int>(
            opts.solver.time_steps,
            2 * static_cast<int>(choice.controls.value_count()));
        for (std::size_t i = 0; i < xi_chain.size(); ++i) {
            xi_chain[i] = solve_flow(snap, xi_chain[i], span, scfg).final_state();
            zeta_chain[i] =
                solve_flow(switched, zeta_chain[i], span, scfg).final_state();
            row.exit_gap =
                std::max(row.exit_gap, (xi_chain[i] - zeta_chain[i]).norm());
        }
        report.slices.push_back(row);

        slices.push_back(std::move(choice.controls));
        offsets.push_back(boundaries[l - 1]);
    }

    NeuronControls assembled = concat_controls(slices, offsets);

    // Stage-two curve: frozen flow against the assembled switching flow.
    VectorField frozen = frozen_field(schedule);
    VectorField switched_all = assembled.as_field();
    std::vector<int> steps = {
        std::max(opts.solver.time_steps, 4 * l_count),
        std::max(opts.solver.time_steps,
                 2 * static_cast<int>(assembled.value_count()))};
    StageCurves curve =
        measure_stages({frozen, switched_all}, steps, d, t_end,
                       opts.probe_count, opts.solver, opts.threads);
    report.switch_times = curve.probe_times;
    report.switch_sup = curve.stage_sup.front();
    report.switch_max = curve.stage_max(0);

    return {std::move(assembled), std::move(report)};
}

double StageCurves::stage_max(std::size_t stage) const {
    double m = 0.0;
    for (double v : stage_sup.at(stage)) m = std::max(m, v);
    return m;
}

double StageCurves::total_max() const {
    double m = 0.0;
    for (double v : total) m = std::max(m, v);
    return m;
}

StageCurves measure_stages(const std::vector<VectorField>& chain,
                           const std::vector<int>& steps, const Domain& d,
                           double t_end, int probes, const SolverConfig& cfg,
                           int threads) {
    if (chain.size() < 2)
        throw PreconditionError("measure_stages: need at least two fields");
    if (steps.size() != chain.size())
        throw PreconditionError("measure_stages: one step count per field");
    for (const auto& f : chain)
        if (f.dimension() != d.dimension())
            throw DimensionError("measure_stages: dimension mismatch");
    if (probes < 1)
        throw PreconditionError("measure_stages: probes must be >= 1");

    StageCurves out;
    out.probe_times.resize(probes + 1);
    for (int p = 0; p <= probes; ++p)
        out.probe_times[p] = t_end * (static_cast<double>(p) / probes);
    out.stage_sup.assign(chain.size() - 1,
                         std::vector<double>(out.probe_times.size(), 0.0));
    out.total.assign(out.probe_times.size(), 0.0);

    auto pts = d.grid();
    // Per-point rows: [stage][probe] distances, merged serially afterwards.
    std::vector<std::vector<std::vector<double>>> rows(pts.size());
    std::vector<std::vector<double>> totals(pts.size());
    std::exception_ptr failure;
    std::mutex guard;
    parallel_for(pts.size(), threads, [&](std::size_t i) {
        try {
            std::vector<Trajectory> trs;
            trs.reserve(chain.size());
            for (std::size_t c = 0; c < chain.size(); ++c) {
                SolverConfig local = cfg;
                local.time_steps = std::max(cfg.time_steps, steps[c]);
                trs.push_back(solve_flow(chain[c], pts[i], t_end, local));
            }
            auto& row = rows[i];
            row.assign(chain.size() - 1,
                       std::vector<double>(out.probe_times.size(), 0.0));
            totals[i].assign(out.probe_times.size(), 0.0);
            for (std::size_t p = 0; p < out.probe_times.size(); ++p) {
                double t = out.probe_times[p];
                for (std::size_t c = 0; c + 1 < chain.size(); ++c)
                    row[c][p] =
                        (trs[c].state_at(t) - trs[c + 1].state_at(t)).norm();
                totals[i][p] =
                    (trs.front().state_at(t) - trs.back().state_at(t)).norm();
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);

    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t c = 0; c + 1 < chain.size(); ++c)
            for (std::size_t p = 0; p < out.probe_times.size(); ++p)
                out.stage_sup[c][p] = std::max(out.stage_sup[c][p], rows[i][c][p]);
        for (std::size_t p = 0; p < out.probe_times.size(); ++p)
            out.total[p] = std::max(out.total[p], totals[i][p]);
    }
    return out;
}

}  // namespace odenet
