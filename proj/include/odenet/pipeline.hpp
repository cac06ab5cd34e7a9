#pragma once

#include <cstdint>
#include <vector>

#include "odenet/bounds.hpp"
#include "odenet/controls.hpp"
#include "odenet/domain.hpp"
#include "odenet/field.hpp"
#include "odenet/shallow.hpp"

namespace odenet {

struct PipelineOptions {
    SolverConfig solver;
    int time_samples = 9;  // interior nodes per slice for sampled sups
    int fit_samples_per_axis = 17;
    int gap_samples_per_axis = 7;   // grid for snapshot-gap sampling
    int max_slice_exponent = 16;    // slice counts scan 2^0 .. 2^max
    int max_sweep_exponent = 14;    // sweep counts scan 2^0 .. 2^max
    int probe_count = 64;           // time probes for stage curves
    int threads = 1;
};

// Autonomous snapshots f(., t_l) frozen at the right endpoint of each of
// slice_count equal slices, plus the sampled sup distance between f and the
// frozen schedule over sample_region.
struct SliceSchedule {
    double horizon = 0.0;
    double tau = 0.0;
    Domain sample_region;
    std::vector<VectorField> snapshots;  // horizon tau each
    double snapshot_gap = 0.0;
};

SliceSchedule slice_time(const VectorField& f, int slice_count,
                         const Domain& sample_region, int time_samples = 9);

// The piecewise-constant-in-time field induced by a schedule: snapshot l on
// ((l-1) tau, l tau].
VectorField frozen_field(const SliceSchedule& schedule);

// Smallest power-of-two slice count whose snapshot gap stays below
// eps / (3 t e^(lip t)); throws ApproximationError when 2^max_exponent still
// misses it.
int choose_L(const VectorField& f, const Domain& sample_region, double eps,
             int time_samples = 9, int max_exponent = 16);

// Budgets b_0 .. b_L with b_L = eps / 3 and b_{l-1} = b_l / (4 e^(lip tau)),
// computed in log space. Throws ApproximationError when the smallest budget
// underflows to zero.
std::vector<double> slice_budgets(double eps, double lip, double tau,
                                  int slice_count);

// Cycles the K neuron terms of a fitted slice into piecewise-constant
// controls on [0, tau]: m sweeps, each visiting every term for tau / (K m)
// with alpha scaled by K, in storage order. The controls' cycle average
// equals the term sum exactly.
NeuronControls multiplex_slice(const ShallowField& field, double tau, int m);

// Deterministic greedy order keeping the running alpha partial sums close to
// their pro-rata share, which shrinks the switched flow's intra-sweep
// excursion. The cycle average is permutation invariant.
ShallowField reorder_terms(const ShallowField& field);

struct MultiplexChoice {
    int m = 0;
    double distance = 0.0;  // measured switched-vs-averaged sup distance
    NeuronControls controls;
};

// Smallest power-of-two sweep count whose switched flows stay within budget
// of the term-sum flow from every start point. The starts are the propagated
// slice-entry states, not fresh grid points. A single-term field skips the
// search (switching is the identity there). Throws ApproximationError when
// 2^max_exponent still misses the budget.
MultiplexChoice choose_m(const ShallowField& field, double tau,
                         const std::vector<Eigen::VectorXd>& starts,
                         double budget, const SolverConfig& cfg = {},
                         int max_exponent = 14);

struct AveragingRow {
    int m = 0;
    double distance = 0.0;
};

struct AveragingResult {
    std::vector<AveragingRow> rows;
    double log2_slope = 0.0;  // least-squares slope of log2 distance vs log2 m
};

// Sup distance between the flow of the m-accelerated switching field and the
// flow of its time average, from xi, for each m.
AveragingResult averaging_experiment(const PiecewiseField& pf,
                                     const Eigen::VectorXd& xi,
                                     const std::vector<int>& m_list,
                                     const SolverConfig& cfg = {});

struct SliceReport {
    int index = 0;  // 1-based
    int width = 0;  // neuron count K after fitting
    int m = 0;      // sweeps chosen for this slice
    double budget = 0.0;             // b_l
    double fit_tolerance = 0.0;      // b_{l-1} / tau
    double fit_tolerance_alt = 0.0;  // the same bound spelled b_l / (4 tau e^(lip tau))
    double fit_error = 0.0;          // validation sup error of the slice fit
    double multiplex_distance = 0.0;
    double entry_gap = 0.0;  // max |xi_{l-1} - zeta_{l-1}| over propagated states
    double exit_gap = 0.0;   // max |xi_l - zeta_l|
};

struct AssemblyReport {
    double eps = 0.0;
    int slice_count = 0;
    double tau = 0.0;
    double freeze_threshold = 0.0;
    double snapshot_gap = 0.0;
    double sample_radius = 0.0;  // half-width of the sampling box
    std::vector<SliceReport> slices;
    // Measured sup over d's grid of |frozen flow - assembled flow| at shared
    // probe times; switch_max must come in at or under eps / 3.
    std::vector<double> switch_times;
    std::vector<double> switch_sup;
    double switch_max = 0.0;
};

struct AssembledControls {
    NeuronControls controls;
    AssemblyReport report;
};

// Full constructive assembly over the box d: freeze f on chosen slices, fit
// each snapshot with a shallow network on the budget-inflated sampling box,
// multiplex each fit into switching controls, and concatenate on [0, T].
AssembledControls assemble_h_L(const VectorField& f, const Domain& d, double eps,
                               const Activation& sigma, const FitConfig& fit_cfg,
                               const PipelineOptions& opts = {});

// Per-probe sup (over d's grid) of the distance between consecutive flows in
// the chain, plus first-to-last totals. steps[i] is the time-step count for
// chain[i]; trajectories are interpolated at shared probe times.
struct StageCurves {
    std::vector<double> probe_times;
    std::vector<std::vector<double>> stage_sup;  // [chain-1][probes]
    std::vector<double> total;                   // [probes]

    double stage_max(std::size_t stage) const;
    double total_max() const;
};

StageCurves measure_stages(const std::vector<VectorField>& chain,
                           const std::vector<int>& steps, const Domain& d,
                           double t_end, int probes,
                           const SolverConfig& cfg = {}, int threads = 1);

}  // namespace odenet
