#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odenet/bounds.hpp"
#include "odenet/domain.hpp"
#include "odenet/field.hpp"
#include "odenet/pipeline.hpp"
#include "odenet/resnet.hpp"
#include "odenet/shallow.hpp"

namespace odenet {

// Everything an end-to-end run needs: the target field, the box it is
// approximated on, the accuracy budget, and the knobs of the fitting,
// integration and extraction layers. Loaded from a JSON config file; every
// field is addressable there under the keys documented in the repo schema.
struct RunConfig {
    std::string target = "neg_tanh";  // built-in name, or "schedule"
    std::string schedule_path;        // control-schedule file when target == "schedule"
    double target_param = 1.0;        // built-in parameter (scale / turn rate)
    int dimension = 1;
    double horizon = 1.0;
    double radius = 1.0;  // half width of the centered box
    int samples_per_axis = 9;
    double epsilon = 0.3;
    std::string activation = "tanh";
    int activation_power = 2;        // truncated power activation only
    double activation_radius = 1.0;  // truncated power activation only
    FitConfig fit;
    PipelineOptions pipeline;
    std::vector<int> resnet_depths{32, 64, 128, 256};  // empty = skip extraction
    double lp_order = 2.0;
    std::uint64_t seed = 1;
};

// Parse / emit the canonical JSON form (sorted keys, round-trip doubles).
// Unknown keys are rejected so config typos fail loudly.
RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& cfg);

// FNV-1a hash of the canonical JSON form, hex encoded: the provenance tag.
std::string config_hash(const RunConfig& cfg);

Domain run_domain(const RunConfig& cfg);
Activation run_activation(const RunConfig& cfg);

// Built-in target fields by name, or the field of a control-schedule file.
VectorField make_target(const RunConfig& cfg);

// One pipeline stage as reported: what was measured, the matching a-priori
// certificate, and the eps / 3 budget when the stage carries one (NaN when
// no budget share applies, e.g. network extraction).
struct StageEntry {
    std::string name;
    double measured = 0.0;
    double certified = 0.0;
    double budget = 0.0;
    bool within_budget = false;
};

struct ErrorReport {
    std::string config_hash;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    double horizon = 0.0;
    std::vector<StageEntry> stages;
    // Sup over the domain grid of |S_f(T) xi - S_h(T) xi| for the final
    // smooth controls, and of |S_f(T) xi - net(xi)| for the extracted
    // network (NaN when extraction is skipped).
    double total_vs_controls = 0.0;
    double total_vs_resnet = 0.0;
    double lp_order = 2.0;
    double lp_measured = 0.0;  // grid L^p of |S_f(T) xi - S_h(T) xi|
    std::vector<BoundReport> bound_reports;
    AssemblyReport assembly;
    double delta = 0.0;  // mollifier width actually used
    DepthStudy depth_study;
    std::string failure_stage;    // empty on success
    std::string failure_message;  // empty on success
    bool budgets_met = false;
};

// JSON form of the report; sorted keys, round-trip doubles, plus one
// "timestamp" field (ISO 8601 UTC) that comparisons are expected to strip.
std::string error_report_to_json(const ErrorReport& r);

// Full run: slice, fit, multiplex, mollify, optionally extract, measure
// every stage. Writes into out_dir: schedule.json (final smooth controls),
// schedule_switched.json (pre-mollification controls), report.json,
// stages.csv, and resnet.json + depth_study.csv when depths are configured.
// Stage failures produce a partial report naming the failed stage instead of
// throwing; config problems throw ConfigError before any computation.
ErrorReport run_pipeline(const RunConfig& cfg, const std::string& out_dir);

// Reflection target F(xi) = -xi on [-1, 1]: best sup error achievable by
// (a) the pipeline run against a contraction heading for the target and
// (b) a random search over constant controls, plus the order diagnostic
// min_t (x_+(t) - x_-(t)) across every candidate evaluated.
struct CounterexampleReport {
    double pipeline_error = 0.0;
    double search_error = 0.0;
    double best_error = 0.0;  // min of the two
    double best_alpha = 0.0;
    double best_beta = 0.0;
    double best_gamma = 0.0;
    int search_count = 0;
    double min_ordered_gap = 0.0;  // over all candidates and times
    bool separation_positive = false;
    bool lower_bound_respected = false;  // best_error >= 0.9
};

// Writes counterexample.json and reflection_gap.csv (t, x_minus, x_plus,
// gap along the best candidate's trajectories) into out_dir.
CounterexampleReport run_counterexample(const RunConfig& cfg, int search_count,
                                        const std::string& out_dir);

struct AveragingRun {
    std::string family;
    Eigen::VectorXd start;
    AveragingResult result;
};

// Switched-versus-averaged sup distances for a named built-in family
// ("constant", "mean_zero_alternation", "two_field_linear") over m_list.
// Writes averaging.csv (header m,sup_distance) and averaging.json (rows plus
// the fitted log-log slope) into out_dir.
AveragingRun run_averaging(const std::string& family, const std::vector<int>& m_list,
                           const std::string& out_dir, const SolverConfig& solver = {});

// Integrates the configured target from every grid point and writes
// simulate.csv (start coordinates, final coordinates) into out_dir.
void run_simulate(const RunConfig& cfg, const std::string& out_dir);

// Structural validation of a written report against the shipped schema
// (type / required-key subset) plus the integrity rules a schema cannot
// express: certified >= measured in every embedded bound report, and stage
// budget flags consistent with their measurements.
struct VerifyResult {
    bool ok = false;
    std::vector<std::string> problems;
};

VerifyResult verify_report_file(const std::string& report_path,
                                const std::string& schema_path);

}  // namespace odenet
