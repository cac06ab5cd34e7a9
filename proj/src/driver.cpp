#include "odenet/driver.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <limits>
#include <optional>
#include <utility>

#include "json.hpp"
#include "odenet/mollify.hpp"
#include "odenet/rng.hpp"
#include "odenet/serialize.hpp"

namespace odenet {

namespace {

using nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void bad_config(const std::string& msg) {
    throw ConfigError("config: " + msg);
}

// Shortest round-tripping decimal form; CSV cells and hand-built text use
// this so outputs are locale independent and bitwise reproducible.
std::string num_text(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string iso_timestamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string method_name(SolveMethod m) {
    switch (m) {
        case SolveMethod::euler: return "euler";
        case SolveMethod::picard: return "picard";
        case SolveMethod::rk4_reference: return "rk4";
    }
    return "rk4";
}

SolveMethod method_from_name(const std::string& name) {
    if (name == "euler") return SolveMethod::euler;
    if (name == "picard") return SolveMethod::picard;
    if (name == "rk4") return SolveMethod::rk4_reference;
    bad_config("unknown solver method '" + name + "'");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* where) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) { known = true; break; }
        if (!known)
            bad_config(std::string("unknown key '") + item.key() + "' in " + where);
    }
}

double as_number(const json& v, const char* key) {
    if (!v.is_number()) bad_config(std::string("'") + key + "' must be a number");
    return v.get<double>();
}

int as_int(const json& v, const char* key) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
        bad_config(std::string("'") + key + "' must be an integer");
    long long n = v.get<long long>();
    if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max())
        bad_config(std::string("'") + key + "' is out of range");
    return static_cast<int>(n);
}

std::uint64_t as_seed(const json& v, const char* key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0)
        return static_cast<std::uint64_t>(v.get<long long>());
    bad_config(std::string("'") + key + "' must be a non-negative integer");
}

std::string as_string(const json& v, const char* key) {
    if (!v.is_string()) bad_config(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception&) {
        throw ConfigError(std::string(what) + ": malformed JSON");
    }
}

void validate_run_config(const RunConfig& cfg) {
    if (cfg.dimension < 1) bad_config("dimension must be >= 1");
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
        bad_config("horizon must be finite and > 0");
    if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon))
        bad_config("epsilon must be finite and > 0");
    if (!(cfg.radius > 0.0) || !std::isfinite(cfg.radius))
        bad_config("radius must be finite and > 0");
    if (cfg.samples_per_axis < 2) bad_config("samples_per_axis must be >= 2");
    if (!(cfg.lp_order >= 1.0)) bad_config("lp_order must be >= 1");
    if (cfg.target != "neg_tanh" && cfg.target != "tanh_rotation" &&
        cfg.target != "zero" && cfg.target != "schedule")
        bad_config("unknown target '" + cfg.target + "'");
    if (cfg.target == "tanh_rotation" && cfg.dimension != 2)
        bad_config("target 'tanh_rotation' needs dimension 2");
    if (cfg.target == "schedule" && cfg.schedule_path.empty())
        bad_config("target 'schedule' needs schedule_path");
    for (int depth : cfg.resnet_depths)
        if (depth < 1) bad_config("resnet_depths entries must be >= 1");
    if (cfg.fit.width_per_component < 1) bad_config("fit width must be >= 1");
    if (!(cfg.fit.feature_scale > 0.0)) bad_config("feature_scale must be > 0");
    if (cfg.fit.ridge < 0.0) bad_config("ridge must be >= 0");
    if (!(cfg.fit.target_sup_error > 0.0)) bad_config("target_sup_error must be > 0");
    if (cfg.fit.max_escalations < 0) bad_config("max_escalations must be >= 0");
    if (cfg.pipeline.time_samples < 2) bad_config("time_samples must be >= 2");
    if (cfg.pipeline.fit_samples_per_axis < 2) bad_config("fit_samples_per_axis must be >= 2");
    if (cfg.pipeline.gap_samples_per_axis < 2) bad_config("gap_samples_per_axis must be >= 2");
    if (cfg.pipeline.max_slice_exponent < 0 || cfg.pipeline.max_sweep_exponent < 0)
        bad_config("search exponents must be >= 0");
    if (cfg.pipeline.probe_count < 1) bad_config("probe_count must be >= 1");
    if (cfg.pipeline.threads < 1) bad_config("threads must be >= 1");
    if (cfg.pipeline.solver.time_steps < 1) bad_config("time_steps must be >= 1");
    if (cfg.pipeline.solver.picard_iterations < 1)
        bad_config("picard_iterations must be >= 1");
    if (!(cfg.pipeline.solver.picard_tolerance > 0.0))
        bad_config("picard_tolerance must be > 0");
}

json bound_report_json(const BoundReport& r) {
    json j;
    j["name"] = r.name;
    j["certified"] = r.certified;
    j["measured"] = r.measured;
    json inputs = json::object();
    for (const auto& [k, v] : r.inputs) inputs[k] = v;
    j["inputs"] = inputs;
    return j;
}

json nullable(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

void write_csv(const std::filesystem::path& path, const std::string& body) {
    write_text_file(path.string(), body);
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
    json j = parse_json(text, "config");
    if (!j.is_object()) bad_config("top level must be an object");
    check_keys(j,
               {"target", "schedule_path", "target_param", "dimension", "horizon",
                "radius", "samples_per_axis", "epsilon", "activation",
                "activation_power", "activation_radius", "fit", "solver", "pipeline",
                "resnet_depths", "lp_order", "seed"},
               "the top level");

    RunConfig cfg;
    if (j.contains("target")) cfg.target = as_string(j["target"], "target");
    if (j.contains("schedule_path"))
        cfg.schedule_path = as_string(j["schedule_path"], "schedule_path");
    if (j.contains("target_param"))
        cfg.target_param = as_number(j["target_param"], "target_param");
    if (j.contains("dimension")) cfg.dimension = as_int(j["dimension"], "dimension");
    if (j.contains("horizon")) cfg.horizon = as_number(j["horizon"], "horizon");
    if (j.contains("radius")) cfg.radius = as_number(j["radius"], "radius");
    if (j.contains("samples_per_axis"))
        cfg.samples_per_axis = as_int(j["samples_per_axis"], "samples_per_axis");
    if (j.contains("epsilon")) cfg.epsilon = as_number(j["epsilon"], "epsilon");
    if (j.contains("activation")) cfg.activation = as_string(j["activation"], "activation");
    if (j.contains("activation_power"))
        cfg.activation_power = as_int(j["activation_power"], "activation_power");
    if (j.contains("activation_radius"))
        cfg.activation_radius = as_number(j["activation_radius"], "activation_radius");
    if (j.contains("lp_order")) cfg.lp_order = as_number(j["lp_order"], "lp_order");
    if (j.contains("seed")) cfg.seed = as_seed(j["seed"], "seed");

    if (j.contains("fit")) {
        const json& f = j["fit"];
        if (!f.is_object()) bad_config("'fit' must be an object");
        check_keys(f,
                   {"width_per_component", "feature_scale", "ridge",
                    "target_sup_error", "max_escalations"},
                   "'fit'");
        if (f.contains("width_per_component"))
            cfg.fit.width_per_component = as_int(f["width_per_component"], "width_per_component");
        if (f.contains("feature_scale"))
            cfg.fit.feature_scale = as_number(f["feature_scale"], "feature_scale");
        if (f.contains("ridge")) cfg.fit.ridge = as_number(f["ridge"], "ridge");
        if (f.contains("target_sup_error"))
            cfg.fit.target_sup_error = as_number(f["target_sup_error"], "target_sup_error");
        if (f.contains("max_escalations"))
            cfg.fit.max_escalations = as_int(f["max_escalations"], "max_escalations");
    }

    if (j.contains("solver")) {
        const json& s = j["solver"];
        if (!s.is_object()) bad_config("'solver' must be an object");
        check_keys(s, {"method", "time_steps", "picard_iterations", "picard_tolerance"},
                   "'solver'");
        if (s.contains("method"))
            cfg.pipeline.solver.method = method_from_name(as_string(s["method"], "method"));
        if (s.contains("time_steps"))
            cfg.pipeline.solver.time_steps = as_int(s["time_steps"], "time_steps");
        if (s.contains("picard_iterations"))
            cfg.pipeline.solver.picard_iterations =
                as_int(s["picard_iterations"], "picard_iterations");
        if (s.contains("picard_tolerance"))
            cfg.pipeline.solver.picard_tolerance =
                as_number(s["picard_tolerance"], "picard_tolerance");
    }

    if (j.contains("pipeline")) {
        const json& p = j["pipeline"];
        if (!p.is_object()) bad_config("'pipeline' must be an object");
        check_keys(p,
                   {"time_samples", "fit_samples_per_axis", "gap_samples_per_axis",
                    "max_slice_exponent", "max_sweep_exponent", "probe_count", "threads"},
                   "'pipeline'");
        if (p.contains("time_samples"))
            cfg.pipeline.time_samples = as_int(p["time_samples"], "time_samples");
        if (p.contains("fit_samples_per_axis"))
            cfg.pipeline.fit_samples_per_axis =
                as_int(p["fit_samples_per_axis"], "fit_samples_per_axis");
        if (p.contains("gap_samples_per_axis"))
            cfg.pipeline.gap_samples_per_axis =
                as_int(p["gap_samples_per_axis"], "gap_samples_per_axis");
        if (p.contains("max_slice_exponent"))
            cfg.pipeline.max_slice_exponent =
                as_int(p["max_slice_exponent"], "max_slice_exponent");
        if (p.contains("max_sweep_exponent"))
            cfg.pipeline.max_sweep_exponent =
                as_int(p["max_sweep_exponent"], "max_sweep_exponent");
        if (p.contains("probe_count"))
            cfg.pipeline.probe_count = as_int(p["probe_count"], "probe_count");
        if (p.contains("threads")) cfg.pipeline.threads = as_int(p["threads"], "threads");
    }

    if (j.contains("resnet_depths")) {
        const json& r = j["resnet_depths"];
        if (!r.is_array()) bad_config("'resnet_depths' must be an array");
        cfg.resnet_depths.clear();
        for (const json& v : r) cfg.resnet_depths.push_back(as_int(v, "resnet_depths"));
    }

    validate_run_config(cfg);
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    json j;
    j["target"] = cfg.target;
    j["schedule_path"] = cfg.schedule_path;
    j["target_param"] = cfg.target_param;
    j["dimension"] = cfg.dimension;
    j["horizon"] = cfg.horizon;
    j["radius"] = cfg.radius;
    j["samples_per_axis"] = cfg.samples_per_axis;
    j["epsilon"] = cfg.epsilon;
    j["activation"] = cfg.activation;
    j["activation_power"] = cfg.activation_power;
    j["activation_radius"] = cfg.activation_radius;
    j["lp_order"] = cfg.lp_order;
    j["seed"] = cfg.seed;
    j["fit"] = {{"width_per_component", cfg.fit.width_per_component},
                {"feature_scale", cfg.fit.feature_scale},
                {"ridge", cfg.fit.ridge},
                {"target_sup_error", cfg.fit.target_sup_error},
                {"max_escalations", cfg.fit.max_escalations}};
    j["solver"] = {{"method", method_name(cfg.pipeline.solver.method)},
                   {"time_steps", cfg.pipeline.solver.time_steps},
                   {"picard_iterations", cfg.pipeline.solver.picard_iterations},
                   {"picard_tolerance", cfg.pipeline.solver.picard_tolerance}};
    j["pipeline"] = {{"time_samples", cfg.pipeline.time_samples},
                     {"fit_samples_per_axis", cfg.pipeline.fit_samples_per_axis},
                     {"gap_samples_per_axis", cfg.pipeline.gap_samples_per_axis},
                     {"max_slice_exponent", cfg.pipeline.max_slice_exponent},
                     {"max_sweep_exponent", cfg.pipeline.max_sweep_exponent},
                     {"probe_count", cfg.pipeline.probe_count},
                     {"threads", cfg.pipeline.threads}};
    j["resnet_depths"] = cfg.resnet_depths;
    return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& cfg) {
    return fnv1a_hex(run_config_to_json(cfg));
}

Domain run_domain(const RunConfig& cfg) {
    return Domain::centered_box(cfg.dimension, cfg.radius, cfg.samples_per_axis);
}

Activation run_activation(const RunConfig& cfg) {
    return activation_from_name(cfg.activation, cfg.activation_power,
                                cfg.activation_radius);
}

VectorField make_target(const RunConfig& cfg) {
    if (cfg.target == "neg_tanh") {
        if (cfg.target_param == 1.0) return fields::neg_tanh(cfg.dimension, cfg.horizon);
        Eigen::VectorXd c = Eigen::VectorXd::Constant(cfg.dimension, -cfg.target_param);
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(cfg.dimension, cfg.dimension);
        return fields::scaled_tanh(c, a, cfg.horizon);
    }
    if (cfg.target == "tanh_rotation")
        return fields::tanh_rotation(cfg.target_param, cfg.horizon);
    if (cfg.target == "zero")
        return fields::constant(Eigen::VectorXd::Zero(cfg.dimension), cfg.horizon);
    if (cfg.target == "schedule")
        return controls_from_json(read_text_file(cfg.schedule_path)).as_field();
    bad_config("unknown target '" + cfg.target + "'");
}

std::string error_report_to_json(const ErrorReport& r) {
    json j;
    j["format"] = "error-report";
    j["version"] = 1;
    j["timestamp"] = iso_timestamp();
    j["provenance"] = {{"config_hash", r.config_hash}, {"seed", r.seed}};
    j["epsilon"] = r.epsilon;
    j["horizon"] = r.horizon;

    json stages = json::array();
    for (const StageEntry& s : r.stages) {
        json e;
        e["name"] = s.name;
        e["measured"] = s.measured;
        e["certified"] = s.certified;
        e["budget"] = nullable(s.budget);
        e["within_budget"] = s.within_budget;
        stages.push_back(e);
    }
    j["stages"] = stages;

    j["totals"] = {{"vs_controls", nullable(r.total_vs_controls)},
                   {"vs_resnet", nullable(r.total_vs_resnet)},
                   {"lp_order", r.lp_order},
                   {"lp_measured", nullable(r.lp_measured)}};

    json bounds = json::array();
    for (const BoundReport& b : r.bound_reports) bounds.push_back(bound_report_json(b));
    j["bound_reports"] = bounds;

    json slices = json::array();
    for (const SliceReport& s : r.assembly.slices) {
        slices.push_back({{"index", s.index},
                          {"width", s.width},
                          {"m", s.m},
                          {"budget", s.budget},
                          {"fit_tolerance", s.fit_tolerance},
                          {"fit_tolerance_alt", s.fit_tolerance_alt},
                          {"fit_error", s.fit_error},
                          {"multiplex_distance", s.multiplex_distance},
                          {"entry_gap", s.entry_gap},
                          {"exit_gap", s.exit_gap}});
    }
    j["assembly"] = {{"eps", r.assembly.eps},
                     {"slice_count", r.assembly.slice_count},
                     {"tau", r.assembly.tau},
                     {"freeze_threshold", r.assembly.freeze_threshold},
                     {"snapshot_gap", r.assembly.snapshot_gap},
                     {"sample_radius", r.assembly.sample_radius},
                     {"slices", slices},
                     {"switch_times", r.assembly.switch_times},
                     {"switch_sup", r.assembly.switch_sup},
                     {"switch_max", r.assembly.switch_max}};

    j["mollify"] = {{"delta", nullable(r.delta)}};

    json rows = json::array();
    for (const DepthRow& d : r.depth_study.rows) {
        rows.push_back({{"depth", d.depth},
                        {"sup_error", d.sup_error},
                        {"modulus", d.modulus},
                        {"envelope", d.envelope}});
    }
    j["resnet"] = {{"rate", r.depth_study.rate}, {"rows", rows}};

    j["failure_stage"] = r.failure_stage;
    j["failure_message"] = r.failure_message;
    j["budgets_met"] = r.budgets_met;
    return j.dump(2) + "\n";
}

ErrorReport run_pipeline(const RunConfig& cfg, const std::string& out_dir) {
    validate_run_config(cfg);
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir));

    ErrorReport rep;
    rep.config_hash = config_hash(cfg);
    rep.seed = cfg.seed;
    rep.epsilon = cfg.epsilon;
    rep.horizon = cfg.horizon;
    rep.lp_order = cfg.lp_order;
    rep.total_vs_controls = kNan;
    rep.total_vs_resnet = kNan;
    rep.lp_measured = kNan;
    rep.delta = kNan;

    const Domain d = run_domain(cfg);
    const Activation sigma = run_activation(cfg);
    const VectorField f = make_target(cfg);
    FitConfig fit = cfg.fit;
    fit.seed = cfg.seed;
    PipelineOptions popts = cfg.pipeline;
    const SolverConfig& solver = popts.solver;
    const double share = cfg.epsilon / 3.0;

    std::optional<AssembledControls> assembled;
    std::optional<NeuronControls> smooth;
    std::optional<StageCurves> curves;
    std::optional<ResNetModel> net;
    std::string stage = "assemble";
    try {
        assembled.emplace(assemble_h_L(f, d, cfg.epsilon, sigma, fit, popts));
        rep.assembly = assembled->report;
        VectorField h_switched = assembled->controls.as_field();

        // Smoothing width: start wide and halve until the measured flow gap
        // fits inside the stage budget. The certificate from the state and
        // activation bounds is reported alongside whatever width wins.
        stage = "mollify";
        BoundOptions bopts;
        bopts.solver = solver;
        std::optional<BoundReport> flow_gap;
        double delta = cfg.horizon / 4.0;
        double best_gap = std::numeric_limits<double>::infinity();
        for (;;) {
            NeuronControls candidate = mollify_controls(assembled->controls, delta);
            BoundReport gap = mollified_flow_error(assembled->controls, candidate, d, bopts);
            best_gap = std::min(best_gap, gap.measured);
            if (gap.measured < share) {
                smooth.emplace(std::move(candidate));
                flow_gap.emplace(std::move(gap));
                break;
            }
            delta *= 0.5;
            if (delta < 1e-6 * cfg.horizon)
                throw ApproximationError(
                    "mollify: no width kept the smoothing error inside its budget",
                    best_gap);
        }
        rep.delta = delta;
        rep.bound_reports.push_back(*flow_gap);
        auto state_act = mollified_control_bounds(assembled->controls, delta, d, bopts);
        rep.bound_reports.push_back(state_act[0]);
        rep.bound_reports.push_back(state_act[1]);

        // Stage curves along the chain target -> frozen -> switched -> smooth.
        stage = "measure";
        SliceSchedule schedule =
            slice_time(f, rep.assembly.slice_count, d, popts.time_samples);
        VectorField f_frozen = frozen_field(schedule);
        VectorField h_smooth = smooth->as_field();
        const int slice_count = rep.assembly.slice_count;
        const int base_steps = solver.time_steps;
        int smooth_steps = std::max(
            base_steps,
            std::min(2 * static_cast<int>(smooth->value_count()), 262144));
        std::vector<int> steps = {std::max(base_steps, 4 * slice_count),
                                  std::max(base_steps, 4 * slice_count), base_steps,
                                  smooth_steps};
        curves.emplace(measure_stages({f, f_frozen, h_switched, h_smooth}, steps, d,
                                      cfg.horizon, popts.probe_count, solver,
                                      popts.threads));

        const double lip = f.lipschitz_x();
        double freeze_measured = curves->stage_max(0);
        rep.stages.push_back(
            {"freeze", freeze_measured,
             flow_distance_certificate(rep.assembly.snapshot_gap, lip, cfg.horizon),
             share, freeze_measured < share});
        double fitmux_measured = curves->stage_max(1);
        rep.stages.push_back(
            {"fit_multiplex", fitmux_measured, share, share, fitmux_measured < share});
        double mollify_measured = curves->stage_max(2);
        rep.stages.push_back({"mollify", mollify_measured, flow_gap->certified, share,
                              mollify_measured < share});

        // Final-time totals and the grid L^p error of the smooth controls.
        SolverConfig ref = solver;
        ref.method = SolveMethod::rk4_reference;
        ref.time_steps = std::max(base_steps, 1024);
        SolverConfig ref_smooth = ref;
        ref_smooth.time_steps = smooth_steps;
        auto grid = d.grid();
        std::vector<Eigen::VectorXd> target_finals;
        target_finals.reserve(grid.size());
        double sup_controls = 0.0;
        double lp_sum = 0.0;
        for (const Eigen::VectorXd& xi : grid) {
            Eigen::VectorXd xf = solve_flow(f, xi, cfg.horizon, ref).final_state();
            Eigen::VectorXd xh =
                solve_flow(h_smooth, xi, cfg.horizon, ref_smooth).final_state();
            double err = (xf - xh).norm();
            sup_controls = std::max(sup_controls, err);
            lp_sum += std::pow(err, cfg.lp_order);
            target_finals.push_back(std::move(xf));
        }
        rep.total_vs_controls = sup_controls;
        rep.lp_measured =
            std::pow(lp_sum / static_cast<double>(grid.size()), 1.0 / cfg.lp_order);

        if (!cfg.resnet_depths.empty()) {
            stage = "resnet";
            rep.depth_study = depth_convergence_study(*smooth, d, cfg.resnet_depths, solver);
            int max_depth =
                *std::max_element(cfg.resnet_depths.begin(), cfg.resnet_depths.end());
            net.emplace(extract_resnet(*smooth, max_depth));
            double sup_net = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i)
                sup_net = std::max(sup_net, (target_finals[i] - net->forward(grid[i])).norm());
            rep.total_vs_resnet = sup_net;
            const DepthRow* deepest = nullptr;
            for (const DepthRow& row : rep.depth_study.rows)
                if (!deepest || row.depth > deepest->depth) deepest = &row;
            rep.stages.push_back({"resnet", deepest->sup_error, deepest->envelope, kNan,
                                  deepest->sup_error <= deepest->envelope});
        }

        bool ok = true;
        for (const StageEntry& s : rep.stages) ok = ok && s.within_budget;
        ok = ok && rep.total_vs_controls < cfg.epsilon;
        if (!cfg.resnet_depths.empty()) ok = ok && rep.total_vs_resnet < cfg.epsilon;
        for (const BoundReport& b : rep.bound_reports) ok = ok && b.holds();
        rep.budgets_met = ok;
    } catch (const Error& e) {
        rep.failure_stage = stage;
        rep.failure_message = e.what();
        rep.budgets_met = false;
    }

    // Single writer: every artifact lands after the computation settles.
    fs::path out(out_dir);
    if (assembled)
        write_text_file((out / "schedule_switched.json").string(),
                        controls_to_json(assembled->controls));
    if (smooth)
        write_text_file((out / "schedule.json").string(), controls_to_json(*smooth));
    if (net) write_text_file((out / "resnet.json").string(), resnet_to_json(*net));
    if (curves) {
        std::string csv = "t,freeze,fit_multiplex,mollify,total\n";
        for (std::size_t p = 0; p < curves->probe_times.size(); ++p) {
            csv += num_text(curves->probe_times[p]);
            for (std::size_t s = 0; s < curves->stage_sup.size(); ++s)
                csv += "," + num_text(curves->stage_sup[s][p]);
            csv += "," + num_text(curves->total[p]) + "\n";
        }
        write_csv(out / "stages.csv", csv);
    }
    if (!rep.depth_study.rows.empty()) {
        std::string csv = "depth,sup_error,modulus,envelope\n";
        for (const DepthRow& row : rep.depth_study.rows) {
            csv += std::to_string(row.depth) + "," + num_text(row.sup_error) + "," +
                   num_text(row.modulus) + "," + num_text(row.envelope) + "\n";
        }
        write_csv(out / "depth_study.csv", csv);
    }
    write_text_file((out / "report.json").string(), error_report_to_json(rep));
    return rep;
}

CounterexampleReport run_counterexample(const RunConfig& cfg, int search_count,
                                        const std::string& out_dir) {
    if (cfg.dimension != 1)
        bad_config("the reflection target is one dimensional");
    if (search_count < 1) bad_config("search count must be >= 1");
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir));

    const double t_end = cfg.horizon;
    const Domain d = Domain::centered_box(1, 1.0, 33);
    const Activation sigma = run_activation(cfg);
    const SolverConfig scfg = cfg.pipeline.solver;
    const auto grid = d.grid();

    CounterexampleReport out;
    out.search_count = search_count;
    double min_gap = std::numeric_limits<double>::infinity();

    auto sup_reflection_error = [&](const VectorField& h) {
        double s = 0.0;
        for (const Eigen::VectorXd& xi : grid) {
            Eigen::VectorXd x = solve_flow(h, xi, t_end, scfg).final_state();
            s = std::max(s, std::abs(-xi(0) - x(0)));
        }
        return s;
    };
    // Flows from -1 and +1 share the integration grid, so the order gap is a
    // pointwise minimum over nodes.
    auto order_trajectories = [&](const VectorField& h) {
        Trajectory lo = solve_flow(h, Eigen::VectorXd::Constant(1, -1.0), t_end, scfg);
        Trajectory hi = solve_flow(h, Eigen::VectorXd::Constant(1, 1.0), t_end, scfg);
        return std::pair<Trajectory, Trajectory>(std::move(lo), std::move(hi));
    };
    auto min_order_gap = [](const std::pair<Trajectory, Trajectory>& pair) {
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < pair.first.states.size(); ++k)
            g = std::min(g, pair.second.states[k](0) - pair.first.states[k](0));
        return g;
    };

    // (a) Pipeline attempt: approximate the contraction that heads toward
    // the flip as far as any flow can. Its time-T map keeps the order of the
    // endpoints, so the error against the reflection stays large.
    VectorField f = fields::neg_tanh(1, t_end);
    FitConfig fit = cfg.fit;
    fit.seed = cfg.seed;
    double eps_attempt = std::max(cfg.epsilon, 0.5);
    AssembledControls attempt = assemble_h_L(f, d, eps_attempt, sigma, fit, cfg.pipeline);
    VectorField h_attempt = attempt.controls.as_field();
    out.pipeline_error = sup_reflection_error(h_attempt);
    auto attempt_pair = order_trajectories(h_attempt);
    min_gap = std::min(min_gap, min_order_gap(attempt_pair));

    // (b) Random search over constant controls, seeded with the hand-picked
    // contraction candidates.
    std::vector<std::array<double, 3>> candidates = {
        {-1.0, 1.0, 0.0}, {-5.0, 5.0, 0.0}, {-5.0, 1.0, 0.0}, {1.0, -1.0, 0.0},
        {0.0, 0.0, 0.0}};
    UniformSource rng(mix_seed(cfg.seed, 0xce));
    for (int i = 0; i < search_count; ++i)
        candidates.push_back({rng.symmetric(5.0), rng.symmetric(5.0), rng.symmetric(5.0)});

    double best_err = std::numeric_limits<double>::infinity();
    std::array<double, 3> best{0.0, 0.0, 0.0};
    std::optional<std::pair<Trajectory, Trajectory>> best_pair;
    for (const auto& cand : candidates) {
        NeuronControls controls = NeuronControls::constant(
            sigma, Eigen::VectorXd::Constant(1, cand[0]),
            Eigen::MatrixXd::Constant(1, 1, cand[1]),
            Eigen::VectorXd::Constant(1, cand[2]), t_end);
        VectorField h = controls.as_field();
        double err = sup_reflection_error(h);
        auto pair = order_trajectories(h);
        min_gap = std::min(min_gap, min_order_gap(pair));
        if (err < best_err) {
            best_err = err;
            best = cand;
            best_pair.emplace(std::move(pair));
        }
    }
    out.search_error = best_err;
    out.best_alpha = best[0];
    out.best_beta = best[1];
    out.best_gamma = best[2];
    out.best_error = std::min(out.pipeline_error, out.search_error);
    out.min_ordered_gap = min_gap;
    out.separation_positive = min_gap > 0.0;
    out.lower_bound_respected = out.best_error >= 0.9;

    const auto& csv_pair = out.search_error <= out.pipeline_error ? *best_pair : attempt_pair;
    std::string csv = "t,x_minus,x_plus,gap\n";
    for (std::size_t k = 0; k < csv_pair.first.times.size(); ++k) {
        double lo = csv_pair.first.states[k](0);
        double hi = csv_pair.second.states[k](0);
        csv += num_text(csv_pair.first.times[k]) + "," + num_text(lo) + "," +
               num_text(hi) + "," + num_text(hi - lo) + "\n";
    }
    write_csv(fs::path(out_dir) / "reflection_gap.csv", csv);

    json j;
    j["format"] = "counterexample";
    j["version"] = 1;
    j["pipeline_error"] = out.pipeline_error;
    j["search_error"] = out.search_error;
    j["best_error"] = out.best_error;
    j["best_candidate"] = {{"alpha", out.best_alpha},
                           {"beta", out.best_beta},
                           {"gamma", out.best_gamma}};
    j["search_count"] = out.search_count;
    j["min_ordered_gap"] = out.min_ordered_gap;
    j["separation_positive"] = out.separation_positive;
    j["lower_bound_respected"] = out.lower_bound_respected;
    write_text_file((fs::path(out_dir) / "counterexample.json").string(),
                    j.dump(2) + "\n");
    return out;
}

AveragingRun run_averaging(const std::string& family, const std::vector<int>& m_list,
                           const std::string& out_dir, const SolverConfig& solver) {
    if (m_list.empty()) bad_config("average: the m list is empty");
    for (int m : m_list)
        if (m < 1) bad_config("average: m values must be >= 1");
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir));

    AveragingRun out;
    out.family = family;
    std::optional<PiecewiseField> pf;
    if (family == "constant") {
        Eigen::VectorXd c = Eigen::VectorXd::Constant(1, 0.7);
        std::vector<VectorField> pieces = {fields::constant(c, 1.0),
                                           fields::constant(c, 1.0)};
        pf.emplace(std::vector<double>{0.0, 0.5, 1.0}, std::move(pieces));
        out.start = Eigen::VectorXd::Constant(1, 0.3);
    } else if (family == "mean_zero_alternation") {
        pf.emplace(fields::alternating_constant(1.0, 1.0));
        out.start = Eigen::VectorXd::Zero(1);
    } else if (family == "two_field_linear") {
        Eigen::MatrixXd a1(2, 2), a2(2, 2);
        a1 << 0.0, -2.0, 2.0, 0.0;
        a2 << -1.0, 0.0, 0.0, -1.0;
        pf.emplace(fields::alternating_linear(a1, a2, 1.0));
        out.start = Eigen::VectorXd(2);
        out.start << 1.0, 0.5;
    } else {
        bad_config("average: unknown family '" + family + "'");
    }

    out.result = averaging_experiment(*pf, out.start, m_list, solver);

    std::string csv = "m,sup_distance\n";
    for (const AveragingRow& row : out.result.rows)
        csv += std::to_string(row.m) + "," + num_text(row.distance) + "\n";
    write_csv(fs::path(out_dir) / "averaging.csv", csv);

    json j;
    j["format"] = "averaging";
    j["version"] = 1;
    j["family"] = family;
    j["log2_slope"] = out.result.log2_slope;
    json rows = json::array();
    for (const AveragingRow& row : out.result.rows)
        rows.push_back({{"m", row.m}, {"sup_distance", row.distance}});
    j["rows"] = rows;
    json start = json::array();
    for (Eigen::Index i = 0; i < out.start.size(); ++i) start.push_back(out.start(i));
    j["start"] = start;
    write_text_file((fs::path(out_dir) / "averaging.json").string(), j.dump(2) + "\n");
    return out;
}

void run_simulate(const RunConfig& cfg, const std::string& out_dir) {
    validate_run_config(cfg);
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir));

    const Domain d = run_domain(cfg);
    const VectorField f = make_target(cfg);
    const SolverConfig scfg = cfg.pipeline.solver;

    std::string csv;
    for (int i = 0; i < cfg.dimension; ++i) csv += "xi_" + std::to_string(i) + ",";
    for (int i = 0; i < cfg.dimension; ++i)
        csv += "x_" + std::to_string(i) + (i + 1 == cfg.dimension ? "" : ",");
    csv += "\n";
    for (const Eigen::VectorXd& xi : d.grid()) {
        Eigen::VectorXd x = solve_flow(f, xi, cfg.horizon, scfg).final_state();
        for (Eigen::Index i = 0; i < xi.size(); ++i) csv += num_text(xi(i)) + ",";
        for (Eigen::Index i = 0; i < x.size(); ++i)
            csv += num_text(x(i)) + (i + 1 == x.size() ? "" : ",");
        csv += "\n";
    }
    write_csv(fs::path(out_dir) / "simulate.csv", csv);
}

namespace {

bool type_matches(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "number") return v.is_number();
    if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    return false;
}

// Structural subset of JSON Schema: type / required / properties / items.
void check_schema(const json& v, const json& sc, const std::string& path,
                  std::vector<std::string>& problems) {
    if (sc.contains("type")) {
        const json& t = sc["type"];
        bool ok = false;
        if (t.is_string()) {
            ok = type_matches(v, t.get<std::string>());
        } else if (t.is_array()) {
            for (const json& option : t)
                if (option.is_string() && type_matches(v, option.get<std::string>()))
                    ok = true;
        }
        if (!ok) {
            problems.push_back(path + ": type mismatch");
            return;
        }
    }
    if (v.is_object()) {
        if (sc.contains("required"))
            for (const json& r : sc["required"])
                if (r.is_string() && !v.contains(r.get<std::string>()))
                    problems.push_back(path + ": missing key '" + r.get<std::string>() + "'");
        if (sc.contains("properties"))
            for (const auto& item : sc["properties"].items())
                if (v.contains(item.key()))
                    check_schema(v[item.key()], item.value(), path + "." + item.key(),
                                 problems);
    }
    if (v.is_array() && sc.contains("items")) {
        for (std::size_t i = 0; i < v.size(); ++i)
            check_schema(v[i], sc["items"], path + "[" + std::to_string(i) + "]",
                         problems);
    }
}

double number_or(const json& v, double fallback) {
    return v.is_number() ? v.get<double>() : fallback;
}

}  // namespace

VerifyResult verify_report_file(const std::string& report_path,
                                const std::string& schema_path) {
    json rep = parse_json(read_text_file(report_path), "report");
    json schema = parse_json(read_text_file(schema_path), "schema");

    VerifyResult out;
    check_schema(rep, schema, "$", out.problems);

    if (rep.contains("bound_reports") && rep["bound_reports"].is_array()) {
        for (const json& b : rep["bound_reports"]) {
            if (!b.is_object()) continue;
            double certified = number_or(b.value("certified", json()), kNan);
            double measured = number_or(b.value("measured", json()), kNan);
            std::string name = b.value("name", std::string("?"));
            if (std::isnan(certified) || std::isnan(measured)) continue;
            if (!(measured <= certified * (1.0 + 1e-6) + 1e-9))
                out.problems.push_back("bound '" + name + "': certified below measured");
        }
    }

    double budget_sum = 0.0;
    bool stages_ok = true;
    if (rep.contains("stages") && rep["stages"].is_array()) {
        for (const json& s : rep["stages"]) {
            if (!s.is_object()) continue;
            std::string name = s.value("name", std::string("?"));
            bool within = s.value("within_budget", false);
            stages_ok = stages_ok && within;
            const json& budget = s.contains("budget") ? s["budget"] : json();
            double measured = number_or(s.value("measured", json()), kNan);
            if (budget.is_number()) {
                budget_sum += budget.get<double>();
                if (!std::isnan(measured) && within != (measured < budget.get<double>()))
                    out.problems.push_back("stage '" + name + "': budget flag inconsistent");
            }
        }
    }

    if (rep.value("budgets_met", false)) {
        if (!rep.value("failure_stage", std::string()).empty())
            out.problems.push_back("budgets_met set on a failed run");
        if (!stages_ok)
            out.problems.push_back("budgets_met set with a stage out of budget");
        double epsilon = number_or(rep.value("epsilon", json()), kNan);
        double total = kNan;
        if (rep.contains("totals") && rep["totals"].is_object())
            total = number_or(rep["totals"].value("vs_controls", json()), kNan);
        if (!std::isnan(total) && !std::isnan(epsilon) && !(total < epsilon))
            out.problems.push_back("total exceeds epsilon despite budgets_met");
        if (!std::isnan(total) && budget_sum > 0.0 && !(total <= budget_sum))
            out.problems.push_back("total exceeds the sum of stage budgets");
    }

    out.ok = out.problems.empty();
    return out;
}

}  // namespace odenet
