#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "odenet/driver.hpp"
#include "odenet/resnet.hpp"
#include "odenet/serialize.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int threads = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
};

void add_common(CLI::App* sub, CommonArgs& args, bool config_required) {
    auto* cfg = sub->add_option("--config", args.config_path, "Run configuration (JSON)");
    if (config_required) cfg->required();
    sub->add_option("--out", args.out_dir, "Output directory");
    args.seed_opt = sub->add_option("--seed", args.seed, "Override the config seed");
    args.threads_opt =
        sub->add_option("--threads", args.threads, "Worker pool size for grid sweeps");
}

odenet::RunConfig load_config(const CommonArgs& args) {
    odenet::RunConfig cfg;
    if (!args.config_path.empty())
        cfg = odenet::run_config_from_json(odenet::read_text_file(args.config_path));
    if (args.seed_opt && args.seed_opt->count() > 0) cfg.seed = args.seed;
    if (args.threads_opt && args.threads_opt->count() > 0 && args.threads > 0)
        cfg.pipeline.threads = args.threads;
    return cfg;
}

int run_fit(const CommonArgs& args) {
    odenet::RunConfig cfg = load_config(args);
    odenet::ErrorReport rep = odenet::run_pipeline(cfg, args.out_dir);
    if (!rep.failure_stage.empty()) {
        std::printf("failed at stage %s: %s\n", rep.failure_stage.c_str(),
                    rep.failure_message.c_str());
        return 1;
    }
    for (const odenet::StageEntry& s : rep.stages)
        std::printf("stage %-13s measured %.6g certified %.6g %s\n", s.name.c_str(),
                    s.measured, s.certified, s.within_budget ? "ok" : "OVER BUDGET");
    std::printf("total vs controls %.6g (epsilon %.6g), L^%g error %.6g\n",
                rep.total_vs_controls, rep.epsilon, rep.lp_order, rep.lp_measured);
    if (!std::isnan(rep.total_vs_resnet))
        std::printf("total vs resnet %.6g\n", rep.total_vs_resnet);
    std::printf("budgets %s; report in %s/report.json\n",
                rep.budgets_met ? "met" : "NOT met", args.out_dir.c_str());
    return rep.budgets_met ? 0 : 1;
}

int run_simulate_cmd(const CommonArgs& args) {
    odenet::RunConfig cfg = load_config(args);
    odenet::run_simulate(cfg, args.out_dir);
    std::printf("final states in %s/simulate.csv\n", args.out_dir.c_str());
    return 0;
}

int run_average_cmd(const CommonArgs& args, const std::string& family,
                    const std::vector<int>& m_list) {
    odenet::RunConfig cfg = load_config(args);
    odenet::AveragingRun run =
        odenet::run_averaging(family, m_list, args.out_dir, cfg.pipeline.solver);
    for (const odenet::AveragingRow& row : run.result.rows)
        std::printf("m %4d  sup distance %.6g\n", row.m, row.distance);
    std::printf("log2 slope %.4f; rows in %s/averaging.csv\n", run.result.log2_slope,
                args.out_dir.c_str());
    return 0;
}

int run_resnet_cmd(const CommonArgs& args) {
    odenet::RunConfig cfg = load_config(args);
    if (cfg.schedule_path.empty())
        throw odenet::ConfigError("config: resnet extraction needs schedule_path");
    if (cfg.resnet_depths.empty())
        throw odenet::ConfigError("config: resnet_depths is empty");
    odenet::NeuronControls controls =
        odenet::controls_from_json(odenet::read_text_file(cfg.schedule_path));
    odenet::Domain d = odenet::run_domain(cfg);
    odenet::DepthStudy study = odenet::depth_convergence_study(
        controls, d, cfg.resnet_depths, cfg.pipeline.solver);
    int max_depth = 0;
    for (const odenet::DepthRow& row : study.rows) max_depth = std::max(max_depth, row.depth);
    odenet::ResNetModel net = odenet::extract_resnet(controls, max_depth);

    namespace fs = std::filesystem;
    fs::create_directories(fs::path(args.out_dir));
    odenet::write_text_file((fs::path(args.out_dir) / "resnet.json").string(),
                            odenet::resnet_to_json(net));
    std::string csv = "depth,sup_error,modulus,envelope\n";
    bool all_below = true;
    for (const odenet::DepthRow& row : study.rows) {
        csv += std::to_string(row.depth) + "," + std::to_string(row.sup_error) + "," +
               std::to_string(row.modulus) + "," + std::to_string(row.envelope) + "\n";
        std::printf("depth %4d  sup error %.6g  envelope %.6g\n", row.depth,
                    row.sup_error, row.envelope);
        all_below = all_below && row.sup_error <= row.envelope;
    }
    odenet::write_text_file((fs::path(args.out_dir) / "depth_study.csv").string(), csv);
    std::printf("envelope %s\n", all_below ? "respected" : "VIOLATED");
    return all_below ? 0 : 1;
}

int run_verify_cmd(const std::string& report_path, const std::string& schema_path) {
    odenet::VerifyResult res = odenet::verify_report_file(report_path, schema_path);
    for (const std::string& p : res.problems) std::printf("problem: %s\n", p.c_str());
    std::printf("%s\n", res.ok ? "report valid" : "report INVALID");
    return res.ok ? 0 : 1;
}

int run_counterexample_cmd(const CommonArgs& args, int count) {
    odenet::RunConfig cfg = load_config(args);
    odenet::CounterexampleReport rep =
        odenet::run_counterexample(cfg, count, args.out_dir);
    std::printf("pipeline attempt error %.6g\n", rep.pipeline_error);
    std::printf("search best error %.6g (alpha %.4g beta %.4g gamma %.4g)\n",
                rep.search_error, rep.best_alpha, rep.best_beta, rep.best_gamma);
    std::printf("best error %.6g (lower bound %s), min order gap %.6g (%s)\n",
                rep.best_error, rep.lower_bound_respected ? "respected" : "BROKEN",
                rep.min_ordered_gap,
                rep.separation_positive ? "no crossing" : "CROSSED");
    return rep.lower_bound_respected && rep.separation_positive ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constructive flow approximation by single-neuron controls"};
    app.require_subcommand(1);

    CommonArgs fit_args, sim_args, avg_args, res_args, cex_args;
    std::string family = "mean_zero_alternation";
    std::vector<int> m_list = {4, 8, 16, 32, 64, 128, 256};
    std::string report_path = "out/report.json";
    std::string schema_path = "schemas/error_report.schema.json";
    int cex_count = 1000;

    CLI::App* fit = app.add_subcommand("fit", "Run the full approximation pipeline");
    add_common(fit, fit_args, true);
    CLI::App* simulate = app.add_subcommand("simulate", "Integrate the target flow");
    add_common(simulate, sim_args, true);
    CLI::App* average = app.add_subcommand("average", "Switched vs averaged flow study");
    add_common(average, avg_args, false);
    average->add_option("--family", family,
                        "constant | mean_zero_alternation | two_field_linear");
    average->add_option("--m", m_list, "Sweep counts to test");
    CLI::App* resnet = app.add_subcommand("resnet", "Depth study for a control schedule");
    add_common(resnet, res_args, true);
    CLI::App* verify = app.add_subcommand("verify", "Validate a written report");
    verify->add_option("--report", report_path, "Report to validate");
    verify->add_option("--schema", schema_path, "Schema to validate against");
    CLI::App* counterexample =
        app.add_subcommand("counterexample", "Reflection map impossibility run");
    add_common(counterexample, cex_args, false);
    counterexample->add_option("--count", cex_count, "Random candidates to try");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) return run_fit(fit_args);
        if (simulate->parsed()) return run_simulate_cmd(sim_args);
        if (average->parsed()) return run_average_cmd(avg_args, family, m_list);
        if (resnet->parsed()) return run_resnet_cmd(res_args);
        if (verify->parsed()) return run_verify_cmd(report_path, schema_path);
        if (counterexample->parsed()) return run_counterexample_cmd(cex_args, cex_count);
    } catch (const odenet::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const odenet::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
