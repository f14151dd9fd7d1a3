// Command-line front end for the curation toolkit: filter | score |
// calibrate | plan-tiles | schedule | report.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vlcurate/pipeline.hpp"

namespace {

using vlcurate::RunConfig;

void add_common_flags(CLI::App* cmd, RunConfig& run) {
    cmd->add_option("--manifest", run.manifests, "Input manifest file (repeatable)");
    cmd->add_option("--sidecar", run.sidecars,
                    "Annotation sidecar file; one in total or one per manifest");
    cmd->add_option("--config", run.filter_config, "Filter config JSON file");
    cmd->add_option("--weights", run.weights_config, "Per-category weights config JSON file");
    cmd->add_option("--beta", run.gap.beta, "Loss-gap ratio hyperparameter");
    cmd->add_option("--delta", run.gap.delta, "Loss-gap floor hyperparameter");
    cmd->add_flag("--delta-on-raw-large-loss", run.gap.delta_on_raw_large_loss,
                  "Apply delta to the raw large-model loss instead of beta * loss");
    cmd->add_option("--norm",
                    [&run](const std::vector<std::string>& values) {
                        run.norm = vlcurate::norm_mode_from_string(values.front());
                        return true;
                    },
                    "Normalization mode: minmax or fixed")
        ->type_name("MODE")
        ->check(CLI::IsMember({"minmax", "fixed"}));
    cmd->add_option("--scale", run.scale_factor, "Curriculum scale factor in (0,1]");
    cmd->add_option("--seed", run.seed, "Run seed, recorded in every output");
    cmd->add_option("--out", run.out_dir, "Output directory");
    cmd->add_option("--max-tiles", run.resolution.max_tiles, "Dynamic tile cap");
    cmd->add_option("--patch-size", run.resolution.patch_size, "Encoder patch size, px");
    cmd->add_option("--encoder-input", run.resolution.encoder_input, "Encoder tile side, px");
    cmd->add_option("--pixel-shuffle-ratio", run.resolution.pixel_shuffle_ratio,
                    "Token compression ratio");
    cmd->add_flag_callback(
        "--pad-up-only",
        [&run] { run.resolution.snap_mode = vlcurate::ResolutionConfig::SnapMode::pad_up_only; },
        "Snap dimensions up to the next token-cell multiple instead of the nearest");
    cmd->add_flag("--fixed-grid-thumbnail", run.resolution.fixed_grid_thumbnail,
                  "Add a thumbnail tile to the fixed_multiple_grid comparator");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dataset curation and curriculum planning for vision-language corpora"};
    app.require_subcommand(1);

    RunConfig run;
    vlcurate::CalibrateArgs calibrate_args;
    std::string calibrate_category;
    std::vector<std::string> scheme_labels;
    std::string sizes_path;
    int single_width = 0, single_height = 0;
    std::vector<std::string> report_files;
    std::string report_out;
    double split_threshold = -1.0;

    CLI::App* filter = app.add_subcommand("filter", "Run the data filtering pipeline");
    add_common_flags(filter, run);

    CLI::App* score = app.add_subcommand("score", "Compute complexity reports for manifests");
    add_common_flags(score, run);

    CLI::App* calibrate =
        app.add_subcommand("calibrate", "Grid-search axis weights against ranked subsets");
    add_common_flags(calibrate, run);
    calibrate->add_option("--category", calibrate_category, "Task category to calibrate")
        ->required();
    calibrate
        ->add_option("--report", calibrate_args.report_paths,
                     "Score report of one ranked subset; give 5 in rank order, easiest first")
        ->expected(1, 5);
    calibrate->add_option("--step", calibrate_args.grid_step, "Simplex grid step (divides 1)");
    calibrate->add_option("--require-margin", [&calibrate_args](const std::vector<std::string>& v) {
        calibrate_args.require_margin = std::stod(v.front());
        return true;
    }, "Fail unless feasible with at least this margin")->type_name("FLOAT");

    CLI::App* plan = app.add_subcommand("plan-tiles", "Plan dynamic-resolution tiling");
    add_common_flags(plan, run);
    plan->add_option("width", single_width, "Image width for single-plan mode");
    plan->add_option("height", single_height, "Image height for single-plan mode");
    plan->add_option("--input", sizes_path, "Batch mode: 'width height' pairs, one per line ('-' for stdin)");
    plan->add_option("--scheme", scheme_labels, "Budget scheme (repeatable): magicvl, fixed_multiple_grid, fixed_width_grid")
        ->check(CLI::IsMember({"magicvl", "fixed_multiple_grid", "fixed_width_grid"}));

    CLI::App* schedule = app.add_subcommand("schedule", "Build the four-stage curriculum plan");
    add_common_flags(schedule, run);
    schedule->add_option("--split-threshold", split_threshold,
                         "Use a fixed complexity threshold instead of the per-category median");

    CLI::App* report = app.add_subcommand("report", "Render score reports as a markdown table");
    report->add_option("reports", report_files, "Score report JSON files")->required();
    report->add_option("--out", report_out, "Write the table to this file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& label : scheme_labels) {
            run.schemes.push_back(*vlcurate::scheme_from_string(label));
        }
        if (split_threshold >= 0.0) {
            run.split.kind = vlcurate::SplitPolicy::Kind::threshold;
            run.split.threshold = split_threshold;
        }

        if (filter->parsed()) {
            vlcurate::cmd_filter(run, std::cerr);
        } else if (score->parsed()) {
            vlcurate::cmd_score(run, std::cerr);
        } else if (calibrate->parsed()) {
            calibrate_args.category = vlcurate::parse_task_category(calibrate_category);
            vlcurate::cmd_calibrate(run, calibrate_args, std::cerr);
        } else if (plan->parsed()) {
            if (!sizes_path.empty()) {
                if (sizes_path == "-") {
                    vlcurate::cmd_plan_tiles_batch(run, std::cin, std::cout);
                } else {
                    std::ifstream sizes(sizes_path);
                    if (!sizes) throw std::runtime_error("cannot open sizes input: " + sizes_path);
                    vlcurate::cmd_plan_tiles_batch(run, sizes, std::cout);
                }
            } else if (single_width > 0 && single_height > 0) {
                vlcurate::cmd_plan_tiles_single(run, single_width, single_height, std::cout);
            } else {
                throw std::runtime_error("plan-tiles needs either WIDTH HEIGHT or --input");
            }
        } else if (schedule->parsed()) {
            vlcurate::cmd_schedule(run, std::cerr);
        } else if (report->parsed()) {
            vlcurate::cmd_report(report_files, report_out, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
