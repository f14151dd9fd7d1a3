#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vlcurate/curriculum.hpp"
#include "vlcurate/filterbank.hpp"
#include "vlcurate/manifest.hpp"
#include "vlcurate/scoring.hpp"
#include "vlcurate/tileplan.hpp"

namespace vlcurate {

/// One run's full configuration. Snapshotted (with the seed) into every
/// output document, so equal configs reproduce byte-identical outputs.
struct RunConfig {
    std::vector<std::string> manifests;
    std::vector<std::string> sidecars;  ///< one per manifest, or one for all
    std::string filter_config;          ///< path; defaults apply when empty
    std::string weights_config;         ///< path; uniform fallback when empty
    GapConfig gap;
    NormMode norm = NormMode::minmax;
    ResolutionConfig resolution;
    SplitPolicy split;
    double scale_factor = 1.0;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::vector<Scheme> schemes;  ///< plan-tiles; empty means all
};

std::string run_config_to_json(const RunConfig& run);

/// Filters every manifest; writes <out>/filter/<name>.kept.jsonl and
/// <name>.report.json. Nothing is written if any dataset fails.
void cmd_filter(const RunConfig& run, std::ostream& diag);

/// Scores every manifest (split by per-sample sidecar labels when present)
/// in one normalization batch; writes per-dataset reports plus a summary
/// ranked by composite score.
void cmd_score(const RunConfig& run, std::ostream& diag);

struct CalibrateArgs {
    TaskCategory category = TaskCategory::caption;
    std::vector<std::string> report_paths;  ///< exactly 5, rank order 1 (easiest) .. 5
    double grid_step = 0.05;
    std::optional<double> require_margin;  ///< gate: fail unless feasible with this margin
};

/// Grid-searches weights against ranked subset reports and upserts the
/// category entry of the weights config file.
void cmd_calibrate(const RunConfig& run, const CalibrateArgs& args, std::ostream& diag);

/// Prints the full tile plan for one image as JSON.
void cmd_plan_tiles_single(const RunConfig& run, int width, int height, std::ostream& out);

/// Batch mode: reads "width height" pairs one per line and prints a
/// per-scheme token budget table with aggregate totals. Also writes
/// <out>/plan_tiles/budgets.json when an output directory is configured.
void cmd_plan_tiles_batch(const RunConfig& run, std::istream& sizes, std::ostream& out);

/// Scores, splits, builds the four-stage curriculum, draws each stage's
/// sample budget (proportional to dataset size, seeded shuffle) and packs
/// the draws under the shared token/image caps. Writes the training config
/// and per-stage pack documents.
void cmd_schedule(const RunConfig& run, std::ostream& diag);

/// Renders score reports as a markdown table, to a file when out_path is
/// non-empty, otherwise to `out`.
void cmd_report(const std::vector<std::string>& report_paths, const std::string& out_path,
                std::ostream& out);

}  // namespace vlcurate
