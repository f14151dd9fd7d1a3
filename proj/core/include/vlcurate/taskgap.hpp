#pragma once

#include <string>
#include <vector>

#include "vlcurate/manifest.hpp"

namespace vlcurate {

/// Loss-gap indicator parameters. Defaults are toolkit choices and are
/// recorded in every persisted report, never implied.
struct GapConfig {
    double beta = 1.2;   ///< required small/large loss ratio, > 0
    double delta = 0.5;  ///< floor screening trivially easy samples, >= 0
    /// When set, delta bounds the raw large-model loss instead of beta * loss.
    bool delta_on_raw_large_loss = false;
};

void validate_gap_config(const GapConfig& cfg);

/// Per-sample (smaller model, larger model) autoregressive losses, aligned
/// by sample id.
struct LossPair {
    double loss_small = 0.0;
    double loss_large = 0.0;
};

struct LossPairSeries {
    std::vector<std::string> ids;
    std::vector<LossPair> pairs;
};

/// Pulls aligned loss pairs for two tiers out of the manifest annotations.
/// Samples missing either tier throw, naming the sample and tier.
LossPairSeries collect_loss_pairs(const DatasetManifest& dataset, ModelTier lower, ModelTier upper);

/// Fraction of samples whose loss gap clears the margin:
/// loss_small > beta * loss_large and beta * loss_large > delta
/// (the second bound moves to the raw large loss under
/// delta_on_raw_large_loss). Result is in [0,1]; empty series throws.
double pair_complexity(const LossPairSeries& series, const GapConfig& cfg);

/// Mean of the two adjacent-tier complexities; inputs must be in [0,1].
double task_score(double c_small_mid, double c_mid_large);

}  // namespace vlcurate
