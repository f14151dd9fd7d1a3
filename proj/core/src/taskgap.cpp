#include "vlcurate/taskgap.hpp"

#include <cmath>
#include <stdexcept>

namespace vlcurate {

void validate_gap_config(const GapConfig& cfg) {
    if (!(cfg.beta > 0.0) || !std::isfinite(cfg.beta)) {
        throw std::runtime_error("gap config: beta must be finite and > 0");
    }
    if (!(cfg.delta >= 0.0) || !std::isfinite(cfg.delta)) {
        throw std::runtime_error("gap config: delta must be finite and >= 0");
    }
}

LossPairSeries collect_loss_pairs(const DatasetManifest& dataset, ModelTier lower, ModelTier upper) {
    LossPairSeries series;
    series.ids.reserve(dataset.samples.size());
    series.pairs.reserve(dataset.samples.size());
    for (const auto& s : dataset.samples) {
        const auto& losses = s.annotations.model_losses;
        const auto lo = losses.find(lower);
        const auto hi = losses.find(upper);
        if (lo == losses.end()) {
            throw std::runtime_error("sample '" + s.id + "': missing loss for tier '" +
                                     to_string(lower) + "'");
        }
        if (hi == losses.end()) {
            throw std::runtime_error("sample '" + s.id + "': missing loss for tier '" +
                                     to_string(upper) + "'");
        }
        series.ids.push_back(s.id);
        series.pairs.push_back(LossPair{lo->second, hi->second});
    }
    return series;
}

double pair_complexity(const LossPairSeries& series, const GapConfig& cfg) {
    validate_gap_config(cfg);
    if (series.pairs.empty()) throw std::runtime_error("pair_complexity: empty series");

    std::size_t qualifying = 0;
    for (const auto& pair : series.pairs) {
        const double scaled = cfg.beta * pair.loss_large;
        const double floor_value = cfg.delta_on_raw_large_loss ? pair.loss_large : scaled;
        if (pair.loss_small > scaled && floor_value > cfg.delta) ++qualifying;
    }
    return static_cast<double>(qualifying) / static_cast<double>(series.pairs.size());
}

double task_score(double c_small_mid, double c_mid_large) {
    for (const double v : {c_small_mid, c_mid_large}) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::runtime_error("task_score: input outside [0,1]");
        }
    }
    return (c_small_mid + c_mid_large) / 2.0;
}

}  // namespace vlcurate
