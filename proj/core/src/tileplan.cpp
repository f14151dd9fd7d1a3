#include "vlcurate/tileplan.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace vlcurate {

using nlohmann::json;

void validate_resolution_config(const ResolutionConfig& cfg) {
    if (cfg.patch_size < 1) throw std::runtime_error("resolution config: patch_size must be >= 1");
    if (cfg.pixel_shuffle_ratio < 1) {
        throw std::runtime_error("resolution config: pixel_shuffle_ratio must be >= 1");
    }
    if (cfg.encoder_input < cfg.token_cell() || cfg.encoder_input % cfg.token_cell() != 0) {
        throw std::runtime_error("resolution config: encoder_input must be a multiple of the token cell");
    }
    if (cfg.max_tiles < 1) throw std::runtime_error("resolution config: max_tiles must be >= 1");
}

namespace {

// Nearest (or upward) token-cell multiple of a real-valued dimension,
// floored at one cell.
int snap_real(double dim, int cell, ResolutionConfig::SnapMode mode) {
    long long k;
    if (mode == ResolutionConfig::SnapMode::nearest) {
        k = static_cast<long long>(std::floor(dim / cell + 0.5));
    } else {
        k = static_cast<long long>(std::ceil(dim / cell));
    }
    if (k < 1) k = 1;
    return static_cast<int>(k * cell);
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

std::pair<int, int> snap_dims(int width, int height, const ResolutionConfig& cfg) {
    validate_resolution_config(cfg);
    if (width < 1 || height < 1) throw std::runtime_error("snap_dims: dimensions must be >= 1");
    const int cell = cfg.token_cell();
    if (cfg.snap_mode == ResolutionConfig::SnapMode::nearest) {
        // floor(dim/cell + 0.5) in exact integer arithmetic.
        const auto snap = [cell](int dim) {
            long long k = (2LL * dim + cell) / (2LL * cell);
            if (k < 1) k = 1;
            return static_cast<int>(k * cell);
        };
        return {snap(width), snap(height)};
    }
    const auto snap_up = [cell](int dim) {
        long long k = (static_cast<long long>(dim) + cell - 1) / cell;
        if (k < 1) k = 1;
        return static_cast<int>(k * cell);
    };
    return {snap_up(width), snap_up(height)};
}

TilePlan plan_tiles(int width, int height, const ResolutionConfig& cfg) {
    validate_resolution_config(cfg);
    if (width < 1 || height < 1) throw std::runtime_error("plan_tiles: dimensions must be >= 1");
    const int cell = cfg.token_cell();
    const int enc = cfg.encoder_input;

    const auto tile_count = [&](int sw, int sh) {
        return static_cast<long long>(ceil_div(sw, enc)) * ceil_div(sh, enc);
    };

    auto [sw, sh] = snap_dims(width, height, cfg);
    bool downscaled = false;
    if (tile_count(sw, sh) > cfg.max_tiles) {
        // Largest uniform scale whose snapped grid fits. Feasibility is
        // monotone in the scale, so bisect; any scale small enough that both
        // dimensions floor at one cell is feasible (max_tiles >= 1).
        downscaled = true;
        double lo = 0.0, hi = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            const double mid = (lo + hi) / 2.0;
            const int tw = snap_real(width * mid, cell, cfg.snap_mode);
            const int th = snap_real(height * mid, cell, cfg.snap_mode);
            if (tile_count(tw, th) <= cfg.max_tiles) lo = mid;
            else hi = mid;
        }
        sw = snap_real(width * lo, cell, cfg.snap_mode);
        sh = snap_real(height * lo, cell, cfg.snap_mode);
    }

    TilePlan plan;
    plan.original_width = width;
    plan.original_height = height;
    plan.snapped_width = sw;
    plan.snapped_height = sh;
    plan.token_cols = sw / cell;
    plan.token_rows = sh / cell;
    plan.tiles_w = ceil_div(sw, enc);
    plan.tiles_h = ceil_div(sh, enc);
    plan.canvas_width = plan.tiles_w * enc;
    plan.canvas_height = plan.tiles_h * enc;
    plan.retained_tokens = plan.token_cols * plan.token_rows;
    const int capacity = plan.tiles_w * plan.tiles_h * cfg.tokens_per_tile();
    plan.padded_tokens = capacity - plan.retained_tokens;
    plan.downscaled = downscaled;

    plan.mask_cols = plan.tiles_w * cfg.tokens_per_tile_side();
    plan.mask_rows = plan.tiles_h * cfg.tokens_per_tile_side();
    plan.attention_mask.assign(
        static_cast<std::size_t>(plan.mask_cols) * static_cast<std::size_t>(plan.mask_rows), 0);
    // A canvas cell holds content iff its pixel rectangle intersects the
    // snapped image anchored at the canvas origin.
    for (int r = 0; r < plan.token_rows; ++r) {
        auto* row = plan.attention_mask.data() +
                    static_cast<std::size_t>(r) * static_cast<std::size_t>(plan.mask_cols);
        for (int c = 0; c < plan.token_cols; ++c) row[c] = 1;
    }
    return plan;
}

const char* to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::magicvl: return "magicvl";
        case Scheme::fixed_multiple_grid: return "fixed_multiple_grid";
        case Scheme::fixed_width_grid: return "fixed_width_grid";
    }
    return "unknown";
}

std::optional<Scheme> scheme_from_string(const std::string& label) {
    if (label == "magicvl") return Scheme::magicvl;
    if (label == "fixed_multiple_grid") return Scheme::fixed_multiple_grid;
    if (label == "fixed_width_grid") return Scheme::fixed_width_grid;
    return std::nullopt;
}

TokenBudget compare_schemes(int width, int height, const ResolutionConfig& cfg, Scheme scheme) {
    validate_resolution_config(cfg);
    if (width < 1 || height < 1) throw std::runtime_error("compare_schemes: dimensions must be >= 1");
    const int enc = cfg.encoder_input;

    TokenBudget budget;
    budget.scheme = scheme;
    switch (scheme) {
        case Scheme::magicvl: {
            const TilePlan p = plan_tiles(width, height, cfg);
            budget.resized_width = p.snapped_width;
            budget.resized_height = p.snapped_height;
            budget.tiles = p.tiles_w * p.tiles_h;
            budget.tokens = p.retained_tokens;
            return budget;
        }
        case Scheme::fixed_multiple_grid: {
            // Grids that cover the original image are preferred (the scheme
            // upsizes rather than crops); among them the aspect ratio
            // closest to the image wins, ties to the smaller area. Only for
            // images too large for any covering grid does the search fall
            // back to all grids, ties then to the larger area.
            const double target = static_cast<double>(width) / static_cast<double>(height);
            int best_w = 0, best_h = 0;
            bool best_covers = false;
            double best_diff = 0.0;
            for (int gh = 1; gh <= cfg.max_tiles; ++gh) {
                for (int gw = 1; gw * gh <= cfg.max_tiles; ++gw) {
                    const bool covers = gw * enc >= width && gh * enc >= height;
                    const double diff =
                        std::abs(static_cast<double>(gw) / static_cast<double>(gh) - target);
                    bool better;
                    if (best_w == 0) {
                        better = true;
                    } else if (covers != best_covers) {
                        better = covers;
                    } else if (diff != best_diff) {
                        better = diff < best_diff;
                    } else if (covers) {
                        better = gw * gh < best_w * best_h ||
                                 (gw * gh == best_w * best_h && gw < best_w);
                    } else {
                        better = gw * gh > best_w * best_h ||
                                 (gw * gh == best_w * best_h && gw > best_w);
                    }
                    if (better) {
                        best_w = gw;
                        best_h = gh;
                        best_covers = covers;
                        best_diff = diff;
                    }
                }
            }
            budget.resized_width = best_w * enc;
            budget.resized_height = best_h * enc;
            budget.tiles = best_w * best_h + (cfg.fixed_grid_thumbnail ? 1 : 0);
            budget.tokens = budget.tiles * cfg.tokens_per_tile();
            return budget;
        }
        case Scheme::fixed_width_grid: {
            int gw = ceil_div(width, enc);
            if (gw < 1) gw = 1;
            if (gw > cfg.max_tiles) gw = cfg.max_tiles;
            budget.resized_width = gw * enc;
            budget.resized_height = enc;
            budget.tiles = gw;
            budget.tokens = gw * cfg.tokens_per_tile();
            return budget;
        }
    }
    throw std::runtime_error("compare_schemes: unknown scheme");
}

std::string tile_plan_to_json(const TilePlan& plan, const ResolutionConfig& cfg) {
    json j;
    j["original"] = {{"width", plan.original_width}, {"height", plan.original_height}};
    j["snapped"] = {{"width", plan.snapped_width}, {"height", plan.snapped_height}};
    j["token_grid"] = {{"cols", plan.token_cols}, {"rows", plan.token_rows}};
    j["tile_grid"] = {{"cols", plan.tiles_w}, {"rows", plan.tiles_h}};
    j["canvas"] = {{"width", plan.canvas_width}, {"height", plan.canvas_height}};
    j["retained_tokens"] = plan.retained_tokens;
    j["padded_tokens"] = plan.padded_tokens;
    j["downscaled"] = plan.downscaled;
    json mask = json::array();
    for (int r = 0; r < plan.mask_rows; ++r) {
        std::string row(static_cast<std::size_t>(plan.mask_cols), '0');
        for (int c = 0; c < plan.mask_cols; ++c) {
            if (plan.mask_at(r, c)) row[static_cast<std::size_t>(c)] = '1';
        }
        mask.push_back(row);
    }
    j["attention_mask"] = mask;
    j["config"] = {{"patch_size", cfg.patch_size},
                   {"pixel_shuffle_ratio", cfg.pixel_shuffle_ratio},
                   {"encoder_input", cfg.encoder_input},
                   {"max_tiles", cfg.max_tiles},
                   {"snap_mode",
                    cfg.snap_mode == ResolutionConfig::SnapMode::nearest ? "nearest" : "pad_up_only"},
                   {"token_cell", cfg.token_cell()}};
    return j.dump(2);
}

}  // namespace vlcurate
