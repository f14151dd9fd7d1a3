#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vlcurate {

/// Geometry of the dynamic-resolution scheme. token_cell() is the square
/// pixel region that maps to one retained visual token (32 px at defaults).
struct ResolutionConfig {
    int patch_size = 16;
    int pixel_shuffle_ratio = 2;
    int encoder_input = 384;  ///< side of one encoder tile, px
    int max_tiles = 24;
    /// nearest: round each dimension to the closest token-cell multiple.
    /// pad_up_only: always round up to the next multiple.
    enum class SnapMode { nearest, pad_up_only };
    SnapMode snap_mode = SnapMode::nearest;
    /// Adds one extra global tile (+tokens_per_tile()) to the
    /// fixed_multiple_grid comparator budget.
    bool fixed_grid_thumbnail = false;

    int token_cell() const { return patch_size * pixel_shuffle_ratio; }
    int tokens_per_tile_side() const { return encoder_input / token_cell(); }
    int tokens_per_tile() const { return tokens_per_tile_side() * tokens_per_tile_side(); }
};

void validate_resolution_config(const ResolutionConfig& cfg);

/// Rounds each dimension to a token-cell multiple per the snap mode, never
/// below one cell. Idempotent; throws on non-positive input.
std::pair<int, int> snap_dims(int width, int height, const ResolutionConfig& cfg = {});

/// Full processing plan for one image: snapped dimensions, encoder tile
/// grid, zero-padding geometry (content anchored top-left, padding right and
/// bottom), token accounting and the padding attention mask.
struct TilePlan {
    int original_width = 0, original_height = 0;
    int snapped_width = 0, snapped_height = 0;
    int token_cols = 0, token_rows = 0;  ///< snapped dims in token cells
    int tiles_w = 0, tiles_h = 0;
    int canvas_width = 0, canvas_height = 0;  ///< padded canvas, px
    int retained_tokens = 0;                  ///< token_cols * token_rows
    int padded_tokens = 0;                    ///< discarded padding tokens
    bool downscaled = false;                  ///< true if the tile cap forced a resize
    int mask_cols = 0, mask_rows = 0;
    /// Row-major canvas token grid; true cells carry image content, false
    /// cells are padding whose tokens are discarded.
    std::vector<std::uint8_t> attention_mask;

    bool mask_at(int row, int col) const {
        return attention_mask[static_cast<std::size_t>(row) * static_cast<std::size_t>(mask_cols) +
                              static_cast<std::size_t>(col)] != 0;
    }
};

/// Plans one image. If the snapped tile grid would exceed max_tiles, the
/// image is uniformly downscaled (aspect preserved) to the largest size
/// whose snapped grid fits, then re-snapped.
TilePlan plan_tiles(int width, int height, const ResolutionConfig& cfg = {});

/// Comparator schemes for token budgeting.
enum class Scheme { magicvl, fixed_multiple_grid, fixed_width_grid };

const char* to_string(Scheme scheme);
std::optional<Scheme> scheme_from_string(const std::string& label);

struct TokenBudget {
    Scheme scheme = Scheme::magicvl;
    int resized_width = 0, resized_height = 0;
    int tiles = 0;
    int tokens = 0;
};

/// Token budget for one image under a scheme.
/// magicvl: the plan above; tokens = retained tokens.
/// fixed_multiple_grid: resize onto a grid of encoder tiles covering the
/// image (when one fits the tile cap) with aspect ratio closest to the
/// image's; tokens = tiles * tokens_per_tile.
/// fixed_width_grid: single tile row; enough tiles to cover the width at
/// unit height, clamped to max_tiles.
TokenBudget compare_schemes(int width, int height, const ResolutionConfig& cfg, Scheme scheme);

std::string tile_plan_to_json(const TilePlan& plan, const ResolutionConfig& cfg);

}  // namespace vlcurate
