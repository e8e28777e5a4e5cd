// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinpoint/alignment.hpp"
#include "pinpoint/grid.hpp"

namespace pinpoint {

struct RankedRegion {
    std::size_t window = 0;  // RegionWindow::index
    double similarity = 0.0;

    friend bool operator==(const RankedRegion&, const RankedRegion&) = default;
};

/// Per-window similarity to the instruction, in the order of `wins`.
std::vector<double> score_regions(const AlignmentModel& model, const TokenGrid& grid,
                                  std::span<const RegionWindow> wins, const Tensor& text_repr);

/// Windows sorted by descending similarity, ties by ascending window index.
std::vector<RankedRegion> rank_regions(const AlignmentModel& model, const TokenGrid& grid,
                                       std::span<const RegionWindow> wins, const InstructionEmbedding& instr);
std::vector<RankedRegion> sort_ranked(std::vector<RankedRegion> ranked);

/// How the area of a selected set is measured against the ratio.
enum class CoverageMode {
    hull,   // area of the axis-aligned hull of the selected windows
    union_area,  // exact area of the union of the selected windows
};

CoverageMode parse_coverage_mode(const std::string& name);
std::string to_string(CoverageMode mode);

struct SelectionResult {
    std::vector<RankedRegion> ranked;
    std::vector<std::size_t> selected;  // window indices, a prefix of the ranked order
    BoxPx hull;
    double coverage = 0.0;

    friend bool operator==(const SelectionResult&, const SelectionResult&) = default;
};

nlohmann::json selection_to_json(const SelectionResult& result);
SelectionResult selection_from_json(const nlohmann::json& j);

/// Area of the union of axis-aligned boxes (coordinate compression).
double union_area(std::span<const BoxPx> boxes);

/// Accumulates ranked windows until the covered area reaches ratio·image_area_px; selects
/// everything if that never happens. Throws std::invalid_argument on r outside (0, 1] or an
/// empty ranking.
SelectionResult adaptive_select(std::span<const RankedRegion> ranked, std::span<const RegionWindow> wins,
                                double image_area_px, double ratio, double px_per_token,
                                CoverageMode mode = CoverageMode::hull);

/// Sub-grid of cells whose pixel footprint overlaps `hull` with positive area. The result
/// keeps its placement in the source image through origin_row/origin_col.
/// Throws BoundsError when the hull is not inside the grid's extent.
TokenGrid crop_grid(const TokenGrid& grid, const BoxPx& hull);

/// Frozen single-block encoder: global self-attention with a residual, then a residual MLP.
/// Stands in for a ViT backbone whose attention lets every output token see every input.
class ToyEncoder {
public:
    /// `mixing` scales the attention branch; `sharpness` scales the attention logits.
    ToyEncoder(std::size_t embed_dim, std::uint64_t seed, double mixing = 1.0, double sharpness = 1.0);

    Tensor encode_tokens(const Tensor& flat) const;
    TokenGrid encode(const TokenGrid& grid) const;

    std::size_t embed_dim() const { return m_embed_dim; }

private:
    std::size_t m_embed_dim;
    double m_mixing;
    double m_sharpness;
    Tensor m_wq;
    Tensor m_wk;
    Tensor m_wv;
    MlpParams m_mlp;
};

/// Re-encoded crop tokens plus the pixel footprint they tile uniformly.
struct RefinedTokens {
    TokenGrid grid;
    BoxPx footprint;

    BoxPx cell_box(std::size_t row, std::size_t col) const;
};

inline constexpr double kDefaultRefineBudget = 0.6;

/// Area-weighted average pooling of a grid to out_h × out_w cells.
TokenGrid resample_grid(const TokenGrid& grid, std::size_t out_h, std::size_t out_w);

/// Encodes only the crop's raw cells. When the crop holds more than budget·vanilla_tokens
/// cells it is first pooled down so the refined token count stays within the budget.
RefinedTokens refine(const ToyEncoder& encoder, const TokenGrid& raw_crop, std::size_t vanilla_tokens,
                     double budget_fraction = kDefaultRefineBudget);

}  // namespace pinpoint
