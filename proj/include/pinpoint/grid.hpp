// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pinpoint/tensor.hpp"

namespace pinpoint {

/// Axis-aligned pixel box, half-open in spirit: [x0, x1) × [y0, y1).
struct BoxPx {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x0 + x1); }
    double center_y() const { return 0.5 * (y0 + y1); }
    bool valid() const { return x0 < x1 && y0 < y1; }
    bool contains(const BoxPx& other) const {
        return x0 <= other.x0 && y0 <= other.y0 && x1 >= other.x1 && y1 >= other.y1;
    }
    bool contains_point(double x, double y) const { return x0 <= x && x <= x1 && y0 <= y && y <= y1; }

    friend bool operator==(const BoxPx&, const BoxPx&) = default;
};

double intersection_area(const BoxPx& a, const BoxPx& b);
double iou(const BoxPx& a, const BoxPx& b);
/// Component-wise min/max hull. Throws std::invalid_argument on an empty list.
BoxPx union_box(std::span<const BoxPx> boxes);
/// Clips to [0,width]×[0,height]; may return an invalid (empty) box.
BoxPx clip_box(const BoxPx& box, double width, double height);

nlohmann::json box_to_json(const BoxPx& box);
/// Parses [x0,y0,x1,y1]; throws ParseError on wrong arity or an inverted box.
BoxPx box_from_json(const nlohmann::json& j);

/// Visual tokens laid out on a Gh × Gw grid. `origin_row`/`origin_col` place a cropped
/// grid inside the image it was cut from (zero for a full image).
struct TokenGrid {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t embed_dim = 0;
    Tensor tokens;  // [height × width × embed_dim]
    double px_per_token = 1.0;
    std::size_t origin_row = 0;
    std::size_t origin_col = 0;

    TokenGrid() = default;
    TokenGrid(std::size_t height, std::size_t width, std::size_t embed_dim, double px_per_token = 1.0);

    /// Reshapes a [T × d] token matrix into a grid; T must equal height·width.
    static TokenGrid from_flat(const Tensor& flat, std::size_t height, std::size_t width, double px_per_token = 1.0);

    std::size_t token_count() const { return height * width; }
    std::size_t flat_index(std::size_t row, std::size_t col) const { return row * width + col; }

    std::span<double> token(std::size_t row, std::size_t col);
    std::span<const double> token(std::size_t row, std::size_t col) const;

    /// [T × d] view of the tokens in row-major grid order.
    Tensor flatten() const;

    /// Pixel footprint of one grid cell, in full-image coordinates.
    BoxPx cell_box(std::size_t row, std::size_t col) const;
    /// Pixel footprint of the whole grid.
    BoxPx extent() const;
};

struct RegionWindow {
    std::size_t index = 0;
    std::size_t top = 0;
    std::size_t left = 0;
    std::size_t w = 0;
    std::size_t h = 0;
    bool clamped = false;

    friend bool operator==(const RegionWindow&, const RegionWindow&) = default;
};

/// Offsets {0, S, 2S, …} that fit, plus one edge-aligned offset when the last full window
/// stops short of the edge. The bool marks that appended offset.
std::vector<std::pair<std::size_t, bool>> axis_offsets(std::size_t grid, std::size_t window, std::size_t stride);

/// Row-major sliding windows of W×H tokens with stride S over the grid.
/// Throws ConfigError when the window exceeds the grid or a size is zero.
std::vector<RegionWindow> slide_windows(std::size_t grid_height, std::size_t grid_width, std::size_t window_w,
                                        std::size_t window_h, std::size_t stride);
std::vector<RegionWindow> slide_windows(const TokenGrid& grid, std::size_t window_w, std::size_t window_h,
                                        std::size_t stride);

/// Flat token indices covered by the window, row-major within the window.
std::vector<std::size_t> window_token_indices(const TokenGrid& grid, const RegionWindow& win);

/// The window's tokens as a fresh [(w·h) × d] tensor.
Tensor extract_region(const TokenGrid& grid, const RegionWindow& win);

BoxPx window_to_px(const RegionWindow& win, double px_per_token);
/// Inverse of window_to_px at the same pitch (coordinates rounded to the nearest token).
RegionWindow px_to_window(const BoxPx& box, double px_per_token, std::size_t index = 0);

struct GtAnnotation {
    std::string question_id;
    std::string image_id;
    std::vector<BoxPx> answer_boxes;
    std::vector<BoxPx> evidence_boxes;
    BoxPx encompass;
    std::optional<int> page;

    /// Builds the annotation with encompass = union of answer and evidence boxes.
    static GtAnnotation with_encompass(std::string question_id, std::string image_id, std::vector<BoxPx> answers,
                                       std::vector<BoxPx> evidence);
    /// True when encompass contains every answer and evidence box.
    bool encompass_contains_all() const;
};

nlohmann::json gt_to_json(const GtAnnotation& gt);
GtAnnotation gt_from_json(const nlohmann::json& j);

struct PosNegAssignment {
    std::size_t pos_index = 0;
    std::vector<std::size_t> neg_indices;
};

/// Positive: window whose pixel centre is nearest (Euclidean) to the encompass centre,
/// lowest index on ties. Negatives: windows with zero overlap area with the encompass box.
PosNegAssignment assign_pos_neg(std::span<const RegionWindow> wins, const GtAnnotation& gt, double px_per_token);

}  // namespace pinpoint
