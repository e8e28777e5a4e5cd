// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pinpoint/errors.hpp"

namespace pinpoint {

using nlohmann::json;

double intersection_area(const BoxPx& a, const BoxPx& b) {
    const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

double iou(const BoxPx& a, const BoxPx& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

BoxPx union_box(std::span<const BoxPx> boxes) {
    if (boxes.empty()) {
        throw std::invalid_argument("union_box: empty box list");
    }
    BoxPx out = boxes.front();
    for (const BoxPx& b : boxes.subspan(1)) {
        out.x0 = std::min(out.x0, b.x0);
        out.y0 = std::min(out.y0, b.y0);
        out.x1 = std::max(out.x1, b.x1);
        out.y1 = std::max(out.y1, b.y1);
    }
    return out;
}

BoxPx clip_box(const BoxPx& box, double width, double height) {
    return BoxPx{std::clamp(box.x0, 0.0, width), std::clamp(box.y0, 0.0, height), std::clamp(box.x1, 0.0, width),
                 std::clamp(box.y1, 0.0, height)};
}

json box_to_json(const BoxPx& box) {
    return json::array({box.x0, box.y0, box.x1, box.y1});
}

BoxPx box_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4 || !std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_number(); })) {
        throw ParseError("box must be [x0,y0,x1,y1], got " + j.dump());
    }
    BoxPx box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!box.valid()) {
        throw ParseError("box has non-positive extent: " + j.dump());
    }
    return box;
}

TokenGrid::TokenGrid(std::size_t height, std::size_t width, std::size_t embed_dim, double px_per_token)
    : height(height), width(width), embed_dim(embed_dim), tokens({height, width, embed_dim}),
      px_per_token(px_per_token) {}

TokenGrid TokenGrid::from_flat(const Tensor& flat, std::size_t height, std::size_t width, double px_per_token) {
    if (flat.rank() != 2 || flat.rows() != height * width) {
        throw DimensionError("token matrix " + shape_to_string(flat.shape()) + " does not fill a " +
                             std::to_string(height) + "x" + std::to_string(width) + " grid");
    }
    TokenGrid grid;
    grid.height = height;
    grid.width = width;
    grid.embed_dim = flat.cols();
    grid.tokens = flat.reshaped({height, width, flat.cols()});
    grid.px_per_token = px_per_token;
    return grid;
}

std::span<double> TokenGrid::token(std::size_t row, std::size_t col) {
    return tokens.data().subspan(flat_index(row, col) * embed_dim, embed_dim);
}

std::span<const double> TokenGrid::token(std::size_t row, std::size_t col) const {
    return tokens.data().subspan(flat_index(row, col) * embed_dim, embed_dim);
}

Tensor TokenGrid::flatten() const {
    return tokens.reshaped({height * width, embed_dim});
}

BoxPx TokenGrid::cell_box(std::size_t row, std::size_t col) const {
    const double p = px_per_token;
    const double x = static_cast<double>(origin_col + col) * p;
    const double y = static_cast<double>(origin_row + row) * p;
    return BoxPx{x, y, x + p, y + p};
}

BoxPx TokenGrid::extent() const {
    const double p = px_per_token;
    return BoxPx{static_cast<double>(origin_col) * p, static_cast<double>(origin_row) * p,
                 static_cast<double>(origin_col + width) * p, static_cast<double>(origin_row + height) * p};
}

std::vector<std::pair<std::size_t, bool>> axis_offsets(std::size_t grid, std::size_t window, std::size_t stride) {
    if (window == 0 || stride == 0) {
        throw ConfigError("window and stride must be at least 1");
    }
    if (window > grid) {
        throw ConfigError("window of " + std::to_string(window) + " tokens exceeds grid of " + std::to_string(grid));
    }
    std::vector<std::pair<std::size_t, bool>> offsets;
    for (std::size_t off = 0; off + window <= grid; off += stride) {
        offsets.emplace_back(off, false);
    }
    if (offsets.back().first + window < grid) {
        offsets.emplace_back(grid - window, true);
    }
    return offsets;
}

std::vector<RegionWindow> slide_windows(std::size_t grid_height, std::size_t grid_width, std::size_t window_w,
                                        std::size_t window_h, std::size_t stride) {
    const auto rows = axis_offsets(grid_height, window_h, stride);
    const auto cols = axis_offsets(grid_width, window_w, stride);
    std::vector<RegionWindow> wins;
    wins.reserve(rows.size() * cols.size());
    for (const auto& [top, row_clamped] : rows) {
        for (const auto& [left, col_clamped] : cols) {
            wins.push_back(RegionWindow{wins.size(), top, left, window_w, window_h, row_clamped || col_clamped});
        }
    }
    return wins;
}

std::vector<RegionWindow> slide_windows(const TokenGrid& grid, std::size_t window_w, std::size_t window_h,
                                        std::size_t stride) {
    return slide_windows(grid.height, grid.width, window_w, window_h, stride);
}

namespace {

void check_window(const TokenGrid& grid, const RegionWindow& win) {
    if (win.w == 0 || win.h == 0 || win.top + win.h > grid.height || win.left + win.w > grid.width) {
        throw BoundsError("window (top=" + std::to_string(win.top) + ", left=" + std::to_string(win.left) +
                          ", " + std::to_string(win.w) + "x" + std::to_string(win.h) + ") outside " +
                          std::to_string(grid.height) + "x" + std::to_string(grid.width) + " grid");
    }
}

}  // namespace

std::vector<std::size_t> window_token_indices(const TokenGrid& grid, const RegionWindow& win) {
    check_window(grid, win);
    std::vector<std::size_t> idx;
    idx.reserve(win.w * win.h);
    for (std::size_t r = win.top; r < win.top + win.h; ++r) {
        for (std::size_t c = win.left; c < win.left + win.w; ++c) {
            idx.push_back(grid.flat_index(r, c));
        }
    }
    return idx;
}

Tensor extract_region(const TokenGrid& grid, const RegionWindow& win) {
    const auto idx = window_token_indices(grid, win);
    return gather_rows(grid.flatten(), idx);
}

BoxPx window_to_px(const RegionWindow& win, double px_per_token) {
    const double p = px_per_token;
    return BoxPx{static_cast<double>(win.left) * p, static_cast<double>(win.top) * p,
                 static_cast<double>(win.left + win.w) * p, static_cast<double>(win.top + win.h) * p};
}

RegionWindow px_to_window(const BoxPx& box, double px_per_token, std::size_t index) {
    if (!(px_per_token > 0.0) || !box.valid() || box.x0 < 0.0 || box.y0 < 0.0) {
        throw std::invalid_argument("px_to_window: invalid box or pitch");
    }
    const auto q = [px_per_token](double v) { return static_cast<std::size_t>(std::llround(v / px_per_token)); };
    const std::size_t left = q(box.x0), top = q(box.y0);
    return RegionWindow{index, top, left, q(box.x1) - left, q(box.y1) - top, false};
}

GtAnnotation GtAnnotation::with_encompass(std::string question_id, std::string image_id, std::vector<BoxPx> answers,
                                          std::vector<BoxPx> evidence) {
    std::vector<BoxPx> all = answers;
    all.insert(all.end(), evidence.begin(), evidence.end());
    GtAnnotation gt;
    gt.question_id = std::move(question_id);
    gt.image_id = std::move(image_id);
    gt.answer_boxes = std::move(answers);
    gt.evidence_boxes = std::move(evidence);
    gt.encompass = union_box(all);
    return gt;
}

bool GtAnnotation::encompass_contains_all() const {
    const auto inside = [this](const BoxPx& b) { return encompass.contains(b); };
    return std::all_of(answer_boxes.begin(), answer_boxes.end(), inside) &&
           std::all_of(evidence_boxes.begin(), evidence_boxes.end(), inside);
}

json gt_to_json(const GtAnnotation& gt) {
    json answers = json::array();
    for (const auto& b : gt.answer_boxes) {
        answers.push_back(box_to_json(b));
    }
    json evidence = json::array();
    for (const auto& b : gt.evidence_boxes) {
        evidence.push_back(box_to_json(b));
    }
    json j{{"question_id", gt.question_id},
           {"image_id", gt.image_id},
           {"answer_boxes", std::move(answers)},
           {"evidence_boxes", std::move(evidence)},
           {"encompass", box_to_json(gt.encompass)}};
    if (gt.page) {
        j["page"] = *gt.page;
    }
    return j;
}

GtAnnotation gt_from_json(const json& j) {
    if (!j.is_object()) {
        throw ParseError("annotation must be a JSON object");
    }
    for (const char* key : {"question_id", "image_id", "answer_boxes", "evidence_boxes", "encompass"}) {
        if (!j.contains(key)) {
            throw ParseError(std::string("annotation missing '") + key + "'");
        }
    }
    GtAnnotation gt;
    try {
        gt.question_id = j.at("question_id").get<std::string>();
        gt.image_id = j.at("image_id").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("annotation ids: ") + e.what());
    }
    for (const auto& b : j.at("answer_boxes")) {
        gt.answer_boxes.push_back(box_from_json(b));
    }
    for (const auto& b : j.at("evidence_boxes")) {
        gt.evidence_boxes.push_back(box_from_json(b));
    }
    gt.encompass = box_from_json(j.at("encompass"));
    if (j.contains("page") && j.at("page").is_number_integer()) {
        gt.page = j.at("page").get<int>();
    }
    return gt;
}

PosNegAssignment assign_pos_neg(std::span<const RegionWindow> wins, const GtAnnotation& gt, double px_per_token) {
    if (wins.empty()) {
        throw std::invalid_argument("assign_pos_neg: no windows");
    }
    const double cx = gt.encompass.center_x();
    const double cy = gt.encompass.center_y();
    PosNegAssignment out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < wins.size(); ++i) {
        const BoxPx b = window_to_px(wins[i], px_per_token);
        const double dist = std::hypot(b.center_x() - cx, b.center_y() - cy);
        if (dist < best) {
            best = dist;
            out.pos_index = i;
        }
    }
    for (std::size_t i = 0; i < wins.size(); ++i) {
        if (i != out.pos_index && intersection_area(window_to_px(wins[i], px_per_token), gt.encompass) == 0.0) {
            out.neg_indices.push_back(i);
        }
    }
    return out;
}

}  // namespace pinpoint
