// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/selection.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "pinpoint/errors.hpp"

namespace pinpoint {

using nlohmann::json;

std::vector<double> score_regions(const AlignmentModel& model, const TokenGrid& grid,
                                  std::span<const RegionWindow> wins, const Tensor& text_repr) {
    // The visual MLP acts row by row, so projecting the whole grid once and gathering each
    // window's rows gives bitwise the same R'_i as projecting every window separately.
    const Tensor projected = mlp_forward(grid.flatten(), model.mlp_visual);
    std::vector<double> scores;
    scores.reserve(wins.size());
    for (const RegionWindow& win : wins) {
        const auto idx = window_token_indices(grid, win);
        const Tensor ev = attend_projected(model, gather_rows(projected, idx));
        scores.push_back(region_similarity(ev, text_repr, model.similarity));
    }
    return scores;
}

std::vector<RankedRegion> sort_ranked(std::vector<RankedRegion> ranked) {
    std::sort(ranked.begin(), ranked.end(), [](const RankedRegion& a, const RankedRegion& b) {
        if (a.similarity != b.similarity) {
            return a.similarity > b.similarity;
        }
        return a.window < b.window;
    });
    return ranked;
}

std::vector<RankedRegion> rank_regions(const AlignmentModel& model, const TokenGrid& grid,
                                       std::span<const RegionWindow> wins, const InstructionEmbedding& instr) {
    const Tensor et = encode_text(model, instr);
    const auto scores = score_regions(model, grid, wins, et);
    std::vector<RankedRegion> ranked;
    ranked.reserve(wins.size());
    for (std::size_t i = 0; i < wins.size(); ++i) {
        ranked.push_back(RankedRegion{wins[i].index, scores[i]});
    }
    return sort_ranked(std::move(ranked));
}

CoverageMode parse_coverage_mode(const std::string& name) {
    if (name == "hull") {
        return CoverageMode::hull;
    }
    if (name == "union") {
        return CoverageMode::union_area;
    }
    throw ConfigError("unknown coverage mode '" + name + "'");
}

std::string to_string(CoverageMode mode) {
    return mode == CoverageMode::union_area ? "union" : "hull";
}

json selection_to_json(const SelectionResult& result) {
    json ranked = json::array();
    for (const auto& r : result.ranked) {
        ranked.push_back(json::array({r.window, r.similarity}));
    }
    return json{{"ranked", std::move(ranked)},
                {"selected", result.selected},
                {"hull", box_to_json(result.hull)},
                {"coverage", result.coverage}};
}

SelectionResult selection_from_json(const json& j) {
    SelectionResult out;
    try {
        for (const auto& r : j.at("ranked")) {
            out.ranked.push_back(RankedRegion{r.at(0).get<std::size_t>(), r.at(1).get<double>()});
        }
        out.selected = j.at("selected").get<std::vector<std::size_t>>();
        out.coverage = j.at("coverage").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("selection record: ") + e.what());
    }
    out.hull = box_from_json(j.at("hull"));
    return out;
}

double union_area(std::span<const BoxPx> boxes) {
    std::vector<double> xs, ys;
    for (const auto& b : boxes) {
        xs.insert(xs.end(), {b.x0, b.x1});
        ys.insert(ys.end(), {b.y0, b.y1});
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            const double cx = 0.5 * (xs[i] + xs[i + 1]);
            const double cy = 0.5 * (ys[j] + ys[j + 1]);
            const bool covered = std::any_of(boxes.begin(), boxes.end(), [&](const BoxPx& b) {
                return b.x0 < cx && cx < b.x1 && b.y0 < cy && cy < b.y1;
            });
            if (covered) {
                area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
            }
        }
    }
    return area;
}

SelectionResult adaptive_select(std::span<const RankedRegion> ranked, std::span<const RegionWindow> wins,
                                double image_area_px, double ratio, double px_per_token, CoverageMode mode) {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw std::invalid_argument("adaptive_select: ratio must lie in (0, 1]");
    }
    if (ranked.empty()) {
        throw std::invalid_argument("adaptive_select: empty ranking");
    }
    if (!(image_area_px > 0.0)) {
        throw std::invalid_argument("adaptive_select: image area must be positive");
    }
    std::unordered_map<std::size_t, const RegionWindow*> by_index;
    for (const auto& w : wins) {
        by_index.emplace(w.index, &w);
    }

    SelectionResult out;
    out.ranked.assign(ranked.begin(), ranked.end());
    std::vector<BoxPx> boxes;
    // Relative slack so that e.g. 0.6·576 compares as intended despite rounding.
    const double target = ratio * image_area_px * (1.0 - 1e-12);
    for (const RankedRegion& r : ranked) {
        auto it = by_index.find(r.window);
        if (it == by_index.end()) {
            throw BoundsError("ranked window " + std::to_string(r.window) + " is not in the window list");
        }
        boxes.push_back(window_to_px(*it->second, px_per_token));
        out.selected.push_back(r.window);
        out.hull = union_box(boxes);
        const double covered = mode == CoverageMode::hull ? out.hull.area() : union_area(boxes);
        out.coverage = covered / image_area_px;
        if (covered >= target) {
            break;
        }
    }
    return out;
}

TokenGrid crop_grid(const TokenGrid& grid, const BoxPx& hull) {
    const BoxPx ext = grid.extent();
    if (!hull.valid() || !ext.contains(hull)) {
        throw BoundsError("crop hull [" + std::to_string(hull.x0) + "," + std::to_string(hull.y0) + "," +
                          std::to_string(hull.x1) + "," + std::to_string(hull.y1) + "] outside grid extent");
    }
    const double p = grid.px_per_token;
    const auto first = [p](double v, std::size_t origin) {
        return static_cast<std::size_t>(std::floor(v / p)) - origin;
    };
    const auto last = [p](double v, std::size_t origin) {
        return static_cast<std::size_t>(std::ceil(v / p)) - origin;
    };
    const std::size_t r0 = first(hull.y0, grid.origin_row);
    const std::size_t r1 = std::min(grid.height, last(hull.y1, grid.origin_row));
    const std::size_t c0 = first(hull.x0, grid.origin_col);
    const std::size_t c1 = std::min(grid.width, last(hull.x1, grid.origin_col));

    TokenGrid out(r1 - r0, c1 - c0, grid.embed_dim, p);
    out.origin_row = grid.origin_row + r0;
    out.origin_col = grid.origin_col + c0;
    for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) {
            auto src = grid.token(r, c);
            std::copy(src.begin(), src.end(), out.token(r - r0, c - c0).begin());
        }
    }
    return out;
}

ToyEncoder::ToyEncoder(std::size_t embed_dim, std::uint64_t seed, double mixing, double sharpness)
    : m_embed_dim(embed_dim), m_mixing(mixing), m_sharpness(sharpness) {
    if (embed_dim == 0) {
        throw ConfigError("toy encoder needs a positive embedding dimension");
    }
    std::mt19937_64 rng(seed);
    const double d = static_cast<double>(embed_dim);
    std::normal_distribution<double> proj(0.0, 1.0 / std::sqrt(d));
    m_wq = Tensor({embed_dim, embed_dim});
    m_wk = Tensor({embed_dim, embed_dim});
    m_wv = Tensor({embed_dim, embed_dim});
    for (auto& v : m_wq.data()) {
        v = proj(rng);
    }
    for (auto& v : m_wk.data()) {
        v = proj(rng);
    }
    // Near-identity values so mixed-in context carries the content of the tokens it came from.
    std::normal_distribution<double> jitter(0.0, 0.1 / std::sqrt(d));
    for (std::size_t i = 0; i < embed_dim; ++i) {
        for (std::size_t j = 0; j < embed_dim; ++j) {
            m_wv.at(i, j) = (i == j ? 1.0 : 0.0) + jitter(rng);
        }
    }
    m_mlp = MlpParams::uniform_init(embed_dim, 2 * embed_dim, embed_dim, rng, Activation::gelu);
    for (auto& v : m_mlp.w2.data()) {
        v *= 0.25;
    }
}

Tensor ToyEncoder::encode_tokens(const Tensor& flat) const {
    if (flat.rank() != 2 || flat.cols() != m_embed_dim) {
        throw DimensionError("toy encoder: input " + shape_to_string(flat.shape()) + " for d=" +
                             std::to_string(m_embed_dim));
    }
    const Tensor q = matmul(flat, m_wq);
    const Tensor k = matmul(flat, m_wk);
    const Tensor v = matmul(flat, m_wv);
    const Tensor mixed =
        sdp_attention_values(q, k, v, m_sharpness / std::sqrt(static_cast<double>(m_embed_dim)));
    Tensor h = flat;
    for (std::size_t i = 0; i < h.numel(); ++i) {
        h[i] += m_mixing * mixed[i];
    }
    const Tensor delta = mlp_forward(h, m_mlp);
    for (std::size_t i = 0; i < h.numel(); ++i) {
        h[i] += delta[i];
    }
    return h;
}

TokenGrid ToyEncoder::encode(const TokenGrid& grid) const {
    TokenGrid out = TokenGrid::from_flat(encode_tokens(grid.flatten()), grid.height, grid.width, grid.px_per_token);
    out.origin_row = grid.origin_row;
    out.origin_col = grid.origin_col;
    return out;
}

BoxPx RefinedTokens::cell_box(std::size_t row, std::size_t col) const {
    const double cw = footprint.width() / static_cast<double>(grid.width);
    const double ch = footprint.height() / static_cast<double>(grid.height);
    const double x = footprint.x0 + static_cast<double>(col) * cw;
    const double y = footprint.y0 + static_cast<double>(row) * ch;
    return BoxPx{x, y, x + cw, y + ch};
}

TokenGrid resample_grid(const TokenGrid& grid, std::size_t out_h, std::size_t out_w) {
    if (out_h == 0 || out_w == 0) {
        throw DimensionError("resample_grid: empty target");
    }
    if (out_h == grid.height && out_w == grid.width) {
        return grid;
    }
    // Overlap weights between source cells [i, i+1) and target cells scaled to source units.
    const auto weights = [](std::size_t src, std::size_t dst) {
        std::vector<std::vector<std::pair<std::size_t, double>>> w(dst);
        const double step = static_cast<double>(src) / static_cast<double>(dst);
        for (std::size_t o = 0; o < dst; ++o) {
            const double lo = static_cast<double>(o) * step;
            const double hi = lo + step;
            for (auto i = static_cast<std::size_t>(std::floor(lo)); i < src && static_cast<double>(i) < hi; ++i) {
                const double overlap = std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
                if (overlap > 0.0) {
                    w[o].emplace_back(i, overlap / step);
                }
            }
        }
        return w;
    };
    const auto wr = weights(grid.height, out_h);
    const auto wc = weights(grid.width, out_w);
    TokenGrid out(out_h, out_w, grid.embed_dim, grid.px_per_token * static_cast<double>(grid.width) / out_w);
    for (std::size_t r = 0; r < out_h; ++r) {
        for (std::size_t c = 0; c < out_w; ++c) {
            auto dst = out.token(r, c);
            for (const auto& [sr, a] : wr[r]) {
                for (const auto& [sc, b] : wc[c]) {
                    auto src = grid.token(sr, sc);
                    for (std::size_t k = 0; k < dst.size(); ++k) {
                        dst[k] += a * b * src[k];
                    }
                }
            }
        }
    }
    return out;
}

RefinedTokens refine(const ToyEncoder& encoder, const TokenGrid& raw_crop, std::size_t vanilla_tokens,
                     double budget_fraction) {
    if (raw_crop.token_count() == 0) {
        throw std::invalid_argument("refine: empty crop");
    }
    if (!(budget_fraction > 0.0)) {
        throw ConfigError("refine: budget fraction must be positive");
    }
    const double budget = budget_fraction * static_cast<double>(vanilla_tokens);
    TokenGrid input = raw_crop;
    if (static_cast<double>(raw_crop.token_count()) > budget) {
        const double s = std::sqrt(budget / static_cast<double>(raw_crop.token_count()));
        const auto out_h = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(raw_crop.height * s)));
        const auto out_w = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(raw_crop.width * s)));
        input = resample_grid(raw_crop, out_h, out_w);
    }
    RefinedTokens out;
    out.footprint = raw_crop.extent();
    out.grid = encoder.encode(input);
    return out;
}

}  // namespace pinpoint
