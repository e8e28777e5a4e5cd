// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "harness.hpp"
#include "pinpoint/errors.hpp"
#include "pinpoint/selection.hpp"

using namespace pinpoint;

namespace {

std::vector<RankedRegion> ranking(std::vector<std::size_t> order) {
    std::vector<RankedRegion> r;
    double s = 1.0;
    for (std::size_t i : order) {
        r.push_back({i, s});
        s -= 0.01;
    }
    return r;
}

TokenGrid random_grid(std::size_t h, std::size_t w, std::size_t d, std::mt19937_64& rng, double p = 1.0) {
    TokenGrid g(h, w, d, p);
    g.tokens = harness::random_tensor({h, w, d}, rng);
    return g;
}

}  // namespace

TEST_CASE("two opposite corner windows reach r = 0.6 on a 24x24 grid") {
    const std::vector<RegionWindow> wins{{0, 0, 0, 10, 10, false}, {1, 14, 14, 10, 10, false}};
    const auto sel = adaptive_select(ranking({0, 1}), wins, 576.0, 0.6, 1.0);
    CHECK(sel.selected.size() == 2);
    CHECK(sel.hull == BoxPx{0, 0, 24, 24});
    CHECK(sel.coverage == 1.0);

    const auto uni = adaptive_select(ranking({0, 1}), wins, 576.0, 0.6, 1.0, CoverageMode::union_area);
    CHECK(uni.selected.size() == 2);
    CHECK(uni.coverage == doctest::Approx(200.0 / 576.0));
}

TEST_CASE("r = 1 over a tiling stops exactly at the full image") {
    std::vector<RegionWindow> wins;
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            wins.push_back({wins.size(), r * 8, c * 8, 8, 8, false});
        }
    }
    const auto sel = adaptive_select(ranking({4, 0, 1, 2, 3, 5, 6, 7, 8}), wins, 576.0, 1.0, 1.0,
                                     CoverageMode::union_area);
    CHECK(sel.selected.size() == 9);
    CHECK(sel.coverage == 1.0);
    const auto hull = adaptive_select(ranking({0, 8, 1, 2}), wins, 576.0, 1.0, 1.0);
    CHECK(hull.selected.size() == 2);
}

TEST_CASE("a single full-grid window is always enough") {
    const std::vector<RegionWindow> wins{{0, 0, 0, 24, 24, false}};
    for (double r : {0.05, 0.5, 1.0}) {
        const auto sel = adaptive_select(ranking({0}), wins, 576.0, r, 1.0);
        CHECK(sel.selected.size() == 1);
        CHECK(sel.coverage == 1.0);
    }
}

TEST_CASE("selection is the shortest covering prefix") {
    std::mt19937_64 rng(42);
    const auto wins = slide_windows(24, 24, 10, 10, 7);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::size_t> order(wins.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const double r = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
        for (auto mode : {CoverageMode::hull, CoverageMode::union_area}) {
            const auto sel = adaptive_select(ranking(order), wins, 576.0, r, 1.0, mode);
            CHECK(sel.coverage >= r - 1e-12);
            CHECK(std::equal(sel.selected.begin(), sel.selected.end(), order.begin()));
            if (sel.selected.size() > 1) {
                std::vector<BoxPx> shorter;
                for (std::size_t i = 0; i + 1 < sel.selected.size(); ++i) {
                    shorter.push_back(window_to_px(wins[sel.selected[i]], 1.0));
                }
                const double prev = mode == CoverageMode::hull ? union_box(shorter).area() : union_area(shorter);
                CHECK(prev / 576.0 < r);
            }
        }
    }
}

TEST_CASE("union area agrees with raster painting") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> pos(0, 30), ext(1, 12);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<BoxPx> boxes;
        std::vector<oracle::IBox> ib;
        for (int k = 0; k < 1 + trial % 7; ++k) {
            const int x = pos(rng), y = pos(rng), w = ext(rng), h = ext(rng);
            boxes.push_back(BoxPx{double(x), double(y), double(x + w), double(y + h)});
            ib.push_back({x, y, x + w, y + h});
        }
        CHECK(union_area(boxes) == static_cast<double>(oracle::raster_union_area(ib, 45, 45)));
    }
}

TEST_CASE("selection input validation and JSON") {
    const std::vector<RegionWindow> wins{{0, 0, 0, 4, 4, false}};
    CHECK_THROWS_AS(adaptive_select(ranking({0}), wins, 64.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(adaptive_select(ranking({0}), wins, 64.0, 1.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(adaptive_select({}, wins, 64.0, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(adaptive_select(ranking({3}), wins, 64.0, 0.5, 1.0), BoundsError);
    CHECK_THROWS_AS(parse_coverage_mode("area"), ConfigError);

    const auto sel = adaptive_select(ranking({0}), wins, 64.0, 0.1, 1.0);
    CHECK(selection_from_json(nlohmann::json::parse(selection_to_json(sel).dump())) == sel);
    CHECK_THROWS_AS(selection_from_json(nlohmann::json::object()), ParseError);
}

TEST_CASE("ties in similarity break by window index") {
    const auto s = sort_ranked({{3, 0.5}, {1, 0.9}, {0, 0.5}, {2, 0.5}});
    CHECK(s == std::vector<RankedRegion>{{1, 0.9}, {0, 0.5}, {2, 0.5}, {3, 0.5}});
}

TEST_CASE("crop geometry") {
    std::mt19937_64 rng(5);
    const TokenGrid g = random_grid(6, 8, 3, rng, 14.0);
    const TokenGrid full = crop_grid(g, g.extent());
    CHECK(full.tokens == g.tokens);
    CHECK(full.origin_row == 0);

    const TokenGrid one = crop_grid(g, g.cell_box(2, 5));
    CHECK(one.height == 1);
    CHECK(one.width == 1);
    CHECK(std::equal(one.token(0, 0).begin(), one.token(0, 0).end(), g.token(2, 5).begin()));
    CHECK(one.cell_box(0, 0) == g.cell_box(2, 5));

    CHECK_THROWS_AS(crop_grid(g, BoxPx{0, 0, 200, 20}), BoundsError);

    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const BoxPx e = g.extent();
        const double ox0 = u(rng) * e.x1 * 0.5, oy0 = u(rng) * e.y1 * 0.5;
        const BoxPx outer{ox0, oy0, ox0 + 1 + u(rng) * (e.x1 - ox0 - 1), oy0 + 1 + u(rng) * (e.y1 - oy0 - 1)};
        const double ix0 = outer.x0 + u(rng) * outer.width() * 0.5, iy0 = outer.y0 + u(rng) * outer.height() * 0.5;
        const BoxPx inner{ix0, iy0, ix0 + (outer.x1 - ix0) * (0.1 + 0.9 * u(rng)),
                          iy0 + (outer.y1 - iy0) * (0.1 + 0.9 * u(rng))};
        const TokenGrid twice = crop_grid(crop_grid(g, outer), inner);
        const TokenGrid direct = crop_grid(g, inner);
        CHECK(twice.tokens == direct.tokens);
        CHECK(twice.origin_row == direct.origin_row);
        CHECK(twice.origin_col == direct.origin_col);
        CHECK(twice.extent() == direct.extent());
    }
}

TEST_CASE("refinement isolates the crop from the rest of the image") {
    const ToyEncoder enc(4, 17);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        TokenGrid g = random_grid(10, 10, 4, rng);
        const BoxPx hull{2, 3, 7, 8};
        const TokenGrid crop = crop_grid(g, hull);
        const RefinedTokens before = refine(enc, crop, g.token_count(), 1.0);
        const TokenGrid enc_before = enc.encode(g);

        TokenGrid changed = g;
        for (std::size_t r = 0; r < 10; ++r) {
            for (std::size_t c = 0; c < 10; ++c) {
                const BoxPx cell = g.cell_box(r, c);
                if (intersection_area(cell, hull) == 0.0) {
                    for (auto& v : changed.token(r, c)) {
                        v += n(rng);
                    }
                }
            }
        }
        const RefinedTokens after = refine(enc, crop_grid(changed, hull), g.token_count(), 1.0);
        CHECK(after.grid.tokens == before.grid.tokens);

        const TokenGrid enc_after = enc.encode(changed);
        double diff = 0.0;
        for (std::size_t r = 3; r < 8; ++r) {
            for (std::size_t c = 2; c < 7; ++c) {
                for (std::size_t k = 0; k < 4; ++k) {
                    diff = std::max(diff, std::abs(enc_after.token(r, c)[k] - enc_before.token(r, c)[k]));
                }
            }
        }
        CHECK(diff > 0.0);
    }
}

TEST_CASE("refining the full image at full budget is the full-image encoding") {
    const ToyEncoder enc(5, 3);
    std::mt19937_64 rng(7);
    const TokenGrid g = random_grid(6, 6, 5, rng);
    const RefinedTokens r = refine(enc, crop_grid(g, g.extent()), g.token_count(), 1.0);
    CHECK(r.grid.tokens == enc.encode(g).tokens);
    CHECK(r.footprint == g.extent());
}

TEST_CASE("refinement respects the token budget") {
    const ToyEncoder enc(3, 1);
    std::mt19937_64 rng(2);
    const TokenGrid g = random_grid(24, 24, 3, rng, 14.0);
    for (double budget : {0.1, 0.25, 0.6, 1.0}) {
        for (const BoxPx hull : {g.extent(), BoxPx{0, 0, 14 * 17.0, 14 * 24.0}, BoxPx{14, 14, 140, 140}}) {
            const TokenGrid crop = crop_grid(g, hull);
            const RefinedTokens r = refine(enc, crop, g.token_count(), budget);
            CHECK(static_cast<double>(r.grid.token_count()) <= std::max(1.0, budget * 576.0));
            CHECK(r.footprint == crop.extent());
            if (crop.token_count() <= budget * 576.0) {
                CHECK(r.grid.token_count() == crop.token_count());
            }
        }
    }
    CHECK_THROWS_AS(refine(enc, g, 576, 0.0), ConfigError);
}

TEST_CASE("area pooling preserves the mean") {
    std::mt19937_64 rng(12);
    const TokenGrid g = random_grid(7, 9, 2, rng);
    const TokenGrid p = resample_grid(g, 3, 4);
    CHECK(p.height == 3);
    CHECK(p.width == 4);
    for (std::size_t k = 0; k < 2; ++k) {
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < g.token_count(); ++i) {
            a += g.tokens[i * 2 + k];
        }
        for (std::size_t i = 0; i < p.token_count(); ++i) {
            b += p.tokens[i * 2 + k];
        }
        CHECK(a / 63.0 == doctest::Approx(b / 12.0).epsilon(1e-12));
    }
    CHECK(resample_grid(g, 7, 9).tokens == g.tokens);
}
