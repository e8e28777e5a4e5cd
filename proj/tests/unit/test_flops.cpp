// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include "pinpoint/flops.hpp"

using namespace pinpoint;

namespace {

AlignmentShape desk_alignment() {
    return AlignmentShape{9, 100, 8, 8, 32};
}

}  // namespace

TEST_CASE("prefill cost of a 7B model on 2000 tokens") {
    const FlopsReport r = flops_estimate(2000, 0);
    CHECK(r.total == doctest::Approx(2.8e13).epsilon(1e-15));
    CHECK(r.tflops() == doctest::Approx(28.0).epsilon(1e-12));
    CHECK(flops_estimate(0, 0).total == 0.0);
}

TEST_CASE("fewer visual tokens cost strictly less") {
    for (std::size_t n = 2; n <= 4096; n *= 2) {
        CHECK(flops_estimate(n / 2, 64).total < flops_estimate(n, 64).total);
    }
    RunShape a{576, 64, {576}, desk_alignment()};
    RunShape b = a;
    b.n_visual_tokens = 288;
    CHECK(flops_estimate(b).total < flops_estimate(a).total);
}

TEST_CASE("alignment cost follows its shape") {
    const AlignmentShape s = desk_alignment();
    const double nv = 900.0, nt = 8.0, d = 32.0, k = 8.0;
    CHECK(alignment_flops(s) == doctest::Approx(4 * d * d * (nv + nt) + 4 * k * d * (nv + nt) + 6 * k * d * 9));
    AlignmentShape bigger = s;
    bigger.n_regions = 10;
    CHECK(alignment_flops(bigger) > alignment_flops(s));
}

TEST_CASE("a budgeted run is cheaper than vanilla and reports the module share") {
    const std::size_t refined = refined_token_estimate(576, 0.6, 0.6);
    CHECK(refined == 345);
    const FlopsComparison c = compare_flops(576, refined, 64, desk_alignment());
    CHECK(c.ratio < 1.0);
    CHECK(c.ratio == doctest::Approx(c.pinpoint.total / c.vanilla.total));
    CHECK(c.module_share > 0.0);
    CHECK(c.module_share < 1.0);
    CHECK(c.module_flops == doctest::Approx(c.pinpoint.alignment + 2.0 * 3e8 * refined));
    CHECK(c.vanilla.alignment == 0.0);

    const FlopsComparison back = flops_comparison_from_json(nlohmann::json::parse(flops_comparison_to_json(c).dump()));
    CHECK(back.ratio == c.ratio);
    CHECK(back.pinpoint.total == c.pinpoint.total);
    std::ostringstream os;
    write_flops_csv(os, c);
    CHECK(os.str().find("vanilla") != std::string::npos);
}

TEST_CASE("refined token estimate") {
    CHECK(refined_token_estimate(576, 0.2, 0.6) == 116);
    CHECK(refined_token_estimate(576, 1.0, 1.0) == 576);
    CHECK(refined_token_estimate(10, 0.01, 0.01) == 1);
    std::size_t prev = 0;
    for (double r = 0.05; r <= 1.0; r += 0.05) {
        const std::size_t t = refined_token_estimate(576, r, 0.6);
        CHECK(t >= prev);
        prev = t;
    }
}
