// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "pinpoint/errors.hpp"
#include "pinpoint/synthetic.hpp"

using namespace pinpoint;

TEST_CASE("generation is deterministic in the seed") {
    SynthConfig cfg;
    const auto a = gen_synthetic(20, cfg, 4);
    const auto b = gen_synthetic(20, cfg, 4);
    const auto c = gen_synthetic(20, cfg, 5);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].grid.tokens == b[i].grid.tokens);
        CHECK(a[i].instruction.tokens == b[i].instruction.tokens);
        CHECK(a[i].planted == b[i].planted);
        CHECK(a[i].distractors == b[i].distractors);
        any_diff = any_diff || a[i].grid.tokens != c[i].grid.tokens;
    }
    CHECK(any_diff);
    CHECK_THROWS(gen_synthetic(0, cfg, 1));
}

TEST_CASE("samples respect the generator contract") {
    SynthConfig cfg;
    const auto samples = gen_synthetic(100, cfg, 0);
    REQUIRE(samples.size() == 100);
    const double side = static_cast<double>(cfg.grid_size) * cfg.px_per_token;
    const auto wins = slide_windows(cfg.grid_size, cfg.grid_size, cfg.window, cfg.window, cfg.stride);
    std::set<std::string> concepts;
    for (const auto& s : samples) {
        CHECK(s.gt.encompass.x0 >= 0.0);
        CHECK(s.gt.encompass.y0 >= 0.0);
        CHECK(s.gt.encompass.x1 <= side);
        CHECK(s.gt.encompass.y1 <= side);
        CHECK(s.gt.encompass_contains_all());
        CHECK(s.planted.h >= cfg.planted_min);
        CHECK(s.planted.h <= cfg.planted_max);
        const RegionWindow& w = wins[s.planted_window];
        CHECK(s.planted.top >= w.top);
        CHECK(s.planted.left >= w.left);
        CHECK(s.planted.top + s.planted.h <= w.top + w.h);
        CHECK(s.planted.left + s.planted.w <= w.left + w.w);
        CHECK(s.instruction_text.find(s.concept_word) != std::string::npos);
        CHECK(s.distractors.size() == cfg.distractors);
        for (const auto& d : s.distractors) {
            CHECK(d.concept_word != s.concept_word);
        }
        CHECK(planted_token_indices(s).size() == s.planted.h * s.planted.w);
        concepts.insert(s.concept_word);
    }
    CHECK(concepts.size() > 8);
}

TEST_CASE("planted patches resemble their instruction more than distractors do") {
    SynthConfig cfg;
    const auto samples = gen_synthetic(1000, cfg, 12);
    double planted = 0.0, distract = 0.0;
    std::size_t np = 0, nd = 0;
    for (const auto& s : samples) {
        const auto pattern = concept_pattern(s.concept_word, cfg);
        for (std::size_t idx : planted_token_indices(s)) {
            const auto t = s.grid.tokens.data().subspan(idx * cfg.embed_dim, cfg.embed_dim);
            planted += oracle::cosine(std::vector<double>(t.begin(), t.end()), pattern);
            ++np;
        }
        for (const auto& d : s.distractors) {
            for (std::size_t r = d.cells.top; r < d.cells.top + d.cells.h; ++r) {
                for (std::size_t c = d.cells.left; c < d.cells.left + d.cells.w; ++c) {
                    if (s.planted.contains(r, c)) {
                        continue;
                    }
                    const auto t = s.grid.token(r, c);
                    distract += oracle::cosine(std::vector<double>(t.begin(), t.end()), pattern);
                    ++nd;
                }
            }
        }
    }
    CHECK(planted / np > distract / nd + 0.3);
}

TEST_CASE("readout oracle") {
    SynthConfig cfg;
    const auto samples = gen_synthetic(50, cfg, 2);
    for (const auto& s : samples) {
        const auto gt = planted_token_indices(s);
        CHECK(oracle_answer(s, gt) == s.answer);
        CHECK(oracle_answer(s, {}).empty());
        std::vector<std::size_t> sparse(gt.begin(), gt.begin() + gt.size() / 2);
        CHECK(oracle_answer(s, sparse).empty());
    }
    const std::vector<std::size_t> bad{100000};
    CHECK_THROWS_AS(oracle_answer(samples[0], bad), BoundsError);

    for (const auto& a : synth_answers()) {
        const std::vector<std::vector<double>> rows{answer_code(a, cfg)};
        CHECK(oracle_readout(rows, cfg) == a);
    }
}

TEST_CASE("relevance conditions degrade monotonically") {
    SynthConfig cfg;
    const auto samples = gen_synthetic(200, cfg, 8);
    const auto conds = relevance_experiment(samples, cfg, 8);
    REQUIRE(conds.size() == 4);
    CHECK(conds[0].oracle_accuracy == 1.0);
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(conds[i].oracle_accuracy <= conds[i - 1].oracle_accuracy);
        CHECK(conds[i].readout_accuracy <= conds[i - 1].readout_accuracy);
        CHECK(conds[i].irrelevant_fraction > conds[i - 1].irrelevant_fraction);
    }
    std::ostringstream os;
    write_relevance_csv(os, conds);
    CHECK(os.str().rfind("condition,irrelevant_fraction,accuracy,readout_accuracy\n", 0) == 0);
}

TEST_CASE("planted ranking puts the planted window first") {
    SynthConfig cfg;
    const auto samples = gen_synthetic(30, cfg, 3);
    const auto wins = slide_windows(cfg.grid_size, cfg.grid_size, cfg.window, cfg.window, cfg.stride);
    for (const auto& s : samples) {
        const auto r = planted_ranking(s, wins, 1);
        REQUIRE(r.size() == wins.size());
        CHECK(r.front().window == s.planted_window);
        for (std::size_t i = 1; i < r.size(); ++i) {
            CHECK(r[i].similarity < r[i - 1].similarity);
        }
    }
}

TEST_CASE("refined crops read out at least as well as contaminated ones") {
    SynthConfig cfg;
    const auto samples = gen_synthetic(60, cfg, 21);
    const ToyEncoder enc(cfg.embed_dim, 21);
    const auto abl = refinement_ablation(samples, cfg, enc, 0.6, 0.6, 21);
    CHECK(abl.n_samples == 60);
    CHECK(abl.refined_accuracy >= abl.contaminated_accuracy);
    CHECK(static_cast<double>(abl.max_refined_tokens) <= 0.6 * 576.0);
}

TEST_CASE("samples serialize as regeneration descriptors") {
    SynthConfig cfg;
    const auto samples = gen_synthetic(5, cfg, 6);
    for (const auto& s : samples) {
        const auto j = nlohmann::json::parse(sample_to_json(s).dump());
        const SyntheticSample back = sample_from_json(j, cfg);
        CHECK(back.grid.tokens == s.grid.tokens);
        CHECK(back.answer == s.answer);
        auto tampered = j;
        tampered["answer"] = "bogus";
        CHECK_THROWS_AS(sample_from_json(tampered, cfg), ParseError);
    }
}
