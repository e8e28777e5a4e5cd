// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "pinpoint/config.hpp"
#include "pinpoint/errors.hpp"
#include "pinpoint/hash.hpp"

namespace pinpoint {

namespace {

constexpr std::uint64_t kAnswerSalt = 0xa5'5e7c'0de5ULL;

const std::vector<std::string>& templates() {
    static const std::vector<std::string> t = {
        "what is the {} value",
        "how much is the {}",
        "find the {} figure",
        "report the {} shown here",
    };
    return t;
}

std::string fill_template(const std::string& tmpl, const std::string& word) {
    std::string out = tmpl;
    out.replace(out.find("{}"), 2, word);
    return out;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

void paint(TokenGrid& grid, const CellRect& rect, std::span<const double> pattern, std::span<const double> code,
           double answer_scale, std::normal_distribution<double>& noise, std::mt19937_64& rng) {
    for (std::size_t r = rect.top; r < rect.top + rect.h; ++r) {
        for (std::size_t c = rect.left; c < rect.left + rect.w; ++c) {
            auto tok = grid.token(r, c);
            for (std::size_t k = 0; k < tok.size(); ++k) {
                tok[k] = pattern[k] + answer_scale * code[k] + noise(rng);
            }
        }
    }
}

BoxPx rect_to_px(const CellRect& rect, double p) {
    return BoxPx{static_cast<double>(rect.left) * p, static_cast<double>(rect.top) * p,
                 static_cast<double>(rect.left + rect.w) * p, static_cast<double>(rect.top + rect.h) * p};
}

nlohmann::json rect_to_json(const CellRect& r) {
    return nlohmann::json::array({r.top, r.left, r.h, r.w});
}

std::vector<double> mean_row(std::span<const std::vector<double>> rows, std::size_t d) {
    std::vector<double> m(d, 0.0);
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < d; ++k) {
            m[k] += row[k];
        }
    }
    if (!rows.empty()) {
        for (auto& v : m) {
            v /= static_cast<double>(rows.size());
        }
    }
    return m;
}

std::vector<std::vector<double>> rows_at(const TokenGrid& grid, std::span<const std::size_t> indices) {
    std::vector<std::vector<double>> rows;
    rows.reserve(indices.size());
    for (std::size_t i : indices) {
        auto tok = grid.token(i / grid.width, i % grid.width);
        rows.emplace_back(tok.begin(), tok.end());
    }
    return rows;
}

}  // namespace

void SynthConfig::validate() const {
    if (grid_size == 0 || embed_dim == 0 || !(px_per_token > 0.0)) {
        throw ConfigError("synthetic grid needs positive size, dimension and pitch");
    }
    if (window == 0 || stride == 0 || window > grid_size) {
        throw ConfigError("synthetic window must fit the grid");
    }
    if (planted_min == 0 || planted_min > planted_max || planted_min > window) {
        throw ConfigError("planted patch size must satisfy 1 <= min <= max and min <= window");
    }
    if (distractor_min == 0 || distractor_min > distractor_max || distractor_max > grid_size) {
        throw ConfigError("distractor size must satisfy 1 <= min <= max <= grid");
    }
    if (!(noise >= 0.0)) {
        throw ConfigError("noise must be non-negative");
    }
}

void SynthConfig::apply(const KeyValueConfig& cfg) {
    const auto size_key = [&](const char* key, std::size_t& field) {
        if (cfg.contains(key)) {
            field = parse_size(key, cfg.get(key));
        }
    };
    const auto double_key = [&](const char* key, double& field) {
        if (cfg.contains(key)) {
            field = parse_double(key, cfg.get(key));
        }
    };
    size_key("synth.grid", grid_size);
    size_key("d", embed_dim);
    double_key("synth.px_per_token", px_per_token);
    size_key("W", window);
    size_key("S", stride);
    size_key("synth.planted_min", planted_min);
    size_key("synth.planted_max", planted_max);
    size_key("synth.distractors", distractors);
    size_key("synth.distractor_min", distractor_min);
    size_key("synth.distractor_max", distractor_max);
    double_key("synth.noise", noise);
    double_key("synth.answer_scale", answer_scale);
}

KeyValueConfig SynthConfig::to_key_values() const {
    KeyValueConfig kv;
    kv.set("synth.grid", std::to_string(grid_size));
    kv.set("d", std::to_string(embed_dim));
    kv.set("synth.px_per_token", format_double(px_per_token));
    kv.set("W", std::to_string(window));
    kv.set("S", std::to_string(stride));
    kv.set("synth.planted_min", std::to_string(planted_min));
    kv.set("synth.planted_max", std::to_string(planted_max));
    kv.set("synth.distractors", std::to_string(distractors));
    kv.set("synth.distractor_min", std::to_string(distractor_min));
    kv.set("synth.distractor_max", std::to_string(distractor_max));
    kv.set("synth.noise", format_double(noise));
    kv.set("synth.answer_scale", format_double(answer_scale));
    return kv;
}

const std::vector<std::string>& synth_concepts() {
    static const std::vector<std::string> c = {
        "revenue", "margin",  "population", "rainfall", "turnout",  "budget",   "exports",   "imports",
        "tuition", "mileage", "altitude",   "salary",   "deficit",  "harvest",  "inflation", "density",
    };
    return c;
}

const std::vector<std::string>& synth_answers() {
    static const std::vector<std::string> a = {
        "42%", "1.3 million", "north", "seventeen", "2019", "blue", "none", "yes",
    };
    return a;
}

std::vector<double> concept_pattern(const std::string& word, const SynthConfig& cfg) {
    const Tensor row = embed_text(word, cfg.embed_dim, cfg.tokenizer_seed).tokens;
    return std::vector<double>(row.data().begin(), row.data().end());
}

std::vector<double> answer_code(const std::string& answer, const SynthConfig& cfg) {
    const Tensor rows = embed_text(answer, cfg.embed_dim, cfg.tokenizer_seed ^ kAnswerSalt).tokens;
    std::vector<double> code(cfg.embed_dim, 0.0);
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        for (std::size_t k = 0; k < cfg.embed_dim; ++k) {
            code[k] += rows.at(r, k);
        }
    }
    // Scale to the norm of a single standard-normal row, whatever the word count.
    double norm = 0.0;
    for (double v : code) {
        norm += v * v;
    }
    const double target = std::sqrt(static_cast<double>(cfg.embed_dim));
    for (auto& v : code) {
        v *= target / std::sqrt(norm);
    }
    return code;
}

SyntheticSample gen_sample(const SynthConfig& cfg, std::uint64_t seed, std::size_t index) {
    cfg.validate();
    std::mt19937_64 rng(derive_seed(seed, index));
    const auto& concepts = synth_concepts();
    const auto& answers = synth_answers();

    SyntheticSample s;
    s.seed = seed;
    s.index = index;
    const std::size_t concept_id = uniform_index(rng, 0, concepts.size() - 1);
    s.concept_word = concepts[concept_id];
    s.answer = answers[uniform_index(rng, 0, answers.size() - 1)];
    s.instruction_text = fill_template(templates()[uniform_index(rng, 0, templates().size() - 1)], s.concept_word);
    s.instruction = embed_text(s.instruction_text, cfg.embed_dim, cfg.tokenizer_seed);

    const auto wins = slide_windows(cfg.grid_size, cfg.grid_size, cfg.window, cfg.window, cfg.stride);
    const RegionWindow& win = wins[uniform_index(rng, 0, wins.size() - 1)];
    s.planted_window = win.index;
    s.planted.h = uniform_index(rng, cfg.planted_min, std::min(cfg.planted_max, win.h));
    s.planted.w = uniform_index(rng, cfg.planted_min, std::min(cfg.planted_max, win.w));
    s.planted.top = win.top + uniform_index(rng, 0, win.h - s.planted.h);
    s.planted.left = win.left + uniform_index(rng, 0, win.w - s.planted.w);

    s.grid = TokenGrid(cfg.grid_size, cfg.grid_size, cfg.embed_dim, cfg.px_per_token);
    std::normal_distribution<double> noise(0.0, cfg.noise);
    for (auto& v : s.grid.tokens.data()) {
        v = noise(rng);
    }
    for (std::size_t i = 0; i < cfg.distractors; ++i) {
        Distractor d;
        std::size_t other = uniform_index(rng, 0, concepts.size() - 2);
        if (other >= concept_id) {
            ++other;
        }
        d.concept_word = concepts[other];
        d.answer = answers[uniform_index(rng, 0, answers.size() - 1)];
        d.cells.h = uniform_index(rng, cfg.distractor_min, cfg.distractor_max);
        d.cells.w = uniform_index(rng, cfg.distractor_min, cfg.distractor_max);
        d.cells.top = uniform_index(rng, 0, cfg.grid_size - d.cells.h);
        d.cells.left = uniform_index(rng, 0, cfg.grid_size - d.cells.w);
        paint(s.grid, d.cells, concept_pattern(d.concept_word, cfg), answer_code(d.answer, cfg), cfg.answer_scale,
              noise, rng);
        s.distractors.push_back(std::move(d));
    }
    paint(s.grid, s.planted, concept_pattern(s.concept_word, cfg), answer_code(s.answer, cfg), cfg.answer_scale,
          noise, rng);

    const std::string qid = "synth-" + std::to_string(seed) + "-" + std::to_string(index);
    s.gt = GtAnnotation::with_encompass(qid, qid, {rect_to_px(s.planted, cfg.px_per_token)}, {});
    return s;
}

std::vector<SyntheticSample> gen_synthetic(std::size_t n, const SynthConfig& cfg, std::uint64_t seed) {
    if (n == 0) {
        throw std::invalid_argument("gen_synthetic: n must be at least 1");
    }
    std::vector<SyntheticSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(gen_sample(cfg, seed, i));
    }
    return out;
}

std::vector<TrainingExample> to_training_examples(std::span<const SyntheticSample> samples) {
    std::vector<TrainingExample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back(TrainingExample{s.grid, s.instruction, s.gt});
    }
    return out;
}

std::vector<std::size_t> planted_token_indices(const SyntheticSample& sample) {
    std::vector<std::size_t> out;
    out.reserve(sample.planted.h * sample.planted.w);
    for (std::size_t r = sample.planted.top; r < sample.planted.top + sample.planted.h; ++r) {
        for (std::size_t c = sample.planted.left; c < sample.planted.left + sample.planted.w; ++c) {
            out.push_back(sample.grid.flat_index(r, c));
        }
    }
    return out;
}

std::string oracle_answer(const SyntheticSample& sample, std::span<const std::size_t> provided) {
    std::vector<std::size_t> unique(provided.begin(), provided.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    if (!unique.empty() && unique.back() >= sample.grid.token_count()) {
        throw BoundsError("oracle_answer: token index " + std::to_string(unique.back()) + " outside a " +
                          std::to_string(sample.grid.token_count()) + "-token grid");
    }
    if (unique.empty()) {
        return {};
    }
    std::size_t relevant = 0;
    for (std::size_t i : unique) {
        if (sample.planted.contains(i / sample.grid.width, i % sample.grid.width)) {
            ++relevant;
        }
    }
    const double planted = static_cast<double>(sample.planted.h * sample.planted.w);
    const double coverage = static_cast<double>(relevant) / planted;
    const double confusion = static_cast<double>(unique.size() - relevant) / static_cast<double>(unique.size());
    return coverage >= kOracleCoverage && confusion < kOracleConfusion ? sample.answer : std::string{};
}

std::string oracle_readout(std::span<const std::vector<double>> rows, const SynthConfig& cfg) {
    if (rows.empty()) {
        return {};
    }
    const std::vector<double> m = mean_row(rows, cfg.embed_dim);
    std::string best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto& a : synth_answers()) {
        const auto code = answer_code(a, cfg);
        const double score = std::inner_product(m.begin(), m.end(), code.begin(), 0.0);
        if (score > best_score) {
            best_score = score;
            best = a;
        }
    }
    return best;
}

std::vector<RelevanceCondition> relevance_experiment(std::span<const SyntheticSample> samples,
                                                     const SynthConfig& cfg, std::uint64_t seed) {
    std::vector<RelevanceCondition> conds = {
        {"gt_only", 0.0, 0.0, 0.0},
        {"gt_plus_33", 1.0 / 3.0, 0.0, 0.0},
        {"gt_plus_66", 2.0 / 3.0, 0.0, 0.0},
        {"all_tokens", 1.0, 0.0, 0.0},
    };
    if (samples.empty()) {
        return conds;
    }
    for (const auto& s : samples) {
        const auto planted = planted_token_indices(s);
        std::vector<std::size_t> irrelevant;
        for (std::size_t i = 0; i < s.grid.token_count(); ++i) {
            if (!s.planted.contains(i / s.grid.width, i % s.grid.width)) {
                irrelevant.push_back(i);
            }
        }
        std::mt19937_64 rng(derive_seed(seed, s.index));
        std::shuffle(irrelevant.begin(), irrelevant.end(), rng);
        for (auto& c : conds) {
            const auto k = static_cast<std::size_t>(std::llround(c.irrelevant_fraction * irrelevant.size()));
            std::vector<std::size_t> provided = planted;
            provided.insert(provided.end(), irrelevant.begin(), irrelevant.begin() + static_cast<std::ptrdiff_t>(k));
            if (oracle_answer(s, provided) == s.answer) {
                c.oracle_accuracy += 1.0;
            }
            const auto rows = rows_at(s.grid, provided);
            if (oracle_readout(rows, cfg) == s.answer) {
                c.readout_accuracy += 1.0;
            }
        }
    }
    for (auto& c : conds) {
        c.oracle_accuracy /= static_cast<double>(samples.size());
        c.readout_accuracy /= static_cast<double>(samples.size());
    }
    return conds;
}

void write_relevance_csv(std::ostream& os, std::span<const RelevanceCondition> conditions) {
    os << "condition,irrelevant_fraction,accuracy,readout_accuracy\n";
    for (const auto& c : conditions) {
        os << c.name << ',' << format_double(c.irrelevant_fraction) << ',' << format_double(c.oracle_accuracy) << ','
           << format_double(c.readout_accuracy) << '\n';
    }
}

std::vector<RankedRegion> planted_ranking(const SyntheticSample& sample, std::span<const RegionWindow> wins,
                                          std::uint64_t seed) {
    std::vector<std::size_t> rest;
    bool found = false;
    for (const auto& w : wins) {
        if (w.index == sample.planted_window) {
            found = true;
        } else {
            rest.push_back(w.index);
        }
    }
    if (!found) {
        throw BoundsError("planted_ranking: planted window " + std::to_string(sample.planted_window) +
                          " not among the windows");
    }
    std::mt19937_64 rng(derive_seed(seed, sample.index));
    std::shuffle(rest.begin(), rest.end(), rng);
    std::vector<RankedRegion> ranked;
    ranked.push_back({sample.planted_window, 1.0});
    for (std::size_t i = 0; i < rest.size(); ++i) {
        ranked.push_back({rest[i], -static_cast<double>(i + 1) / static_cast<double>(rest.size() + 1)});
    }
    return ranked;
}

RefinementTrial refinement_trial(const SyntheticSample& sample, const SynthConfig& cfg, const ToyEncoder& encoder,
                                 const BoxPx& hull, double budget) {
    const BoxPx patch = sample.gt.answer_boxes.front();
    const TokenGrid crop = crop_grid(sample.grid, hull);
    const RefinedTokens refined = refine(encoder, crop, sample.grid.token_count(), budget);

    std::vector<std::vector<double>> refined_rows;
    for (std::size_t r = 0; r < refined.grid.height; ++r) {
        for (std::size_t c = 0; c < refined.grid.width; ++c) {
            const BoxPx cell = refined.cell_box(r, c);
            if (patch.contains_point(cell.center_x(), cell.center_y())) {
                auto tok = refined.grid.token(r, c);
                refined_rows.emplace_back(tok.begin(), tok.end());
            }
        }
    }
    if (refined_rows.empty()) {
        // Coarse pooling can leave no cell centre inside a small patch; fall back to the cell under its centre.
        for (std::size_t r = 0; r < refined.grid.height && refined_rows.empty(); ++r) {
            for (std::size_t c = 0; c < refined.grid.width; ++c) {
                if (refined.cell_box(r, c).contains_point(patch.center_x(), patch.center_y())) {
                    auto tok = refined.grid.token(r, c);
                    refined_rows.emplace_back(tok.begin(), tok.end());
                    break;
                }
            }
        }
    }

    const TokenGrid full = encoder.encode(sample.grid);
    std::vector<std::vector<double>> full_rows;
    for (std::size_t r = 0; r < full.height; ++r) {
        for (std::size_t c = 0; c < full.width; ++c) {
            const BoxPx cell = full.cell_box(r, c);
            if (intersection_area(cell, hull) > 0.0 && patch.contains_point(cell.center_x(), cell.center_y())) {
                auto tok = full.token(r, c);
                full_rows.emplace_back(tok.begin(), tok.end());
            }
        }
    }

    RefinementTrial t;
    t.refined_answer = oracle_readout(refined_rows, cfg);
    t.contaminated_answer = oracle_readout(full_rows, cfg);
    t.refined_correct = t.refined_answer == sample.answer;
    t.contaminated_correct = t.contaminated_answer == sample.answer;
    t.refined_tokens = refined.grid.token_count();
    return t;
}

RefinementAblation refinement_ablation(std::span<const SyntheticSample> samples, const SynthConfig& cfg,
                                       const ToyEncoder& encoder, double ratio, double budget, std::uint64_t seed) {
    RefinementAblation out;
    out.n_samples = samples.size();
    if (samples.empty()) {
        return out;
    }
    for (const auto& s : samples) {
        const auto wins = slide_windows(s.grid, cfg.window, cfg.window, cfg.stride);
        const auto ranked = planted_ranking(s, wins, seed);
        const double area = s.grid.extent().area();
        const SelectionResult sel = adaptive_select(ranked, wins, area, ratio, s.grid.px_per_token);
        const RefinementTrial t = refinement_trial(s, cfg, encoder, sel.hull, budget);
        out.refined_accuracy += t.refined_correct ? 1.0 : 0.0;
        out.contaminated_accuracy += t.contaminated_correct ? 1.0 : 0.0;
        out.max_refined_tokens = std::max(out.max_refined_tokens, t.refined_tokens);
    }
    out.refined_accuracy /= static_cast<double>(samples.size());
    out.contaminated_accuracy /= static_cast<double>(samples.size());
    return out;
}

nlohmann::json sample_to_json(const SyntheticSample& sample) {
    nlohmann::json distractors = nlohmann::json::array();
    for (const auto& d : sample.distractors) {
        distractors.push_back({{"concept", d.concept_word}, {"answer", d.answer}, {"cells", rect_to_json(d.cells)}});
    }
    return {
        {"seed", sample.seed},
        {"index", sample.index},
        {"instruction", sample.instruction_text},
        {"concept", sample.concept_word},
        {"answer", sample.answer},
        {"planted", rect_to_json(sample.planted)},
        {"planted_window", sample.planted_window},
        {"gt", gt_to_json(sample.gt)},
        {"distractors", std::move(distractors)},
    };
}

SyntheticSample sample_from_json(const nlohmann::json& j, const SynthConfig& cfg) {
    std::uint64_t seed = 0;
    std::size_t index = 0;
    std::string instruction;
    try {
        seed = j.at("seed").get<std::uint64_t>();
        index = j.at("index").get<std::size_t>();
        instruction = j.at("instruction").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("synthetic sample: ") + e.what());
    }
    SyntheticSample s = gen_sample(cfg, seed, index);
    if (s.instruction_text != instruction || sample_to_json(s) != j) {
        throw ParseError("synthetic sample " + std::to_string(index) +
                         " does not match its regeneration; was it written with a different synthetic config?");
    }
    return s;
}

}  // namespace pinpoint
