// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/training.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "pinpoint/errors.hpp"
#include "pinpoint/optim.hpp"

namespace pinpoint {

TrainConfig TrainConfig::desk() {
    TrainConfig c;
    c.num_queries = 8;
    c.learning_rate = 3e-3;
    c.batch_size = 16;
    return c;
}

void TrainConfig::validate() const {
    if (!(tau > 0.0)) {
        throw ConfigError("tau must be positive");
    }
    if (!(lambda >= 0.0)) {
        throw ConfigError("lambda must be non-negative");
    }
    if (batch_size == 0) {
        throw ConfigError("batch must be at least 1");
    }
    if (!include_positive_in_denominator && batch_size < 2) {
        throw ConfigError("batch of 1 leaves the strict in-batch denominator empty");
    }
    if (window_w == 0 || window_h == 0 || stride == 0) {
        throw ConfigError("window sizes and stride must be at least 1");
    }
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw ConfigError("r must lie in (0, 1]");
    }
    if (num_queries == 0 || embed_dim == 0) {
        throw ConfigError("K and d must be at least 1");
    }
    if (!(learning_rate >= 0.0)) {
        throw ConfigError("lr must be non-negative");
    }
    if (!(refine_budget > 0.0)) {
        throw ConfigError("refine_budget must be positive");
    }
}

std::vector<std::string> TrainConfig::apply(const KeyValueConfig& cfg) {
    std::vector<std::string> unknown;
    for (const auto& [key, value] : cfg.values()) {
        if (key == "W") {
            window_w = parse_size(key, value);
        } else if (key == "H") {
            window_h = parse_size(key, value);
        } else if (key == "S") {
            stride = parse_size(key, value);
        } else if (key == "r") {
            ratio = parse_double(key, value);
        } else if (key == "K") {
            num_queries = parse_size(key, value);
        } else if (key == "lr") {
            learning_rate = parse_double(key, value);
        } else if (key == "epochs") {
            epochs = parse_size(key, value);
        } else if (key == "batch") {
            batch_size = parse_size(key, value);
        } else if (key == "lambda") {
            lambda = parse_double(key, value);
        } else if (key == "tau") {
            tau = parse_double(key, value);
        } else if (key == "seed") {
            seed = parse_u64(key, value);
        } else if (key == "include_positive_in_denominator") {
            include_positive_in_denominator = parse_bool(key, value);
        } else if (key == "d") {
            embed_dim = parse_size(key, value);
        } else if (key == "max_steps") {
            max_steps = parse_size(key, value);
        } else if (key == "similarity") {
            similarity = parse_similarity_mode(value);
        } else if (key == "refine_budget") {
            refine_budget = parse_double(key, value);
        } else {
            unknown.push_back(key);
        }
    }
    return unknown;
}

KeyValueConfig TrainConfig::to_key_values() const {
    KeyValueConfig kv;
    kv.set("W", std::to_string(window_w));
    kv.set("H", std::to_string(window_h));
    kv.set("S", std::to_string(stride));
    kv.set("r", format_double(ratio));
    kv.set("K", std::to_string(num_queries));
    kv.set("lr", format_double(learning_rate));
    kv.set("epochs", std::to_string(epochs));
    kv.set("batch", std::to_string(batch_size));
    kv.set("lambda", format_double(lambda));
    kv.set("tau", format_double(tau));
    kv.set("seed", std::to_string(seed));
    kv.set("include_positive_in_denominator", include_positive_in_denominator ? "true" : "false");
    kv.set("d", std::to_string(embed_dim));
    kv.set("max_steps", std::to_string(max_steps));
    kv.set("similarity", to_string(similarity));
    kv.set("refine_budget", format_double(refine_budget));
    return kv;
}

BatchSample make_batch_sample(const TrainingExample& example, const TrainConfig& config) {
    BatchSample s;
    s.example = &example;
    s.windows = slide_windows(example.grid, config.window_w, config.window_h, config.stride);
    const PosNegAssignment a = assign_pos_neg(s.windows, example.gt, example.grid.px_per_token);
    s.pos_index = a.pos_index;
    s.neg_indices = a.neg_indices;
    return s;
}

ad::Var inter_loss(std::span<const ad::Var> ev_pos, std::span<const ad::Var> et, double tau, bool include_positive,
                   SimilarityMode mode) {
    const std::size_t batch = ev_pos.size();
    if (batch == 0 || et.size() != batch) {
        throw DimensionError("inter_loss: need matching, non-empty visual and text batches");
    }
    if (!include_positive && batch < 2) {
        throw ConfigError("inter_loss: strict denominators need a batch of at least 2");
    }
    if (!(tau > 0.0)) {
        throw ConfigError("inter_loss: tau must be positive");
    }
    const double inv_tau = 1.0 / tau;
    // logits[i][j] = sim(E^v_pos,i, E^t_j) / τ
    std::vector<std::vector<ad::Var>> logits(batch, std::vector<ad::Var>(batch));
    for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t j = 0; j < batch; ++j) {
            logits[i][j] = ad::scale(region_similarity(ev_pos[i], et[j], mode), inv_tau);
        }
    }
    std::vector<ad::Var> v2t, t2v;
    for (std::size_t i = 0; i < batch; ++i) {
        std::vector<ad::Var> row, col;
        for (std::size_t j = 0; j < batch; ++j) {
            if (j == i && !include_positive) {
                continue;
            }
            row.push_back(logits[i][j]);
            col.push_back(logits[j][i]);
        }
        v2t.push_back(ad::sub(ad::logsumexp(ad::concat(row)), logits[i][i]));
        t2v.push_back(ad::sub(ad::logsumexp(ad::concat(col)), logits[i][i]));
    }
    return ad::add(ad::mean(ad::concat(v2t)), ad::mean(ad::concat(t2v)));
}

ad::Var intra_loss(ad::Var et, ad::Var ev_pos, std::span<const ad::Var> ev_negs, double tau, bool include_positive,
                   SimilarityMode mode) {
    if (ev_negs.empty()) {
        return et.tape->constant(Tensor::scalar(0.0));
    }
    if (!(tau > 0.0)) {
        throw ConfigError("intra_loss: tau must be positive");
    }
    const double inv_tau = 1.0 / tau;
    const ad::Var pos = ad::scale(region_similarity(et, ev_pos, mode), inv_tau);
    std::vector<ad::Var> terms;
    if (include_positive) {
        terms.push_back(pos);
    }
    for (const ad::Var& neg : ev_negs) {
        terms.push_back(ad::scale(region_similarity(et, neg, mode), inv_tau));
    }
    return ad::sub(ad::logsumexp(ad::concat(terms)), pos);
}

ad::Var total_loss(ad::Var inter, std::span<const ad::Var> intra_terms, double lambda) {
    if (lambda == 0.0 || intra_terms.empty()) {
        return inter;
    }
    return ad::add(inter, ad::scale(ad::mean(ad::concat(intra_terms)), lambda));
}

BatchLoss batch_loss(ad::Tape& tape, const AlignmentVars& vars, std::span<const BatchSample> batch,
                     const TrainConfig& config) {
    std::vector<ad::Var> ev_pos, et, intra;
    ev_pos.reserve(batch.size());
    et.reserve(batch.size());
    intra.reserve(batch.size());
    for (const BatchSample& s : batch) {
        const TrainingExample& ex = *s.example;
        const ad::Var grid = tape.constant(ex.grid.flatten());
        const ad::Var projected = mlp_forward(grid, vars.mlp_visual);
        const auto encode_window = [&](std::size_t w) {
            return attend_projected(vars, ad::gather_rows(projected, window_token_indices(ex.grid, s.windows[w])));
        };
        const ad::Var pos = encode_window(s.pos_index);
        const ad::Var text = encode_text(vars, tape.constant(ex.instruction.tokens));
        std::vector<ad::Var> negs;
        negs.reserve(s.neg_indices.size());
        for (std::size_t n : s.neg_indices) {
            negs.push_back(encode_window(n));
        }
        ev_pos.push_back(pos);
        et.push_back(text);
        intra.push_back(intra_loss(text, pos, negs, config.tau, config.include_positive_in_denominator,
                                   vars.similarity));
    }
    const ad::Var inter =
        inter_loss(ev_pos, et, config.tau, config.include_positive_in_denominator, vars.similarity);
    BatchLoss out;
    out.total = total_loss(inter, intra, config.lambda);
    out.inter = inter.value().item();
    double intra_sum = 0.0;
    for (const auto& v : intra) {
        intra_sum += v.value().item();
    }
    out.intra = intra_sum / static_cast<double>(intra.size());
    return out;
}

LossRecord evaluate_batch(const AlignmentModel& model, std::span<const BatchSample> batch,
                          const TrainConfig& config) {
    ad::Tape tape;
    const AlignmentVars vars = bind_alignment(tape, model, false);
    const BatchLoss loss = batch_loss(tape, vars, batch, config);
    return LossRecord{0, loss.inter, loss.intra, loss.total.value().item()};
}

TrainResult train(std::span<const TrainingExample> dataset, const TrainConfig& config) {
    return train(dataset, config, AlignmentModel::init(config.embed_dim, config.num_queries, config.seed));
}

TrainResult train(std::span<const TrainingExample> dataset, const TrainConfig& config, AlignmentModel initial) {
    config.validate();
    if (dataset.empty()) {
        throw std::invalid_argument("train: empty dataset");
    }
    initial.similarity = config.similarity;
    TrainResult result{std::move(initial), {}};
    AlignmentModel& model = result.model;

    std::vector<BatchSample> samples;
    samples.reserve(dataset.size());
    for (const auto& ex : dataset) {
        samples.push_back(make_batch_sample(ex, config));
    }

    Adam adam(config.learning_rate);
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t min_batch = config.include_positive_in_denominator ? 1 : 2;

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0, b = 0; start < order.size(); start += config.batch_size, ++b) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            if (end - start < min_batch) {
                continue;
            }
            std::vector<BatchSample> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(samples[order[i]]);
            }

            ad::Tape tape;
            const AlignmentVars vars = bind_alignment(tape, model, true);
            const BatchLoss loss = batch_loss(tape, vars, batch, config);
            const double total = loss.total.value().item();
            if (!std::isfinite(total) || !std::isfinite(loss.inter) || !std::isfinite(loss.intra)) {
                throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(b) + " (step " + std::to_string(step) + ")");
            }
            tape.backward(loss.total);

            std::vector<Tensor> grads;
            for (const ad::Var& p : vars.parameters()) {
                grads.push_back(p.grad());
            }
            const auto params = model.parameters();
            try {
                adam.step(params, grads);
            } catch (const NumericalError& e) {
                throw NumericalError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(b));
            }
            result.history.push_back(LossRecord{step, loss.inter, loss.intra, total});
            ++step;
            if (config.max_steps != 0 && step >= config.max_steps) {
                return result;
            }
        }
    }
    return result;
}

void write_loss_csv(std::ostream& os, std::span<const LossRecord> history) {
    os << "step,l_inter,l_intra,l_total\n";
    for (const auto& r : history) {
        os << r.step << ',' << format_double(r.inter) << ',' << format_double(r.intra) << ','
           << format_double(r.total) << '\n';
    }
}

std::vector<LossRecord> read_loss_csv(std::istream& is) {
    std::vector<LossRecord> out;
    std::string line;
    if (!std::getline(is, line) || line != "step,l_inter,l_intra,l_total") {
        throw ParseError("loss CSV: unexpected header");
    }
    for (std::size_t lineno = 2; std::getline(is, line); ++lineno) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string f[4];
        for (auto& field : f) {
            if (!std::getline(ls, field, ',')) {
                throw ParseError("loss CSV line " + std::to_string(lineno) + ": expected 4 fields");
            }
        }
        try {
            out.push_back(LossRecord{static_cast<std::size_t>(std::stoull(f[0])), std::stod(f[1]), std::stod(f[2]),
                                     std::stod(f[3])});
        } catch (const std::exception&) {
            throw ParseError("loss CSV line " + std::to_string(lineno) + ": bad number");
        }
    }
    return out;
}

}  // namespace pinpoint
