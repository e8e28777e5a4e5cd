// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/alignment.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "pinpoint/errors.hpp"
#include "pinpoint/hash.hpp"

namespace pinpoint {

SimilarityMode parse_similarity_mode(const std::string& name) {
    if (name == "mean_row_cosine") {
        return SimilarityMode::mean_row_cosine;
    }
    if (name == "flat_cosine") {
        return SimilarityMode::flat_cosine;
    }
    throw ConfigError("unknown similarity mode '" + name + "'");
}

std::string to_string(SimilarityMode mode) {
    return mode == SimilarityMode::flat_cosine ? "flat_cosine" : "mean_row_cosine";
}

InstructionEmbedding embed_text(const std::string& text, std::size_t embed_dim, std::uint64_t seed) {
    std::istringstream is(text);
    std::vector<std::string> words;
    for (std::string w; is >> w;) {
        words.push_back(std::move(w));
    }
    if (words.empty()) {
        throw std::invalid_argument("embed_text: instruction has no tokens");
    }
    if (embed_dim == 0) {
        throw std::invalid_argument("embed_text: embedding dimension must be positive");
    }
    Tensor tokens({words.size(), embed_dim});
    for (std::size_t i = 0; i < words.size(); ++i) {
        std::mt19937_64 rng(splitmix64(fnv1a(words[i]) ^ splitmix64(seed)));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& v : tokens.row(i)) {
            v = normal(rng);
        }
    }
    return InstructionEmbedding{std::move(tokens), text};
}

double AlignmentModel::attention_scale() const {
    return 1.0 / std::sqrt(d_k);
}

AlignmentModel AlignmentModel::init(std::size_t embed_dim, std::size_t num_queries, std::uint64_t seed,
                                    Activation activation) {
    if (embed_dim == 0 || num_queries == 0) {
        throw ConfigError("alignment model needs d >= 1 and K >= 1");
    }
    std::mt19937_64 rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(embed_dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    AlignmentModel model;
    model.queries = Tensor({num_queries, embed_dim});
    for (auto& v : model.queries.data()) {
        v = dist(rng);
    }
    model.mlp_visual = MlpParams::uniform_init(embed_dim, embed_dim, embed_dim, rng, activation);
    model.mlp_text = MlpParams::uniform_init(embed_dim, embed_dim, embed_dim, rng, activation);
    model.d_k = static_cast<double>(embed_dim);
    return model;
}

std::vector<std::string> AlignmentModel::parameter_names() const {
    return {"queries",    "mlp_v.w1", "mlp_v.b1", "mlp_v.w2", "mlp_v.b2",
            "mlp_t.w1",   "mlp_t.b1", "mlp_t.w2", "mlp_t.b2"};
}

std::vector<Tensor*> AlignmentModel::parameters() {
    return {&queries,        &mlp_visual.w1, &mlp_visual.b1, &mlp_visual.w2, &mlp_visual.b2,
            &mlp_text.w1,    &mlp_text.b1,   &mlp_text.w2,   &mlp_text.b2};
}

std::vector<const Tensor*> AlignmentModel::parameters() const {
    return {&queries,        &mlp_visual.w1, &mlp_visual.b1, &mlp_visual.w2, &mlp_visual.b2,
            &mlp_text.w1,    &mlp_text.b1,   &mlp_text.w2,   &mlp_text.b2};
}

Checkpoint AlignmentModel::to_checkpoint() const {
    Checkpoint ck;
    const auto names = parameter_names();
    const auto params = parameters();
    for (std::size_t i = 0; i < names.size(); ++i) {
        ck.params.emplace(names[i], *params[i]);
    }
    ck.meta = {{"d_k", d_k},
               {"similarity", to_string(similarity)},
               {"activation_visual", to_string(mlp_visual.activation)},
               {"activation_text", to_string(mlp_text.activation)}};
    return ck;
}

AlignmentModel AlignmentModel::from_checkpoint(const Checkpoint& checkpoint) {
    AlignmentModel model;
    const auto names = model.parameter_names();
    auto params = model.parameters();
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto it = checkpoint.params.find(names[i]);
        if (it == checkpoint.params.end()) {
            throw ParseError("checkpoint lacks parameter '" + names[i] + "'");
        }
        *params[i] = it->second;
    }
    const auto& meta = checkpoint.meta;
    model.d_k = meta.value("d_k", static_cast<double>(model.queries.cols()));
    model.similarity = parse_similarity_mode(meta.value("similarity", std::string("mean_row_cosine")));
    model.mlp_visual.activation = parse_activation(meta.value("activation_visual", std::string("gelu")));
    model.mlp_text.activation = parse_activation(meta.value("activation_text", std::string("gelu")));
    const std::size_t d = model.queries.cols();
    if (model.queries.rank() != 2 || model.mlp_visual.input_dim() != d || model.mlp_visual.output_dim() != d ||
        model.mlp_text.input_dim() != d || model.mlp_text.output_dim() != d) {
        throw ParseError("checkpoint tensors have inconsistent shapes");
    }
    return model;
}

Tensor attend_projected(const AlignmentModel& model, const Tensor& projected) {
    return sdp_attention(model.queries, projected, model.attention_scale());
}

Tensor encode_region(const AlignmentModel& model, const Tensor& region_tokens) {
    if (region_tokens.rank() != 2 || region_tokens.rows() == 0) {
        throw DimensionError("encode_region: expected a non-empty [n × d] region");
    }
    return attend_projected(model, mlp_forward(region_tokens, model.mlp_visual));
}

Tensor encode_text(const AlignmentModel& model, const InstructionEmbedding& instr) {
    if (instr.tokens.rank() != 2 || instr.tokens.rows() == 0) {
        throw DimensionError("encode_text: expected a non-empty [M × d] instruction");
    }
    return attend_projected(model, mlp_forward(instr.tokens, model.mlp_text));
}

double region_similarity(const Tensor& ev, const Tensor& et, SimilarityMode mode) {
    if (ev.shape() != et.shape()) {
        throw DimensionError("region_similarity: shapes " + shape_to_string(ev.shape()) + " and " +
                             shape_to_string(et.shape()));
    }
    if (mode == SimilarityMode::flat_cosine) {
        return cosine(ev.data(), et.data());
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < ev.rows(); ++k) {
        sum += cosine(ev.row(k), et.row(k));
    }
    return sum * (1.0 / static_cast<double>(ev.rows()));
}

std::vector<ad::Var> AlignmentVars::parameters() const {
    return {queries,       mlp_visual.w1, mlp_visual.b1, mlp_visual.w2, mlp_visual.b2,
            mlp_text.w1,   mlp_text.b1,   mlp_text.w2,   mlp_text.b2};
}

AlignmentVars bind_alignment(ad::Tape& tape, const AlignmentModel& model, bool trainable) {
    AlignmentVars vars;
    vars.queries = tape.leaf(model.queries, trainable);
    vars.mlp_visual = bind_mlp(tape, model.mlp_visual, trainable);
    vars.mlp_text = bind_mlp(tape, model.mlp_text, trainable);
    vars.scale = model.attention_scale();
    vars.similarity = model.similarity;
    return vars;
}

ad::Var attend_projected(const AlignmentVars& vars, ad::Var projected) {
    return ad::sdp_attention(vars.queries, projected, vars.scale);
}

ad::Var encode_region(const AlignmentVars& vars, ad::Var region_tokens) {
    return attend_projected(vars, mlp_forward(region_tokens, vars.mlp_visual));
}

ad::Var encode_text(const AlignmentVars& vars, ad::Var text_tokens) {
    return attend_projected(vars, mlp_forward(text_tokens, vars.mlp_text));
}

ad::Var region_similarity(ad::Var ev, ad::Var et, SimilarityMode mode) {
    if (mode == SimilarityMode::flat_cosine) {
        return ad::flat_cosine(ev, et);
    }
    return ad::mean(ad::row_cosine(ev, et));
}

}  // namespace pinpoint
