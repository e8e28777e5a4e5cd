// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pinpoint/autodiff.hpp"
#include "pinpoint/checkpoint.hpp"
#include "pinpoint/mlp.hpp"
#include "pinpoint/tensor.hpp"

namespace pinpoint {

/// How two K×d representations are compared.
enum class SimilarityMode {
    mean_row_cosine,  // mean over k of cos(ev[k], et[k])
    flat_cosine,      // cosine of the flattened matrices
};

SimilarityMode parse_similarity_mode(const std::string& name);
std::string to_string(SimilarityMode mode);

inline constexpr std::uint64_t kDefaultTokenizerSeed = 0x5eed'7e47ULL;

struct InstructionEmbedding {
    Tensor tokens;  // [M × d]
    std::string source_text;
};

/// Whitespace tokenizer with each token hashed to a seeded standard-normal embedding.
/// Same (text, d, seed) always yields the same rows. Throws std::invalid_argument on
/// text with no tokens.
InstructionEmbedding embed_text(const std::string& text, std::size_t embed_dim,
                                std::uint64_t seed = kDefaultTokenizerSeed);

/// Learnable guidance queries plus the visual and text projection MLPs. These are the only
/// trainable tensors; token grids and instruction embeddings are inputs and never updated.
struct AlignmentModel {
    Tensor queries;  // [K × d]
    MlpParams mlp_visual;
    MlpParams mlp_text;
    double d_k = 1.0;
    SimilarityMode similarity = SimilarityMode::mean_row_cosine;

    std::size_t num_queries() const { return queries.rows(); }
    std::size_t embed_dim() const { return queries.cols(); }
    double attention_scale() const;

    /// Queries and MLP weights uniform in ±1/sqrt(d), zero biases, d_k = d.
    static AlignmentModel init(std::size_t embed_dim, std::size_t num_queries, std::uint64_t seed,
                               Activation activation = Activation::gelu);

    /// Stable parameter order used by the optimizer and checkpoints.
    std::vector<std::string> parameter_names() const;
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;

    Checkpoint to_checkpoint() const;
    static AlignmentModel from_checkpoint(const Checkpoint& checkpoint);
};

/// E^v = softmax(E · mlp_v(R)ᵀ / sqrt(d_k)) · mlp_v(R)
Tensor encode_region(const AlignmentModel& model, const Tensor& region_tokens);
/// E^t = softmax(E · mlp_t(T)ᵀ / sqrt(d_k)) · mlp_t(T)
Tensor encode_text(const AlignmentModel& model, const InstructionEmbedding& instr);
/// Same as encode_region for an already projected region (rows of mlp_v output).
Tensor attend_projected(const AlignmentModel& model, const Tensor& projected);

double region_similarity(const Tensor& ev, const Tensor& et, SimilarityMode mode = SimilarityMode::mean_row_cosine);

/// Tape-side handles for the trainable tensors.
struct AlignmentVars {
    ad::Var queries;
    MlpVars mlp_visual;
    MlpVars mlp_text;
    double scale = 1.0;
    SimilarityMode similarity = SimilarityMode::mean_row_cosine;

    std::vector<ad::Var> parameters() const;
};

AlignmentVars bind_alignment(ad::Tape& tape, const AlignmentModel& model, bool trainable = true);
ad::Var encode_region(const AlignmentVars& vars, ad::Var region_tokens);
ad::Var encode_text(const AlignmentVars& vars, ad::Var text_tokens);
ad::Var attend_projected(const AlignmentVars& vars, ad::Var projected);
ad::Var region_similarity(ad::Var ev, ad::Var et, SimilarityMode mode);

}  // namespace pinpoint
