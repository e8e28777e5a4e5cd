// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pinpoint/alignment.hpp"
#include "pinpoint/autodiff.hpp"
#include "pinpoint/config.hpp"
#include "pinpoint/grid.hpp"

namespace pinpoint {

/// Training hyperparameters. Defaults follow the published setup (10×10 windows, stride 7,
/// r = 0.6, K = 100, lr 2e-5, 5 epochs, batch 32, λ = 0.5); see `desk()` for the small-scale
/// setting used by tests.
struct TrainConfig {
    std::size_t window_w = 10;
    std::size_t window_h = 10;
    std::size_t stride = 7;
    double ratio = 0.6;
    std::size_t num_queries = 100;
    double learning_rate = 2e-5;
    std::size_t epochs = 5;
    std::size_t batch_size = 32;
    double lambda = 0.5;
    double tau = 0.07;
    std::uint64_t seed = 0;
    bool include_positive_in_denominator = true;

    // Desk-scale extensions.
    std::size_t embed_dim = 32;
    std::size_t max_steps = 0;  // 0: no cap beyond epochs
    SimilarityMode similarity = SimilarityMode::mean_row_cosine;
    double refine_budget = 0.6;

    static TrainConfig desk();

    /// Throws ConfigError on τ ≤ 0, λ < 0, empty batches, or zero-sized windows.
    void validate() const;

    /// Consumes the keys it knows from `cfg`; returns the names it did not recognize.
    std::vector<std::string> apply(const KeyValueConfig& cfg);
    KeyValueConfig to_key_values() const;
};

/// One (grid, instruction, annotation) triple as seen by the trainer.
struct TrainingExample {
    TokenGrid grid;
    InstructionEmbedding instruction;
    GtAnnotation gt;
};

struct BatchSample {
    const TrainingExample* example = nullptr;
    std::vector<RegionWindow> windows;
    std::size_t pos_index = 0;
    std::vector<std::size_t> neg_indices;
};

BatchSample make_batch_sample(const TrainingExample& example, const TrainConfig& config);

/// Symmetric in-batch contrastive loss over paired (E^v_pos, E^t). Mean over the batch of
/// each direction, summed. With include_positive = false the paired term is left out of the
/// denominators, which needs B ≥ 2 (ConfigError otherwise).
ad::Var inter_loss(std::span<const ad::Var> ev_pos, std::span<const ad::Var> et, double tau, bool include_positive,
                   SimilarityMode mode = SimilarityMode::mean_row_cosine);

/// −log(exp(s_pos/τ) / Σ exp(s/τ)) over the negatives (plus the positive when
/// include_positive). Zero negatives give a constant 0.
ad::Var intra_loss(ad::Var et, ad::Var ev_pos, std::span<const ad::Var> ev_negs, double tau, bool include_positive,
                   SimilarityMode mode = SimilarityMode::mean_row_cosine);

/// L_inter + λ · mean(L_intra). λ = 0 returns `inter` itself.
ad::Var total_loss(ad::Var inter, std::span<const ad::Var> intra_terms, double lambda);

struct LossRecord {
    std::size_t step = 0;
    double inter = 0.0;
    double intra = 0.0;
    double total = 0.0;
};

/// Forward pass of a whole batch on `tape`: per-sample projections, both losses, total.
struct BatchLoss {
    ad::Var total;
    double inter = 0.0;
    double intra = 0.0;
};

BatchLoss batch_loss(ad::Tape& tape, const AlignmentVars& vars, std::span<const BatchSample> batch,
                     const TrainConfig& config);

/// Loss values of a batch without touching any gradients.
LossRecord evaluate_batch(const AlignmentModel& model, std::span<const BatchSample> batch, const TrainConfig& config);

struct TrainResult {
    AlignmentModel model;
    std::vector<LossRecord> history;
};

/// Adam on the guidance queries and both MLPs only. Deterministic for a fixed seed.
/// Throws NumericalError naming the epoch/batch when the loss goes non-finite.
TrainResult train(std::span<const TrainingExample> dataset, const TrainConfig& config, AlignmentModel initial);
TrainResult train(std::span<const TrainingExample> dataset, const TrainConfig& config);

void write_loss_csv(std::ostream& os, std::span<const LossRecord> history);
std::vector<LossRecord> read_loss_csv(std::istream& is);

}  // namespace pinpoint
