// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinpoint/alignment.hpp"
#include "pinpoint/grid.hpp"
#include "pinpoint/selection.hpp"
#include "pinpoint/training.hpp"

namespace pinpoint {

/// Knobs of the planted-region task. A sample is a noisy token grid holding one patch of
/// the instruction's concept (carrying the answer code) among patches of other concepts.
struct SynthConfig {
    std::size_t grid_size = 24;
    std::size_t embed_dim = 32;
    double px_per_token = 14.0;
    std::size_t window = 10;
    std::size_t stride = 7;
    std::size_t planted_min = 8;
    std::size_t planted_max = 10;
    std::size_t distractors = 6;
    std::size_t distractor_min = 3;
    std::size_t distractor_max = 6;
    double noise = 0.5;
    double answer_scale = 1.0;
    std::uint64_t tokenizer_seed = kDefaultTokenizerSeed;

    void validate() const;
    /// Applies the `synth.*` keys it knows; other keys are ignored.
    void apply(const KeyValueConfig& cfg);
    KeyValueConfig to_key_values() const;
};

/// Token-space rectangle (rows/cols are grid coordinates).
struct CellRect {
    std::size_t top = 0;
    std::size_t left = 0;
    std::size_t h = 0;
    std::size_t w = 0;
    bool contains(std::size_t row, std::size_t col) const {
        return row >= top && row < top + h && col >= left && col < left + w;
    }
    friend bool operator==(const CellRect&, const CellRect&) = default;
};

struct Distractor {
    std::string concept_word;
    std::string answer;
    CellRect cells;
    friend bool operator==(const Distractor&, const Distractor&) = default;
};

struct SyntheticSample {
    std::uint64_t seed = 0;  // master seed of the dataset it belongs to
    std::size_t index = 0;
    TokenGrid grid;
    std::string instruction_text;
    InstructionEmbedding instruction;
    std::string concept_word;
    std::string answer;
    CellRect planted;
    std::size_t planted_window = 0;  // index of the window the patch was placed in
    GtAnnotation gt;
    std::vector<Distractor> distractors;
};

const std::vector<std::string>& synth_concepts();
const std::vector<std::string>& synth_answers();

/// Unit-free d-vector painted into a concept's patch: the concept word's instruction row.
std::vector<double> concept_pattern(const std::string& word, const SynthConfig& cfg);
/// Code vector identifying an answer string in painted tokens.
std::vector<double> answer_code(const std::string& answer, const SynthConfig& cfg);

SyntheticSample gen_sample(const SynthConfig& cfg, std::uint64_t seed, std::size_t index);
std::vector<SyntheticSample> gen_synthetic(std::size_t n, const SynthConfig& cfg, std::uint64_t seed);

std::vector<TrainingExample> to_training_examples(std::span<const SyntheticSample> samples);

/// Flat grid indices of the planted patch.
std::vector<std::size_t> planted_token_indices(const SyntheticSample& sample);

inline constexpr double kOracleCoverage = 0.8;
inline constexpr double kOracleConfusion = 0.5;

/// Answers correctly iff at least 80% of the planted tokens are provided and fewer than half
/// of the provided tokens lie outside the patch. Otherwise returns an empty string.
/// Throws BoundsError on an index outside the grid.
std::string oracle_answer(const SyntheticSample& sample, std::span<const std::size_t> provided);

/// Nearest answer code (by dot product) to the mean of `rows`; ties go to the earlier answer.
std::string oracle_readout(std::span<const std::vector<double>> rows, const SynthConfig& cfg);

struct RelevanceCondition {
    std::string name;
    double irrelevant_fraction = 0.0;  // share of the non-planted tokens added
    double oracle_accuracy = 0.0;
    double readout_accuracy = 0.0;
};

/// Provides the planted tokens plus 0, 1/3, 2/3 and all of the remaining tokens and scores
/// both oracles under each condition.
std::vector<RelevanceCondition> relevance_experiment(std::span<const SyntheticSample> samples,
                                                     const SynthConfig& cfg, std::uint64_t seed);
void write_relevance_csv(std::ostream& os, std::span<const RelevanceCondition> conditions);

/// Ranking that puts the planted window first and the rest in seeded random order, with
/// similarities descending so it is a valid ranked list.
std::vector<RankedRegion> planted_ranking(const SyntheticSample& sample, std::span<const RegionWindow> wins,
                                          std::uint64_t seed);

struct RefinementTrial {
    std::string refined_answer;
    std::string contaminated_answer;
    bool refined_correct = false;
    bool contaminated_correct = false;
    std::size_t refined_tokens = 0;
};

/// Reads the answer off the planted patch twice: from the crop re-encoded on its own, and from
/// the full-image encoding restricted to the same crop.
RefinementTrial refinement_trial(const SyntheticSample& sample, const SynthConfig& cfg, const ToyEncoder& encoder,
                                 const BoxPx& hull, double budget);

struct RefinementAblation {
    double refined_accuracy = 0.0;
    double contaminated_accuracy = 0.0;
    std::size_t n_samples = 0;
    std::size_t max_refined_tokens = 0;
};

RefinementAblation refinement_ablation(std::span<const SyntheticSample> samples, const SynthConfig& cfg,
                                       const ToyEncoder& encoder, double ratio, double budget, std::uint64_t seed);

nlohmann::json sample_to_json(const SyntheticSample& sample);
SyntheticSample sample_from_json(const nlohmann::json& j, const SynthConfig& cfg);

}  // namespace pinpoint
