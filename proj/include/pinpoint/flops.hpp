// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace pinpoint {

/// Parametric cost model: every parameter costs `flops_per_param_token` FLOPs per token it sees.
struct CostModel {
    double llm_params = 7e9;
    double vit_params = 3e8;
    double flops_per_param_token = 2.0;
};

/// Shape of one pass of the alignment module: N_r regions of n tokens, an instruction of
/// n_text tokens, K guidance queries of width d.
struct AlignmentShape {
    std::size_t n_regions = 0;
    std::size_t tokens_per_region = 0;
    std::size_t n_text_tokens = 0;
    std::size_t num_queries = 0;
    std::size_t embed_dim = 0;
};

/// FLOPs of the projection MLPs, query attention over every region and the instruction, and
/// the region similarities.
double alignment_flops(const AlignmentShape& shape);

struct RunShape {
    std::size_t n_visual_tokens = 0;  // tokens handed to the language model
    std::size_t n_text_tokens = 0;
    std::vector<std::size_t> encoder_passes;  // raw patches processed by each encoder pass
    std::optional<AlignmentShape> alignment;
};

struct FlopsReport {
    double llm = 0.0;
    double encoder = 0.0;
    double alignment = 0.0;
    double total = 0.0;
    double tflops() const { return total * 1e-12; }
};

FlopsReport flops_estimate(const RunShape& run, const CostModel& cost = {});
/// Language-model prefill only: flops_per_param_token · P_llm · (visual + text).
FlopsReport flops_estimate(std::size_t n_visual_tokens, std::size_t n_text_tokens, const CostModel& cost = {});

struct FlopsComparison {
    CostModel cost;
    FlopsReport vanilla;
    FlopsReport pinpoint;
    double ratio = 0.0;          // pinpoint.total / vanilla.total
    double module_flops = 0.0;   // alignment plus the refinement encoder pass
    double module_share = 0.0;   // module_flops / pinpoint.total
};

/// Vanilla: one encoder pass and every token to the language model. PinPoint: the same
/// encoder pass, the alignment module, a second pass over the refined crop, and only the
/// refined tokens to the language model.
FlopsComparison compare_flops(std::size_t grid_tokens, std::size_t refined_tokens, std::size_t n_text_tokens,
                              const AlignmentShape& alignment, const CostModel& cost = {});

/// Token count a selection at ratio r leaves after refinement under a budget fraction:
/// min(ceil(r·T), floor(budget·T)), at least 1.
std::size_t refined_token_estimate(std::size_t grid_tokens, double ratio, double budget);

nlohmann::json flops_report_to_json(const FlopsReport& report);
nlohmann::json flops_comparison_to_json(const FlopsComparison& cmp);
FlopsComparison flops_comparison_from_json(const nlohmann::json& j);
/// Header line documents the cost model; one row per run plus the module row.
void write_flops_csv(std::ostream& os, const FlopsComparison& cmp);

}  // namespace pinpoint
