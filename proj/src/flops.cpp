// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/flops.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pinpoint/config.hpp"
#include "pinpoint/errors.hpp"

namespace pinpoint {

double alignment_flops(const AlignmentShape& s) {
    const double d = static_cast<double>(s.embed_dim);
    const double k = static_cast<double>(s.num_queries);
    const double n_visual = static_cast<double>(s.n_regions) * static_cast<double>(s.tokens_per_region);
    const double n_text = static_cast<double>(s.n_text_tokens);
    // Two d×d layers per projected token, 2 FLOPs per multiply-add.
    const double mlp = 2.0 * 2.0 * d * d * (n_visual + n_text);
    // Query logits and the weighted sum, each K·n·d multiply-adds.
    const double attention = 2.0 * 2.0 * k * d * (n_visual + n_text);
    // Per region: three K×d reductions (dot, two norms).
    const double similarity = 2.0 * 3.0 * k * d * static_cast<double>(s.n_regions);
    return mlp + attention + similarity;
}

FlopsReport flops_estimate(const RunShape& run, const CostModel& cost) {
    FlopsReport r;
    r.llm = cost.flops_per_param_token * cost.llm_params *
            static_cast<double>(run.n_visual_tokens + run.n_text_tokens);
    for (std::size_t patches : run.encoder_passes) {
        r.encoder += cost.flops_per_param_token * cost.vit_params * static_cast<double>(patches);
    }
    if (run.alignment) {
        r.alignment = alignment_flops(*run.alignment);
    }
    r.total = r.llm + r.encoder + r.alignment;
    return r;
}

FlopsReport flops_estimate(std::size_t n_visual_tokens, std::size_t n_text_tokens, const CostModel& cost) {
    return flops_estimate(RunShape{n_visual_tokens, n_text_tokens, {}, std::nullopt}, cost);
}

FlopsComparison compare_flops(std::size_t grid_tokens, std::size_t refined_tokens, std::size_t n_text_tokens,
                              const AlignmentShape& alignment, const CostModel& cost) {
    FlopsComparison cmp;
    cmp.cost = cost;
    cmp.vanilla = flops_estimate(RunShape{grid_tokens, n_text_tokens, {grid_tokens}, std::nullopt}, cost);
    cmp.pinpoint =
        flops_estimate(RunShape{refined_tokens, n_text_tokens, {grid_tokens, refined_tokens}, alignment}, cost);
    cmp.ratio = cmp.vanilla.total > 0.0 ? cmp.pinpoint.total / cmp.vanilla.total : 0.0;
    cmp.module_flops =
        cmp.pinpoint.alignment + cost.flops_per_param_token * cost.vit_params * static_cast<double>(refined_tokens);
    cmp.module_share = cmp.pinpoint.total > 0.0 ? cmp.module_flops / cmp.pinpoint.total : 0.0;
    return cmp;
}

std::size_t refined_token_estimate(std::size_t grid_tokens, double ratio, double budget) {
    if (!(ratio > 0.0 && ratio <= 1.0) || !(budget > 0.0)) {
        throw ConfigError("refined_token_estimate: need 0 < r <= 1 and a positive budget");
    }
    const double t = static_cast<double>(grid_tokens);
    const auto crop = static_cast<std::size_t>(std::ceil(ratio * t));
    const auto cap = static_cast<std::size_t>(std::floor(budget * t));
    return std::max<std::size_t>(1, std::min(crop, cap));
}

nlohmann::json flops_report_to_json(const FlopsReport& r) {
    return {{"llm", r.llm}, {"encoder", r.encoder}, {"alignment", r.alignment}, {"total", r.total},
            {"tflops", r.tflops()}};
}

nlohmann::json flops_comparison_to_json(const FlopsComparison& cmp) {
    return {
        {"cost_model",
         {{"llm_params", cmp.cost.llm_params},
          {"vit_params", cmp.cost.vit_params},
          {"flops_per_param_token", cmp.cost.flops_per_param_token}}},
        {"vanilla", flops_report_to_json(cmp.vanilla)},
        {"pinpoint", flops_report_to_json(cmp.pinpoint)},
        {"ratio", cmp.ratio},
        {"module_flops", cmp.module_flops},
        {"module_share", cmp.module_share},
    };
}

namespace {

FlopsReport report_from_json(const nlohmann::json& j) {
    return FlopsReport{j.at("llm").get<double>(), j.at("encoder").get<double>(), j.at("alignment").get<double>(),
                       j.at("total").get<double>()};
}

}  // namespace

FlopsComparison flops_comparison_from_json(const nlohmann::json& j) {
    try {
        FlopsComparison cmp;
        const auto& c = j.at("cost_model");
        cmp.cost = CostModel{c.at("llm_params").get<double>(), c.at("vit_params").get<double>(),
                             c.at("flops_per_param_token").get<double>()};
        cmp.vanilla = report_from_json(j.at("vanilla"));
        cmp.pinpoint = report_from_json(j.at("pinpoint"));
        cmp.ratio = j.at("ratio").get<double>();
        cmp.module_flops = j.at("module_flops").get<double>();
        cmp.module_share = j.at("module_share").get<double>();
        return cmp;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("flops report: ") + e.what());
    }
}

void write_flops_csv(std::ostream& os, const FlopsComparison& cmp) {
    os << "# cost model: llm_params=" << format_double(cmp.cost.llm_params)
       << " vit_params=" << format_double(cmp.cost.vit_params)
       << " flops_per_param_token=" << format_double(cmp.cost.flops_per_param_token) << '\n';
    os << "run,llm,encoder,alignment,total,tflops,ratio\n";
    const auto row = [&](const char* name, const FlopsReport& r, double ratio) {
        os << name << ',' << format_double(r.llm) << ',' << format_double(r.encoder) << ','
           << format_double(r.alignment) << ',' << format_double(r.total) << ',' << format_double(r.tflops()) << ','
           << format_double(ratio) << '\n';
    };
    row("vanilla", cmp.vanilla, 1.0);
    row("pinpoint", cmp.pinpoint, cmp.ratio);
    os << "module,,,," << format_double(cmp.module_flops) << ',' << format_double(cmp.module_flops * 1e-12) << ','
       << format_double(cmp.module_share) << '\n';
}

}  // namespace pinpoint
