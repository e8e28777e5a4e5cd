// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pinpoint/grid.hpp"
#include "pinpoint/selection.hpp"

namespace pinpoint {

/// Decodes UTF-8 into code points; invalid bytes map to themselves.
std::u32string decode_utf8(std::string_view s);
/// ASCII lowercase; other code points are left alone.
std::u32string lowercase(std::u32string s);

/// Edit distance with unit insert/delete/substitute costs, O(min(n, m)) memory.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
std::size_t levenshtein(std::string_view a, std::string_view b);

/// distance / max(len) on lowercased code points; two empty strings give 0.
double normalized_levenshtein(std::string_view a, std::string_view b);

inline constexpr double kAnlsThreshold = 0.5;

/// max over golds of (1 − NL) when NL < threshold, else 0. Throws std::invalid_argument on no golds.
double anls_score(std::string_view prediction, std::span<const std::string> golds,
                  double threshold = kAnlsThreshold);

/// Mean per-question ANLS. Throws std::invalid_argument on a length mismatch.
double anls(std::span<const std::string> predictions, std::span<const std::vector<std::string>> golds,
            double threshold = kAnlsThreshold);

enum class RegionAccuracyMode {
    center,  // hull contains the encompass centre
    iou,     // IoU(hull, encompass) at or above the threshold
};

RegionAccuracyMode parse_region_accuracy_mode(const std::string& name);

/// Fraction of selections whose hull hits the ground truth. Throws std::invalid_argument on a
/// length mismatch; an empty list scores 0.
double region_accuracy(std::span<const SelectionResult> selections, std::span<const GtAnnotation> gts,
                       RegionAccuracyMode mode = RegionAccuracyMode::center, double iou_threshold = 0.5);

struct EvalReport {
    double anls = 0.0;
    double region_accuracy = 0.0;
    double mean_coverage = 0.0;
    std::size_t n_samples = 0;
};

nlohmann::json eval_report_to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);
void write_eval_csv(std::ostream& os, const EvalReport& report);
/// "ANLS 0.9412 | Region Acc. 0.9500 | Cov. 0.7100 | n 200"
std::string eval_summary_line(const EvalReport& report);

}  // namespace pinpoint
