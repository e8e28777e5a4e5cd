// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "pinpoint/config.hpp"
#include "pinpoint/errors.hpp"

namespace pinpoint {

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            len = 1;
            cp = c;
        } else if ((c >> 5) == 0x6) {
            len = 2;
            cp = c & 0x1f;
        } else if ((c >> 4) == 0xe) {
            len = 3;
            cp = c & 0x0f;
        } else if ((c >> 3) == 0x1e) {
            len = 4;
            cp = c & 0x07;
        }
        bool ok = len > 0 && i + len <= s.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            ok = (cc >> 6) == 0x2;
            cp = (cp << 6) | (cc & 0x3f);
        }
        if (!ok) {
            out.push_back(c);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::u32string lowercase(std::u32string s) {
    for (auto& c : s) {
        if (c >= U'A' && c <= U'Z') {
            c = c - U'A' + U'a';
        }
    }
    return s;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) {
        std::swap(a, b);
    }
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    return levenshtein(decode_utf8(a), decode_utf8(b));
}

double normalized_levenshtein(std::string_view a, std::string_view b) {
    const std::u32string la = lowercase(decode_utf8(a));
    const std::u32string lb = lowercase(decode_utf8(b));
    const std::size_t longest = std::max(la.size(), lb.size());
    if (longest == 0) {
        return 0.0;
    }
    return static_cast<double>(levenshtein(la, lb)) / static_cast<double>(longest);
}

double anls_score(std::string_view prediction, std::span<const std::string> golds, double threshold) {
    if (golds.empty()) {
        throw std::invalid_argument("anls: at least one gold answer is required");
    }
    double best = 0.0;
    for (const auto& g : golds) {
        const double nl = normalized_levenshtein(prediction, g);
        best = std::max(best, nl < threshold ? 1.0 - nl : 0.0);
    }
    return best;
}

double anls(std::span<const std::string> predictions, std::span<const std::vector<std::string>> golds,
            double threshold) {
    if (predictions.size() != golds.size()) {
        throw std::invalid_argument("anls: " + std::to_string(predictions.size()) + " predictions for " +
                                    std::to_string(golds.size()) + " questions");
    }
    if (predictions.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        sum += anls_score(predictions[i], golds[i], threshold);
    }
    return sum / static_cast<double>(predictions.size());
}

RegionAccuracyMode parse_region_accuracy_mode(const std::string& name) {
    if (name == "center") {
        return RegionAccuracyMode::center;
    }
    if (name == "iou") {
        return RegionAccuracyMode::iou;
    }
    throw ConfigError("unknown region accuracy mode '" + name + "'");
}

double region_accuracy(std::span<const SelectionResult> selections, std::span<const GtAnnotation> gts,
                       RegionAccuracyMode mode, double iou_threshold) {
    if (selections.size() != gts.size()) {
        throw std::invalid_argument("region_accuracy: " + std::to_string(selections.size()) + " selections for " +
                                    std::to_string(gts.size()) + " annotations");
    }
    if (selections.empty()) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < selections.size(); ++i) {
        const BoxPx& hull = selections[i].hull;
        const BoxPx& gt = gts[i].encompass;
        const bool hit = mode == RegionAccuracyMode::center ? hull.contains_point(gt.center_x(), gt.center_y())
                                                            : iou(hull, gt) >= iou_threshold;
        hits += hit ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(selections.size());
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
    return {{"anls", report.anls},
            {"region_accuracy", report.region_accuracy},
            {"mean_coverage", report.mean_coverage},
            {"n_samples", report.n_samples}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
    try {
        return EvalReport{j.at("anls").get<double>(), j.at("region_accuracy").get<double>(),
                          j.at("mean_coverage").get<double>(), j.at("n_samples").get<std::size_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("eval report: ") + e.what());
    }
}

void write_eval_csv(std::ostream& os, const EvalReport& report) {
    os << "anls,region_accuracy,mean_coverage,n_samples\n"
       << format_double(report.anls) << ',' << format_double(report.region_accuracy) << ','
       << format_double(report.mean_coverage) << ',' << report.n_samples << '\n';
}

std::string eval_summary_line(const EvalReport& report) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "ANLS %.4f | Region Acc. %.4f | Cov. %.4f | n %zu", report.anls,
                  report.region_accuracy, report.mean_coverage, report.n_samples);
    return buf;
}

}  // namespace pinpoint
