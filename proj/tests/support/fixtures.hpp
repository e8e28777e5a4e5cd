// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "pinpoint/annotate.hpp"

namespace fixtures {

inline std::string path(const std::string& name) {
    return std::string(PINPOINT_FIXTURE_DIR) + "/" + name;
}

inline std::vector<pinpoint::QaRecord> records() {
    std::vector<pinpoint::QaRecord> out;
    for (const auto& j : pinpoint::read_jsonl_file(path("annotate_records.jsonl"))) {
        out.push_back(pinpoint::qa_from_json(j));
    }
    return out;
}

inline std::vector<pinpoint::OcrDocument> docs() {
    std::vector<pinpoint::OcrDocument> out;
    for (const auto& j : pinpoint::read_jsonl_file(path("annotate_docs.jsonl"))) {
        out.push_back(pinpoint::ocr_from_json(j));
    }
    return out;
}

inline pinpoint::ServiceClients mock_clients() {
    std::ifstream is(path("annotate_mock.json"));
    auto mock = std::make_shared<pinpoint::MockClients>(nlohmann::json::parse(is));
    pinpoint::ServiceClients c;
    c.ocr = std::make_shared<pinpoint::TableOcrClient>(docs());
    c.select = mock;
    c.rationale = mock;
    c.ground = mock;
    return c;
}

inline std::string outcomes_jsonl(const std::vector<pinpoint::RoutingOutcome>& outcomes) {
    std::ostringstream os;
    pinpoint::write_outcomes_jsonl(os, outcomes);
    return os.str();
}

}  // namespace fixtures
