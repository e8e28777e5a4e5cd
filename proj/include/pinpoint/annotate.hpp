// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pinpoint/grid.hpp"

namespace pinpoint {

struct OcrWord {
    std::string text;
    BoxPx box;
    int line = 0;
};

struct OcrDocument {
    std::string image_id;
    double width = 0.0;
    double height = 0.0;
    std::vector<OcrWord> words;
    std::optional<int> page;

    /// Word texts joined line by line, the text handed to language-model prompts.
    std::string text() const;
};

struct QaRecord {
    std::string question_id;
    std::string image_id;
    std::string question;
    std::vector<std::string> answers;
    std::optional<std::string> split;
};

nlohmann::json ocr_to_json(const OcrDocument& doc);
/// Throws ParseError on missing fields or a word box outside the page.
OcrDocument ocr_from_json(const nlohmann::json& j);
nlohmann::json qa_to_json(const QaRecord& record);
/// Throws ParseError on missing fields or an empty answer list.
QaRecord qa_from_json(const nlohmann::json& j);

/// Parses one JSON value per non-blank line; ParseError messages carry `origin:line`.
std::vector<nlohmann::json> read_jsonl(std::istream& is, const std::string& origin);
std::vector<nlohmann::json> read_jsonl_file(const std::filesystem::path& path);

/// Lowercases, collapses whitespace and strips punctuation around each word.
std::string normalize_text(std::string_view text);

/// Hull of every run of consecutive words on one line whose normalized texts spell the
/// normalized answer. Empty when there is no match.
std::vector<BoxPx> match_answer(const OcrDocument& ocr, const std::string& answer);

/// Raised by service clients; routes the record to manual annotation.
class ClientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by an OCR client that has no document for the image.
class DocumentNotFound : public ClientError {
public:
    using ClientError::ClientError;
};

struct SelectRequest {
    std::string question_id;
    std::string purpose;  // "answer" or "evidence:<n>"
    std::string question;
    std::string target;  // answer or rationale sentence being localized
    std::string ocr_text;
    std::vector<BoxPx> candidates;
    nlohmann::json to_json() const;
};

struct RationaleRequest {
    std::string question_id;
    std::string question;
    std::string answer;
    std::string ocr_text;
    nlohmann::json to_json() const;
};

struct GroundRequest {
    std::string question_id;
    std::string image_id;
    std::string question;
    std::string answer;
    nlohmann::json to_json() const;
};

class OcrClient {
public:
    virtual ~OcrClient() = default;
    virtual OcrDocument ocr(const std::string& image_id) = 0;
};

class SelectClient {
public:
    virtual ~SelectClient() = default;
    /// Index into request.candidates; anything out of range is treated as a failure.
    virtual std::int64_t select(const SelectRequest& request) = 0;
};

class RationaleClient {
public:
    virtual ~RationaleClient() = default;
    virtual std::vector<std::string> rationale(const RationaleRequest& request) = 0;
};

class GroundClient {
public:
    virtual ~GroundClient() = default;
    virtual BoxPx ground(const GroundRequest& request) = 0;
};

/// All clients must tolerate concurrent calls.
struct ServiceClients {
    std::shared_ptr<OcrClient> ocr;
    std::shared_ptr<SelectClient> select;
    std::shared_ptr<RationaleClient> rationale;
    std::shared_ptr<GroundClient> ground;
};

/// OCR backed by an in-memory document table.
class TableOcrClient final : public OcrClient {
public:
    explicit TableOcrClient(std::vector<OcrDocument> docs);
    OcrDocument ocr(const std::string& image_id) override;

private:
    std::map<std::string, OcrDocument> m_docs;
};

/// Lookup key of a request in a mock script: FNV-1a of the canonical request JSON, in hex.
std::string request_key(const nlohmann::json& request);

/// Table-driven select/rationale/ground mocks. The script is
/// {"select": {key: index}, "rationale": {key: [sentences]}, "ground": {key: [x0,y0,x1,y1]}}
/// where a key is request_key(...) or, as a fallback, "<question_id>" (select uses
/// "<question_id>/<purpose>"). A response {"error": msg} or a missing entry raises ClientError.
class MockClients final : public SelectClient, public RationaleClient, public GroundClient {
public:
    explicit MockClients(nlohmann::json script);
    std::int64_t select(const SelectRequest& request) override;
    std::vector<std::string> rationale(const RationaleRequest& request) override;
    BoxPx ground(const GroundRequest& request) override;

private:
    const nlohmann::json& lookup(const char* kind, const nlohmann::json& request, const std::string& fallback) const;
    nlohmann::json m_script;
};

/// Prompt templates keyed select, rationale, localize and ground, with {placeholders}.
struct PromptTemplates {
    std::map<std::string, std::string> templates;
    static PromptTemplates load(const std::filesystem::path& dir);
    std::string render(const std::string& name, const std::map<std::string, std::string>& vars) const;
};

/// JSON-over-HTTP adapters: POST /ocr, /select, /rationale, /ground on one service.
class HttpClients final : public OcrClient, public SelectClient, public RationaleClient, public GroundClient {
public:
    HttpClients(std::string host, int port, PromptTemplates prompts, double timeout_seconds = 30.0);
    OcrDocument ocr(const std::string& image_id) override;
    std::int64_t select(const SelectRequest& request) override;
    std::vector<std::string> rationale(const RationaleRequest& request) override;
    BoxPx ground(const GroundRequest& request) override;

private:
    nlohmann::json post(const std::string& path, const nlohmann::json& body) const;
    std::string m_host;
    int m_port;
    PromptTemplates m_prompts;
    double m_timeout;
};

enum class RoutingCase { unique, multiple, grounded, manual };
enum class PipelineVariant { plain, rationale };

std::string to_string(RoutingCase c);
RoutingCase parse_routing_case(const std::string& name);
PipelineVariant parse_pipeline_variant(const std::string& name);
/// Category label used in statistics tables.
std::string routing_label(RoutingCase c);

struct RoutingOutcome {
    std::string question_id;
    std::string image_id;
    RoutingCase routing = RoutingCase::manual;
    std::optional<GtAnnotation> annotation;  // empty while pending manual annotation
    std::optional<std::string> split;
    std::string note;
};

nlohmann::json outcome_to_json(const RoutingOutcome& outcome);
RoutingOutcome outcome_from_json(const nlohmann::json& j);

/// Routes one record. Client failures and invalid responses end in the manual case.
RoutingOutcome route(const QaRecord& record, const OcrDocument& ocr, const ServiceClients& clients,
                     PipelineVariant variant = PipelineVariant::plain);

struct PipelineError {
    std::size_t record_index = 0;
    std::string question_id;
    std::string message;
};

struct PipelineResult {
    std::vector<RoutingOutcome> outcomes;  // same order as the input records
    std::vector<PipelineError> errors;     // sorted by record index
};

PipelineResult run_pipeline(const std::vector<QaRecord>& records, const ServiceClients& clients,
                            PipelineVariant variant = PipelineVariant::plain, std::size_t parallelism = 1);

void write_outcomes_jsonl(std::ostream& os, const std::vector<RoutingOutcome>& outcomes);

struct SplitStats {
    std::string split;
    std::size_t records = 0;
    std::size_t completed = 0;
    double mean_answer_boxes = 0.0;
    double mean_evidence_boxes = 0.0;
    double encompass_per_pair = 0.0;
    double grounded_pct = 0.0;
    double unique_pct = 0.0;
    double multiple_pct = 0.0;
    double manual_pct = 0.0;
};

/// One row per split (records without a split are grouped under "all"), in split-name order.
/// Box means are over completed records.
std::vector<SplitStats> pipeline_stats(const std::vector<RoutingOutcome>& outcomes);
void write_stats_csv(std::ostream& os, const std::vector<SplitStats>& stats);

}  // namespace pinpoint
