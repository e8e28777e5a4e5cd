// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/annotate.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "pinpoint/errors.hpp"
#include "pinpoint/hash.hpp"

namespace pinpoint {

namespace {

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) {
                out.push_back(std::move(cur));
                cur.clear();
            }
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) {
        out.push_back(std::move(cur));
    }
    return out;
}

std::vector<std::string> normalized_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (std::string w : split_words(text)) {
        std::size_t b = 0, e = w.size();
        while (b < e && std::ispunct(static_cast<unsigned char>(w[b]))) {
            ++b;
        }
        while (e > b && std::ispunct(static_cast<unsigned char>(w[e - 1]))) {
            --e;
        }
        if (b == e) {
            continue;
        }
        std::string t = w.substr(b, e - b);
        for (auto& ch : t) {
            ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
        out.push_back(std::move(t));
    }
    return out;
}

BoxPx parse_box_lenient(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4) {
        throw ClientError("box response must be [x0, y0, x1, y1]");
    }
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw ClientError("box response must be numeric");
        }
    }
    return BoxPx{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

template <typename T>
T field(const nlohmann::json& j, const char* key, const char* what) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string(what) + ": field '" + key + "': " + e.what());
    }
}

}  // namespace

std::string OcrDocument::text() const {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) {
            out += words[i].line == words[i - 1].line ? ' ' : '\n';
        }
        out += words[i].text;
    }
    return out;
}

nlohmann::json ocr_to_json(const OcrDocument& doc) {
    nlohmann::json words = nlohmann::json::array();
    for (const auto& w : doc.words) {
        words.push_back({{"text", w.text}, {"box", box_to_json(w.box)}, {"line", w.line}});
    }
    nlohmann::json j = {{"image_id", doc.image_id}, {"width", doc.width}, {"height", doc.height}, {"words", words}};
    if (doc.page) {
        j["page"] = *doc.page;
    }
    return j;
}

OcrDocument ocr_from_json(const nlohmann::json& j) {
    OcrDocument doc;
    doc.image_id = field<std::string>(j, "image_id", "ocr document");
    doc.width = field<double>(j, "width", "ocr document");
    doc.height = field<double>(j, "height", "ocr document");
    if (!(doc.width > 0.0 && doc.height > 0.0)) {
        throw ParseError("ocr document " + doc.image_id + ": page size must be positive");
    }
    if (j.contains("page") && !j.at("page").is_null()) {
        doc.page = field<int>(j, "page", "ocr document");
    }
    const BoxPx page{0.0, 0.0, doc.width, doc.height};
    for (const auto& w : field<nlohmann::json>(j, "words", "ocr document")) {
        OcrWord word;
        word.text = field<std::string>(w, "text", "ocr word");
        word.box = box_from_json(w.at("box"));
        word.line = w.contains("line") ? field<int>(w, "line", "ocr word") : 0;
        if (!page.contains(word.box)) {
            throw ParseError("ocr document " + doc.image_id + ": word '" + word.text + "' lies outside the page");
        }
        doc.words.push_back(std::move(word));
    }
    return doc;
}

nlohmann::json qa_to_json(const QaRecord& r) {
    nlohmann::json j = {{"question_id", r.question_id},
                        {"image_id", r.image_id},
                        {"question", r.question},
                        {"answers", r.answers}};
    if (r.split) {
        j["split"] = *r.split;
    }
    return j;
}

QaRecord qa_from_json(const nlohmann::json& j) {
    QaRecord r;
    r.question_id = field<std::string>(j, "question_id", "qa record");
    r.image_id = field<std::string>(j, "image_id", "qa record");
    r.question = field<std::string>(j, "question", "qa record");
    r.answers = field<std::vector<std::string>>(j, "answers", "qa record");
    if (r.answers.empty()) {
        throw ParseError("qa record " + r.question_id + ": answers must not be empty");
    }
    if (j.contains("split") && !j.at("split").is_null()) {
        r.split = field<std::string>(j, "split", "qa record");
    }
    return r;
}

std::vector<nlohmann::json> read_jsonl(std::istream& is, const std::string& origin) {
    std::vector<nlohmann::json> out;
    std::string line;
    for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<nlohmann::json> read_jsonl_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw ParseError("cannot read " + path.string());
    }
    return read_jsonl(is, path.string());
}

std::string normalize_text(std::string_view text) {
    std::string out;
    for (const auto& t : normalized_tokens(text)) {
        if (!out.empty()) {
            out += ' ';
        }
        out += t;
    }
    return out;
}

std::vector<BoxPx> match_answer(const OcrDocument& ocr, const std::string& answer) {
    const std::vector<std::string> target = normalized_tokens(answer);
    std::vector<BoxPx> matches;
    if (target.empty()) {
        return matches;
    }
    // Normalized tokens of each line, each remembering the word it came from.
    std::vector<std::vector<std::pair<std::string, std::size_t>>> lines;
    for (std::size_t i = 0; i < ocr.words.size(); ++i) {
        if (i == 0 || ocr.words[i].line != ocr.words[i - 1].line) {
            lines.emplace_back();
        }
        for (auto& t : normalized_tokens(ocr.words[i].text)) {
            lines.back().emplace_back(std::move(t), i);
        }
    }
    for (const auto& line : lines) {
        for (std::size_t start = 0; start + target.size() <= line.size(); ++start) {
            bool hit = true;
            for (std::size_t k = 0; hit && k < target.size(); ++k) {
                hit = line[start + k].first == target[k];
            }
            if (!hit) {
                continue;
            }
            std::vector<BoxPx> boxes;
            for (std::size_t k = 0; k < target.size(); ++k) {
                const std::size_t w = line[start + k].second;
                if (k == 0 || w != line[start + k - 1].second) {
                    boxes.push_back(ocr.words[w].box);
                }
            }
            matches.push_back(union_box(boxes));
        }
    }
    return matches;
}

nlohmann::json SelectRequest::to_json() const {
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : candidates) {
        boxes.push_back(box_to_json(b));
    }
    return {{"question_id", question_id}, {"purpose", purpose},   {"question", question},
            {"target", target},           {"ocr_text", ocr_text}, {"candidates", boxes}};
}

nlohmann::json RationaleRequest::to_json() const {
    return {{"question_id", question_id}, {"question", question}, {"answer", answer}, {"ocr_text", ocr_text}};
}

nlohmann::json GroundRequest::to_json() const {
    return {{"question_id", question_id}, {"image_id", image_id}, {"question", question}, {"answer", answer}};
}

TableOcrClient::TableOcrClient(std::vector<OcrDocument> docs) {
    for (auto& d : docs) {
        const std::string id = d.image_id;
        m_docs.insert_or_assign(id, std::move(d));
    }
}

OcrDocument TableOcrClient::ocr(const std::string& image_id) {
    auto it = m_docs.find(image_id);
    if (it == m_docs.end()) {
        throw DocumentNotFound("no OCR document for image '" + image_id + "'");
    }
    return it->second;
}

std::string request_key(const nlohmann::json& request) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(request.dump())));
    return buf;
}

MockClients::MockClients(nlohmann::json script) : m_script(std::move(script)) {
    if (!m_script.is_object()) {
        throw ParseError("mock script must be a JSON object");
    }
}

const nlohmann::json& MockClients::lookup(const char* kind, const nlohmann::json& request,
                                          const std::string& fallback) const {
    static const nlohmann::json empty = nlohmann::json::object();
    const nlohmann::json& table = m_script.contains(kind) ? m_script.at(kind) : empty;
    const std::string key = request_key(request);
    const nlohmann::json* hit = nullptr;
    if (table.contains(key)) {
        hit = &table.at(key);
    } else if (table.contains(fallback)) {
        hit = &table.at(fallback);
    }
    if (hit == nullptr) {
        throw ClientError(std::string("mock ") + kind + ": no scripted response for " + fallback);
    }
    if (hit->is_object() && hit->contains("error")) {
        throw ClientError(std::string("mock ") + kind + ": " + hit->at("error").dump());
    }
    return *hit;
}

std::int64_t MockClients::select(const SelectRequest& request) {
    const auto& r = lookup("select", request.to_json(), request.question_id + "/" + request.purpose);
    if (!r.is_number_integer()) {
        throw ClientError("mock select: response is not an integer");
    }
    return r.get<std::int64_t>();
}

std::vector<std::string> MockClients::rationale(const RationaleRequest& request) {
    const auto& r = lookup("rationale", request.to_json(), request.question_id);
    try {
        return r.get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
        throw ClientError("mock rationale: response is not a list of sentences");
    }
}

BoxPx MockClients::ground(const GroundRequest& request) {
    return parse_box_lenient(lookup("ground", request.to_json(), request.question_id));
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
    PromptTemplates p;
    for (const char* name : {"select", "rationale", "localize", "ground"}) {
        const auto path = dir / (std::string(name) + ".txt");
        std::ifstream is(path);
        if (!is) {
            throw ConfigError("missing prompt template " + path.string());
        }
        // Leading '#' lines are a file header, not part of the prompt.
        std::string line, body;
        bool in_header = true;
        while (std::getline(is, line)) {
            if (in_header && (line.starts_with("#") || line.empty())) {
                continue;
            }
            in_header = false;
            body += line + "\n";
        }
        p.templates[name] = body;
    }
    return p;
}

std::string PromptTemplates::render(const std::string& name, const std::map<std::string, std::string>& vars) const {
    auto it = templates.find(name);
    if (it == templates.end()) {
        throw ConfigError("unknown prompt template '" + name + "'");
    }
    std::string out = it->second;
    for (const auto& [key, value] : vars) {
        const std::string slot = "{" + key + "}";
        for (auto pos = out.find(slot); pos != std::string::npos; pos = out.find(slot, pos + value.size())) {
            out.replace(pos, slot.size(), value);
        }
    }
    return out;
}

HttpClients::HttpClients(std::string host, int port, PromptTemplates prompts, double timeout_seconds)
    : m_host(std::move(host)), m_port(port), m_prompts(std::move(prompts)), m_timeout(timeout_seconds) {}

nlohmann::json HttpClients::post(const std::string& path, const nlohmann::json& body) const {
    // One connection per call keeps the adapter safe to share across workers.
    httplib::Client cli(m_host, m_port);
    const auto secs = static_cast<time_t>(m_timeout);
    cli.set_connection_timeout(secs, 0);
    cli.set_read_timeout(secs, 0);
    const auto res = cli.Post(path, body.dump(), "application/json");
    if (!res) {
        throw ClientError("POST " + path + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw ClientError("POST " + path + " returned HTTP " + std::to_string(res->status));
    }
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ClientError("POST " + path + ": malformed JSON response: " + e.what());
    }
}

OcrDocument HttpClients::ocr(const std::string& image_id) {
    const auto res = post("/ocr", {{"image_id", image_id}});
    if (res.is_object() && res.contains("error")) {
        throw DocumentNotFound("ocr service: " + res.at("error").dump());
    }
    try {
        return ocr_from_json(res);
    } catch (const ParseError& e) {
        throw ClientError(std::string("ocr service: ") + e.what());
    }
}

std::int64_t HttpClients::select(const SelectRequest& request) {
    nlohmann::json body = request.to_json();
    const bool evidence = request.purpose.rfind("evidence", 0) == 0;
    body["prompt"] = m_prompts.render(evidence ? "localize" : "select",
                                      {{"question", request.question},
                                       {"target", request.target},
                                       {"ocr_text", request.ocr_text},
                                       {"candidates", body.at("candidates").dump()}});
    const auto res = post("/select", body);
    if (!res.contains("index") || !res.at("index").is_number_integer()) {
        throw ClientError("select service: response lacks an integer 'index'");
    }
    return res.at("index").get<std::int64_t>();
}

std::vector<std::string> HttpClients::rationale(const RationaleRequest& request) {
    nlohmann::json body = request.to_json();
    body["prompt"] = m_prompts.render(
        "rationale", {{"question", request.question}, {"answer", request.answer}, {"ocr_text", request.ocr_text}});
    const auto res = post("/rationale", body);
    try {
        return res.at("sentences").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
        throw ClientError("rationale service: response lacks 'sentences'");
    }
}

BoxPx HttpClients::ground(const GroundRequest& request) {
    nlohmann::json body = request.to_json();
    body["prompt"] = m_prompts.render("ground", {{"question", request.question}, {"answer", request.answer}});
    const auto res = post("/ground", body);
    if (!res.contains("box")) {
        throw ClientError("ground service: response lacks 'box'");
    }
    return parse_box_lenient(res.at("box"));
}

std::string to_string(RoutingCase c) {
    switch (c) {
        case RoutingCase::unique:
            return "unique";
        case RoutingCase::multiple:
            return "multiple";
        case RoutingCase::grounded:
            return "grounded";
        case RoutingCase::manual:
            break;
    }
    return "manual";
}

RoutingCase parse_routing_case(const std::string& name) {
    for (RoutingCase c : {RoutingCase::unique, RoutingCase::multiple, RoutingCase::grounded, RoutingCase::manual}) {
        if (to_string(c) == name) {
            return c;
        }
    }
    throw ParseError("unknown routing case '" + name + "'");
}

PipelineVariant parse_pipeline_variant(const std::string& name) {
    if (name == "plain") {
        return PipelineVariant::plain;
    }
    if (name == "rationale") {
        return PipelineVariant::rationale;
    }
    throw ConfigError("unknown pipeline variant '" + name + "'");
}

std::string routing_label(RoutingCase c) {
    switch (c) {
        case RoutingCase::unique:
            return "OCR-Extractable (Unique)";
        case RoutingCase::multiple:
            return "OCR-Extractable (Multiple)";
        case RoutingCase::grounded:
            return "Visually Grounded";
        case RoutingCase::manual:
            break;
    }
    return "Manual Annotation";
}

nlohmann::json outcome_to_json(const RoutingOutcome& o) {
    nlohmann::json j;
    if (o.annotation) {
        j = gt_to_json(*o.annotation);
    } else {
        j = {{"question_id", o.question_id}, {"image_id", o.image_id}, {"pending_manual", true}};
    }
    j["routing"] = to_string(o.routing);
    if (o.split) {
        j["split"] = *o.split;
    }
    if (!o.note.empty()) {
        j["note"] = o.note;
    }
    return j;
}

RoutingOutcome outcome_from_json(const nlohmann::json& j) {
    RoutingOutcome o;
    o.question_id = field<std::string>(j, "question_id", "outcome");
    o.image_id = field<std::string>(j, "image_id", "outcome");
    o.routing = parse_routing_case(field<std::string>(j, "routing", "outcome"));
    if (!j.value("pending_manual", false)) {
        o.annotation = gt_from_json(j);
    }
    if (j.contains("split")) {
        o.split = field<std::string>(j, "split", "outcome");
    }
    if (j.contains("note")) {
        o.note = field<std::string>(j, "note", "outcome");
    }
    return o;
}

RoutingOutcome route(const QaRecord& record, const OcrDocument& ocr, const ServiceClients& clients,
                     PipelineVariant variant) {
    RoutingOutcome out;
    out.question_id = record.question_id;
    out.image_id = record.image_id;
    out.split = record.split;
    if (record.answers.empty()) {
        out.note = "record has no answers";
        return out;
    }

    std::string answer = record.answers.front();
    std::vector<BoxPx> matches;
    for (const auto& a : record.answers) {
        matches = match_answer(ocr, a);
        if (!matches.empty()) {
            answer = a;
            break;
        }
    }

    const std::string ocr_text = ocr.text();
    const auto choose = [&](const std::string& purpose, const std::string& target,
                            const std::vector<BoxPx>& candidates) -> std::optional<BoxPx> {
        if (!clients.select) {
            throw ClientError("no select client configured");
        }
        const std::int64_t idx =
            clients.select->select(SelectRequest{record.question_id, purpose, record.question, target, ocr_text,
                                                 candidates});
        if (idx < 0 || static_cast<std::size_t>(idx) >= candidates.size()) {
            out.note = purpose + ": selected index " + std::to_string(idx) + " is not one of " +
                       std::to_string(candidates.size()) + " candidates";
            return std::nullopt;
        }
        return candidates[static_cast<std::size_t>(idx)];
    };

    try {
        RoutingCase routing = RoutingCase::manual;
        BoxPx answer_box;
        if (matches.size() == 1) {
            routing = RoutingCase::unique;
            answer_box = matches.front();
        } else if (matches.size() > 1) {
            const auto chosen = choose("answer", answer, matches);
            if (!chosen) {
                return out;
            }
            routing = RoutingCase::multiple;
            answer_box = *chosen;
        } else {
            if (!clients.ground) {
                throw ClientError("no ground client configured");
            }
            const BoxPx raw =
                clients.ground->ground(GroundRequest{record.question_id, record.image_id, record.question, answer});
            answer_box = clip_box(raw, ocr.width, ocr.height);
            if (!answer_box.valid()) {
                out.note = "grounded box is empty after clipping to the page";
                return out;
            }
            routing = RoutingCase::grounded;
        }

        std::vector<BoxPx> evidence;
        if (variant == PipelineVariant::rationale) {
            if (!clients.rationale) {
                throw ClientError("no rationale client configured");
            }
            const auto sentences =
                clients.rationale->rationale(RationaleRequest{record.question_id, record.question, answer, ocr_text});
            std::size_t unlocalized = 0;
            for (std::size_t i = 0; i < sentences.size(); ++i) {
                const auto found = match_answer(ocr, sentences[i]);
                std::optional<BoxPx> box;
                if (found.size() == 1) {
                    box = found.front();
                } else if (found.size() > 1) {
                    box = choose("evidence:" + std::to_string(i), sentences[i], found);
                    if (!box) {
                        return out;
                    }
                } else {
                    ++unlocalized;
                    continue;
                }
                if (*box != answer_box && std::find(evidence.begin(), evidence.end(), *box) == evidence.end()) {
                    evidence.push_back(*box);
                }
            }
            if (unlocalized > 0) {
                out.note = std::to_string(unlocalized) + " rationale sentence(s) not found in the OCR text";
            }
        }

        GtAnnotation gt =
            GtAnnotation::with_encompass(record.question_id, record.image_id, {answer_box}, std::move(evidence));
        gt.page = ocr.page;
        out.annotation = std::move(gt);
        out.routing = routing;
    } catch (const ClientError& e) {
        out.routing = RoutingCase::manual;
        out.annotation.reset();
        out.note = e.what();
    }
    return out;
}

PipelineResult run_pipeline(const std::vector<QaRecord>& records, const ServiceClients& clients,
                            PipelineVariant variant, std::size_t parallelism) {
    PipelineResult result;
    result.outcomes.resize(records.size());
    std::vector<std::optional<PipelineError>> errors(records.size());

    const auto process = [&](std::size_t i) {
        const QaRecord& rec = records[i];
        try {
            if (!clients.ocr) {
                throw ClientError("no OCR client configured");
            }
            const OcrDocument doc = clients.ocr->ocr(rec.image_id);
            result.outcomes[i] = route(rec, doc, clients, variant);
        } catch (const std::exception& e) {
            errors[i] = PipelineError{i, rec.question_id, e.what()};
            RoutingOutcome manual;
            manual.question_id = rec.question_id;
            manual.image_id = rec.image_id;
            manual.split = rec.split;
            manual.note = e.what();
            result.outcomes[i] = std::move(manual);
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, records.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < records.size(); ++i) {
            process(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1)) {
                    process(i);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (auto& e : errors) {
        if (e) {
            result.errors.push_back(std::move(*e));
        }
    }
    return result;
}

void write_outcomes_jsonl(std::ostream& os, const std::vector<RoutingOutcome>& outcomes) {
    for (const auto& o : outcomes) {
        os << outcome_to_json(o).dump() << '\n';
    }
}

std::vector<SplitStats> pipeline_stats(const std::vector<RoutingOutcome>& outcomes) {
    std::map<std::string, std::vector<const RoutingOutcome*>> groups;
    for (const auto& o : outcomes) {
        groups[o.split.value_or("all")].push_back(&o);
    }
    std::vector<SplitStats> out;
    for (const auto& [split, members] : groups) {
        SplitStats s;
        s.split = split;
        s.records = members.size();
        std::size_t answers = 0, evidence = 0, encompass = 0;
        std::size_t counts[4] = {0, 0, 0, 0};
        for (const RoutingOutcome* o : members) {
            ++counts[static_cast<int>(o->routing)];
            if (o->annotation) {
                ++s.completed;
                answers += o->annotation->answer_boxes.size();
                evidence += o->annotation->evidence_boxes.size();
                ++encompass;
            }
        }
        if (s.completed > 0) {
            const double n = static_cast<double>(s.completed);
            s.mean_answer_boxes = static_cast<double>(answers) / n;
            s.mean_evidence_boxes = static_cast<double>(evidence) / n;
            s.encompass_per_pair = static_cast<double>(encompass) / n;
        }
        const double total = static_cast<double>(s.records);
        s.unique_pct = 100.0 * static_cast<double>(counts[static_cast<int>(RoutingCase::unique)]) / total;
        s.multiple_pct = 100.0 * static_cast<double>(counts[static_cast<int>(RoutingCase::multiple)]) / total;
        s.grounded_pct = 100.0 * static_cast<double>(counts[static_cast<int>(RoutingCase::grounded)]) / total;
        s.manual_pct = 100.0 * static_cast<double>(counts[static_cast<int>(RoutingCase::manual)]) / total;
        out.push_back(s);
    }
    return out;
}

void write_stats_csv(std::ostream& os, const std::vector<SplitStats>& stats) {
    os << "split,records,completed,mean_answer_boxes,mean_evidence_boxes,encompass_per_pair,"
       << "Visually Grounded,OCR-Extractable (Unique),OCR-Extractable (Multiple),Manual Annotation\n";
    for (const auto& s : stats) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s,%zu,%zu,%.4f,%.4f,%.4f,%.2f,%.2f,%.2f,%.2f\n", s.split.c_str(), s.records,
                      s.completed, s.mean_answer_boxes, s.mean_evidence_boxes, s.encompass_per_pair, s.grounded_pct,
                      s.unique_pct, s.multiple_pct, s.manual_pct);
        os << buf;
    }
}

}  // namespace pinpoint
