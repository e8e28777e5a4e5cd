// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <httplib.h>

#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "pinpoint/annotate.hpp"
#include "pinpoint/errors.hpp"

using namespace pinpoint;

namespace {

OcrDocument page_of(std::vector<OcrWord> words) {
    OcrDocument d;
    d.image_id = "img";
    d.width = 500;
    d.height = 400;
    d.words = std::move(words);
    return d;
}

QaRecord record(std::string qid, std::string answer) {
    return QaRecord{std::move(qid), "img", "question?", {std::move(answer)}, std::nullopt};
}

RoutingOutcome outcome(RoutingCase c, std::size_t answers, std::size_t evidence, std::string split = "all") {
    RoutingOutcome o;
    o.question_id = "q";
    o.routing = c;
    o.split = std::move(split);
    if (c != RoutingCase::manual) {
        std::vector<BoxPx> a(answers, BoxPx{0, 0, 1, 1}), e(evidence, BoxPx{1, 1, 2, 2});
        o.annotation = GtAnnotation::with_encompass("q", "img", a, e);
    }
    return o;
}

}  // namespace

TEST_CASE("answer matching over OCR words") {
    const OcrDocument doc = page_of({{"Growth:", {10, 10, 60, 20}, 0},
                                     {"42%", {65, 10, 90, 20}, 0},
                                     {"New", {10, 30, 40, 40}, 1},
                                     {"York", {45, 30, 80, 42}, 1},
                                     {"new", {10, 50, 40, 60}, 2}});
    const auto one = match_answer(doc, "42%");
    REQUIRE(one.size() == 1);
    CHECK(one[0] == BoxPx{65, 10, 90, 20});
    const auto two = match_answer(doc, "new york");
    REQUIRE(two.size() == 1);
    CHECK(two[0] == BoxPx{10, 30, 80, 42});
    CHECK(match_answer(doc, "boston").empty());
    CHECK(match_answer(doc, "growth").size() == 1);
    CHECK(match_answer(doc, "new").size() == 2);
    CHECK(normalize_text("  Hello,   World! ") == "hello world");
}

TEST_CASE("routing cases") {
    const OcrDocument doc = page_of({{"north", {10, 10, 50, 20}, 0},
                                     {"gate", {55, 10, 90, 20}, 0},
                                     {"north", {10, 40, 50, 50}, 1},
                                     {"42%", {60, 40, 90, 50}, 1}});
    auto mock = std::make_shared<MockClients>(nlohmann::json{
        {"select", {{"pick/answer", 1}, {"bad/answer", 2}, {"neg/answer", -1}}},
        {"ground", {{"grd", {100, 100, 150, 130}}, {"off", {600, 600, 700, 700}}, {"err", {{"error", "timeout"}}}}}});
    ServiceClients c;
    c.select = mock;
    c.ground = mock;
    c.rationale = mock;

    const auto u = route(record("u", "42%"), doc, c);
    CHECK(u.routing == RoutingCase::unique);
    REQUIRE(u.annotation);
    CHECK(u.annotation->encompass == BoxPx{60, 40, 90, 50});

    const auto m = route(record("pick", "north"), doc, c);
    CHECK(m.routing == RoutingCase::multiple);
    CHECK(m.annotation->answer_boxes.front() == BoxPx{10, 40, 50, 50});

    for (const char* qid : {"bad", "neg"}) {
        const auto x = route(record(qid, "north"), doc, c);
        CHECK(x.routing == RoutingCase::manual);
        CHECK_FALSE(x.annotation);
        CHECK(x.note.find("index") != std::string::npos);
    }

    const auto g = route(record("grd", "blue"), doc, c);
    CHECK(g.routing == RoutingCase::grounded);
    CHECK(g.annotation->encompass == BoxPx{100, 100, 150, 130});

    CHECK(route(record("off", "blue"), doc, c).routing == RoutingCase::manual);
    const auto e = route(record("err", "blue"), doc, c);
    CHECK(e.routing == RoutingCase::manual);
    CHECK(e.note.find("timeout") != std::string::npos);
    CHECK(route(record("unscripted", "blue"), doc, c).routing == RoutingCase::manual);
}

TEST_CASE("mock lookup prefers the exact request key") {
    const SelectRequest req{"q", "answer", "question?", "north", "text", {BoxPx{0, 0, 1, 1}, BoxPx{2, 2, 3, 3}}};
    MockClients mock(nlohmann::json{{"select", {{request_key(req.to_json()), 0}, {"q/answer", 1}}}});
    CHECK(mock.select(req) == 0);
    SelectRequest other = req;
    other.target = "south";
    CHECK(mock.select(other) == 1);
    CHECK(request_key(req.to_json()).size() == 16);
    CHECK_THROWS_AS(MockClients(nlohmann::json::array()), ParseError);
}

TEST_CASE("fixture pipeline gives one outcome per case and reruns identically") {
    const auto recs = fixtures::records();
    const auto clients = fixtures::mock_clients();
    const PipelineResult r = run_pipeline(recs, clients);
    REQUIRE(r.outcomes.size() == 5);
    CHECK(r.outcomes[0].routing == RoutingCase::unique);
    CHECK(r.outcomes[1].routing == RoutingCase::multiple);
    CHECK(r.outcomes[2].routing == RoutingCase::grounded);
    CHECK(r.outcomes[3].routing == RoutingCase::manual);
    CHECK(r.outcomes[4].routing == RoutingCase::manual);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].record_index == 4);
    CHECK(r.outcomes[0].annotation->page == 1);
    CHECK(r.outcomes[2].annotation->encompass == BoxPx{100, 100, 800, 150});

    const std::vector<QaRecord> first3(recs.begin(), recs.begin() + 3);
    const auto three = run_pipeline(first3, clients);
    CHECK(three.outcomes[0].routing == RoutingCase::unique);
    CHECK(three.outcomes[1].routing == RoutingCase::multiple);
    CHECK(three.outcomes[2].routing == RoutingCase::grounded);

    const std::string once = fixtures::outcomes_jsonl(r.outcomes);
    for (std::size_t workers : {1, 2, 4}) {
        for (auto variant : {PipelineVariant::plain, PipelineVariant::rationale}) {
            const auto a = run_pipeline(recs, fixtures::mock_clients(), variant, workers);
            const auto b = run_pipeline(recs, fixtures::mock_clients(), variant, workers);
            CHECK(fixtures::outcomes_jsonl(a.outcomes) == fixtures::outcomes_jsonl(b.outcomes));
            if (variant == PipelineVariant::plain) {
                CHECK(fixtures::outcomes_jsonl(a.outcomes) == once);
            }
        }
    }
    CHECK(run_pipeline({}, clients).outcomes.empty());
}

TEST_CASE("rationale variant collects evidence boxes") {
    const auto r = run_pipeline(fixtures::records(), fixtures::mock_clients(), PipelineVariant::rationale);
    const auto& q1 = *r.outcomes[0].annotation;
    CHECK(q1.evidence_boxes == std::vector<BoxPx>{{50, 100, 270, 120}, {50, 140, 165, 160}});
    CHECK(q1.encompass == BoxPx{50, 100, 270, 160});
    CHECK(r.outcomes[0].note.find("1 rationale") != std::string::npos);
    CHECK(r.outcomes[1].annotation->evidence_boxes.size() == 1);
    for (const auto& o : r.outcomes) {
        if (o.annotation) {
            CHECK(o.annotation->encompass_contains_all());
        }
    }
}

TEST_CASE("statistics") {
    const auto unique = pipeline_stats({outcome(RoutingCase::unique, 1, 0), outcome(RoutingCase::unique, 1, 0)});
    REQUIRE(unique.size() == 1);
    CHECK(unique[0].unique_pct == 100.0);
    CHECK(unique[0].manual_pct == 0.0);

    const auto mixed = pipeline_stats({outcome(RoutingCase::unique, 1, 0), outcome(RoutingCase::multiple, 1, 0),
                                       outcome(RoutingCase::grounded, 1, 0), outcome(RoutingCase::manual, 0, 0)});
    CHECK(mixed[0].unique_pct == 25.0);
    CHECK(mixed[0].multiple_pct == 25.0);
    CHECK(mixed[0].grounded_pct == 25.0);
    CHECK(mixed[0].manual_pct == 25.0);

    const auto boxes = pipeline_stats({outcome(RoutingCase::grounded, 2, 1), outcome(RoutingCase::unique, 1, 0)});
    CHECK(boxes[0].mean_answer_boxes == 1.5);
    CHECK(boxes[0].mean_evidence_boxes == 0.5);

    const auto fixture = pipeline_stats(run_pipeline(fixtures::records(), fixtures::mock_clients()).outcomes);
    REQUIRE(fixture.size() == 2);
    CHECK(fixture[0].split == "train");
    CHECK(fixture[0].unique_pct == 50.0);
    CHECK(fixture[0].multiple_pct == 50.0);
    CHECK(fixture[1].split == "val");
    CHECK(fixture[1].grounded_pct == doctest::Approx(100.0 / 3.0));
    CHECK(fixture[1].manual_pct == doctest::Approx(200.0 / 3.0));
    std::ostringstream os;
    write_stats_csv(os, fixture);
    CHECK(os.str().find("val,3,1,1.0000,0.0000,1.0000,33.33,0.00,0.00,66.67") != std::string::npos);
}

TEST_CASE("outcomes and records round-trip through JSON") {
    const auto r = run_pipeline(fixtures::records(), fixtures::mock_clients(), PipelineVariant::rationale);
    for (const auto& o : r.outcomes) {
        const auto back = outcome_from_json(nlohmann::json::parse(outcome_to_json(o).dump()));
        CHECK(outcome_to_json(back).dump() == outcome_to_json(o).dump());
    }
    for (const auto& rec : fixtures::records()) {
        CHECK(qa_to_json(qa_from_json(qa_to_json(rec))) == qa_to_json(rec));
    }
    CHECK(parse_routing_case(to_string(RoutingCase::grounded)) == RoutingCase::grounded);
    CHECK(routing_label(RoutingCase::unique) == "OCR-Extractable (Unique)");
}

TEST_CASE("malformed inputs raise ParseError with a line number") {
    std::istringstream is("{\"a\": 1}\n\n{broken\n");
    try {
        read_jsonl(is, "records.jsonl");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("records.jsonl:3") != std::string::npos);
    }
    CHECK_THROWS_AS(qa_from_json(nlohmann::json{{"question_id", "q"}, {"image_id", "i"}, {"question", "?"},
                                                {"answers", nlohmann::json::array()}}),
                    ParseError);
    auto doc = ocr_to_json(page_of({{"x", {10, 10, 20, 20}, 0}}));
    doc["words"][0]["box"] = {10, 10, 900, 20};
    CHECK_THROWS_AS(ocr_from_json(doc), ParseError);
}

TEST_CASE("HTTP adapters speak the service protocol") {
    httplib::Server srv;
    const nlohmann::json page = ocr_to_json(page_of({{"north", {10, 10, 50, 20}, 0}, {"north", {10, 40, 50, 50}, 1}}));
    srv.Post("/ocr", [&](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        res.set_content(body.at("image_id") == "img" ? page.dump() : R"({"error":"unknown"})", "application/json");
    });
    srv.Post("/select", [](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        const bool prompted = body.at("prompt").get<std::string>().find("north") != std::string::npos;
        res.set_content(nlohmann::json{{"index", prompted ? 1 : 0}}.dump(), "application/json");
    });
    srv.Post("/rationale", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"sentences":["north"]})", "application/json");
    });
    srv.Post("/ground", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"box":[1,2,3,4]})", "application/json");
    });
    const int port = srv.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread worker([&] { srv.listen_after_bind(); });
    srv.wait_until_ready();

    auto http = std::make_shared<HttpClients>("127.0.0.1", port, PromptTemplates::load(PINPOINT_PROMPT_DIR), 5.0);
    ServiceClients c{http, http, http, http};
    const OcrDocument doc = http->ocr("img");
    CHECK(doc.words.size() == 2);
    CHECK_THROWS_AS(http->ocr("other"), DocumentNotFound);
    const auto o = route(record("h", "north"), doc, c);
    CHECK(o.routing == RoutingCase::multiple);
    CHECK(o.annotation->answer_boxes.front() == BoxPx{10, 40, 50, 50});
    CHECK(http->ground(GroundRequest{"h", "img", "?", "x"}) == BoxPx{1, 2, 3, 4});

    srv.stop();
    worker.join();
    HttpClients dead("127.0.0.1", port, PromptTemplates::load(PINPOINT_PROMPT_DIR), 1.0);
    CHECK_THROWS_AS(dead.ocr("img"), ClientError);
}
