// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>

#include "pinpoint/annotate.hpp"
#include "pinpoint/checkpoint.hpp"
#include "pinpoint/errors.hpp"
#include "pinpoint/flops.hpp"
#include "pinpoint/gradcheck.hpp"

#ifndef PINPOINT_PROMPT_DIR
#define PINPOINT_PROMPT_DIR "assets/prompts"
#endif

namespace pinpoint::cli {

namespace fs = std::filesystem;

RunConfig RunConfig::resolve(const KeyValueConfig& kv) {
    RunConfig rc;
    const std::vector<std::string> rest = rc.train.apply(kv);
    rc.synth.apply(kv);
    const std::set<std::string> synth_keys = [] {
        std::set<std::string> keys;
        const KeyValueConfig defaults = SynthConfig{}.to_key_values();
        for (const auto& [k, v] : defaults.values()) {
            keys.insert(k);
        }
        return keys;
    }();
    for (const auto& key : rest) {
        const std::string& value = kv.get(key);
        if (key == "coverage_mode") {
            rc.coverage = parse_coverage_mode(value);
        } else if (key == "region_accuracy_mode") {
            rc.region_mode = parse_region_accuracy_mode(value);
        } else if (key == "text_tokens") {
            rc.text_tokens = parse_size(key, value);
        } else if (key == "encoder.mixing") {
            rc.encoder_mixing = parse_double(key, value);
        } else if (key == "encoder.sharpness") {
            rc.encoder_sharpness = parse_double(key, value);
        } else if (synth_keys.count(key) == 0) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    // The synthetic task is laid out on the same windows the trainer slides.
    rc.synth.embed_dim = rc.train.embed_dim;
    rc.synth.window = rc.train.window_w;
    rc.synth.stride = rc.train.stride;
    rc.train.validate();
    rc.synth.validate();
    return rc;
}

KeyValueConfig RunConfig::to_key_values() const {
    KeyValueConfig kv = train.to_key_values();
    const KeyValueConfig synth_kv = synth.to_key_values();
    for (const auto& [k, v] : synth_kv.values()) {
        kv.set(k, v);
    }
    kv.set("coverage_mode", to_string(coverage));
    kv.set("region_accuracy_mode", region_mode == RegionAccuracyMode::center ? "center" : "iou");
    kv.set("text_tokens", std::to_string(text_tokens));
    kv.set("encoder.mixing", format_double(encoder_mixing));
    kv.set("encoder.sharpness", format_double(encoder_sharpness));
    return kv;
}

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "Key-value config file");
    cmd->add_option("--seed", opts.seed, "Seed (overrides the config)");
    cmd->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--override", opts.overrides, "key=value override, repeatable");
}

RunConfig resolve(const CommonOptions& opts, KeyValueConfig& resolved_kv) {
    KeyValueConfig kv;
    if (!opts.config_path.empty()) {
        if (!fs::exists(opts.config_path)) {
            throw ParseError("config file not found: " + opts.config_path);
        }
        kv = KeyValueConfig::load(opts.config_path);
    }
    for (const auto& o : opts.overrides) {
        kv.apply_override(o);
    }
    if (opts.seed) {
        kv.set("seed", std::to_string(*opts.seed));
    }
    RunConfig rc = RunConfig::resolve(kv);
    resolved_kv = rc.to_key_values();
    return rc;
}

fs::path prepare_out(const CommonOptions& opts, const std::string& command, const KeyValueConfig& kv,
                     std::ostream& out) {
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    out << "# pinpoint " << command << '\n';
    std::istringstream lines(kv.to_string());
    for (std::string line; std::getline(lines, line);) {
        out << "# " << line << '\n';
    }
    std::ofstream cfg(dir / "config.txt");
    cfg << "# pinpoint " << command << "\n" << kv.to_string();
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path);
    if (!os) {
        throw ParseError("cannot write " + path.string());
    }
    return os;
}

void require_file(const std::string& path, const char* what) {
    if (path.empty()) {
        throw ParseError(std::string("missing ") + what + " path");
    }
    if (!fs::exists(path)) {
        throw ParseError(std::string(what) + " not found: " + path);
    }
}

std::vector<SyntheticSample> load_samples(const std::string& path, const RunConfig& rc) {
    require_file(path, "data");
    std::ifstream is(path);
    std::vector<SyntheticSample> samples;
    std::string line;
    for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            samples.push_back(sample_from_json(nlohmann::json::parse(line), rc.synth));
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (samples.empty()) {
        throw ParseError(path + ": no samples");
    }
    return samples;
}

AlignmentModel load_model(const std::string& checkpoint, const RunConfig& rc) {
    if (checkpoint.empty()) {
        AlignmentModel m = AlignmentModel::init(rc.train.embed_dim, rc.train.num_queries, rc.train.seed);
        m.similarity = rc.train.similarity;
        return m;
    }
    require_file(checkpoint, "checkpoint");
    return AlignmentModel::from_checkpoint(load_checkpoint(checkpoint));
}

SelectionResult select_sample(const AlignmentModel& model, const SyntheticSample& s, const RunConfig& rc) {
    const auto wins = slide_windows(s.grid, rc.train.window_w, rc.train.window_h, rc.train.stride);
    const auto ranked = rank_regions(model, s.grid, wins, s.instruction);
    return adaptive_select(ranked, wins, s.grid.extent().area(), rc.train.ratio, s.grid.px_per_token, rc.coverage);
}

int cmd_train(const CommonOptions& opts, const std::string& data, std::ostream& out) {
    KeyValueConfig kv;
    const RunConfig rc = resolve(opts, kv);
    const auto samples = load_samples(data, rc);
    const fs::path dir = prepare_out(opts, "train", kv, out);
    const auto examples = to_training_examples(samples);
    const TrainResult result = train(examples, rc.train);
    save_checkpoint(dir / "checkpoint.json", result.model.to_checkpoint());
    auto csv = open_out(dir / "loss.csv");
    write_loss_csv(csv, result.history);
    out << "steps " << result.history.size();
    if (!result.history.empty()) {
        out << " final_loss " << format_double(result.history.back().total);
    }
    out << '\n';
    return kExitOk;
}

int cmd_select(const CommonOptions& opts, const std::string& data, const std::string& checkpoint,
               std::ostream& out) {
    KeyValueConfig kv;
    const RunConfig rc = resolve(opts, kv);
    const auto samples = load_samples(data, rc);
    const AlignmentModel model = load_model(checkpoint, rc);
    const fs::path dir = prepare_out(opts, "select", kv, out);
    auto os = open_out(dir / "selections.jsonl");
    for (const auto& s : samples) {
        os << selection_to_json(select_sample(model, s, rc)).dump() << '\n';
    }
    out << "selections " << samples.size() << '\n';
    return kExitOk;
}

int cmd_eval(const CommonOptions& opts, const std::string& data, const std::string& checkpoint,
             std::ostream& out) {
    KeyValueConfig kv;
    const RunConfig rc = resolve(opts, kv);
    const auto samples = load_samples(data, rc);
    const AlignmentModel model = load_model(checkpoint, rc);
    const ToyEncoder encoder(rc.train.embed_dim, rc.train.seed, rc.encoder_mixing, rc.encoder_sharpness);
    const fs::path dir = prepare_out(opts, "eval", kv, out);

    std::vector<SelectionResult> selections;
    std::vector<GtAnnotation> gts;
    std::vector<std::string> predictions;
    std::vector<std::vector<std::string>> golds;
    double coverage = 0.0;
    for (const auto& s : samples) {
        SelectionResult sel = select_sample(model, s, rc);
        const RefinementTrial t = refinement_trial(s, rc.synth, encoder, sel.hull, rc.train.refine_budget);
        coverage += sel.coverage;
        predictions.push_back(t.refined_answer);
        golds.push_back({s.answer});
        gts.push_back(s.gt);
        selections.push_back(std::move(sel));
    }
    EvalReport report;
    report.n_samples = samples.size();
    report.anls = anls(predictions, golds);
    report.region_accuracy = region_accuracy(selections, gts, rc.region_mode);
    report.mean_coverage = coverage / static_cast<double>(samples.size());
    auto js = open_out(dir / "eval.json");
    js << eval_report_to_json(report).dump(2) << '\n';
    auto csv = open_out(dir / "eval.csv");
    write_eval_csv(csv, report);
    out << eval_summary_line(report) << '\n';
    return kExitOk;
}

int cmd_bench_flops(const CommonOptions& opts, std::ostream& out) {
    KeyValueConfig kv;
    const RunConfig rc = resolve(opts, kv);
    const fs::path dir = prepare_out(opts, "bench-flops", kv, out);
    const std::size_t g = rc.synth.grid_size;
    const std::size_t tokens = g * g;
    const auto wins = slide_windows(g, g, rc.train.window_w, rc.train.window_h, rc.train.stride);
    const AlignmentShape shape{wins.size(), rc.train.window_w * rc.train.window_h, rc.text_tokens,
                               rc.train.num_queries, rc.train.embed_dim};
    const std::size_t refined = refined_token_estimate(tokens, rc.train.ratio, rc.train.refine_budget);
    const FlopsComparison cmp = compare_flops(tokens, refined, rc.text_tokens, shape);
    auto js = open_out(dir / "flops.json");
    js << flops_comparison_to_json(cmp).dump(2) << '\n';
    auto csv = open_out(dir / "flops.csv");
    write_flops_csv(csv, cmp);
    char buf[200];
    std::snprintf(buf, sizeof(buf), "vanilla %.4g TFLOPs | pinpoint %.4g TFLOPs | ratio %.4f | module share %.4f",
                  cmp.vanilla.tflops(), cmp.pinpoint.tflops(), cmp.ratio, cmp.module_share);
    out << buf << '\n';
    return kExitOk;
}

int cmd_synth_gen(const CommonOptions& opts, std::size_t n, std::ostream& out) {
    KeyValueConfig kv;
    const RunConfig rc = resolve(opts, kv);
    const fs::path dir = prepare_out(opts, "synth-gen", kv, out);
    const auto samples = gen_synthetic(n, rc.synth, rc.train.seed);
    auto os = open_out(dir / "samples.jsonl");
    for (const auto& s : samples) {
        os << sample_to_json(s).dump() << '\n';
    }
    out << "samples " << samples.size() << '\n';
    return kExitOk;
}

template <typename T>
std::vector<T> load_jsonl_as(const std::string& path, const char* what, T (*parse)(const nlohmann::json&)) {
    require_file(path, what);
    std::ifstream is(path);
    std::vector<T> out;
    std::string line;
    for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(parse(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

struct AnnotateOptions {
    std::string records;
    std::string docs;
    std::string mock;
    std::string service;
    std::string prompts = PINPOINT_PROMPT_DIR;
    std::string variant = "plain";
    std::size_t parallelism = 1;
};

int cmd_annotate(const CommonOptions& opts, const AnnotateOptions& a, std::ostream& out) {
    KeyValueConfig kv;
    resolve(opts, kv);
    kv.set("annotate.variant", a.variant);
    kv.set("annotate.parallelism", std::to_string(a.parallelism));
    const PipelineVariant variant = parse_pipeline_variant(a.variant);
    const auto records = load_jsonl_as<QaRecord>(a.records, "records", &qa_from_json);

    ServiceClients clients;
    if (!a.service.empty()) {
        const auto colon = a.service.rfind(':');
        if (colon == std::string::npos) {
            throw ConfigError("--service expects host:port");
        }
        auto http = std::make_shared<HttpClients>(a.service.substr(0, colon),
                                                  static_cast<int>(parse_size("--service", a.service.substr(colon + 1))),
                                                  PromptTemplates::load(a.prompts));
        clients = ServiceClients{http, http, http, http};
        if (!a.docs.empty()) {
            clients.ocr = std::make_shared<TableOcrClient>(load_jsonl_as<OcrDocument>(a.docs, "docs", &ocr_from_json));
        }
    } else {
        require_file(a.mock, "mock script");
        std::ifstream is(a.mock);
        nlohmann::json script;
        try {
            script = nlohmann::json::parse(is);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(a.mock + ": " + e.what());
        }
        auto mock = std::make_shared<MockClients>(std::move(script));
        clients.select = mock;
        clients.rationale = mock;
        clients.ground = mock;
        clients.ocr = std::make_shared<TableOcrClient>(load_jsonl_as<OcrDocument>(a.docs, "docs", &ocr_from_json));
    }

    const fs::path dir = prepare_out(opts, "annotate", kv, out);
    const PipelineResult result = run_pipeline(records, clients, variant, a.parallelism);
    auto os = open_out(dir / "annotations.jsonl");
    write_outcomes_jsonl(os, result.outcomes);
    auto es = open_out(dir / "errors.jsonl");
    for (const auto& e : result.errors) {
        es << nlohmann::json{{"record_index", e.record_index}, {"question_id", e.question_id}, {"message", e.message}}
                  .dump()
           << '\n';
    }
    out << "records " << records.size() << " errors " << result.errors.size() << '\n';
    return kExitOk;
}

int cmd_stats(const CommonOptions& opts, const std::string& outcomes_path, std::ostream& out) {
    KeyValueConfig kv;
    resolve(opts, kv);
    const auto outcomes = load_jsonl_as<RoutingOutcome>(outcomes_path, "outcomes", &outcome_from_json);
    const fs::path dir = prepare_out(opts, "stats", kv, out);
    const auto stats = pipeline_stats(outcomes);
    auto os = open_out(dir / "stats.csv");
    write_stats_csv(os, stats);
    write_stats_csv(out, stats);
    return kExitOk;
}

int cmd_gradcheck(const CommonOptions& opts, std::size_t coords, std::ostream& out) {
    KeyValueConfig kv;
    RunConfig rc = resolve(opts, kv);
    const fs::path dir = prepare_out(opts, "gradcheck", kv, out);

    // A small world keeps the finite differences quick; the loss is the full training objective.
    SynthConfig small = rc.synth;
    small.grid_size = 12;
    small.window = 6;
    small.stride = 4;
    small.planted_min = 4;
    small.planted_max = 6;
    small.distractors = 2;
    small.distractor_min = 2;
    small.distractor_max = 3;
    TrainConfig tc = rc.train;
    tc.window_w = tc.window_h = small.window;
    tc.stride = small.stride;
    const auto samples = gen_synthetic(3, small, rc.train.seed);
    const auto examples = to_training_examples(samples);
    std::vector<BatchSample> batch;
    for (const auto& ex : examples) {
        batch.push_back(make_batch_sample(ex, tc));
    }
    AlignmentModel model = AlignmentModel::init(tc.embed_dim, tc.num_queries, tc.seed);
    model.similarity = tc.similarity;

    ad::Tape tape;
    const AlignmentVars vars = bind_alignment(tape, model, true);
    const BatchLoss loss = batch_loss(tape, vars, batch, tc);
    tape.backward(loss.total);
    const auto var_params = vars.parameters();
    const auto names = model.parameter_names();
    const auto params = model.parameters();

    std::mt19937_64 rng(tc.seed);
    double worst = 0.0;
    nlohmann::json per_param = nlohmann::json::object();
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& param = *params[p];
        const Tensor analytic = var_params[p].grad();
        std::vector<std::size_t> idx(param.numel());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(std::min(coords, idx.size()));
        Tensor a({idx.size()}), n({idx.size()});
        for (std::size_t i = 0; i < idx.size(); ++i) {
            double& x = param[idx[i]];
            const double saved = x;
            const auto eval = [&](double v) {
                x = v;
                return evaluate_batch(model, batch, tc).total;
            };
            const double h = 1e-5;
            n[i] = (eval(saved + h) - eval(saved - h)) / (2.0 * h);
            x = saved;
            a[i] = analytic[idx[i]];
        }
        const double err = relative_error(a, n);
        per_param[names[p]] = err;
        worst = std::max(worst, err);
    }
    auto os = open_out(dir / "gradcheck.json");
    os << nlohmann::json{{"max_rel_err", worst}, {"per_param", per_param}, {"coords_per_param", coords}}.dump(2)
       << '\n';
    char buf[64];
    std::snprintf(buf, sizeof(buf), "max rel err %.3e", worst);
    out << buf << '\n';
    return worst < 1e-5 ? kExitOk : kExitNumerical;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"PinPoint: instruction-guided region selection and refinement"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string data, checkpoint, outcomes;
    std::size_t n = 100;
    std::size_t coords = 16;
    AnnotateOptions annotate;

    auto* train = app.add_subcommand("train", "Train the alignment module on synthetic samples");
    add_common(train, common);
    train->add_option("--data", data, "Samples JSONL from synth-gen")->required();

    auto* select = app.add_subcommand("select", "Rank and adaptively select regions");
    add_common(select, common);
    select->add_option("--data", data, "Samples JSONL")->required();
    select->add_option("--checkpoint", checkpoint, "Trained checkpoint (fresh init when omitted)");

    auto* eval = app.add_subcommand("eval", "ANLS, region accuracy and coverage on synthetic samples");
    add_common(eval, common);
    eval->add_option("--data", data, "Samples JSONL")->required();
    eval->add_option("--checkpoint", checkpoint, "Trained checkpoint (fresh init when omitted)");

    auto* flops = app.add_subcommand("bench-flops", "Cost-model FLOPs of a vanilla and a region-selected run");
    add_common(flops, common);

    auto* synth = app.add_subcommand("synth-gen", "Generate planted-region samples");
    add_common(synth, common);
    synth->add_option("--n", n, "Number of samples")->capture_default_str();

    auto* ann = app.add_subcommand("annotate", "Route QA records to grounding annotations");
    add_common(ann, common);
    ann->add_option("--records", annotate.records, "QA records JSONL")->required();
    ann->add_option("--docs", annotate.docs, "OCR documents JSONL");
    ann->add_option("--mock", annotate.mock, "Mock client script (JSON)");
    ann->add_option("--service", annotate.service, "host:port of the JSON-over-HTTP services");
    ann->add_option("--prompts", annotate.prompts, "Prompt template directory")->capture_default_str();
    ann->add_option("--variant", annotate.variant, "plain or rationale")->capture_default_str();
    ann->add_option("--parallelism", annotate.parallelism, "Worker count")->capture_default_str();

    auto* stats = app.add_subcommand("stats", "Routing statistics of annotation outcomes");
    add_common(stats, common);
    stats->add_option("--outcomes", outcomes, "Annotations JSONL from annotate")->required();

    auto* grad = app.add_subcommand("gradcheck", "Autodiff vs central differences on the training loss");
    add_common(grad, common);
    grad->add_option("--coords", coords, "Sampled entries per parameter tensor")->capture_default_str();

    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInput;
    }

    try {
        if (*train) {
            return cmd_train(common, data, out);
        }
        if (*select) {
            return cmd_select(common, data, checkpoint, out);
        }
        if (*eval) {
            return cmd_eval(common, data, checkpoint, out);
        }
        if (*flops) {
            return cmd_bench_flops(common, out);
        }
        if (*synth) {
            return cmd_synth_gen(common, n, out);
        }
        if (*ann) {
            return cmd_annotate(common, annotate, out);
        }
        if (*stats) {
            return cmd_stats(common, outcomes, out);
        }
        if (*grad) {
            return cmd_gradcheck(common, coords, out);
        }
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}

}  // namespace pinpoint::cli
