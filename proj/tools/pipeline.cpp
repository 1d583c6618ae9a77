// Command-line pipeline for entity-framing role classification: corpus
// statistics, instruction-dataset building, backend prediction, hard-voting
// ensembles, and exact-match evaluation.
//
// Exit codes: 0 success, 2 input/validation error, 3 backend connectivity,
// 4 partial prediction failure.

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "framing/framing.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitBackend = 3;
constexpr int kExitPartialFailure = 4;

struct GlobalOptions {
    std::optional<std::string> config_path;
    std::optional<std::string> lang;
    std::optional<std::string> taxonomy;
    std::optional<std::string> output_dir;
    bool lenient_offsets = false;
};

framing::PipelineConfig resolve_config(const GlobalOptions& opts) {
    framing::PipelineConfig config;
    if (opts.config_path) config = framing::load_pipeline_config(*opts.config_path);
    if (opts.lang) config.lang = *opts.lang;
    if (opts.taxonomy) config.taxonomy_path = *opts.taxonomy;
    if (opts.output_dir) config.output_dir = *opts.output_dir;
    if (opts.lenient_offsets) config.lenient_offsets = true;
    return config;
}

framing::RoleTaxonomy load_taxonomy_checked(const framing::PipelineConfig& config) {
    if (config.taxonomy_path.empty())
        throw framing::ValidationError("no taxonomy configured (set taxonomy= or pass --taxonomy)");
    return framing::load_taxonomy(config.taxonomy_path);
}

framing::DatasetSplit load_split(const framing::PipelineConfig& config,
                                 const framing::RoleTaxonomy& taxonomy, const std::string& name) {
    const auto& paths = config.split_paths(name);
    return framing::load_corpus(paths.articles_dir, paths.annotations, taxonomy, config.lang, name,
                                config.offset_policy());
}

std::string sanitize_for_filename(const std::string& s) {
    std::string out;
    for (char c : s)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_'
                          ? c
                          : '_');
    return out;
}

std::unique_ptr<framing::ModelBackend> make_backend(const framing::PipelineConfig& config,
                                                    const std::string& model_id) {
    if (config.backend_kind == "mock") {
        std::map<std::string, std::string> script;
        if (!config.mock_script.empty()) script = framing::read_mock_script(config.mock_script);
        return std::make_unique<framing::MockBackend>(model_id, std::move(script),
                                                      config.mock_default, config.max_input_chars);
    }
    if (config.endpoint.empty())
        throw framing::ValidationError("backend.endpoint must be set for the http backend");
    framing::HttpBackendConfig http;
    http.endpoint = config.endpoint;
    http.model = model_id;
    http.auth_token = config.auth_token();
    http.max_tokens = config.max_tokens;
    http.max_input_chars = config.max_input_chars;
    return std::make_unique<framing::HttpBackend>(std::move(http));
}

framing::EnsembleConfig resolve_ensemble_config(const framing::PipelineConfig& config,
                                                std::vector<std::string> discovered_members) {
    std::vector<std::string> members =
        config.ensemble_members.empty() ? std::move(discovered_members) : config.ensemble_members;
    return framing::make_ensemble_config(std::move(members), config.ensemble_threshold,
                                         config.ensemble_fallback, config.ensemble_mode);
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int run_stats(const framing::PipelineConfig& config) {
    const auto taxonomy = load_taxonomy_checked(config);
    std::vector<framing::DatasetSplit> splits;
    for (const std::string name : {"train", "dev", "test"})
        if (config.splits.count(name)) splits.push_back(load_split(config, taxonomy, name));
    if (splits.empty())
        throw framing::ValidationError("no splits configured (set train.annotations etc.)");

    const auto rows = framing::split_stats(splits);
    std::cout << "language\tsplit\tsamples\n";
    for (const auto& row : rows)
        std::cout << row.language << '\t' << row.split << '\t' << row.count << '\n';

    // Compact per-language train/dev/test summary.
    std::map<std::string, std::map<std::string, std::size_t>> by_lang;
    for (const auto& row : rows) by_lang[row.language][row.split] = row.count;
    for (const auto& [lang, counts] : by_lang) {
        auto get = [&](const char* name) {
            auto it = counts.find(name);
            return it == counts.end() ? std::size_t{0} : it->second;
        };
        std::cout << lang << "  " << get("train") << "/" << get("dev") << "/" << get("test")
                  << "\n";
    }

    for (const auto& split : splits) {
        std::cout << "\nlabel-count histogram (" << split.name << "):\nlabels\tsamples\n";
        for (const auto& [n_labels, count] : framing::label_count_histogram(split))
            std::cout << n_labels << '\t' << count << '\n';
    }
    return kExitOk;
}

int run_build_dataset(const framing::PipelineConfig& config, const std::string& split_name,
                      bool single_label, const std::string& out_override,
                      const std::vector<std::string>& manifest_models, int manifest_epochs) {
    const auto taxonomy = load_taxonomy_checked(config);
    framing::DatasetSplit split = load_split(config, taxonomy, split_name);
    if (single_label) split = framing::filter_single_label(split);

    const auto examples = framing::build_dataset(split, config.prompt_template, taxonomy);
    fs::path out = out_override.empty()
                       ? config.output_dir / ("dataset_" + sanitize_for_filename(config.lang) + "_" +
                                              split_name + (single_label ? "_single" : "") + ".jsonl")
                       : fs::path(out_override);
    framing::write_manifest(examples, out);
    std::cout << "wrote " << examples.size() << " examples to " << out.string() << "\n";

    for (const auto& model : manifest_models) {
        const auto scheme = framing::default_scheme(model, manifest_epochs);
        fs::path manifest = config.output_dir / ("train_" + sanitize_for_filename(model) + "_" +
                                                 std::to_string(scheme.epochs) + "ep.manifest");
        framing::emit_training_manifest(scheme, out, manifest);
        std::cout << "wrote training manifest " << manifest.string() << "\n";
    }
    return kExitOk;
}

int run_predict(const framing::PipelineConfig& config, const std::string& split_name,
                const std::string& model_override, const std::string& out_override,
                int parallelism_override) {
    const auto taxonomy = load_taxonomy_checked(config);
    const auto split = load_split(config, taxonomy, split_name);
    const std::string model_id = model_override.empty() ? config.model_id : model_override;
    auto backend = make_backend(config, model_id);

    framing::PredictOptions options;
    options.parallelism = parallelism_override > 0 ? parallelism_override : config.parallelism;
    auto outcome = framing::predict_split(*backend, split, config.prompt_template, options);
    framing::parse_records(outcome.records, taxonomy, config.parse_policy);

    fs::path out = out_override.empty()
                       ? config.output_dir / ("predictions_" + sanitize_for_filename(model_id) +
                                              "_" + split_name + ".tsv")
                       : fs::path(out_override);
    framing::write_predictions(outcome.records, out);
    std::cout << "wrote " << outcome.records.size() << " predictions to " << out.string() << "\n";
    if (outcome.n_failed > 0) {
        std::cerr << "error: " << outcome.n_failed << " of " << outcome.records.size()
                  << " generations failed (marked in output)\n";
        return kExitPartialFailure;
    }
    return kExitOk;
}

int run_vote(const framing::PipelineConfig& config, const std::vector<std::string>& files,
             const std::string& out_override, const std::string& trace_override) {
    std::vector<std::vector<framing::PredictionRecord>> per_member;
    std::vector<std::string> member_ids;
    for (const auto& file : files) {
        auto records = framing::read_predictions(file);
        if (records.empty())
            throw framing::ValidationError("prediction file has no records: " + file);
        const std::string id = records.front().model_id;
        for (const auto& r : records)
            if (r.model_id != id)
                throw framing::ValidationError(file + " mixes model ids (" + id + ", " +
                                               r.model_id + "); one member per file");
        member_ids.push_back(id);
        per_member.push_back(std::move(records));
    }

    auto ensemble = resolve_ensemble_config(config, member_ids);
    if (files.size() != ensemble.k())
        throw framing::ValidationError("ensemble is configured for " + std::to_string(ensemble.k()) +
                                       " members but " + std::to_string(files.size()) +
                                       " prediction files were given");
    if (!config.ensemble_members.empty()) {
        // Reorder the files into configured priority order.
        std::vector<std::vector<framing::PredictionRecord>> ordered;
        for (const auto& id : ensemble.member_ids) {
            auto it = std::find(member_ids.begin(), member_ids.end(), id);
            if (it == member_ids.end())
                throw framing::ValidationError("configured member '" + id +
                                               "' has no prediction file");
            ordered.push_back(std::move(per_member[static_cast<std::size_t>(
                std::distance(member_ids.begin(), it))]));
        }
        per_member = std::move(ordered);
    }

    auto result = framing::vote_split(per_member, ensemble);
    const fs::path out =
        out_override.empty() ? config.output_dir / "ensemble.tsv" : fs::path(out_override);
    const fs::path trace =
        trace_override.empty() ? config.output_dir / "ensemble_trace.tsv" : fs::path(trace_override);
    framing::write_predictions(result.records, out);
    framing::write_vote_trace(result.traces, trace);
    std::cout << "wrote " << result.records.size() << " ensemble predictions to " << out.string()
              << "\nwrote vote trace to " << trace.string() << "\n";
    return kExitOk;
}

int run_evaluate(const framing::PipelineConfig& config, const std::string& gold_path,
                 const std::vector<std::string>& pred_files, const std::string& split_name,
                 const std::string& out_override, const std::string& scores_out) {
    const auto taxonomy = load_taxonomy_checked(config);
    const auto gold = framing::read_annotation_labels(gold_path, taxonomy);

    std::map<std::string, framing::LabelSets> by_model;
    for (const auto& file : pred_files) {
        auto records = framing::read_predictions(file);
        framing::parse_records(records, taxonomy, config.parse_policy);
        for (const auto& r : records) {
            if (!r.parsed_roles)
                throw framing::ValidationError("unparsed record for sample " + r.sample_id + " in " +
                                               file);
            auto& sets = by_model[r.model_id];
            if (sets.count(r.sample_id))
                throw framing::ValidationError("duplicate prediction for sample " + r.sample_id +
                                               ", model " + r.model_id);
            sets[r.sample_id] = *r.parsed_roles;
        }
    }
    if (by_model.empty()) throw framing::ValidationError("no prediction records given");

    framing::EvaluationReport report;
    report.split = split_name;
    report.language = config.lang;
    report.n_samples = gold.fine.size();
    for (const auto& [model, sets] : by_model) {
        report.per_model[model] = framing::exact_match_ratio(sets, gold.fine);

        std::size_t main_matches = 0;
        for (const auto& [id, gold_set] : gold.fine) {
            const std::string gold_main = gold.main.count(id)
                                              ? gold.main.at(id)
                                              : framing::derive_main_role(gold_set, taxonomy);
            const auto& pred_set = sets.at(id);
            if (!pred_set.empty() &&
                framing::derive_main_role(pred_set, taxonomy) == gold_main)
                ++main_matches;
        }
        report.per_model_main_accuracy[model] =
            static_cast<double>(main_matches) / static_cast<double>(gold.fine.size());
    }
    report.exact_match_ratio = framing::rank_models(report.per_model).front().score;

    std::cout << framing::format_report_table(report);
    if (!out_override.empty()) {
        framing::write_file(out_override, framing::serialize_report_tsv(report));
        std::cout << "wrote report to " << out_override << "\n";
    }
    if (!scores_out.empty()) {
        std::string tsv;
        for (const auto& [model, score] : report.per_model)
            tsv += model + "\t" + framing::format_score(score) + "\n";
        framing::write_file(scores_out, tsv);
        std::cout << "wrote model scores to " << scores_out << "\n";
    }
    return kExitOk;
}

int run_score_delta(double baseline, double candidate) {
    const auto delta = framing::score_delta(baseline, candidate);
    std::cout << "baseline\t" << framing::format_score(delta.baseline) << "\n"
              << "candidate\t" << framing::format_score(delta.candidate) << "\n"
              << "absolute\t" << framing::format_score(delta.absolute) << "\n"
              << "absolute_pct\t" << framing::format_percent(delta.absolute) << "\n"
              << "relative_drop\t" << framing::format_percent(delta.relative_drop) << "\n";
    return kExitOk;
}

int run_merge_dev(const framing::PipelineConfig& config, const std::string& out_override) {
    const auto taxonomy = load_taxonomy_checked(config);
    const auto train = load_split(config, taxonomy, "train");
    const auto dev = load_split(config, taxonomy, "dev");
    const auto merged = framing::merge_splits(train, dev, "train");
    const fs::path out = out_override.empty() ? config.output_dir / "train_plus_dev.tsv"
                                              : fs::path(out_override);
    framing::write_annotations(merged, out);
    std::cout << "merged " << train.samples.size() << " train + " << dev.samples.size()
              << " dev samples into " << merged.samples.size() << " rows: " << out.string() << "\n";
    return kExitOk;
}

int run_select_top_k(const std::string& scores_path, std::size_t k) {
    const auto scores = framing::read_model_scores(scores_path);
    for (const auto& id : framing::select_top_k(scores, k)) std::cout << id << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entity-framing role classification pipeline"};
    app.require_subcommand(1);

    GlobalOptions global;
    std::string config_path, lang, taxonomy, output_dir;
    app.add_option("--config", config_path, "Pipeline config file (key = value format)");
    app.add_option("--lang", lang, "Language code (BG, EN, HI, PT, RU, ...)");
    app.add_option("--taxonomy", taxonomy, "Role taxonomy config file");
    app.add_option("--output-dir", output_dir, "Directory for generated files");
    app.add_flag("--lenient-offsets", global.lenient_offsets,
                 "Accept mention/slice whitespace mismatches with a warning");

    auto* stats = app.add_subcommand("stats", "Per-language split sizes and label-count histograms");

    auto* build = app.add_subcommand("build-dataset", "Render the instruction-tuning dataset");
    std::string build_split = "train", build_out;
    bool single_label = false;
    std::vector<std::string> manifest_models;
    int manifest_epochs = 10;
    build->add_option("--split", build_split, "Split to render (default train)");
    build->add_flag("--single-label", single_label, "Keep only samples with exactly one gold label");
    build->add_option("--out", build_out, "Output manifest path");
    build->add_option("--train-manifest", manifest_models,
                      "Also emit a training manifest for this model (repeatable)");
    build->add_option("--epochs", manifest_epochs, "Training scheme epochs, 10 or 20 (default 10)");

    auto* predict = app.add_subcommand("predict", "Generate predictions for a split");
    std::string predict_split_name = "dev", predict_model, predict_out, predict_mock_script;
    int predict_parallelism = 0;
    predict->add_option("--split", predict_split_name, "Split to predict (default dev)");
    predict->add_option("--model", predict_model, "Model id (default from config)");
    predict->add_option("--out", predict_out, "Output prediction TSV path");
    predict->add_option("--mock-script", predict_mock_script,
                        "Mock backend script TSV (overrides config)")
        ->check(CLI::ExistingFile);
    predict->add_option("--parallelism", predict_parallelism, "Concurrent requests")
        ->check(CLI::PositiveNumber);

    auto* vote = app.add_subcommand("vote", "Hard-vote member prediction files into a final set");
    std::vector<std::string> vote_files;
    std::string vote_out, vote_trace;
    vote->add_option("files", vote_files, "Prediction TSVs, one per member")
        ->required()
        ->check(CLI::ExistingFile);
    vote->add_option("--out", vote_out, "Output ensemble TSV path");
    vote->add_option("--trace", vote_trace, "Vote trace TSV path");

    auto* evaluate = app.add_subcommand("evaluate", "Exact-match-ratio report against gold labels");
    std::string eval_gold, eval_split = "dev", eval_out, eval_scores_out;
    std::vector<std::string> eval_preds;
    evaluate->add_option("--gold", eval_gold, "Gold annotation TSV")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("predictions", eval_preds, "Prediction TSVs")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--split", eval_split, "Split label for the report (default dev)");
    evaluate->add_option("--out", eval_out, "Write the report as TSV");
    evaluate->add_option("--scores-out", eval_scores_out,
                         "Write model_id<TAB>score TSV (select-top-k input)");

    auto* delta = app.add_subcommand("score-delta", "Absolute and relative score change");
    double delta_baseline = 0.0, delta_candidate = 0.0;
    delta->add_option("baseline", delta_baseline, "Baseline score")->required();
    delta->add_option("candidate", delta_candidate, "Candidate score")->required();

    auto* merge = app.add_subcommand("merge-dev", "Fold the dev split into the training annotations");
    std::string merge_out;
    merge->add_option("--out", merge_out, "Output annotation TSV path");

    auto* topk = app.add_subcommand("select-top-k", "Highest-scoring model ids from a scores TSV");
    std::string topk_scores;
    std::size_t topk_k = 3;
    topk->add_option("scores", topk_scores, "Scores TSV (model_id<TAB>score)")
        ->required()
        ->check(CLI::ExistingFile);
    topk->add_option("--k", topk_k, "How many models to keep (default 3)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    if (!config_path.empty()) global.config_path = config_path;
    if (!lang.empty()) global.lang = lang;
    if (!taxonomy.empty()) global.taxonomy = taxonomy;
    if (!output_dir.empty()) global.output_dir = output_dir;

    try {
        const auto config = resolve_config(global);
        if (stats->parsed()) return run_stats(config);
        if (build->parsed())
            return run_build_dataset(config, build_split, single_label, build_out, manifest_models,
                                     manifest_epochs);
        if (predict->parsed()) {
            auto predict_config = config;
            if (!predict_mock_script.empty()) predict_config.mock_script = predict_mock_script;
            return run_predict(predict_config, predict_split_name, predict_model, predict_out,
                               predict_parallelism);
        }
        if (vote->parsed()) return run_vote(config, vote_files, vote_out, vote_trace);
        if (evaluate->parsed())
            return run_evaluate(config, eval_gold, eval_preds, eval_split, eval_out,
                                eval_scores_out);
        if (delta->parsed()) return run_score_delta(delta_baseline, delta_candidate);
        if (merge->parsed()) return run_merge_dev(config, merge_out);
        if (topk->parsed()) return run_select_top_k(topk_scores, topk_k);
    } catch (const framing::BackendError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const framing::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
