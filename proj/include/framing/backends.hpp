#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "framing/corpus.hpp"
#include "framing/errors.hpp"
#include "framing/instructions.hpp"
#include "framing/records.hpp"
#include "framing/text.hpp"

namespace framing {

// ---------------------------------------------------------------------------
// Training schemes and checkpoint selection
// ---------------------------------------------------------------------------

struct TrainingScheme {
    std::string model_name;
    int epochs = 10;             // 10 or 20
    double learning_rate = 1e-4;

    friend bool operator==(const TrainingScheme&, const TrainingScheme&) = default;
};

inline constexpr std::array<std::string_view, 7> kKnownModels = {
    "DeBERTa-v3-small",          "GLM4-9B-chat",
    "Qwen2-7B-instruct",         "Qwen2.5-14B-instruct",
    "Phi-3-small-128k-instruct", "Phi-3-medium-128k-instruct",
    "Phi-4"};

inline void validate_scheme(const TrainingScheme& scheme) {
    if (scheme.epochs != 10 && scheme.epochs != 20)
        throw ValidationError("epochs must be 10 or 20, got " + std::to_string(scheme.epochs));
    if (!(scheme.learning_rate > 0))
        throw ValidationError("learning_rate must be positive");
    if (scheme.model_name.empty()) throw ValidationError("empty model name");
}

/// Qwen2-7B-instruct trains at 1e-5; every other model at 1e-4. Unknown
/// model names take the default branch with a warning.
inline TrainingScheme default_scheme(const std::string& model_name, int epochs = 10) {
    const bool known = std::find(kKnownModels.begin(), kKnownModels.end(), model_name) !=
                       kKnownModels.end();
    if (!known)
        std::cerr << "warning: unknown model '" << model_name
                  << "', using the default learning rate\n";
    TrainingScheme scheme{model_name, epochs,
                          model_name == "Qwen2-7B-instruct" ? 1e-5 : 1e-4};
    validate_scheme(scheme);
    return scheme;
}

struct EpochScore {
    int epoch = 0;       // positive
    double score = 0.0;  // dev exact match ratio, in [0,1]

    friend bool operator==(const EpochScore&, const EpochScore&) = default;
};

/// Epoch whose checkpoint scored best on dev; ties go to the earliest epoch.
inline int select_best_checkpoint(const std::vector<EpochScore>& series) {
    if (series.empty()) throw ValidationError("empty epoch score series");
    std::map<int, double> by_epoch;
    for (const auto& e : series) {
        if (e.epoch <= 0) throw ValidationError("epoch numbers must be positive");
        if (!by_epoch.emplace(e.epoch, e.score).second)
            throw ValidationError("duplicate epoch in series: " + std::to_string(e.epoch));
    }
    int best_epoch = by_epoch.begin()->first;
    double best_score = by_epoch.begin()->second;
    for (const auto& [epoch, score] : by_epoch) {
        if (score > best_score) {
            best_epoch = epoch;
            best_score = score;
        }
    }
    return best_epoch;
}

/// TSV `epoch<TAB>score`, as written back by the external trainer.
inline std::vector<EpochScore> read_epoch_scores(const std::filesystem::path& path) {
    std::vector<EpochScore> out;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto cols = split(lines[i], '\t');
        auto fail = [&](const std::string& msg) {
            throw ValidationError(path.string() + ": row " + std::to_string(i + 1) + ": " + msg);
        };
        if (cols.size() != 2) fail("expected epoch<TAB>score");
        try {
            EpochScore e{std::stoi(cols[0]), std::stod(cols[1])};
            if (e.score < 0.0 || e.score > 1.0) fail("score must be in [0,1]");
            out.push_back(e);
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception&) {
            fail("malformed row");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Training manifest for the external fine-tuner
// ---------------------------------------------------------------------------

/// Key/value manifest consumed by the external trainer. It names the model,
/// scheme, and dataset, and instructs the trainer to evaluate every epoch on
/// dev and write the scores back as an epoch<TAB>score TSV.
inline std::string serialize_training_manifest(const TrainingScheme& scheme,
                                               const std::filesystem::path& dataset_path) {
    validate_scheme(scheme);
    std::ostringstream out;
    out << "model = " << scheme.model_name << "\n"
        << "epochs = " << scheme.epochs << "\n"
        << "learning_rate = " << scheme.learning_rate << "\n"
        << "dataset = " << dataset_path.string() << "\n"
        << "eval_every_epoch = true\n"
        << "eval_split = dev\n"
        << "eval_metric = exact_match_ratio\n"
        << "scores_out = epoch_scores.tsv\n";
    return out.str();
}

inline void emit_training_manifest(const TrainingScheme& scheme,
                                   const std::filesystem::path& dataset_path,
                                   const std::filesystem::path& output_path) {
    if (!std::filesystem::exists(dataset_path))
        throw ValidationError("dataset file not found: " + dataset_path.string());
    write_file(output_path, serialize_training_manifest(scheme, dataset_path));
}

/// Reads a manifest back into an equal TrainingScheme.
inline TrainingScheme read_training_manifest(const std::filesystem::path& path) {
    TrainingScheme scheme;
    bool has_model = false, has_epochs = false, has_lr = false;
    for (const auto& raw : read_lines(path)) {
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) continue;
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key == "model") {
            scheme.model_name = value;
            has_model = true;
        } else if (key == "epochs") {
            scheme.epochs = std::stoi(value);
            has_epochs = true;
        } else if (key == "learning_rate") {
            scheme.learning_rate = std::stod(value);
            has_lr = true;
        }
    }
    if (!has_model || !has_epochs || !has_lr)
        throw ValidationError(path.string() + ": manifest is missing model, epochs, or learning_rate");
    validate_scheme(scheme);
    return scheme;
}

// ---------------------------------------------------------------------------
// Model backends
// ---------------------------------------------------------------------------

/// Deterministic text generation behind a fixed configuration: decoding is
/// pinned to temperature 0, so generate() is a pure function of the prompt.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual const std::string& model_id() const = 0;
    virtual std::size_t max_input_chars() const = 0;
    virtual std::string generate(const std::string& prompt) = 0;
};

/// Scripted backend for tests and dry runs. Script keys are matched first by
/// exact prompt, then as substrings of the prompt (longest key first, then
/// lexicographic), so scripts can key on an embedded sample marker such as
/// the mention string. A scripted value starting with "!ERROR" simulates a
/// generation failure.
class MockBackend : public ModelBackend {
public:
    MockBackend(std::string model_id, std::map<std::string, std::string> script,
                std::optional<std::string> default_text = std::nullopt,
                std::size_t max_input_chars = 1'000'000)
        : model_id_(std::move(model_id)),
          script_(std::move(script)),
          default_text_(std::move(default_text)),
          max_input_chars_(max_input_chars) {
        for (const auto& [key, value] : script_) ordered_keys_.push_back(key);
        std::sort(ordered_keys_.begin(), ordered_keys_.end(),
                  [](const std::string& a, const std::string& b) {
                      if (a.size() != b.size()) return a.size() > b.size();
                      return a < b;
                  });
    }

    const std::string& model_id() const override { return model_id_; }
    std::size_t max_input_chars() const override { return max_input_chars_; }

    std::string generate(const std::string& prompt) override {
        auto exact = script_.find(prompt);
        if (exact != script_.end()) return resolve(exact->second);
        for (const auto& key : ordered_keys_)
            if (prompt.find(key) != std::string::npos) return resolve(script_.at(key));
        if (default_text_) return *default_text_;
        throw BackendError("mock backend '" + model_id_ + "': unscripted prompt");
    }

private:
    std::string resolve(const std::string& value) const {
        if (value.rfind("!ERROR", 0) == 0)
            throw BackendError("mock backend '" + model_id_ + "': scripted failure" +
                               (value.size() > 6 ? ":" + value.substr(6) : ""));
        return value;
    }

    std::string model_id_;
    std::map<std::string, std::string> script_;
    std::vector<std::string> ordered_keys_;
    std::optional<std::string> default_text_;
    std::size_t max_input_chars_;
};

inline std::unique_ptr<ModelBackend> make_mock_backend(
    std::string model_id, std::map<std::string, std::string> script,
    std::optional<std::string> default_text = std::nullopt) {
    return std::make_unique<MockBackend>(std::move(model_id), std::move(script),
                                         std::move(default_text));
}

/// Mock script TSV: key<TAB>generated text (escaped like prediction TSVs).
inline std::map<std::string, std::string> read_mock_script(const std::filesystem::path& path) {
    std::map<std::string, std::string> script;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto cols = split(lines[i], '\t');
        if (cols.size() != 2)
            throw ValidationError(path.string() + ": row " + std::to_string(i + 1) +
                                  ": expected key<TAB>text");
        if (!script.emplace(cols[0], unescape_tsv_field(cols[1])).second)
            throw ValidationError(path.string() + ": row " + std::to_string(i + 1) +
                                  ": duplicate key: " + cols[0]);
    }
    return script;
}

struct HttpBackendConfig {
    std::string endpoint;        // e.g. http://localhost:8080/v1/generate
    std::string model;           // model identifier sent in the request body
    std::string auth_token;      // optional bearer token
    int max_tokens = 64;
    double temperature = 0.0;    // greedy decoding for reproducible voting
    std::size_t max_input_chars = 1'000'000;
    int timeout_seconds = 120;
};

/// Remote inference client. Request: POST JSON {model, prompt, max_tokens,
/// temperature}. Response: JSON object with a "text" field, or a raw text
/// body.
class HttpBackend : public ModelBackend {
public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
        const auto scheme_end = config_.endpoint.find("://");
        if (scheme_end == std::string::npos)
            throw ValidationError("endpoint must look like http://host:port/path, got: " +
                                  config_.endpoint);
        const auto host_start = scheme_end + 3;
        const auto path_start = config_.endpoint.find('/', host_start);
        host_ = config_.endpoint.substr(0, path_start);
        path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
    }

    const std::string& model_id() const override { return config_.model; }
    std::size_t max_input_chars() const override { return config_.max_input_chars; }

    std::string generate(const std::string& prompt) override {
        httplib::Client client(host_);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!config_.auth_token.empty())
            headers.emplace("Authorization", "Bearer " + config_.auth_token);
        const nlohmann::json body{{"model", config_.model},
                                  {"prompt", prompt},
                                  {"max_tokens", config_.max_tokens},
                                  {"temperature", config_.temperature}};
        auto res = client.Post(path_, headers, body.dump(), "application/json");
        if (!res)
            throw BackendUnreachable("backend unreachable: " + config_.endpoint + " (" +
                                     httplib::to_string(res.error()) + ")");
        if (res->status < 200 || res->status >= 300)
            throw BackendError("backend returned HTTP " + std::to_string(res->status) + ": " +
                               res->body.substr(0, 200));
        if (auto parsed = nlohmann::json::parse(res->body, nullptr, false);
            parsed.is_object() && parsed.contains("text") && parsed["text"].is_string())
            return parsed["text"].get<std::string>();
        return res->body;
    }

private:
    HttpBackendConfig config_;
    std::string host_;  // scheme://host:port
    std::string path_;
};

// ---------------------------------------------------------------------------
// Split prediction
// ---------------------------------------------------------------------------

struct PredictOptions {
    int parallelism = 4;
    int max_attempts = 3;        // per request
    int backoff_ms = 250;        // doubles after each failed attempt
    bool truncate_long_prompts = false;
};

struct PredictOutcome {
    std::vector<PredictionRecord> records;  // one per sample, split order
    std::size_t n_failed = 0;
};

/// Generates one record per sample. Up to `parallelism` requests run
/// concurrently; records land at their sample's split index, so the output
/// never depends on completion order. A sample that fails all attempts is
/// recorded with a failure marker, never dropped. If the very first request
/// cannot reach the backend at all, the whole run aborts with BackendError.
inline PredictOutcome predict_split(ModelBackend& backend, const DatasetSplit& split,
                                    const PromptTemplate& tmpl,
                                    const PredictOptions& options = {}) {
    if (options.parallelism < 1) throw ValidationError("parallelism must be >= 1");
    validate_template(tmpl);

    std::vector<std::string> prompts;
    prompts.reserve(split.samples.size());
    for (const auto& s : split.samples) {
        std::string prompt = render_inference_prompt(s, split.article_of(s), tmpl);
        if (utf8_length(prompt) > backend.max_input_chars()) {
            if (!options.truncate_long_prompts)
                throw ValidationError("prompt for sample " + s.sample_id + " exceeds backend capability (" +
                                      std::to_string(backend.max_input_chars()) + " chars)");
            prompt = utf8_truncate(prompt, backend.max_input_chars());
            std::cerr << "warning: prompt for sample " << s.sample_id << " truncated\n";
        }
        prompts.push_back(std::move(prompt));
    }

    PredictOutcome outcome;
    outcome.records.resize(split.samples.size());

    auto run_one = [&](std::size_t index, bool* unreachable = nullptr) {
        PredictionRecord rec;
        rec.sample_id = split.samples[index].sample_id;
        rec.model_id = backend.model_id();
        int backoff = options.backoff_ms;
        for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
            try {
                rec.raw_text = backend.generate(prompts[index]);
                rec.failed = false;
                rec.error.clear();
                break;
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.error = e.what();
                if (unreachable)
                    *unreachable = dynamic_cast<const BackendUnreachable*>(&e) != nullptr;
                if (attempt < options.max_attempts && backoff > 0) {
                    std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                    backoff *= 2;
                }
            }
        }
        outcome.records[index] = std::move(rec);
    };

    if (!split.samples.empty()) {
        // Preflight on the first sample: an unreachable backend should fail
        // the run, not mark every sample failed.
        bool unreachable = false;
        run_one(0, &unreachable);
        if (outcome.records[0].failed && unreachable)
            throw BackendUnreachable(outcome.records[0].error);

        std::atomic<std::size_t> next{1};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < split.samples.size();
                 i = next.fetch_add(1))
                run_one(i);
        };
        const int n_threads = std::min<int>(options.parallelism,
                                            static_cast<int>(split.samples.size()));
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (const auto& r : outcome.records)
        if (r.failed) ++outcome.n_failed;
    return outcome;
}

}  // namespace framing
