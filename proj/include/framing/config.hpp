#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "framing/corpus.hpp"
#include "framing/ensemble.hpp"
#include "framing/errors.hpp"
#include "framing/instructions.hpp"
#include "framing/parsing.hpp"
#include "framing/text.hpp"

namespace framing {

struct SplitPaths {
    std::filesystem::path articles_dir;
    std::filesystem::path annotations;
};

/// Everything one language track needs: data paths, template settings,
/// backend endpoint, voting setup, parse policy. Loaded from a flat
/// `key = value` file; command-line flags override file values, which
/// override the built-in defaults.
struct PipelineConfig {
    std::string lang = "EN";
    std::filesystem::path taxonomy_path;
    std::filesystem::path output_dir = "out";
    std::map<std::string, SplitPaths> splits;  // keyed train/dev/test
    bool lenient_offsets = false;

    PromptTemplate prompt_template = default_template();

    std::string backend_kind = "mock";  // mock | http
    std::string model_id = "mock-model";
    std::string endpoint;
    std::string auth_env = "PIPELINE_AUTH_TOKEN";
    std::filesystem::path mock_script;
    std::optional<std::string> mock_default;
    std::size_t max_input_chars = 1'000'000;
    int max_tokens = 64;
    int parallelism = 4;

    ParsePolicy parse_policy = ParsePolicy::lenient_default();

    std::vector<std::string> ensemble_members;  // priority order
    int ensemble_threshold = 0;                 // 0 = default for k
    VoteFallback ensemble_fallback = VoteFallback::best_member;
    VoteMode ensemble_mode = VoteMode::per_label;

    OffsetPolicy offset_policy() const {
        return lenient_offsets ? OffsetPolicy::lenient : OffsetPolicy::strict;
    }

    const SplitPaths& split_paths(const std::string& name) const {
        auto it = splits.find(name);
        if (it == splits.end())
            throw ValidationError("no paths configured for split '" + name +
                                  "' (set " + name + ".articles_dir and " + name + ".annotations)");
        return it->second;
    }

    std::string auth_token() const {
        const char* value = std::getenv(auth_env.c_str());
        return value ? value : "";
    }
};

namespace detail {

inline bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ValidationError("expected a boolean for " + key + ", got '" + value + "'");
}

inline VoteFallback parse_fallback(const std::string& value) {
    if (value == "best_member") return VoteFallback::best_member;
    if (value == "union_max_count") return VoteFallback::union_max_count;
    if (value == "empty") return VoteFallback::empty;
    throw ValidationError("unknown fallback '" + value +
                          "' (expected best_member, union_max_count, or empty)");
}

inline VoteMode parse_vote_mode(const std::string& value) {
    if (value == "per_label") return VoteMode::per_label;
    if (value == "exact_set") return VoteMode::exact_set;
    throw ValidationError("unknown vote mode '" + value + "' (expected per_label or exact_set)");
}

// \n and \t escapes let single-line config values carry the multi-line
// input format.
inline std::string decode_escapes(const std::string& s) {
    return unescape_tsv_field(s);
}

}  // namespace detail

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    PipelineConfig config;
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    auto resolve = [&](const std::string& value) {
        std::filesystem::path p(value);
        return p.is_absolute() ? p : base / p;
    };

    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t row = i + 1;
        auto fail = [&](const std::string& msg) {
            throw ValidationError(path.string() + ":" + std::to_string(row) + ": " + msg);
        };
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail("expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) fail("empty key");

        try {
            if (key == "lang") {
                config.lang = value;
            } else if (key == "taxonomy") {
                config.taxonomy_path = resolve(value);
            } else if (key == "output_dir") {
                config.output_dir = resolve(value);
            } else if (key == "lenient_offsets") {
                config.lenient_offsets = detail::parse_bool(value, key);
            } else if (key.size() > 13 && key.substr(key.size() - 13) == ".articles_dir") {
                config.splits[key.substr(0, key.size() - 13)].articles_dir = resolve(value);
            } else if (key.size() > 12 && key.substr(key.size() - 12) == ".annotations") {
                config.splits[key.substr(0, key.size() - 12)].annotations = resolve(value);
            } else if (key == "template.instruction") {
                config.prompt_template.instruction_text = detail::decode_escapes(value);
            } else if (key == "template.input_format") {
                config.prompt_template.input_format = detail::decode_escapes(value);
            } else if (key == "template.label_separator") {
                config.prompt_template.label_separator = detail::decode_escapes(value);
            } else if (key == "template.max_article_chars") {
                config.prompt_template.max_article_chars = std::stoull(value);
            } else if (key == "backend") {
                if (value != "mock" && value != "http")
                    fail("backend must be mock or http, got '" + value + "'");
                config.backend_kind = value;
            } else if (key == "backend.model_id") {
                config.model_id = value;
            } else if (key == "backend.endpoint") {
                config.endpoint = value;
            } else if (key == "backend.auth_env") {
                config.auth_env = value;
            } else if (key == "backend.mock_script") {
                config.mock_script = resolve(value);
            } else if (key == "backend.mock_default") {
                config.mock_default = detail::decode_escapes(value);
            } else if (key == "backend.max_input_chars") {
                config.max_input_chars = std::stoull(value);
            } else if (key == "backend.max_tokens") {
                config.max_tokens = std::stoi(value);
            } else if (key == "parallelism") {
                config.parallelism = std::stoi(value);
                if (config.parallelism < 1) fail("parallelism must be >= 1");
            } else if (key == "parse.mode") {
                if (value == "strict")
                    config.parse_policy.mode = ParseMode::strict;
                else if (value == "lenient")
                    config.parse_policy.mode = ParseMode::lenient;
                else
                    fail("parse.mode must be strict or lenient");
            } else if (key == "parse.case_fold") {
                config.parse_policy.case_fold = detail::parse_bool(value, key);
            } else if (key == "parse.strip_punctuation") {
                config.parse_policy.strip_punctuation = detail::parse_bool(value, key);
            } else if (key == "parse.empty_result") {
                if (value == "error")
                    config.parse_policy.empty_result_action = EmptyResultAction::error;
                else if (value == "empty")
                    config.parse_policy.empty_result_action = EmptyResultAction::empty;
                else
                    fail("parse.empty_result must be error or empty");
            } else if (key == "ensemble.members") {
                config.ensemble_members.clear();
                for (const auto& part : split(value, ',')) {
                    std::string id(trim(part));
                    if (!id.empty()) config.ensemble_members.push_back(std::move(id));
                }
            } else if (key == "ensemble.threshold") {
                config.ensemble_threshold = std::stoi(value);
            } else if (key == "ensemble.fallback") {
                config.ensemble_fallback = detail::parse_fallback(value);
            } else if (key == "ensemble.mode") {
                config.ensemble_mode = detail::parse_vote_mode(value);
            } else {
                fail("unknown config key: " + key);
            }
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception& e) {
            fail(std::string("bad value: ") + e.what());
        }
    }
    return config;
}

}  // namespace framing
