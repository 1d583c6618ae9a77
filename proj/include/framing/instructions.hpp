#pragma once

#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "framing/corpus.hpp"
#include "framing/errors.hpp"
#include "framing/taxonomy.hpp"
#include "framing/text.hpp"

namespace framing {

struct PromptTemplate {
    std::string instruction_text;
    std::string input_format;       // must contain {article} and {entity} exactly once each
    std::string label_separator;    // joins multi-label targets
    std::size_t max_article_chars = 0;  // 0 = no truncation; otherwise tail-truncate, logged
};

struct InstructionExample {
    std::string sample_id;
    std::string instruction;
    std::string input;
    std::string output;  // empty for inference-only examples

    friend bool operator==(const InstructionExample&, const InstructionExample&) = default;
};

inline void validate_template(const PromptTemplate& tmpl) {
    auto count = [](const std::string& s, const std::string& needle) {
        std::size_t n = 0;
        for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
        return n;
    };
    if (count(tmpl.input_format, "{article}") != 1)
        throw ValidationError("input_format must contain {article} exactly once");
    if (count(tmpl.input_format, "{entity}") != 1)
        throw ValidationError("input_format must contain {entity} exactly once");
    if (tmpl.label_separator.empty())
        throw ValidationError("label_separator must be non-empty");
}

inline PromptTemplate default_template() {
    return PromptTemplate{
        "Given an article and an entity within that article. Analyze this article and the entity, "
        "and provide the fine-grained roles of the entity.",
        "Article: {article}\nEntity: {entity}",
        ", ",
        0};
}

/// Renders the input section by substituting {article} and {entity}. The
/// substituted text is never rescanned, so placeholder-looking content in
/// articles is inert.
inline std::string render_input(const PromptTemplate& tmpl, const ArticleDoc& article,
                                const EntityMentionSample& sample) {
    validate_template(tmpl);
    std::string article_text = article.text;
    if (tmpl.max_article_chars > 0 && utf8_length(article_text) > tmpl.max_article_chars) {
        article_text = utf8_truncate(article_text, tmpl.max_article_chars);
        std::cerr << "warning: article " << article.article_id << " truncated to "
                  << tmpl.max_article_chars << " characters\n";
    }
    const auto art_pos = tmpl.input_format.find("{article}");
    const auto ent_pos = tmpl.input_format.find("{entity}");
    struct Hole { std::size_t pos, len; const std::string* value; };
    std::vector<Hole> holes{{art_pos, 9, &article_text}, {ent_pos, 8, &sample.mention}};
    if (holes[0].pos > holes[1].pos) std::swap(holes[0], holes[1]);
    std::string out;
    out += tmpl.input_format.substr(0, holes[0].pos);
    out += *holes[0].value;
    out += tmpl.input_format.substr(holes[0].pos + holes[0].len,
                                    holes[1].pos - (holes[0].pos + holes[0].len));
    out += *holes[1].value;
    out += tmpl.input_format.substr(holes[1].pos + holes[1].len);
    return out;
}

/// Serializes a gold role set as the target string: canonical taxonomy order,
/// joined with the template separator.
inline std::string serialize_labels(const std::set<std::string>& roles, const RoleTaxonomy& taxonomy,
                                    const std::string& separator) {
    std::string out;
    for (const auto& role : taxonomy.sort_canonical(roles)) {
        if (!out.empty()) out += separator;
        out += role;
    }
    return out;
}

/// The prompt sent for generation: instruction plus rendered input, with no
/// gold labels.
inline std::string render_inference_prompt(const EntityMentionSample& sample,
                                           const ArticleDoc& article,
                                           const PromptTemplate& tmpl) {
    return tmpl.instruction_text + "\n" + render_input(tmpl, article, sample);
}

inline InstructionExample build_instruction_example(const EntityMentionSample& sample,
                                                    const ArticleDoc& article,
                                                    const PromptTemplate& tmpl,
                                                    const RoleTaxonomy& taxonomy) {
    if (sample.gold_fine_roles.empty())
        throw ValidationError("sample " + sample.sample_id + " has an empty gold label set");
    InstructionExample ex;
    ex.sample_id = sample.sample_id;
    ex.instruction = tmpl.instruction_text;
    ex.input = render_input(tmpl, article, sample);
    ex.output = serialize_labels(sample.gold_fine_roles, taxonomy, tmpl.label_separator);
    return ex;
}

/// One example per sample, split order preserved. Per-sample failures are
/// reported with the sample id attached.
inline std::vector<InstructionExample> build_dataset(const DatasetSplit& split,
                                                     const PromptTemplate& tmpl,
                                                     const RoleTaxonomy& taxonomy) {
    std::vector<InstructionExample> out;
    out.reserve(split.samples.size());
    for (const auto& s : split.samples)
        out.push_back(build_instruction_example(s, split.article_of(s), tmpl, taxonomy));
    return out;
}

/// Dataset manifest: one JSON object per line with fields instruction, input,
/// output, sample_id. Keys are emitted sorted, so output is byte-stable.
inline std::string serialize_manifest(const std::vector<InstructionExample>& examples) {
    std::string out;
    for (const auto& ex : examples) {
        nlohmann::json obj{{"instruction", ex.instruction},
                           {"input", ex.input},
                           {"output", ex.output},
                           {"sample_id", ex.sample_id}};
        out += obj.dump();
        out += '\n';
    }
    return out;
}

inline void write_manifest(const std::vector<InstructionExample>& examples,
                           const std::filesystem::path& path) {
    write_file(path, serialize_manifest(examples));
}

inline std::vector<InstructionExample> read_manifest(const std::filesystem::path& path) {
    std::vector<InstructionExample> out;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path.string() + ": line " + std::to_string(i + 1) + ": " + e.what());
        }
        InstructionExample ex;
        ex.sample_id = obj.value("sample_id", "");
        ex.instruction = obj.value("instruction", "");
        ex.input = obj.value("input", "");
        ex.output = obj.value("output", "");
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace framing
