#pragma once

#include <cstddef>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "framing/errors.hpp"
#include "framing/taxonomy.hpp"
#include "framing/text.hpp"

namespace framing {

struct ArticleDoc {
    std::string article_id;
    std::string language;  // BG, EN, HI, PT, RU, or any other code
    std::string text;      // full UTF-8 text

    friend bool operator==(const ArticleDoc&, const ArticleDoc&) = default;
};

/// One (article, entity span, gold label set) unit. Offsets are 0-based,
/// end-exclusive codepoint indices into the decoded article text.
struct EntityMentionSample {
    std::string sample_id;
    std::string article_id;
    std::string mention;
    std::size_t start_offset = 0;
    std::size_t end_offset = 0;
    std::set<std::string> gold_fine_roles;  // may be empty on unlabeled splits
    std::string gold_main_role;             // empty when absent

    friend bool operator==(const EntityMentionSample&, const EntityMentionSample&) = default;
};

struct DatasetSplit {
    std::string name;  // train, dev, or test
    std::vector<EntityMentionSample> samples;
    std::map<std::string, ArticleDoc> articles;

    const ArticleDoc& article_of(const EntityMentionSample& s) const {
        auto it = articles.find(s.article_id);
        if (it == articles.end())
            throw ValidationError("sample " + s.sample_id + " references missing article " + s.article_id);
        return it->second;
    }
};

struct SplitStatsRow {
    std::string language;
    std::string split;
    std::size_t count = 0;

    friend bool operator==(const SplitStatsRow&, const SplitStatsRow&) = default;
};

// number of gold labels -> number of samples
using LabelCountHistogram = std::map<std::size_t, std::size_t>;

enum class OffsetPolicy { strict, lenient };

namespace detail {

inline std::size_t split_rank(const std::string& name) {
    if (name == "train") return 0;
    if (name == "dev") return 1;
    if (name == "test") return 2;
    throw ValidationError("invalid split name: " + name + " (expected train, dev, or test)");
}

// Samples carry no id column in the annotation format; identity is the span.
inline std::string make_sample_id(const std::string& article_id, std::size_t start, std::size_t end) {
    return article_id + ":" + std::to_string(start) + "-" + std::to_string(end);
}

}  // namespace detail

/// Checks every DatasetSplit invariant: valid name, unique sample ids,
/// resolvable article references.
inline void validate_split(const DatasetSplit& split) {
    detail::split_rank(split.name);
    std::set<std::string> seen;
    for (const auto& s : split.samples) {
        if (!seen.insert(s.sample_id).second)
            throw ValidationError("duplicate sample_id: " + s.sample_id);
        split.article_of(s);
    }
}

/// Loads a split from one plain-text file per article plus an annotation TSV:
///
///   article_id<TAB>mention<TAB>start<TAB>end<TAB>main_role[<TAB>fine_role ...]
///
/// Rows keep file order. Offsets are validated against the article text; a
/// mention/slice mismatch is an error in strict mode, while lenient mode
/// accepts it after whitespace normalization and logs a warning.
inline DatasetSplit load_corpus(const std::filesystem::path& articles_dir,
                                const std::filesystem::path& annotations_path,
                                const RoleTaxonomy& taxonomy,
                                const std::string& language,
                                const std::string& split_name,
                                OffsetPolicy policy = OffsetPolicy::strict) {
    DatasetSplit ds;
    ds.name = split_name;
    detail::split_rank(split_name);

    if (!std::filesystem::exists(annotations_path))
        throw ValidationError("annotations file not found: " + annotations_path.string());

    std::map<std::string, std::vector<std::size_t>> cp_starts;  // per-article codepoint index
    std::set<std::string> seen_ids;
    const auto lines = read_lines(annotations_path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t row = i + 1;
        auto fail = [&](const std::string& msg) {
            throw ValidationError(annotations_path.string() + ": row " + std::to_string(row) + ": " + msg);
        };
        if (trim(lines[i]).empty()) continue;
        const auto cols = split(lines[i], '\t');
        if (cols.size() < 4) fail("expected at least 4 tab-separated columns");

        EntityMentionSample sample;
        sample.article_id = cols[0];
        sample.mention = cols[1];
        if (sample.article_id.empty()) fail("empty article_id");
        if (sample.mention.empty()) fail("empty mention");
        try {
            if (!cols[2].empty() && cols[2][0] == '-') throw std::invalid_argument("negative");
            if (!cols[3].empty() && cols[3][0] == '-') throw std::invalid_argument("negative");
            std::size_t pos = 0;
            sample.start_offset = std::stoull(cols[2], &pos);
            if (pos != cols[2].size()) throw std::invalid_argument("trailing");
            sample.end_offset = std::stoull(cols[3], &pos);
            if (pos != cols[3].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            fail("offsets must be non-negative integers, got '" + cols[2] + "', '" + cols[3] + "'");
        }
        if (cols.size() >= 5 && !cols[4].empty()) {
            if (!detail::is_canonical_main(cols[4])) fail("unknown main role: " + cols[4]);
            sample.gold_main_role = cols[4];
        }
        for (std::size_t c = 5; c < cols.size(); ++c) {
            if (cols[c].empty()) continue;
            if (!taxonomy.has_fine_role(cols[c])) fail("unknown fine role: " + cols[c]);
            sample.gold_fine_roles.insert(cols[c]);
        }

        auto art_it = ds.articles.find(sample.article_id);
        if (art_it == ds.articles.end()) {
            const auto article_path = articles_dir / (sample.article_id + ".txt");
            if (!std::filesystem::exists(article_path))
                fail("missing article file: " + article_path.string());
            ArticleDoc doc{sample.article_id, language, read_file(article_path)};
            if (doc.text.empty()) fail("article file is empty: " + article_path.string());
            art_it = ds.articles.emplace(sample.article_id, std::move(doc)).first;
            cp_starts.emplace(sample.article_id, utf8_codepoint_starts(art_it->second.text));
        }
        const auto& starts = cp_starts.at(sample.article_id);
        const std::size_t text_cp_len = starts.size() - 1;
        if (sample.start_offset >= sample.end_offset) fail("start_offset must be < end_offset");
        if (sample.end_offset > text_cp_len)
            fail("end_offset " + std::to_string(sample.end_offset) + " exceeds article length " +
                 std::to_string(text_cp_len));
        const std::string slice = art_it->second.text.substr(
            starts[sample.start_offset], starts[sample.end_offset] - starts[sample.start_offset]);
        if (slice != sample.mention) {
            if (policy == OffsetPolicy::lenient &&
                collapse_whitespace(slice) == collapse_whitespace(sample.mention)) {
                std::cerr << "warning: " << annotations_path.string() << ": row " << row
                          << ": mention differs from slice only in whitespace ('" << sample.mention
                          << "' vs '" << slice << "')\n";
            } else {
                fail("mention '" + sample.mention + "' does not match article slice '" + slice + "'");
            }
        }

        sample.sample_id = detail::make_sample_id(sample.article_id, sample.start_offset, sample.end_offset);
        if (!seen_ids.insert(sample.sample_id).second)
            fail("duplicate sample (same article and span): " + sample.sample_id);
        ds.samples.push_back(std::move(sample));
    }
    return ds;
}

/// Gold label sets keyed by sample id, read from an annotation TSV without
/// touching article files. This is the scoring-side loader: offsets are
/// parsed for sample identity but not validated against text.
struct GoldLabels {
    std::map<std::string, std::set<std::string>> fine;
    std::map<std::string, std::string> main;  // only samples with a main-role column
};

inline GoldLabels read_annotation_labels(const std::filesystem::path& annotations_path,
                                         const RoleTaxonomy& taxonomy) {
    GoldLabels gold;
    const auto lines = read_lines(annotations_path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t row = i + 1;
        auto fail = [&](const std::string& msg) {
            throw ValidationError(annotations_path.string() + ": row " + std::to_string(row) + ": " + msg);
        };
        if (trim(lines[i]).empty()) continue;
        const auto cols = split(lines[i], '\t');
        if (cols.size() < 4) fail("expected at least 4 tab-separated columns");
        std::string id;
        try {
            id = detail::make_sample_id(cols[0], std::stoull(cols[2]), std::stoull(cols[3]));
        } catch (const std::exception&) {
            fail("offsets must be non-negative integers, got '" + cols[2] + "', '" + cols[3] + "'");
        }
        if (gold.fine.count(id)) fail("duplicate sample: " + id);
        std::set<std::string> roles;
        for (std::size_t c = 5; c < cols.size(); ++c) {
            if (cols[c].empty()) continue;
            if (!taxonomy.has_fine_role(cols[c])) fail("unknown fine role: " + cols[c]);
            roles.insert(cols[c]);
        }
        if (cols.size() >= 5 && !cols[4].empty()) gold.main[id] = cols[4];
        gold.fine[id] = std::move(roles);
    }
    return gold;
}

/// Writes a split back to the annotation TSV format, row per sample in split
/// order. Output re-loads through load_corpus given the same article files.
inline void write_annotations(const DatasetSplit& split, const std::filesystem::path& path) {
    std::string out;
    for (const auto& s : split.samples) {
        out += s.article_id;
        out += '\t';
        out += s.mention;
        out += '\t';
        out += std::to_string(s.start_offset);
        out += '\t';
        out += std::to_string(s.end_offset);
        out += '\t';
        out += s.gold_main_role;
        for (const auto& role : s.gold_fine_roles) {
            out += '\t';
            out += role;
        }
        out += '\n';
    }
    write_file(path, out);
}

/// Per-(language, split) sample counts. Rows are sorted by language, then by
/// split order train < dev < test.
inline std::vector<SplitStatsRow> split_stats(const std::vector<DatasetSplit>& splits) {
    std::map<std::pair<std::string, std::size_t>, std::pair<std::string, std::size_t>> counts;
    for (const auto& split : splits) {
        const std::size_t rank = detail::split_rank(split.name);
        for (const auto& s : split.samples) {
            auto key = std::make_pair(split.article_of(s).language, rank);
            auto& slot = counts[key];
            slot.first = split.name;
            ++slot.second;
        }
    }
    std::vector<SplitStatsRow> rows;
    rows.reserve(counts.size());
    for (const auto& [key, value] : counts)
        rows.push_back({key.first, value.first, value.second});
    return rows;
}

inline LabelCountHistogram label_count_histogram(const DatasetSplit& split) {
    LabelCountHistogram hist;
    for (const auto& s : split.samples) ++hist[s.gold_fine_roles.size()];
    return hist;
}

/// Keeps exactly the samples with a single gold label, in the original
/// order, along with the articles they reference.
inline DatasetSplit filter_single_label(const DatasetSplit& split) {
    DatasetSplit out;
    out.name = split.name;
    for (const auto& s : split.samples) {
        if (s.gold_fine_roles.size() != 1) continue;
        out.samples.push_back(s);
        if (!out.articles.count(s.article_id)) out.articles.emplace(s.article_id, split.article_of(s));
    }
    return out;
}

/// Concatenates two splits (a's samples first) under a new name. Sample ids
/// must be disjoint and shared articles must be identical.
inline DatasetSplit merge_splits(const DatasetSplit& a, const DatasetSplit& b,
                                 const std::string& new_name) {
    DatasetSplit out;
    out.name = new_name;
    detail::split_rank(new_name);
    std::set<std::string> ids;
    for (const auto& s : a.samples) ids.insert(s.sample_id);
    for (const auto& s : b.samples) {
        if (ids.count(s.sample_id))
            throw ValidationError("duplicate sample_id across splits: " + s.sample_id);
    }
    out.samples = a.samples;
    out.samples.insert(out.samples.end(), b.samples.begin(), b.samples.end());
    out.articles = a.articles;
    for (const auto& [id, doc] : b.articles) {
        auto [it, inserted] = out.articles.emplace(id, doc);
        if (!inserted && !(it->second == doc))
            throw ValidationError("conflicting article content for article_id: " + id);
    }
    validate_split(out);
    return out;
}

}  // namespace framing
