#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "framing/errors.hpp"
#include "framing/records.hpp"
#include "framing/taxonomy.hpp"
#include "framing/text.hpp"

namespace framing {

enum class ParseMode { strict, lenient };
enum class EmptyResultAction { error, empty };

struct ParsePolicy {
    ParseMode mode = ParseMode::lenient;
    bool case_fold = true;
    bool strip_punctuation = true;
    EmptyResultAction empty_result_action = EmptyResultAction::empty;

    // Round-trip checks: generated targets must map back exactly.
    static ParsePolicy strict() {
        return {ParseMode::strict, false, false, EmptyResultAction::error};
    }
    // Real model output: normalize aggressively, never throw per record.
    static ParsePolicy lenient_default() {
        return {ParseMode::lenient, true, true, EmptyResultAction::empty};
    }
};

struct ParsedPrediction {
    std::string sample_id;
    std::set<std::string> roles;
    std::vector<std::string> unmatched_fragments;
};

namespace detail {

// Strict mode always treats an empty result as an error.
inline EmptyResultAction effective_empty_action(const ParsePolicy& policy) {
    return policy.mode == ParseMode::strict ? EmptyResultAction::error : policy.empty_result_action;
}

inline std::string normalize_fragment(std::string_view fragment, const ParsePolicy& policy) {
    std::string s(trim(fragment));
    if (policy.case_fold) s = to_lower_ascii(s);
    if (policy.strip_punctuation) {
        std::string stripped;
        stripped.reserve(s.size());
        for (unsigned char c : s)
            if (c > 0x7F || !std::ispunct(c)) stripped.push_back(static_cast<char>(c));
        s = collapse_whitespace(stripped);
    }
    return s;
}

// Splits on commas, semicolons, and newlines, then on the word "and" when it
// stands alone between whitespace (so role names merely containing "and" are
// left intact).
inline std::vector<std::string> split_fragments(std::string_view text) {
    std::vector<std::string> first_pass;
    std::string current;
    for (char c : text) {
        if (c == ',' || c == ';' || c == '\n' || c == '\r') {
            first_pass.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    first_pass.push_back(std::move(current));

    auto is_standalone_and = [](std::string_view s, std::size_t i) {
        if (i + 3 > s.size()) return false;
        if (std::tolower(static_cast<unsigned char>(s[i])) != 'a' ||
            std::tolower(static_cast<unsigned char>(s[i + 1])) != 'n' ||
            std::tolower(static_cast<unsigned char>(s[i + 2])) != 'd')
            return false;
        const bool left_ok = i == 0 || std::isspace(static_cast<unsigned char>(s[i - 1]));
        const bool right_ok =
            i + 3 == s.size() || std::isspace(static_cast<unsigned char>(s[i + 3]));
        return left_ok && right_ok;
    };

    std::vector<std::string> fragments;
    for (const auto& piece : first_pass) {
        std::size_t start = 0;
        for (std::size_t i = 0; i < piece.size(); ++i) {
            if (is_standalone_and(piece, i)) {
                fragments.push_back(piece.substr(start, i - start));
                i += 2;
                start = i + 1;
            }
        }
        fragments.push_back(piece.substr(start));
    }
    return fragments;
}

}  // namespace detail

/// Maps raw generated text to a set of taxonomy-valid fine roles. Fragments
/// that match no canonical name (after normalization per policy) land in
/// unmatched_fragments; under strict mode any unmatched fragment or an empty
/// result throws.
inline ParsedPrediction parse_roles(const std::string& raw_text, const RoleTaxonomy& taxonomy,
                                    const ParsePolicy& policy) {
    std::map<std::string, std::string> normalized_to_canonical;
    for (const auto& fine : taxonomy.canonical_order)
        normalized_to_canonical.emplace(detail::normalize_fragment(fine, policy), fine);

    ParsedPrediction out;
    for (const auto& fragment : detail::split_fragments(raw_text)) {
        const std::string trimmed(trim(fragment));
        if (trimmed.empty()) continue;
        const std::string normalized = detail::normalize_fragment(trimmed, policy);
        auto it = normalized_to_canonical.find(normalized);
        if (it != normalized_to_canonical.end())
            out.roles.insert(it->second);
        else
            out.unmatched_fragments.push_back(trimmed);
    }

    if (policy.mode == ParseMode::strict && !out.unmatched_fragments.empty()) {
        std::string msg = "unmatched fragments:";
        for (const auto& f : out.unmatched_fragments) msg += " '" + f + "'";
        throw ParseError(msg);
    }
    if (out.roles.empty() &&
        detail::effective_empty_action(policy) == EmptyResultAction::error)
        throw ParseError("no taxonomy roles found in: '" + raw_text + "'");
    return out;
}

/// Aggregates a fine-role set to a main role: the main role receiving the
/// most fine-role mappings wins, ties broken by main-role declaration order.
inline std::string derive_main_role(const std::set<std::string>& fine_roles,
                                    const RoleTaxonomy& taxonomy) {
    if (fine_roles.empty())
        throw ValidationError("cannot derive a main role from an empty fine-role set");
    std::map<std::string, std::size_t> tally;
    for (const auto& fine : fine_roles) ++tally[taxonomy.main_role_of(fine)];
    std::string best;
    std::size_t best_count = 0;
    for (const auto& main : taxonomy.main_roles) {
        auto it = tally.find(main);
        if (it != tally.end() && it->second > best_count) {
            best = main;
            best_count = it->second;
        }
    }
    return best;
}

struct ParseSummary {
    std::size_t n_parsed = 0;   // records with at least one role
    std::size_t n_empty = 0;    // records that parsed to an empty set
    std::vector<std::pair<std::string, std::string>> failures;  // (sample_id, reason)
};

/// Fills parsed_roles on every record. Lenient mode isolates per-record
/// failures (empty sets, generation failures) into the summary; strict mode
/// throws one aggregate error listing them all.
inline ParseSummary parse_records(std::vector<PredictionRecord>& records,
                                  const RoleTaxonomy& taxonomy, const ParsePolicy& policy) {
    ParseSummary summary;
    for (auto& r : records) {
        if (r.failed) {
            r.parsed_roles = std::set<std::string>{};
            ++summary.n_empty;
            summary.failures.emplace_back(r.sample_id, "generation failed: " + r.error);
            continue;
        }
        try {
            auto parsed = parse_roles(r.raw_text, taxonomy, policy);
            r.parsed_roles = std::move(parsed.roles);
            if (r.parsed_roles->empty()) {
                ++summary.n_empty;
                std::string reason = "empty parse";
                if (!parsed.unmatched_fragments.empty())
                    reason += " (unmatched: '" + parsed.unmatched_fragments.front() + "')";
                summary.failures.emplace_back(r.sample_id, reason);
            } else {
                ++summary.n_parsed;
            }
        } catch (const ParseError& e) {
            summary.failures.emplace_back(r.sample_id, e.what());
        }
    }
    if (policy.mode == ParseMode::strict && !summary.failures.empty()) {
        std::string msg = std::to_string(summary.failures.size()) + " record(s) failed to parse:";
        for (const auto& [id, reason] : summary.failures) msg += "\n  " + id + ": " + reason;
        throw ParseError(msg);
    }
    return summary;
}

}  // namespace framing
