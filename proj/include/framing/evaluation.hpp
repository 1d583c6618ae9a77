#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "framing/errors.hpp"
#include "framing/text.hpp"

namespace framing {

using LabelSets = std::map<std::string, std::set<std::string>>;

namespace detail {

inline void require_same_keys(const LabelSets& a, const LabelSets& b, const std::string& a_name,
                              const std::string& b_name) {
    std::vector<std::string> only_a, only_b;
    for (const auto& [id, _] : a)
        if (!b.count(id)) only_a.push_back(id);
    for (const auto& [id, _] : b)
        if (!a.count(id)) only_b.push_back(id);
    if (only_a.empty() && only_b.empty()) return;
    auto list = [](const std::vector<std::string>& ids) {
        std::string s;
        for (std::size_t i = 0; i < ids.size() && i < 10; ++i) s += " " + ids[i];
        if (ids.size() > 10) s += " ...";
        return s;
    };
    std::string msg = "sample id mismatch:";
    if (!only_a.empty())
        msg += " only in " + a_name + " (" + std::to_string(only_a.size()) + "):" + list(only_a) + ";";
    if (!only_b.empty())
        msg += " only in " + b_name + " (" + std::to_string(only_b.size()) + "):" + list(only_b);
    throw ValidationError(msg);
}

}  // namespace detail

/// Fraction of samples whose predicted label set equals the gold set exactly
/// (set comparison: order- and duplicate-insensitive).
inline double exact_match_ratio(const LabelSets& predictions, const LabelSets& gold) {
    if (gold.empty()) throw ValidationError("empty gold corpus");
    detail::require_same_keys(predictions, gold, "predictions", "gold");
    std::size_t matches = 0;
    for (const auto& [id, gold_set] : gold) {
        if (gold_set.empty())
            throw ValidationError("gold label set for sample " + id + " is empty");
        if (predictions.at(id) == gold_set) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(gold.size());
}

struct ScoreDelta {
    double baseline = 0.0;
    double candidate = 0.0;
    double absolute = 0.0;       // candidate - baseline
    double relative_drop = 0.0;  // (baseline - candidate) / baseline; positive for drops
};

inline ScoreDelta score_delta(double baseline, double candidate) {
    if (!(baseline > 0.0))
        throw ValidationError("baseline must be positive for relative comparison");
    return ScoreDelta{baseline, candidate, candidate - baseline,
                      (baseline - candidate) / baseline};
}

struct LeaderboardEntry {
    int rank = 0;  // competition ranking: ties share a rank, next rank skips
    std::string model_id;
    double score = 0.0;

    friend bool operator==(const LeaderboardEntry&, const LeaderboardEntry&) = default;
};

/// Descending leaderboard with shared ranks for ties; tied models are listed
/// lexicographically.
inline std::vector<LeaderboardEntry> rank_models(const std::map<std::string, double>& scores) {
    if (scores.empty()) throw ValidationError("no model scores to rank");
    std::vector<LeaderboardEntry> board;
    board.reserve(scores.size());
    for (const auto& [id, score] : scores) board.push_back({0, id, score});
    std::sort(board.begin(), board.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.model_id < b.model_id;
    });
    for (std::size_t i = 0; i < board.size(); ++i)
        board[i].rank = (i > 0 && board[i].score == board[i - 1].score)
                            ? board[i - 1].rank
                            : static_cast<int>(i + 1);
    return board;
}

struct BaselineComparisonRow {
    std::string language;
    double baseline = 0.0;
    double system = 0.0;
    double delta = 0.0;  // system - baseline

    friend bool operator==(const BaselineComparisonRow&, const BaselineComparisonRow&) = default;
};

/// Per-language (baseline, system, delta) rows, language-sorted (BG, EN, HI,
/// PT, RU for the standard tracks).
inline std::vector<BaselineComparisonRow> compare_to_baseline(
    const std::map<std::string, double>& system_scores,
    const std::map<std::string, double>& baseline_scores) {
    for (const auto& [lang, _] : system_scores)
        if (!baseline_scores.count(lang))
            throw ValidationError("baseline is missing language: " + lang);
    for (const auto& [lang, _] : baseline_scores)
        if (!system_scores.count(lang))
            throw ValidationError("system scores are missing language: " + lang);
    std::vector<BaselineComparisonRow> rows;
    rows.reserve(system_scores.size());
    for (const auto& [lang, sys] : system_scores) {
        const double base = baseline_scores.at(lang);
        rows.push_back({lang, base, sys, sys - base});
    }
    return rows;
}

/// Scores TSV `model_id<TAB>score`, as produced by evaluate --scores-out.
inline std::map<std::string, double> read_model_scores(const std::filesystem::path& path) {
    std::map<std::string, double> scores;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto fail = [&](const std::string& msg) {
            throw ValidationError(path.string() + ": row " + std::to_string(i + 1) + ": " + msg);
        };
        if (trim(lines[i]).empty()) continue;
        const auto cols = split(lines[i], '\t');
        if (cols.size() != 2) fail("expected model_id<TAB>score");
        try {
            if (!scores.emplace(cols[0], std::stod(cols[1])).second)
                fail("duplicate model id: " + cols[0]);
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception&) {
            fail("malformed score: " + cols[1]);
        }
    }
    return scores;
}

/// Per-split, per-language metric table. exact_match_ratio is the headline
/// (best model's) score; main-role accuracy rides along as a secondary
/// signal.
struct EvaluationReport {
    std::string split;
    std::string language;
    std::size_t n_samples = 0;
    double exact_match_ratio = 0.0;
    std::map<std::string, double> per_model;                // model -> EMR
    std::map<std::string, double> per_model_main_accuracy;  // model -> main-role accuracy
};

inline std::string serialize_report_tsv(const EvaluationReport& report) {
    std::string out = "model\texact_match_ratio\temr_pct\tmain_role_accuracy\trank\n";
    for (const auto& entry : rank_models(report.per_model)) {
        out += entry.model_id;
        out += '\t';
        out += format_score(entry.score);
        out += '\t';
        out += format_percent(entry.score);
        out += '\t';
        auto it = report.per_model_main_accuracy.find(entry.model_id);
        out += it == report.per_model_main_accuracy.end() ? "-" : format_score(it->second);
        out += '\t';
        out += std::to_string(entry.rank);
        out += '\n';
    }
    return out;
}

/// Aligned-column text table for terminals.
inline std::string format_report_table(const EvaluationReport& report) {
    const auto board = rank_models(report.per_model);
    std::size_t name_width = std::string("model").size();
    for (const auto& e : board) name_width = std::max(name_width, e.model_id.size());

    std::string out;
    out += "split: " + report.split + "  language: " + report.language +
           "  samples: " + std::to_string(report.n_samples) + "\n";
    auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
    };
    out += pad("model", name_width) + "  rank  exact_match  emr%     main_acc\n";
    for (const auto& e : board) {
        auto it = report.per_model_main_accuracy.find(e.model_id);
        out += pad(e.model_id, name_width) + "  " + pad(std::to_string(e.rank), 4) + "  " +
               pad(format_score(e.score), 11) + "  " + pad(format_percent(e.score), 7) + "  " +
               (it == report.per_model_main_accuracy.end() ? "-" : format_score(it->second)) + "\n";
    }
    return out;
}

}  // namespace framing
