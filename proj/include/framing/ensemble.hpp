#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "framing/errors.hpp"
#include "framing/records.hpp"
#include "framing/text.hpp"

namespace framing {

enum class VoteFallback { best_member, union_max_count, empty };

// per_label is the default; exact_set votes over whole label sets and exists
// for ablation.
enum class VoteMode { per_label, exact_set };

struct EnsembleConfig {
    std::vector<std::string> member_ids;  // priority order, best dev score first
    int majority_threshold = 2;
    VoteFallback fallback = VoteFallback::best_member;
    VoteMode mode = VoteMode::per_label;

    std::size_t k() const { return member_ids.size(); }
};

inline int default_majority_threshold(std::size_t k) {
    return static_cast<int>((k + 2) / 2);  // ceil((k+1)/2): 2 of 3
}

inline void validate_ensemble_config(const EnsembleConfig& config) {
    if (config.member_ids.empty()) throw ValidationError("ensemble needs at least one member");
    std::set<std::string> unique(config.member_ids.begin(), config.member_ids.end());
    if (unique.size() != config.member_ids.size())
        throw ValidationError("duplicate ensemble member ids");
    if (config.majority_threshold < 1 ||
        config.majority_threshold > static_cast<int>(config.k()))
        throw ValidationError("majority_threshold must be in [1, k]");
}

inline EnsembleConfig make_ensemble_config(std::vector<std::string> member_ids,
                                           int majority_threshold = 0,
                                           VoteFallback fallback = VoteFallback::best_member,
                                           VoteMode mode = VoteMode::per_label) {
    EnsembleConfig config;
    config.member_ids = std::move(member_ids);
    config.majority_threshold =
        majority_threshold > 0 ? majority_threshold : default_majority_threshold(config.k());
    config.fallback = fallback;
    config.mode = mode;
    validate_ensemble_config(config);
    return config;
}

struct VoteTrace {
    std::string sample_id;
    std::map<std::string, int> counts;  // fine role -> member votes, in [0, k]
    std::set<std::string> decision;
    bool fallback_used = false;
};

/// The k highest-scoring model ids, best first; ties broken by lexicographic
/// model id so selection is stable.
inline std::vector<std::string> select_top_k(const std::map<std::string, double>& model_scores,
                                             std::size_t k) {
    if (model_scores.size() < k)
        throw ValidationError("need at least " + std::to_string(k) + " models, have " +
                              std::to_string(model_scores.size()));
    std::vector<std::pair<std::string, double>> entries(model_scores.begin(), model_scores.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(entries[i].first);
    return out;
}

/// Hard majority vote over k member label sets (priority order). Per-label
/// mode keeps every label backed by at least majority_threshold members; if
/// nothing reaches the threshold the configured fallback decides.
inline std::pair<std::set<std::string>, VoteTrace> hard_vote(
    const std::vector<std::set<std::string>>& member_predictions, const EnsembleConfig& config) {
    validate_ensemble_config(config);
    if (member_predictions.size() != config.k())
        throw ValidationError("expected " + std::to_string(config.k()) + " member predictions, got " +
                              std::to_string(member_predictions.size()));

    VoteTrace trace;
    for (const auto& member : member_predictions)
        for (const auto& label : member) ++trace.counts[label];

    if (config.mode == VoteMode::exact_set) {
        std::map<std::set<std::string>, int> set_counts;
        for (const auto& member : member_predictions) ++set_counts[member];
        int max_count = 0;
        for (const auto& [s, c] : set_counts) max_count = std::max(max_count, c);
        for (const auto& member : member_predictions) {
            if (set_counts.at(member) == max_count) {
                trace.decision = member;
                break;  // earliest member among the most frequent sets
            }
        }
        trace.fallback_used = max_count < config.majority_threshold;
        return {trace.decision, trace};
    }

    for (const auto& [label, count] : trace.counts)
        if (count >= config.majority_threshold) trace.decision.insert(label);

    if (trace.decision.empty()) {
        trace.fallback_used = true;
        switch (config.fallback) {
            case VoteFallback::best_member:
                trace.decision = member_predictions.front();
                break;
            case VoteFallback::union_max_count: {
                int max_count = 0;
                for (const auto& [label, count] : trace.counts)
                    max_count = std::max(max_count, count);
                for (const auto& [label, count] : trace.counts)
                    if (count == max_count) trace.decision.insert(label);
                break;
            }
            case VoteFallback::empty:
                break;
        }
    }
    return {trace.decision, trace};
}

struct VoteResult {
    std::vector<PredictionRecord> records;  // model_id "ensemble", first member's order
    std::vector<VoteTrace> traces;
};

/// Applies hard_vote across a whole split. All member lists must cover the
/// identical sample ids and be fully parsed.
inline VoteResult vote_split(const std::vector<std::vector<PredictionRecord>>& per_member_records,
                             const EnsembleConfig& config) {
    validate_ensemble_config(config);
    if (per_member_records.size() != config.k())
        throw ValidationError("expected predictions for " + std::to_string(config.k()) +
                              " members, got " + std::to_string(per_member_records.size()));

    std::vector<std::map<std::string, const PredictionRecord*>> by_id(per_member_records.size());
    std::set<std::string> all_ids;
    for (std::size_t m = 0; m < per_member_records.size(); ++m) {
        for (const auto& r : per_member_records[m]) {
            if (!by_id[m].emplace(r.sample_id, &r).second)
                throw ValidationError("member " + config.member_ids[m] +
                                      " has duplicate sample_id: " + r.sample_id);
            all_ids.insert(r.sample_id);
        }
    }
    for (std::size_t m = 0; m < per_member_records.size(); ++m) {
        std::vector<std::string> missing;
        for (const auto& id : all_ids)
            if (!by_id[m].count(id)) missing.push_back(id);
        if (!missing.empty()) {
            std::string msg = "member " + config.member_ids[m] + " is missing " +
                              std::to_string(missing.size()) + " sample(s):";
            for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
            if (missing.size() > 10) msg += " ...";
            throw ValidationError(msg);
        }
        for (const auto& [id, rec] : by_id[m])
            if (!rec->parsed_roles)
                throw ValidationError("member " + config.member_ids[m] +
                                      " has an unparsed record for sample " + id);
    }

    VoteResult result;
    for (const auto& first : per_member_records.front()) {
        std::vector<std::set<std::string>> member_sets;
        member_sets.reserve(per_member_records.size());
        for (std::size_t m = 0; m < per_member_records.size(); ++m)
            member_sets.push_back(*by_id[m].at(first.sample_id)->parsed_roles);
        auto [decision, trace] = hard_vote(member_sets, config);
        trace.sample_id = first.sample_id;

        PredictionRecord rec;
        rec.sample_id = first.sample_id;
        rec.model_id = "ensemble";
        std::string joined;
        for (const auto& role : decision) {
            if (!joined.empty()) joined += ", ";
            joined += role;
        }
        rec.raw_text = joined;
        rec.parsed_roles = std::move(decision);
        result.records.push_back(std::move(rec));
        result.traces.push_back(std::move(trace));
    }
    return result;
}

/// Trace TSV: per sample one `sample_id<TAB>label<TAB>count` row per counted
/// label (lexicographic), then a decision row
/// `sample_id<TAB>DECISION<TAB>role_1|role_2<TAB>majority|fallback`.
inline std::string serialize_vote_trace(const std::vector<VoteTrace>& traces) {
    std::string out;
    for (const auto& t : traces) {
        for (const auto& [label, count] : t.counts) {
            out += t.sample_id;
            out += '\t';
            out += label;
            out += '\t';
            out += std::to_string(count);
            out += '\n';
        }
        out += t.sample_id;
        out += "\tDECISION\t";
        bool first = true;
        for (const auto& role : t.decision) {
            if (!first) out += '|';
            out += role;
            first = false;
        }
        out += '\t';
        out += t.fallback_used ? "fallback" : "majority";
        out += '\n';
    }
    return out;
}

inline void write_vote_trace(const std::vector<VoteTrace>& traces,
                             const std::filesystem::path& path) {
    write_file(path, serialize_vote_trace(traces));
}

}  // namespace framing
