#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "framing/errors.hpp"
#include "framing/text.hpp"

namespace framing {

inline constexpr std::string_view kGenerationFailedMarker = "__GENERATION_FAILED__";

/// Per-sample raw generation plus (once parsed) the taxonomy-valid label set.
/// (sample_id, model_id) is unique within a prediction set.
struct PredictionRecord {
    std::string sample_id;
    std::string model_id;
    std::string raw_text;
    std::optional<std::set<std::string>> parsed_roles;
    bool failed = false;      // generation failed after retries
    std::string error;        // failure description, empty otherwise

    friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// Prediction TSV: sample_id<TAB>model_id<TAB>raw_text<TAB>role_1[|role_2...]
/// The roles column is present (possibly empty) once a record has been
/// parsed; rows with only three columns are unparsed. Raw text is escaped so
/// generations with tabs or newlines stay one row.
inline std::string serialize_predictions(const std::vector<PredictionRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.sample_id;
        out += '\t';
        out += r.model_id;
        out += '\t';
        if (r.failed) {
            out += kGenerationFailedMarker;
            if (!r.error.empty()) {
                out += ' ';
                out += escape_tsv_field(r.error);
            }
        } else {
            out += escape_tsv_field(r.raw_text);
        }
        if (r.parsed_roles) {
            out += '\t';
            bool first = true;
            for (const auto& role : *r.parsed_roles) {
                if (!first) out += '|';
                out += role;
                first = false;
            }
        }
        out += '\n';
    }
    return out;
}

inline void write_predictions(const std::vector<PredictionRecord>& records,
                              const std::filesystem::path& path) {
    write_file(path, serialize_predictions(records));
}

inline std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
    std::vector<PredictionRecord> out;
    std::set<std::pair<std::string, std::string>> seen;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto fail = [&](const std::string& msg) {
            throw ValidationError(path.string() + ": row " + std::to_string(i + 1) + ": " + msg);
        };
        if (lines[i].empty()) continue;
        const auto cols = split(lines[i], '\t');
        if (cols.size() < 3 || cols.size() > 4) fail("expected 3 or 4 tab-separated columns");
        PredictionRecord r;
        r.sample_id = cols[0];
        r.model_id = cols[1];
        if (r.sample_id.empty() || r.model_id.empty()) fail("empty sample_id or model_id");
        if (!seen.insert({r.sample_id, r.model_id}).second)
            fail("duplicate (sample_id, model_id): " + r.sample_id + ", " + r.model_id);
        std::string raw = unescape_tsv_field(cols[2]);
        if (raw.rfind(kGenerationFailedMarker, 0) == 0) {
            r.failed = true;
            r.raw_text.clear();
            if (raw.size() > kGenerationFailedMarker.size())
                r.error = std::string(trim(raw.substr(kGenerationFailedMarker.size())));
        } else {
            r.raw_text = std::move(raw);
        }
        if (cols.size() == 4) {
            std::set<std::string> roles;
            for (const auto& role : split(cols[3], '|'))
                if (!role.empty()) roles.insert(role);
            r.parsed_roles = std::move(roles);
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace framing
