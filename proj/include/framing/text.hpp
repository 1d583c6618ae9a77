#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "framing/errors.hpp"

namespace framing {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view s, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == delim) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Collapses every whitespace run to a single space and trims the ends.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_ws = true;
        } else {
            if (in_ws && !out.empty()) out.push_back(' ');
            in_ws = false;
            out.push_back(static_cast<char>(c));
        }
    }
    return out;
}

// Byte offsets of each UTF-8 codepoint start, plus a trailing sentinel equal
// to the byte length. Continuation bytes (10xxxxxx) never start a codepoint;
// malformed bytes are treated as one codepoint each.
inline std::vector<std::size_t> utf8_codepoint_starts(std::string_view text) {
    std::vector<std::size_t> starts;
    starts.reserve(text.size() + 1);
    for (std::size_t i = 0; i < text.size(); ++i) {
        if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) starts.push_back(i);
    }
    starts.push_back(text.size());
    return starts;
}

inline std::size_t utf8_length(std::string_view text) {
    return utf8_codepoint_starts(text).size() - 1;
}

// Slice by codepoint indices, end-exclusive. Indices must satisfy
// start <= end <= utf8_length(text).
inline std::string utf8_slice(std::string_view text, std::size_t cp_start, std::size_t cp_end) {
    const auto starts = utf8_codepoint_starts(text);
    return std::string(text.substr(starts.at(cp_start), starts.at(cp_end) - starts.at(cp_start)));
}

inline std::string utf8_truncate(std::string_view text, std::size_t max_codepoints) {
    const auto starts = utf8_codepoint_starts(text);
    if (starts.size() - 1 <= max_codepoints) return std::string(text);
    return std::string(text.substr(0, starts[max_codepoints]));
}

// TSV fields we write ourselves (raw model generations in particular) can
// contain tabs and newlines; they are escaped as \t, \n, \r, \\.
inline std::string escape_tsv_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\\': out += "\\\\"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline std::string unescape_tsv_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            switch (s[i + 1]) {
                case 't': out.push_back('\t'); ++i; continue;
                case 'n': out.push_back('\n'); ++i; continue;
                case 'r': out.push_back('\r'); ++i; continue;
                case '\\': out.push_back('\\'); ++i; continue;
                default: break;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

// Fixed-point rendering with half-up rounding (half away from zero), so
// reports are stable across platforms. printf-style %.Nf would round half
// to even instead.
inline std::string format_fixed(double value, int decimals) {
    double scale = 1.0;
    for (int i = 0; i < decimals; ++i) scale *= 10.0;
    const long long scaled = std::llround(value * scale);
    const bool negative = scaled < 0;
    unsigned long long mag = negative ? static_cast<unsigned long long>(-scaled)
                                      : static_cast<unsigned long long>(scaled);
    const unsigned long long unit = static_cast<unsigned long long>(scale);
    std::string out = negative ? "-" : "";
    out += std::to_string(mag / unit);
    if (decimals > 0) {
        std::string frac = std::to_string(mag % unit);
        out += '.';
        out += std::string(static_cast<std::size_t>(decimals) - frac.size(), '0');
        out += frac;
    }
    return out;
}

// 0.0286 -> "2.86%"
inline std::string format_percent(double fraction) {
    return format_fixed(fraction * 100.0, 2) + "%";
}

inline std::string format_score(double value) {
    return format_fixed(value, 4);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ValidationError("write failed: " + path.string());
}

// Splits file content into lines; tolerates a final newline and CRLF endings.
inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::string content = read_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= content.size(); ++i) {
        if (i == content.size() || content[i] == '\n') {
            std::size_t end = i;
            if (end > start && content[end - 1] == '\r') --end;
            if (i == content.size() && start == i) break;  // no trailing empty line
            lines.emplace_back(content.substr(start, end - start));
            start = i + 1;
        }
    }
    return lines;
}

}  // namespace framing
