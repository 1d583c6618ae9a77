#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "framing/errors.hpp"
#include "framing/text.hpp"

namespace framing {

inline constexpr std::array<std::string_view, 3> kCanonicalMainRoles = {
    "Protagonist", "Antagonist", "Innocent"};

/// The fixed three main roles plus the configurable fine-grained roles.
/// Fine roles come from a config file, not code: each maps to exactly one
/// main role, and their declaration order is the canonical order used when
/// serializing label sets.
struct RoleTaxonomy {
    std::vector<std::string> main_roles;               // declaration order, always the 3 canonical names
    std::map<std::string, std::string> fine_to_main;   // fine role -> main role
    std::vector<std::string> canonical_order;          // every fine role exactly once

    bool has_fine_role(const std::string& name) const {
        return fine_to_main.count(name) != 0;
    }

    const std::string& main_role_of(const std::string& fine) const {
        auto it = fine_to_main.find(fine);
        if (it == fine_to_main.end()) throw ValidationError("unknown fine role: " + fine);
        return it->second;
    }

    std::size_t order_index(const std::string& fine) const {
        for (std::size_t i = 0; i < canonical_order.size(); ++i)
            if (canonical_order[i] == fine) return i;
        throw ValidationError("unknown fine role: " + fine);
    }

    /// Sorts a role set into canonical order. Every role must be known.
    std::vector<std::string> sort_canonical(const std::set<std::string>& roles) const {
        std::vector<std::string> out;
        out.reserve(roles.size());
        for (const auto& fine : canonical_order)
            if (roles.count(fine)) out.push_back(fine);
        if (out.size() != roles.size()) {
            for (const auto& r : roles)
                if (!has_fine_role(r)) throw ValidationError("unknown fine role: " + r);
        }
        return out;
    }
};

namespace detail {

inline bool is_canonical_main(std::string_view name) {
    for (auto m : kCanonicalMainRoles)
        if (m == name) return true;
    return false;
}

}  // namespace detail

/// Parses the taxonomy config format:
///
///   # comment
///   main_roles = Protagonist, Antagonist, Innocent
///   Guardian = Protagonist
///   Victim = Innocent
///
/// The `main_roles` line must list exactly the three canonical names (its
/// order becomes the tie-break order for main-role aggregation). Every other
/// `Fine = Main` line declares one fine role; line order is canonical order.
inline RoleTaxonomy parse_taxonomy(const std::vector<std::string>& lines,
                                   const std::string& source_name) {
    RoleTaxonomy tax;
    auto fail = [&](std::size_t row, const std::string& msg) {
        throw ValidationError(source_name + ":" + std::to_string(row) + ": " + msg);
    };
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t row = i + 1;
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(row, "expected 'key = value'");
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty() || value.empty()) fail(row, "empty key or value");

        if (key == "main_roles") {
            if (!tax.main_roles.empty()) fail(row, "duplicate main_roles line");
            for (const auto& part : split(value, ',')) {
                std::string name(trim(part));
                if (!detail::is_canonical_main(name)) fail(row, "unknown main role: " + name);
                for (const auto& seen : tax.main_roles)
                    if (seen == name) fail(row, "duplicate main role: " + name);
                tax.main_roles.push_back(name);
            }
            if (tax.main_roles.size() != kCanonicalMainRoles.size())
                fail(row, "main_roles must list exactly Protagonist, Antagonist, Innocent");
        } else {
            if (tax.main_roles.empty())
                fail(row, "main_roles must be declared before fine roles");
            if (!detail::is_canonical_main(value)) fail(row, "unknown main role: " + value);
            if (tax.fine_to_main.count(key)) fail(row, "duplicate fine role: " + key);
            tax.fine_to_main.emplace(key, value);
            tax.canonical_order.push_back(key);
        }
    }
    if (tax.main_roles.empty())
        throw ValidationError(source_name + ": missing main_roles declaration");
    if (tax.canonical_order.empty())
        throw ValidationError(source_name + ": no fine roles declared");
    return tax;
}

inline RoleTaxonomy load_taxonomy(const std::filesystem::path& path) {
    return parse_taxonomy(read_lines(path), path.string());
}

}  // namespace framing
