#include <catch2/catch_amalgamated.hpp>

#include "framing/taxonomy.hpp"
#include "test_support.hpp"

using framing::parse_taxonomy;
using framing::RoleTaxonomy;
using framing::ValidationError;

namespace {

std::vector<std::string> minimal_config() {
    return {
        "# fixture",
        "main_roles = Protagonist, Antagonist, Innocent",
        "Victim = Innocent",
        "Tyrant = Antagonist",
    };
}

}  // namespace

TEST_CASE("minimal taxonomy config parses") {
    const auto tax = parse_taxonomy(minimal_config(), "fixture");
    CHECK(tax.main_roles == std::vector<std::string>{"Protagonist", "Antagonist", "Innocent"});
    CHECK(tax.canonical_order == std::vector<std::string>{"Victim", "Tyrant"});
    CHECK(tax.main_role_of("Victim") == "Innocent");
    CHECK(tax.main_role_of("Tyrant") == "Antagonist");
    CHECK(tax.has_fine_role("Victim"));
    CHECK_FALSE(tax.has_fine_role("Hero"));
}

TEST_CASE("unknown main role is rejected") {
    auto lines = minimal_config();
    lines[1] = "main_roles = Protagonist, Antagonist, Hero";
    CHECK_THROWS_WITH(parse_taxonomy(lines, "fixture"),
                      Catch::Matchers::ContainsSubstring("unknown main role: Hero"));

    lines = minimal_config();
    lines.push_back("Sidekick = Hero");
    CHECK_THROWS_WITH(parse_taxonomy(lines, "fixture"),
                      Catch::Matchers::ContainsSubstring("unknown main role: Hero"));
}

TEST_CASE("duplicate fine role is rejected") {
    auto lines = minimal_config();
    lines.push_back("Victim = Antagonist");
    CHECK_THROWS_WITH(parse_taxonomy(lines, "fixture"),
                      Catch::Matchers::ContainsSubstring("duplicate fine role: Victim"));
}

TEST_CASE("main_roles must be complete and come first") {
    CHECK_THROWS_AS(parse_taxonomy({"main_roles = Protagonist, Antagonist", "Victim = Innocent"},
                                   "fixture"),
                    ValidationError);
    CHECK_THROWS_AS(parse_taxonomy({"Victim = Innocent"}, "fixture"), ValidationError);
    CHECK_THROWS_AS(parse_taxonomy({"main_roles = Protagonist, Antagonist, Innocent"}, "fixture"),
                    ValidationError);  // no fine roles
    CHECK_THROWS_AS(
        parse_taxonomy({"main_roles = Protagonist, Protagonist, Innocent", "Victim = Innocent"},
                       "fixture"),
        ValidationError);
}

TEST_CASE("canonical order and sorting") {
    const auto tax = test_support::fixture_taxonomy();
    CHECK(tax.order_index("Guardian") == 0);
    CHECK(tax.order_index("Scapegoat") == 5);
    CHECK(tax.sort_canonical({"Scapegoat", "Victim"}) ==
          std::vector<std::string>{"Victim", "Scapegoat"});
    CHECK(tax.sort_canonical({"Victim", "Guardian", "Tyrant"}) ==
          std::vector<std::string>{"Guardian", "Tyrant", "Victim"});
    CHECK_THROWS_AS(tax.sort_canonical({"Hero"}), ValidationError);
}

TEST_CASE("shipped taxonomy config loads") {
    const auto path = std::filesystem::path(FRAMING_SOURCE_DIR) / "configs" / "taxonomy.conf";
    const auto tax = framing::load_taxonomy(path);
    CHECK(tax.main_roles.size() == 3);
    CHECK(tax.canonical_order.size() == 22);
    CHECK(tax.main_role_of("Victim") == "Innocent");
    CHECK(tax.main_role_of("Foreign Adversary") == "Antagonist");
    CHECK(tax.main_role_of("Underdog") == "Protagonist");
}
