#pragma once

#include <string>
#include <vector>

#include "opforge/errors.hpp"

namespace opforge {

// Naming schemata for the four concrete path shapes. `{instance}` expands to
// the prefixed instance noun; `{container}`, `{attribute}` and `{category}`
// expand verbatim. Statement parsing inverts the same patterns, so literals
// between placeholders must never occur inside vocabulary terms.
struct PhrasePatterns {
  std::string count = "the number of {instance} in {container}";
  std::string rate = "the average number of {attribute} per {instance} in {container}";
  std::string attr_total = "the total number of {attribute} of {instance} in {container}";
  std::string abstract_total = "the total number of {category} in {container}";

  friend bool operator==(const PhrasePatterns&, const PhrasePatterns&) = default;
};

// A themed vocabulary: which entities exist and how their quantities are
// phrased. Values and graph topology never depend on the template, only the
// rendered surface does.
struct Template {
  std::string id;
  std::vector<std::string> containers;
  std::vector<std::string> instances;  // bare nouns; prefix is applied on use
  std::string instance_prefix;         // e.g. "adult"; may be empty
  std::string attribute;               // e.g. "newborn children"
  std::string abstract_category;       // e.g. "adult animals"
  std::string count_unit;              // unit tag of counts and count totals
  std::string attribute_unit;          // unit tag of rates and attribute totals
  PhrasePatterns patterns;

  std::string prefixed(const std::string& instance) const {
    return instance_prefix.empty() ? instance : instance_prefix + " " + instance;
  }

  // Every multi-word name that can appear in rendered text. Filler sentences
  // are checked against this list for vocabulary disjointness.
  std::vector<std::string> vocabulary_terms() const;

  friend bool operator==(const Template&, const Template&) = default;
};

// Structural checks for both built-in and user-supplied templates: unique
// nonempty terms, no pattern separators (" in ", " per ", " and ", commas,
// periods) inside terms, no possessives, placeholders present exactly once
// and separated by nonempty literals. Throws ConfigError.
void validate_template(const Template& t);

// Built-in themed vocabularies: animal-zoo, teacher-school, movie-festival.
const std::vector<Template>& builtin_templates();

// JSON round-trip for user-supplied template files; load validates.
Template template_from_json(const std::string& json_text);
std::string template_to_json(const Template& t);

// Finds a template by id among `extra` first, then the built-ins.
const Template& find_template(const std::string& id, const std::vector<Template>& extra = {});

}  // namespace opforge
