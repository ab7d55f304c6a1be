#include "opforge/templates.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

namespace opforge {

namespace {

using nlohmann::ordered_json;

Template make_animal_zoo() {
  Template t;
  t.id = "animal-zoo";
  t.containers = {
      "Bundle Ranch",        "South Zoo",            "Hamilton Farm",
      "Jefferson Circus",    "Mayer Aquarium",       "North Sanctuary",
      "Crescent Valley Farm", "Silver Hollow Ranch", "Maple Grove Farm",
      "Oakdale Preserve",    "Willow Creek Farm",    "Stonebridge Zoo",
      "Clearwater Aviary",   "Prairie Wind Ranch",   "Foxglove Meadow",
      "Harborview Aquarium", "Elm Ridge Farm",       "Copper Canyon Ranch",
      "Lakeside Menagerie",  "Birchwood Sanctuary",  "Gold Coast Zoo",
      "Riverside Paddock",   "Summit Park Zoo",      "Meadowbrook Farm",
      "Eastgate Aviary",     "Pinehurst Ranch",      "Cypress Point Preserve",
      "Glenhaven Farm",      "Ironwood Station",     "Juniper Flats Ranch",
      "Kettle Creek Farm",   "Larkspur Meadow",      "Mistral Downs",
      "Northwind Stables",   "Orchard Gate Farm",    "Quarry Hill Preserve",
      "Rosewood Sanctuary",  "Saddleback Ranch",     "Thornfield Farm",
      "Umberland Zoo",
  };
  t.instances = {
      "eagle",      "owl",        "parrot",     "blue jay",    "penguin",
      "crow",       "raven",      "falcon",     "hawk",        "sparrow",
      "finch",      "heron",      "stork",      "pelican",     "flamingo",
      "toucan",     "macaw",      "cockatoo",   "dove",        "pigeon",
      "swan",       "goose",      "duck",       "crane",       "ibis",
      "kingfisher", "woodpecker", "hummingbird", "cardinal",   "oriole",
      "magpie",     "jackdaw",    "starling",   "swallow",     "puffin",
      "tern",       "gull",       "albatross",  "osprey",      "kestrel",
      "plover",     "sandpiper",  "lapwing",    "nightingale",
  };
  t.instance_prefix = "adult";
  t.attribute = "newborn children";
  t.abstract_category = "adult animals";
  t.count_unit = "animal";
  t.attribute_unit = "animal";
  return t;
}

Template make_teacher_school() {
  Template t;
  t.id = "teacher-school";
  t.containers = {
      "Northgate Academy",    "Riverbend High School", "Crestwood Institute",
      "Lakeview Academy",     "Brookfield School",     "Summerville College",
      "Ashford Preparatory",  "Holloway Institute",    "Pinecrest Academy",
      "Westbrook High School", "Fairmont College",     "Dunmore School",
      "Eastwood Academy",     "Granite Hill School",   "Harrowgate Institute",
      "Ivydale College",      "Kingsford Academy",     "Longview School",
      "Marble Arch Institute", "Newhaven Academy",     "Oakmont College",
      "Pembroke School",      "Quailridge Academy",    "Redstone Institute",
      "Silverlake College",   "Thistlewood School",    "Uplands Academy",
      "Vanguard Institute",   "Westfield College",     "Yellowbrook School",
  };
  t.instances = {
      "math teacher",       "history teacher",    "physics teacher",
      "chemistry teacher",  "biology teacher",    "geography teacher",
      "literature teacher", "music teacher",      "art teacher",
      "drama teacher",      "economics teacher",  "philosophy teacher",
      "astronomy teacher",  "geology teacher",    "botany teacher",
      "zoology teacher",    "statistics teacher", "algebra teacher",
      "geometry teacher",   "calculus teacher",   "grammar teacher",
      "rhetoric teacher",   "latin teacher",      "french teacher",
      "spanish teacher",    "german teacher",     "italian teacher",
      "russian teacher",    "japanese teacher",   "mandarin teacher",
      "choir teacher",      "orchestra teacher",  "painting teacher",
      "sculpture teacher",  "photography teacher", "journalism teacher",
      "debate teacher",     "robotics teacher",   "programming teacher",
      "accounting teacher",
  };
  t.instance_prefix = "senior";
  t.attribute = "trainee teachers";
  t.abstract_category = "senior teachers";
  t.count_unit = "teacher";
  t.attribute_unit = "teacher";
  return t;
}

Template make_movie_festival() {
  Template t;
  t.id = "movie-festival";
  t.containers = {
      "Golden Reel Festival",   "Silver Screen Gala",    "Starlight Premiere",
      "Harborlight Festival",   "Crimson Curtain Fest",  "Moonrise Showcase",
      "Palm Grove Festival",    "Northern Lights Cinema", "Velvet Frame Gala",
      "Sunset Strip Festival",  "Blue Lantern Showcase", "Cobblestone Cinema",
      "Driftwood Festival",     "Ember Glow Premiere",   "Falling Leaf Festival",
      "Glass House Showcase",   "Horizon Line Cinema",   "Ivory Tower Festival",
      "Jade Mountain Gala",     "Lighthouse Premiere",   "Midnight Sun Festival",
      "Nightingale Showcase",   "Opal Coast Cinema",     "Paper Moon Festival",
      "Quartz City Gala",       "Rainfall Premiere",     "Snowcap Festival",
      "Tidewater Showcase",     "Umbra Cinema",          "Windmill Festival",
  };
  t.instances = {
      "western film",      "comedy film",      "thriller film",
      "horror film",       "romance film",     "fantasy film",
      "musical film",      "documentary film", "animation film",
      "noir film",         "biopic film",      "adventure film",
      "mystery film",      "crime film",       "war film",
      "sports film",       "superhero film",   "spy film",
      "heist film",        "disaster film",    "epic film",
      "satire film",       "parody film",      "melodrama film",
      "anthology film",    "silent film",      "indie film",
      "cult film",         "experimental film", "arthouse film",
      "slasher film",      "zombie film",      "vampire film",
      "caper film",        "courtroom film",   "survival film",
      "dystopian film",    "steampunk film",   "cyberpunk film",
      "historical film",
  };
  t.instance_prefix = "award-winning";
  t.attribute = "sequel films";
  t.abstract_category = "award-winning films";
  t.count_unit = "film";
  t.attribute_unit = "film";
  return t;
}

// Substrings that the pattern matcher relies on to split statements; no
// vocabulary term may contain any of them.
const std::vector<std::string>& forbidden_in_terms() {
  static const std::vector<std::string> kList = {
      " in ", " per ", " and ", ",", ".", "?", "{", "}", "'", "  ", " of ",
      " equals ", " times ", " plus ", " sum ", " difference ",
  };
  return kList;
}

void check_term(const std::string& term, const std::string& what) {
  if (term.empty()) throw ConfigError("template: empty " + what);
  if (term.front() == ' ' || term.back() == ' ') {
    throw ConfigError("template: " + what + " has leading/trailing space: '" + term + "'");
  }
  for (const auto& bad : forbidden_in_terms()) {
    if (term.find(bad) != std::string::npos) {
      throw ConfigError("template: " + what + " '" + term + "' contains reserved text '" +
                        bad + "'");
    }
  }
}

void check_pattern(const std::string& pattern, const std::vector<std::string>& placeholders,
                   const std::string& what) {
  if (pattern.empty()) throw ConfigError("template: empty pattern " + what);
  std::size_t pos = 0;
  bool last_was_placeholder = false;
  std::set<std::string> seen;
  while (pos < pattern.size()) {
    const std::size_t open = pattern.find('{', pos);
    if (open == std::string::npos) break;
    if (open == pos && last_was_placeholder) {
      throw ConfigError("template: pattern " + what + " has adjacent placeholders");
    }
    const std::size_t close = pattern.find('}', open);
    if (close == std::string::npos) {
      throw ConfigError("template: pattern " + what + " has unbalanced brace");
    }
    const std::string name = pattern.substr(open + 1, close - open - 1);
    if (std::find(placeholders.begin(), placeholders.end(), name) == placeholders.end()) {
      throw ConfigError("template: pattern " + what + " uses unknown placeholder {" + name + "}");
    }
    if (!seen.insert(name).second) {
      throw ConfigError("template: pattern " + what + " repeats placeholder {" + name + "}");
    }
    last_was_placeholder = true;
    pos = close + 1;
    if (pos < pattern.size() && pattern[pos] != '{') last_was_placeholder = false;
  }
  for (const auto& ph : placeholders) {
    if (!seen.count(ph)) {
      throw ConfigError("template: pattern " + what + " is missing placeholder {" + ph + "}");
    }
  }
  if (pattern.front() == '{') {
    throw ConfigError("template: pattern " + what + " must start with a literal");
  }
}

}  // namespace

std::vector<std::string> Template::vocabulary_terms() const {
  std::vector<std::string> terms;
  for (const auto& c : containers) terms.push_back(c);
  for (const auto& i : instances) terms.push_back(prefixed(i));
  terms.push_back(attribute);
  terms.push_back(abstract_category);
  return terms;
}

void validate_template(const Template& t) {
  if (t.id.empty()) throw ConfigError("template: empty id");
  if (t.containers.size() < 2) throw ConfigError("template: need at least 2 containers");
  if (t.instances.size() < 4) throw ConfigError("template: need at least 4 instances");
  std::set<std::string> uniq;
  for (const auto& c : t.containers) {
    check_term(c, "container");
    if (!uniq.insert(c).second) throw ConfigError("template: duplicate container '" + c + "'");
  }
  uniq.clear();
  for (const auto& i : t.instances) {
    check_term(i, "instance");
    if (!uniq.insert(i).second) throw ConfigError("template: duplicate instance '" + i + "'");
  }
  if (!t.instance_prefix.empty()) check_term(t.instance_prefix, "instance prefix");
  check_term(t.attribute, "attribute");
  check_term(t.abstract_category, "abstract category");
  if (t.count_unit.empty() || t.attribute_unit.empty()) {
    throw ConfigError("template: unit tags must be nonempty");
  }
  check_pattern(t.patterns.count, {"instance", "container"}, "count");
  check_pattern(t.patterns.rate, {"attribute", "instance", "container"}, "rate");
  check_pattern(t.patterns.attr_total, {"attribute", "instance", "container"}, "attr_total");
  check_pattern(t.patterns.abstract_total, {"category", "container"}, "abstract_total");
  if (t.patterns.count == t.patterns.abstract_total) {
    throw ConfigError("template: count and abstract_total patterns must differ");
  }
  if (t.patterns.rate == t.patterns.attr_total) {
    throw ConfigError("template: rate and attr_total patterns must differ");
  }
}

const std::vector<Template>& builtin_templates() {
  static const std::vector<Template> kAll = [] {
    std::vector<Template> all{make_animal_zoo(), make_teacher_school(), make_movie_festival()};
    for (const auto& t : all) validate_template(t);
    return all;
  }();
  return kAll;
}

Template template_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("template: invalid JSON: ") + e.what());
  }
  Template t;
  try {
    t.id = j.at("id").get<std::string>();
    t.containers = j.at("containers").get<std::vector<std::string>>();
    t.instances = j.at("instances").get<std::vector<std::string>>();
    t.instance_prefix = j.value("instance_prefix", std::string{});
    t.attribute = j.at("attribute").get<std::string>();
    t.abstract_category = j.at("abstract_category").get<std::string>();
    t.count_unit = j.at("count_unit").get<std::string>();
    t.attribute_unit = j.at("attribute_unit").get<std::string>();
    if (j.contains("patterns")) {
      const auto& p = j.at("patterns");
      t.patterns.count = p.value("count", t.patterns.count);
      t.patterns.rate = p.value("rate", t.patterns.rate);
      t.patterns.attr_total = p.value("attr_total", t.patterns.attr_total);
      t.patterns.abstract_total = p.value("abstract_total", t.patterns.abstract_total);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("template: missing or mistyped field: ") + e.what());
  }
  validate_template(t);
  return t;
}

std::string template_to_json(const Template& t) {
  ordered_json j;
  j["id"] = t.id;
  j["containers"] = t.containers;
  j["instances"] = t.instances;
  j["instance_prefix"] = t.instance_prefix;
  j["attribute"] = t.attribute;
  j["abstract_category"] = t.abstract_category;
  j["count_unit"] = t.count_unit;
  j["attribute_unit"] = t.attribute_unit;
  j["patterns"] = {{"count", t.patterns.count},
                   {"rate", t.patterns.rate},
                   {"attr_total", t.patterns.attr_total},
                   {"abstract_total", t.patterns.abstract_total}};
  return j.dump(2);
}

const Template& find_template(const std::string& id, const std::vector<Template>& extra) {
  for (const auto& t : extra) {
    if (t.id == id) return t;
  }
  for (const auto& t : builtin_templates()) {
    if (t.id == id) return t;
  }
  throw ConfigError("unknown template id: " + id);
}

}  // namespace opforge
