#include "opforge/templates.hpp"

#include <gtest/gtest.h>

#include "opforge/errors.hpp"

namespace opforge {
namespace {

TEST(Templates, BuiltinsValidateAndResolve) {
  const auto& all = builtin_templates();
  ASSERT_EQ(all.size(), 3u);
  for (const auto& t : all) EXPECT_NO_THROW(validate_template(t));
  EXPECT_EQ(find_template("animal-zoo").id, "animal-zoo");
  EXPECT_EQ(find_template("teacher-school").id, "teacher-school");
  EXPECT_EQ(find_template("movie-festival").id, "movie-festival");
  EXPECT_THROW(find_template("no-such-theme"), ConfigError);
}

TEST(Templates, ExtraTemplatesShadowBuiltins) {
  Template t = find_template("animal-zoo");
  t.id = "custom";
  EXPECT_EQ(find_template("custom", {t}).instance_prefix, t.instance_prefix);
}

TEST(Templates, JsonRoundTrip) {
  const Template& original = find_template("animal-zoo");
  const Template back = template_from_json(template_to_json(original));
  EXPECT_EQ(back, original);
}

TEST(Templates, PrefixedInstanceName) {
  const Template& t = find_template("animal-zoo");
  EXPECT_EQ(t.prefixed("owl"), "adult owl");
  Template bare = t;
  bare.instance_prefix.clear();
  EXPECT_EQ(bare.prefixed("owl"), "owl");
}

TEST(Templates, ValidationRejectsSeparatorInsideTerm) {
  Template t = find_template("animal-zoo");
  t.containers[0] = "Farm in Valley";  // " in " would break pattern inversion
  EXPECT_THROW(validate_template(t), ConfigError);
}

TEST(Templates, ValidationRejectsDuplicates) {
  Template t = find_template("animal-zoo");
  t.instances[1] = t.instances[0];
  EXPECT_THROW(validate_template(t), ConfigError);
}

TEST(Templates, ValidationRejectsBadPattern) {
  Template t = find_template("animal-zoo");
  t.patterns.count = "{instance}{container}";  // adjacent placeholders
  EXPECT_THROW(validate_template(t), ConfigError);
  t.patterns.count = "the number of {instance} in {box}";
  EXPECT_THROW(validate_template(t), ConfigError);
  t.patterns.count = "the number of {instance}";  // container missing
  EXPECT_THROW(validate_template(t), ConfigError);
}

TEST(Templates, MalformedJsonIsConfigError) {
  EXPECT_THROW(template_from_json("{not json"), ConfigError);
  EXPECT_THROW(template_from_json(R"({"id": "x"})"), ConfigError);  // fails validation
}

TEST(Templates, VocabularyTermsCoverEntities) {
  const Template& t = find_template("animal-zoo");
  const auto terms = t.vocabulary_terms();
  auto contains = [&](const std::string& s) {
    return std::find(terms.begin(), terms.end(), s) != terms.end();
  };
  EXPECT_TRUE(contains("Bundle Ranch"));
  EXPECT_TRUE(contains("adult owl"));
  EXPECT_TRUE(contains("newborn children"));
}

}  // namespace
}  // namespace opforge
