#include <gtest/gtest.h>

#include "tae/error.hpp"
#include "tae/porter_stemmer.hpp"
#include "tae/text_model.hpp"

using namespace tae;

TEST(Tokenize, LowercasesAndDropsPunctuation) {
  EXPECT_EQ(tokenize("Hello, World!"), (Tokens{"hello", "world"}));
}

TEST(Tokenize, KeepsCaseWhenAsked) {
  TokenizerConfig cfg;
  cfg.lowercase = false;
  cfg.strip_punctuation = false;
  EXPECT_EQ(tokenize("Hello, World!", cfg), (Tokens{"Hello,", "World!"}));
}

TEST(Tokenize, UnicodeWhitespaceSeparates) {
  // no-break space and ideographic space
  EXPECT_EQ(tokenize("a\xC2\xA0" "b\xE3\x80\x80" "c"), (Tokens{"a", "b", "c"}));
}

TEST(Tokenize, NonAsciiLettersSurvive) {
  EXPECT_EQ(tokenize("Caf\xC3\xA9 \xE2\x80\x94 na\xC3\xAFve"), (Tokens{"caf\xC3\xA9", "na\xC3\xAFve"}));
}

TEST(Tokenize, EmptyAndBlank) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("  \n\t ").empty());
  EXPECT_TRUE(tokenize("... !!!").empty());
}

TEST(Tokenize, Deterministic) {
  const std::string text = "The order of panels: matters; a lot.";
  EXPECT_EQ(tokenize(text), tokenize(text));
}

TEST(TemplateKind, ParseAndPrint) {
  EXPECT_EQ(TemplateKind::parse("slides"), TemplateKind::slides());
  EXPECT_EQ(TemplateKind::parse("poster").rule(), PanelRule::PerSection);
  EXPECT_EQ(TemplateKind::parse("blog").rule(), PanelRule::WholeDocument);
  const auto c = TemplateKind::parse("custom:newsletter:paragraph");
  EXPECT_EQ(c.kind(), TemplateKind::Kind::Custom);
  EXPECT_EQ(c.name(), "newsletter");
  EXPECT_EQ(c.rule(), PanelRule::PerParagraph);
  EXPECT_EQ(c.to_string(), "custom:newsletter:paragraph");
  EXPECT_THROW(TemplateKind::parse("deck"), ValidationError);
  EXPECT_THROW(TemplateKind::parse("custom:x:sideways"), ValidationError);
}

TEST(Role, RoundTrip) {
  EXPECT_EQ(parse_role(to_string(Role::Reference)), Role::Reference);
  EXPECT_EQ(parse_role(to_string(Role::Generated)), Role::Generated);
  EXPECT_THROW(parse_role("other"), ValidationError);
}

TEST(MakeSequence, IndexesAndTokenizes) {
  const auto s = make_sequence({"A b", "", "c"}, Role::Reference, TemplateKind::poster());
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[1].index, 1u);
  EXPECT_TRUE(s[1].tokens.empty());
  EXPECT_EQ(s[0].tokens, (Tokens{"a", "b"}));
  EXPECT_EQ(s.role, Role::Reference);
  EXPECT_EQ(s.template_kind, TemplateKind::poster());
}

TEST(Utf8, Length) {
  EXPECT_EQ(utf8_length("abc"), 3u);
  EXPECT_EQ(utf8_length("\xC3\xA9t\xC3\xA9"), 3u);
  EXPECT_EQ(utf8_length("\xF0\x9F\x98\x80"), 1u);
}

TEST(Porter, ClassicExamples) {
  const std::pair<const char*, const char*> cases[] = {
      {"caresses", "caress"}, {"ponies", "poni"},       {"cats", "cat"},         {"feed", "feed"},
      {"agreed", "agre"},     {"plastered", "plaster"}, {"motoring", "motor"},   {"sing", "sing"},
      {"hopping", "hop"},     {"filing", "file"},       {"happy", "happi"},      {"relational", "relat"},
      {"sitting", "sit"},     {"generalization", "gener"}, {"running", "run"}, {"adjustment", "adjust"},
  };
  for (const auto& [in, out] : cases) EXPECT_EQ(porter_stem(in), out) << in;
}

TEST(Porter, LeavesShortAndNonLowercase) {
  EXPECT_EQ(porter_stem("is"), "is");
  EXPECT_EQ(porter_stem("Running"), "Running");
  EXPECT_EQ(porter_stem("r2d2"), "r2d2");
}
