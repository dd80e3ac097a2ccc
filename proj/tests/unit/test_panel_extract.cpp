#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "tae/error.hpp"
#include "tae/panel_extract.hpp"
#include "tae/util.hpp"

using namespace tae;

namespace {

std::string fixture(const std::string& name) { return util::read_file(std::string(TAE_FIXTURE_DIR) + "/" + name); }

std::vector<std::string> texts(const PanelSequence& s) {
  std::vector<std::string> out;
  for (const auto& p : s.panels) out.push_back(p.text);
  return out;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tae_test_" + name);
}

}  // namespace

TEST(StripLatex, PlainTextUnchanged) { EXPECT_EQ(strip_latex("  just   some\n text "), "just some text"); }

TEST(StripLatex, KeepsSectionArgument) { EXPECT_EQ(strip_latex("\\section{Intro} body"), "Intro body"); }

TEST(StripLatex, DropsReferencesAndComments) {
  EXPECT_EQ(strip_latex("See Fig.~\\ref{f1}\\label{x} % hidden\nnow"), "See Fig. now");
  EXPECT_EQ(strip_latex("100\\% sure"), "100% sure");
}

TEST(StripLatex, Golden) {
  EXPECT_EQ(strip_latex(fixture("strip_sample.tex")), util::trim(fixture("strip_sample.stripped.txt")));
}

TEST(StripLatex, NeverAddsTokens) {
  const std::string inputs[] = {fixture("strip_sample.tex"), fixture("beamer_sample.tex"),
                                "\\textbf{bold} and \\emph{em}", "{}{}{}", "\\\\ \\\\", "a\\\\b"};
  for (const auto& in : inputs) EXPECT_LE(tokenize(strip_latex(in)).size(), tokenize(in).size());
}

TEST(Extract, BeamerFixtureMatchesHandExtraction) {
  const auto ex = extract_panels(fixture("beamer_sample.tex"), TemplateKind::slides(), SourceFormat::LatexBeamer);
  EXPECT_FALSE(ex.degraded);
  EXPECT_EQ(texts(ex.sequence), parse_panel_dump(util::trim(fixture("beamer_sample.panels.txt"))));
}

TEST(Extract, ThreeFramesInOrder) {
  const std::string doc =
      "\\begin{document}\n\\begin{frame}{One}a\\end{frame}\n\\begin{frame}\\frametitle{Two}b\\end{frame}\n"
      "\\begin{frame}c\\end{frame}\n\\end{document}";
  const auto ex = extract_panels(doc, TemplateKind::slides(), SourceFormat::LatexBeamer);
  EXPECT_EQ(texts(ex.sequence), (std::vector<std::string>{"One a", "Two b", "c"}));
  EXPECT_EQ(ex.sequence.role, Role::Generated);
}

TEST(Extract, SentinelFramesKeepSourceOrder) {
  std::mt19937 rng(4);
  for (int round = 0; round < 20; ++round) {
    const int n = 1 + static_cast<int>(rng() % 12);
    std::string latex = "\\begin{document}\n", md, plain;
    for (int i = 0; i < n; ++i) {
      latex += "\\begin{frame}{S" + std::to_string(i) + "}\\end{frame}\n";
      md += "# S" + std::to_string(i) + "\n\n";
      plain += (i ? "\n===\n" : "") + std::string("S") + std::to_string(i);
    }
    latex += "\\end{document}\n";
    std::vector<std::string> expect;
    for (int i = 0; i < n; ++i) expect.push_back("S" + std::to_string(i));
    EXPECT_EQ(texts(extract_panels(latex, TemplateKind::slides(), SourceFormat::LatexBeamer).sequence), expect);
    EXPECT_EQ(texts(extract_panels(md, TemplateKind::slides(), SourceFormat::MarkdownLike).sequence), expect);
    EXPECT_EQ(texts(extract_panels(plain, TemplateKind::slides(), SourceFormat::PlainText).sequence), expect);
  }
}

TEST(Extract, EmptyFrameIsKept) {
  const std::string doc = "\\begin{frame}{A}x\\end{frame}\\begin{frame}\\end{frame}";
  EXPECT_EQ(texts(extract_panels(doc, TemplateKind::slides(), SourceFormat::LatexBeamer).sequence),
            (std::vector<std::string>{"A x", ""}));
}

TEST(Extract, BlogIsAlwaysOnePanel) {
  const std::string docs[] = {"", "one paragraph", "a\n\nb\n\nc", "\\begin{frame}x\\end{frame}\\begin{frame}y",
                              "# h1\ntext\n# h2\nmore", "\\section{A} a \\section{B} b"};
  for (const auto& d : docs)
    for (auto f : {SourceFormat::LatexBeamer, SourceFormat::LatexGeneric, SourceFormat::PlainText,
                   SourceFormat::MarkdownLike})
      EXPECT_EQ(extract_panels(d, TemplateKind::blog(), f).sequence.size(), 1u) << d;
}

TEST(Extract, PosterSectionsAndBlocks) {
  const std::string doc =
      "\\documentclass{article}\\title{T}\\begin{document}\\maketitle\n"
      "\\section{Intro} first\n"
      "\\begin{block}{Result} inner \\begin{block}{Nested} deep \\end{block} tail \\end{block}\n"
      "\\subsection{More} last\n\\end{document}";
  const auto ex = extract_panels(doc, TemplateKind::poster(), SourceFormat::LatexGeneric);
  EXPECT_FALSE(ex.degraded);
  EXPECT_EQ(texts(ex.sequence),
            (std::vector<std::string>{"T", "Intro first", "Result inner Nested deep tail", "More last"}));
}

TEST(Extract, MalformedLatexDegrades) {
  const std::string doc = "\\begin{frame}{A} one\n\n\\begin{itemize} two\n\\end{frame}";
  const auto ex = extract_panels(doc, TemplateKind::slides(), SourceFormat::LatexBeamer);
  EXPECT_TRUE(ex.degraded);
  ASSERT_FALSE(ex.warnings.empty());
  EXPECT_EQ(texts(ex.sequence), (std::vector<std::string>{"A one", "two"}));
}

TEST(Extract, NoFramesDegradesToParagraphs) {
  const auto ex = extract_panels("first para\n\nsecond para", TemplateKind::slides(), SourceFormat::LatexBeamer);
  EXPECT_TRUE(ex.degraded);
  EXPECT_EQ(ex.sequence.size(), 2u);
}

TEST(Extract, MarkdownSlidesSplitOnRulesAndHeadings) {
  const std::string md = "# Title\nintro *text*\n\n---\n\n## Next\n- item [link](http://x)\n\n---\nclosing";
  EXPECT_EQ(texts(extract_panels(md, TemplateKind::slides(), SourceFormat::MarkdownLike).sequence),
            (std::vector<std::string>{"Title intro text", "Next item link", "closing"}));
}

TEST(Extract, ParagraphRule) {
  const auto t = TemplateKind::custom("newsletter", PanelRule::PerParagraph);
  EXPECT_EQ(texts(extract_panels("a b\n\n\n c \n\nd", t, SourceFormat::PlainText).sequence),
            (std::vector<std::string>{"a b", "c", "d"}));
}

TEST(SourceFormat, Names) {
  for (auto f : {SourceFormat::LatexBeamer, SourceFormat::LatexGeneric, SourceFormat::PlainText,
                 SourceFormat::MarkdownLike})
    EXPECT_EQ(parse_source_format(to_string(f)), f);
  EXPECT_THROW(parse_source_format("pdf"), ValidationError);
}

TEST(Corpus, EmptyFileIsEmptyList) { EXPECT_TRUE(parse_corpus("").empty()); }

TEST(Corpus, TwoValidLines) {
  const auto recs = parse_corpus(
      "{\"id\":\"a\",\"template\":\"slides\",\"reference_panels\":[\"x\",\"y\"]}\n\n"
      "{\"id\":\"b\",\"template\":\"blog\",\"input_text\":\"doc\",\"reference_panels\":[\"z\"]}\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].reference_panels.size(), 2u);
  EXPECT_FALSE(recs[0].input_text);
  EXPECT_EQ(*recs[1].input_text, "doc");
  EXPECT_EQ(recs[1].template_kind, TemplateKind::blog());
}

TEST(Corpus, DuplicateIdReportsLine) {
  try {
    parse_corpus("{\"id\":\"a\",\"template\":\"slides\"}\n{\"id\":\"b\",\"template\":\"slides\"}\n"
                 "{\"id\":\"a\",\"template\":\"slides\"}\n");
    FAIL();
  } catch (const DuplicateId& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Corpus, MissingFieldAndBadJson) {
  try {
    parse_corpus("{\"id\":\"a\",\"template\":\"slides\"}\n{\"id\":\"b\"}\n");
    FAIL();
  } catch (const MissingField& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("template"), std::string::npos);
  }
  try {
    parse_corpus("not json\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(parse_corpus("{\"id\":\"a\",\"template\":\"deck\"}"), ParseError);
  EXPECT_THROW(parse_corpus("{\"id\":\"a\",\"template\":\"slides\",\"reference_panels\":[1]}"), ParseError);
}

TEST(Corpus, SaveLoadIsIdentity) {
  std::mt19937 rng(99);
  for (int round = 0; round < 3; ++round) {
    std::vector<CorpusRecord> recs;
    for (int i = 0; i < 5; ++i) {
      CorpusRecord r;
      r.id = "doc" + std::to_string(i) + "-\"q\"";
      r.template_kind = i % 2 ? TemplateKind::poster() : TemplateKind::custom("memo", PanelRule::PerParagraph);
      if (rng() % 2) r.input_text = "input \xC3\xA9\n" + std::to_string(rng());
      for (std::size_t k = 0; k < rng() % 4; ++k) r.reference_panels.push_back("panel " + std::to_string(rng()));
      recs.push_back(std::move(r));
    }
    const auto path = temp_path("corpus.jsonl");
    save_corpus(recs, path);
    EXPECT_EQ(load_corpus(path), recs);
  }
}

TEST(Panels, SaveLoadRoundTrip) {
  std::mt19937 rng(5);
  for (int round = 0; round < 3; ++round) {
    std::vector<std::string> t;
    for (std::size_t i = 0; i < 1 + rng() % 6; ++i) t.push_back("p" + std::to_string(rng()) + " \"quoted\"\n");
    const auto role = round % 2 ? Role::Reference : Role::Generated;
    const auto s = make_sequence(t, role, TemplateKind::custom("deck", PanelRule::PerFrame));
    const auto path = temp_path("panels.json");
    save_panels(s, path);
    EXPECT_EQ(load_panels(path), s);
  }
}

TEST(Panels, DumpRoundTrip) {
  const auto s = make_sequence({"a", "", "b c"}, Role::Generated, TemplateKind::slides());
  EXPECT_EQ(panel_dump(s), "a\n===\n\n===\nb c");
  EXPECT_EQ(parse_panel_dump(panel_dump(s)), texts(s));
}

TEST(Generated, StoredPanelsWinOverText) {
  GeneratedRecord r{"x", TemplateKind::slides(), SourceFormat::LatexBeamer, "\\begin{frame}a\\end{frame}",
                    std::vector<std::string>{"p", "q"}, ""};
  EXPECT_EQ(generated_panels(r).sequence.size(), 2u);
  r.panels.reset();
  EXPECT_EQ(generated_panels(r).sequence.size(), 1u);
  const auto back = parse_generated(serialize_generated({r}));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
}
