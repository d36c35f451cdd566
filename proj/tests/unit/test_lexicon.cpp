#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"
#include "phenonote/error.hpp"
#include "phenonote/lexicon.hpp"
#include "phenonote/synth.hpp"
#include "test_util.hpp"

using namespace phenonote;

namespace {

std::set<std::string> terms_in(const std::string& text, std::vector<std::string> terms) {
    return scan_terms(Note{"n", text, Label::Unknown}, make_lexicon(terms, "test"));
}

LabeledCorpus notes(std::vector<std::string> texts) {
    LabeledCorpus c;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        c.notes.push_back({"n" + std::to_string(i), texts[i], Label::NonSmoker});
    }
    return c;
}

}  // namespace

TEST(LexiconTest, DirectContainment) {
    EXPECT_EQ(terms_in("severe copd and asthma", {"copd", "asthma", "heart failure"}),
              (std::set<std::string>{"copd", "asthma"}));
}

TEST(LexiconTest, LongestMatchConsumes) {
    EXPECT_EQ(terms_in("congestive heart failure", {"heart failure", "heart"}),
              (std::set<std::string>{"heart failure"}));
}

TEST(LexiconTest, WordBoundaryRequired) {
    EXPECT_TRUE(terms_in("copdx", {"copd"}).empty());
    EXPECT_TRUE(terms_in("xcopd", {"copd"}).empty());
    EXPECT_EQ(terms_in("(copd),copd.", {"copd"}), (std::set<std::string>{"copd"}));
    EXPECT_TRUE(terms_in("copdé", {"copd"}).empty());
}

TEST(LexiconTest, EachTermReportedOnce) {
    const Lexicon lex = make_lexicon({"asthma"}, "t");
    EXPECT_EQ(TermScanner(lex).scan("asthma asthma asthma"), (std::vector<std::uint32_t>{0}));
}

TEST(LexiconTest, MakeLexiconNormalizesAndValidates) {
    const auto lex = make_lexicon({"  Heart   FAILURE ", "heart failure", "copd"}, "t");
    EXPECT_EQ(lex.terms, (std::vector<std::string>{"heart failure", "copd"}));
    EXPECT_THROW(make_lexicon({"  "}, "t"), DataError);
    EXPECT_THROW(make_lexicon({"a b c d e f g"}, "t"), DataError);
    EXPECT_NO_THROW(make_lexicon({"a b c d e f"}, "t"));
}

TEST(LexiconTest, EmptyLexiconIsAnError) {
    EXPECT_THROW(scan_terms(Note{"n", "x", Label::Unknown}, Lexicon{}), DataError);
}

TEST(LexiconTest, ParseSkipsCommentsAndBlankLines) {
    const auto lex = parse_lexicon("# header\n\ncopd\n  asthma \n#x\n", "mem");
    EXPECT_EQ(lex.terms, (std::vector<std::string>{"copd", "asthma"}));
}

TEST(LexiconTest, ShippedLexiconLoads) {
    const auto lex = load_lexicon(testutil::lexicon_path());
    EXPECT_GE(lex.terms.size(), 1500u);
    EXPECT_LE(lex.terms.size(), 3000u);
    for (const auto& t : lex.terms) {
        EXPECT_EQ(normalize_text(t), t);
    }
}

TEST(LexiconTest, ScannerMatchesBruteForceOnRandomText) {
    const std::vector<std::string> terms{"a",     "a b",   "b",       "a b c", "c",   "b c",
                                         "c a b", "d",     "a b c d", "bb",    "b b", "c c c"};
    const Lexicon lex = make_lexicon(terms, "t");
    const TermScanner scanner(lex);
    const char* words[] = {"a", "b", "c", "d", "bb", "ab", "e"};
    const char* seps[] = {" ", " ", " ", ", ", ".", "-"};
    Rng rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        std::string text;
        const std::size_t len = 1 + rng.index(12);
        for (std::size_t i = 0; i < len; ++i) {
            if (i > 0) {
                text += seps[rng.index(6)];
            }
            text += words[rng.index(7)];
        }
        ASSERT_EQ(scanner.scan(text), oracle::scan(text, lex.terms)) << text;
    }
}

TEST(LexiconTest, VocabularyOrdering) {
    const auto lex = make_lexicon({"c", "a", "b"}, "t");
    const auto v = build_vocabulary(notes({"a b c", "a b", "a"}), lex, 2);
    EXPECT_EQ(v.terms, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(v.doc_freq, (std::vector<std::size_t>{3, 2}));
}

TEST(LexiconTest, VocabularyTieBreaksLexicographically) {
    const auto lex = make_lexicon({"zeta", "alpha"}, "t");
    const auto v = build_vocabulary(notes({"alpha zeta", "zeta alpha"}), lex, 1);
    EXPECT_EQ(v.terms, (std::vector<std::string>{"alpha"}));
}

TEST(LexiconTest, VocabularyKeepsOnlyMatchedTerms) {
    const auto lex = make_lexicon({"a", "b", "never"}, "t");
    const auto v = build_vocabulary(notes({"a", "b"}), lex, 250);
    EXPECT_EQ(v.size(), 2u);
    EXPECT_THROW(build_vocabulary(notes({"nothing here"}), lex, 250), DataError);
    EXPECT_THROW(build_vocabulary(LabeledCorpus{}, lex, 250), DataError);
}

TEST(LexiconTest, DuplicateNoteNeverLowersFrequency) {
    const auto lex = make_lexicon({"a", "b", "c"}, "t");
    auto c = notes({"a b", "b c", "c"});
    const auto before = document_frequencies(c, TermScanner(lex));
    c.notes.push_back({"dup", "b c", Label::NonSmoker});
    const auto after = document_frequencies(c, TermScanner(lex));
    for (std::size_t i = 0; i < before.size(); ++i) {
        EXPECT_GE(after[i], before[i]);
    }
}

TEST(LexiconTest, FeaturizeRow) {
    const auto lex = make_lexicon({"t0", "t1", "t2", "t3", "t4"}, "t");
    TermVocabulary vocab{{"t0", "t1", "t2", "t3", "t4"}, {1, 1, 1, 1, 1}};
    const auto fm = featurize(notes({"t3 and t0", "none"}), vocab, lex);
    ASSERT_EQ(fm.rows(), 2u);
    std::vector<int> row0;
    std::vector<int> row1;
    for (std::size_t j = 0; j < 5; ++j) {
        row0.push_back(fm.at(0, j));
        row1.push_back(fm.at(1, j));
    }
    EXPECT_EQ(row0, (std::vector<int>{1, 0, 0, 1, 0}));
    EXPECT_EQ(row1, (std::vector<int>{0, 0, 0, 0, 0}));
    EXPECT_THROW(featurize(notes({"x"}), TermVocabulary{}, lex), DataError);
}

TEST(LexiconTest, VocabularyCsvRoundTrip) {
    TermVocabulary v{{"heart failure", "a,b", "copd"}, {9, 4, 4}};
    EXPECT_EQ(parse_vocabulary_csv(write_vocabulary_csv(v), "mem"), v);
}

class SyntheticVocabularyTest : public ::testing::Test {
protected:
    void SetUp() override {
        lexicon_ = load_lexicon(testutil::lexicon_path());
        SyntheticConfig cfg;
        cfg.seed = 5;
        corpus_ = generate_synthetic_corpus(cfg, lexicon_);
        corpus_.train = normalize_text(corpus_.train);
        corpus_.test = normalize_text(corpus_.test);
    }
    Lexicon lexicon_;
    SyntheticCorpus corpus_;
};

TEST_F(SyntheticVocabularyTest, VocabularyMatchesHashMapRecount) {
    const auto vocab = build_vocabulary(corpus_.train, lexicon_, 250);
    ASSERT_EQ(vocab.size(), 250u);
    const auto recount = oracle::doc_freq(corpus_.train, lexicon_.terms);
    std::vector<std::pair<std::string, std::size_t>> ranked(recount.begin(), recount.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (std::size_t i = 0; i < 250; ++i) {
        EXPECT_EQ(vocab.terms[i], ranked[i].first);
        EXPECT_EQ(vocab.doc_freq[i], ranked[i].second);
    }
    EXPECT_EQ(build_vocabulary(corpus_.train, lexicon_, 250), vocab);
}

TEST_F(SyntheticVocabularyTest, FeaturesMatchRecount) {
    const auto vocab = build_vocabulary(corpus_.train, lexicon_, 250);
    for (const auto* c : {&corpus_.train, &corpus_.test}) {
        const auto fm = featurize(*c, vocab, lexicon_);
        ASSERT_EQ(fm.rows(), c->size());
        for (std::size_t i = 0; i < c->size(); ++i) {
            std::vector<std::uint8_t> expect(vocab.size(), 0);
            for (auto t : oracle::scan(c->notes[i].text, lexicon_.terms)) {
                const auto it = std::find(vocab.terms.begin(), vocab.terms.end(), lexicon_.terms[t]);
                if (it != vocab.terms.end()) {
                    expect[static_cast<std::size_t>(it - vocab.terms.begin())] = 1;
                }
            }
            for (std::size_t j = 0; j < vocab.size(); ++j) {
                ASSERT_EQ(fm.at(i, j), expect[j]) << "note " << i << " term " << vocab.terms[j];
            }
        }
    }
    // Column sums on the training corpus reproduce doc_freq.
    const auto fm = featurize(corpus_.train, vocab, lexicon_);
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        std::size_t sum = 0;
        for (std::size_t i = 0; i < fm.rows(); ++i) {
            sum += fm.at(i, j);
        }
        EXPECT_EQ(sum, vocab.doc_freq[j]);
    }
}

TEST_F(SyntheticVocabularyTest, ScanIsStableUnderRenormalization) {
    const TermScanner scanner(lexicon_);
    for (const auto& n : corpus_.train.notes) {
        const auto once = normalize_text(n.text);
        EXPECT_EQ(scanner.scan(once), scanner.scan(normalize_text(once)));
    }
}
