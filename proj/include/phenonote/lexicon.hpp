#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "phenonote/corpus.hpp"
#include "phenonote/io.hpp"

namespace phenonote {

inline constexpr std::size_t kMaxTermWords = 6;
inline constexpr std::size_t kDefaultTopK = 250;

/// Gazetteer of medical terms. Terms are unique, lowercase, and made of 1 to
/// 6 single-space separated words.
struct Lexicon {
    std::vector<std::string> terms;
    std::string source;
};

/// Normalize and validate a term list. Duplicates (after normalization) keep
/// their first occurrence. Throws DataError for empty terms or terms that are
/// longer than kMaxTermWords words.
Lexicon make_lexicon(const std::vector<std::string>& terms, std::string source);

/// One term per line, '#' starts a comment line, blank lines ignored.
Lexicon parse_lexicon(std::string_view text, std::string source);
Lexicon load_lexicon(const std::filesystem::path& path);

/// Dictionary matcher over a Lexicon.
///
/// Matches are whole-word phrase matches: the byte before and after a match
/// must be a non-alphanumeric ASCII byte (or the text edge). Bytes >= 0x80 are
/// treated as word characters. Overlaps resolve leftmost-longest: scanning
/// left to right, the longest term starting at a word start is taken and the
/// scan resumes after it.
class TermScanner {
public:
    explicit TermScanner(const Lexicon& lexicon);

    /// Indices into the lexicon of every term found, ascending and unique.
    std::vector<std::uint32_t> scan(std::string_view text) const;

    const Lexicon& lexicon() const { return lexicon_; }
    std::size_t term_count() const { return lexicon_.terms.size(); }

private:
    struct Node {
        std::vector<std::pair<unsigned char, std::uint32_t>> children;  // sorted by byte
        std::int32_t term = -1;
    };

    std::uint32_t child(std::uint32_t node, unsigned char byte) const;

    Lexicon lexicon_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> root_children_;  // 256 entries, 0 = absent
};

/// Set of lexicon terms present in a note (normalized text expected).
std::set<std::string> scan_terms(const Note& note, const Lexicon& lexicon);

/// Top terms by document frequency, ties broken by ascending term.
struct TermVocabulary {
    std::vector<std::string> terms;
    std::vector<std::size_t> doc_freq;

    std::size_t size() const { return terms.size(); }
    bool operator==(const TermVocabulary&) const = default;
};

/// Document frequency of every lexicon term over the corpus, indexed like the
/// lexicon.
std::vector<std::size_t> document_frequencies(const LabeledCorpus& corpus, const TermScanner& scanner);

TermVocabulary build_vocabulary(const LabeledCorpus& corpus, const Lexicon& lexicon,
                                std::size_t top_k = kDefaultTopK);

/// CSV `rank,term,doc_freq`, rank starting at 1.
std::string write_vocabulary_csv(const TermVocabulary& vocab);
TermVocabulary parse_vocabulary_csv(std::string_view text, std::string_view source);

/// Binary note x term presence matrix.
struct FeatureMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> terms;
    std::vector<std::uint8_t> values;  // row-major, rows x terms
    std::optional<std::vector<Label>> labels;
    LabelSpace label_space = LabelSpace::Raw4;

    std::size_t rows() const { return row_ids.size(); }
    std::size_t cols() const { return terms.size(); }
    std::uint8_t at(std::size_t r, std::size_t c) const { return values[r * terms.size() + c]; }

    Matrix to_matrix() const;
    Table to_table() const;
};

/// Presence of each vocabulary term in each note. The scan runs with the full
/// lexicon the vocabulary was built from, so that on the training corpus the
/// column sums reproduce doc_freq exactly. Every vocabulary term must be in the
/// lexicon.
FeatureMatrix featurize(const LabeledCorpus& corpus, const TermVocabulary& vocab, const Lexicon& lexicon);

}  // namespace phenonote
