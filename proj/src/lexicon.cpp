#include "phenonote/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "phenonote/error.hpp"

namespace phenonote {

namespace {

bool is_word_byte(unsigned char b) {
    return (b >= '0' && b <= '9') || (b >= 'a' && b <= 'z') || (b >= 'A' && b <= 'Z') || b >= 0x80;
}

std::size_t word_count(std::string_view term) {
    return static_cast<std::size_t>(std::count(term.begin(), term.end(), ' ')) + 1;
}

}  // namespace

Lexicon make_lexicon(const std::vector<std::string>& terms, std::string source) {
    Lexicon lex;
    lex.source = std::move(source);
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        std::string t = normalize_text(terms[i]);
        if (t.empty()) {
            throw DataError(lex.source + ": empty term at position " + std::to_string(i + 1));
        }
        if (word_count(t) > kMaxTermWords) {
            throw DataError(lex.source + ": term '" + t + "' has more than " + std::to_string(kMaxTermWords) +
                            " words");
        }
        if (seen.insert(t).second) {
            lex.terms.push_back(std::move(t));
        }
    }
    return lex;
}

Lexicon parse_lexicon(std::string_view text, std::string source) {
    std::vector<std::string> terms;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        std::string line(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        const std::string norm = normalize_text(line);
        if (norm.empty() || norm.front() == '#') {
            continue;
        }
        if (word_count(norm) > kMaxTermWords) {
            throw DataError(source + ":" + std::to_string(line_no) + ": term '" + norm + "' has more than " +
                            std::to_string(kMaxTermWords) + " words");
        }
        terms.push_back(norm);
    }
    return make_lexicon(terms, std::move(source));
}

Lexicon load_lexicon(const std::filesystem::path& path) {
    return parse_lexicon(read_file(path), path.string());
}

TermScanner::TermScanner(const Lexicon& lexicon) : lexicon_(lexicon), root_children_(256, 0) {
    if (lexicon_.terms.empty()) {
        throw DataError("lexicon '" + lexicon_.source + "' is empty");
    }
    nodes_.emplace_back();
    for (std::size_t t = 0; t < lexicon_.terms.size(); ++t) {
        std::uint32_t node = 0;
        for (unsigned char b : lexicon_.terms[t]) {
            auto& kids = nodes_[node].children;
            auto it = std::lower_bound(kids.begin(), kids.end(), b,
                                       [](const auto& kv, unsigned char key) { return kv.first < key; });
            if (it != kids.end() && it->first == b) {
                node = it->second;
            } else {
                const auto next = static_cast<std::uint32_t>(nodes_.size());
                kids.insert(it, {b, next});
                nodes_.emplace_back();
                node = next;
            }
        }
        if (nodes_[node].term < 0) {
            nodes_[node].term = static_cast<std::int32_t>(t);
        }
    }
    for (const auto& [b, idx] : nodes_[0].children) {
        root_children_[b] = idx;
    }
}

std::uint32_t TermScanner::child(std::uint32_t node, unsigned char byte) const {
    if (node == 0) {
        return root_children_[byte];
    }
    const auto& kids = nodes_[node].children;
    auto it = std::lower_bound(kids.begin(), kids.end(), byte,
                               [](const auto& kv, unsigned char key) { return kv.first < key; });
    return (it != kids.end() && it->first == byte) ? it->second : 0;
}

std::vector<std::uint32_t> TermScanner::scan(std::string_view text) const {
    std::vector<std::uint32_t> found;
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        if (i > 0 && is_word_byte(static_cast<unsigned char>(text[i - 1]))) {
            ++i;
            continue;
        }
        std::size_t best_end = 0;
        std::int32_t best_term = -1;
        std::uint32_t node = 0;
        for (std::size_t j = i; j < n; ++j) {
            node = child(node, static_cast<unsigned char>(text[j]));
            if (node == 0) {
                break;
            }
            const std::int32_t term = nodes_[node].term;
            if (term >= 0 && (j + 1 == n || !is_word_byte(static_cast<unsigned char>(text[j + 1])))) {
                best_end = j + 1;
                best_term = term;
            }
        }
        if (best_term >= 0) {
            found.push_back(static_cast<std::uint32_t>(best_term));
            i = best_end;
        } else {
            ++i;
        }
    }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    return found;
}

std::set<std::string> scan_terms(const Note& note, const Lexicon& lexicon) {
    TermScanner scanner(lexicon);
    std::set<std::string> out;
    for (auto idx : scanner.scan(note.text)) {
        out.insert(lexicon.terms[idx]);
    }
    return out;
}

std::vector<std::size_t> document_frequencies(const LabeledCorpus& corpus, const TermScanner& scanner) {
    std::vector<std::size_t> df(scanner.term_count(), 0);
    for (const auto& note : corpus.notes) {
        for (auto idx : scanner.scan(note.text)) {
            ++df[idx];
        }
    }
    return df;
}

TermVocabulary build_vocabulary(const LabeledCorpus& corpus, const Lexicon& lexicon, std::size_t top_k) {
    if (corpus.empty()) {
        throw DataError("cannot build a vocabulary from an empty corpus");
    }
    if (top_k == 0) {
        throw UsageError("top_k must be at least 1");
    }
    const TermScanner scanner(lexicon);
    const auto df = document_frequencies(corpus, scanner);

    std::vector<std::size_t> matched;
    for (std::size_t t = 0; t < df.size(); ++t) {
        if (df[t] > 0) {
            matched.push_back(t);
        }
    }
    if (matched.empty()) {
        throw DataError("no lexicon term from '" + lexicon.source + "' occurs in any note");
    }
    std::sort(matched.begin(), matched.end(), [&](std::size_t a, std::size_t b) {
        if (df[a] != df[b]) {
            return df[a] > df[b];
        }
        return lexicon.terms[a] < lexicon.terms[b];
    });
    matched.resize(std::min(matched.size(), top_k));

    TermVocabulary vocab;
    for (auto t : matched) {
        vocab.terms.push_back(lexicon.terms[t]);
        vocab.doc_freq.push_back(df[t]);
    }
    return vocab;
}

std::string write_vocabulary_csv(const TermVocabulary& vocab) {
    std::string out = "rank,term,doc_freq\n";
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        out += std::to_string(i + 1) + "," + csv_escape(vocab.terms[i]) + "," + std::to_string(vocab.doc_freq[i]) +
               "\n";
    }
    return out;
}

TermVocabulary parse_vocabulary_csv(std::string_view text, std::string_view source) {
    const std::string src(source);
    TermVocabulary vocab;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool header = false;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (!header) {
            if (fields != std::vector<std::string>{"rank", "term", "doc_freq"}) {
                throw DataError(src + ": expected header 'rank,term,doc_freq'");
            }
            header = true;
            continue;
        }
        const std::string where = src + ":" + std::to_string(line_no);
        if (fields.size() != 3) {
            throw DataError(where + ": expected 3 fields");
        }
        std::size_t rank = 0;
        std::size_t df = 0;
        auto r1 = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), rank);
        auto r2 = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), df);
        if (r1.ec != std::errc() || r2.ec != std::errc() || rank != vocab.size() + 1 || df == 0) {
            throw DataError(where + ": bad rank or doc_freq");
        }
        if (!vocab.terms.empty()) {
            const auto prev_df = vocab.doc_freq.back();
            if (df > prev_df || (df == prev_df && fields[1] <= vocab.terms.back())) {
                throw DataError(where + ": vocabulary is not in (doc_freq desc, term asc) order");
            }
        }
        vocab.terms.push_back(fields[1]);
        vocab.doc_freq.push_back(df);
    }
    if (!header) {
        throw DataError(src + ": empty vocabulary file");
    }
    return vocab;
}

Matrix FeatureMatrix::to_matrix() const {
    Matrix m(rows(), cols());
    for (std::size_t i = 0; i < values.size(); ++i) {
        m.data()[i] = values[i];
    }
    return m;
}

Table FeatureMatrix::to_table() const {
    Table t;
    t.row_ids = row_ids;
    t.columns = terms;
    t.values = to_matrix();
    if (labels) {
        t.labels.emplace();
        for (Label l : *labels) {
            t.labels->emplace_back(label_name(l));
        }
    }
    return t;
}

FeatureMatrix featurize(const LabeledCorpus& corpus, const TermVocabulary& vocab, const Lexicon& lexicon) {
    if (vocab.size() == 0) {
        throw DataError("cannot featurize with an empty vocabulary");
    }
    std::unordered_map<std::string_view, std::size_t> lex_index;
    for (std::size_t i = 0; i < lexicon.terms.size(); ++i) {
        lex_index.emplace(lexicon.terms[i], i);
    }
    // lexicon index -> vocabulary column, or npos
    std::vector<std::size_t> column(lexicon.terms.size(), static_cast<std::size_t>(-1));
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        auto it = lex_index.find(vocab.terms[j]);
        if (it == lex_index.end()) {
            throw DataError("vocabulary term '" + vocab.terms[j] + "' is not in lexicon '" + lexicon.source + "'");
        }
        column[it->second] = j;
    }

    const TermScanner scanner(lexicon);
    FeatureMatrix fm;
    fm.terms = vocab.terms;
    fm.label_space = corpus.label_space;
    fm.values.assign(corpus.size() * vocab.size(), 0);
    fm.labels.emplace();
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& note = corpus.notes[i];
        fm.row_ids.push_back(note.id);
        fm.labels->push_back(note.label);
        for (auto idx : scanner.scan(note.text)) {
            const auto col = column[idx];
            if (col != static_cast<std::size_t>(-1)) {
                fm.values[i * vocab.size() + col] = 1;
            }
        }
    }
    return fm;
}

}  // namespace phenonote
