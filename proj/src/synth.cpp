#include "phenonote/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "phenonote/error.hpp"
#include "phenonote/rng.hpp"

namespace phenonote {

namespace {

constexpr const char* kFillerCandidates[] = {
    "patient", "was",     "seen",    "today",    "for",       "follow",   "up",       "visit",    "reports",
    "feeling", "well",    "overall", "with",     "no",        "new",      "complaints", "the",    "and",
    "a",       "of",      "to",      "in",       "on",        "at",       "by",       "is",       "has",
    "had",     "been",    "will",    "return",   "clinic",    "next",     "week",     "month",    "plan",
    "discussed", "family", "history", "social",  "exam",      "notable",  "without",  "further", "review",
    "systems", "otherwise", "normal", "stable",  "continue",  "current",  "home",     "medications", "as",
    "before",  "after",   "morning", "evening",  "daily",     "noted",    "per",      "nurse",    "team",
    "admitted", "discharged", "ward", "room",    "bed",       "called",   "phone",    "contact",  "daughter",
    "son",     "wife",    "husband", "lives",    "alone",     "works",    "office",   "retired",  "teacher",
    "walks",   "dog",     "garden",  "kitchen",  "car",       "drives",   "bus",      "appointment", "scheduled",
    "labs",    "drawn",   "results", "pending",  "reviewed",  "agrees",   "understands", "questions", "answered",
    "this",    "that",    "these",   "those",    "were",      "are",      "be",       "it",       "he",
    "she",     "they",    "his",     "her",      "their",     "from",     "into",     "over",     "under",
    "about",   "again",   "also",    "then",     "than",      "very",     "mild",     "some",     "any",
    "denies",  "states",  "reported", "describes", "since",   "last",     "year",     "years",    "ago",
    "first",   "second",  "third",   "prior",    "recently",  "monitor",  "check",    "weight",   "height",
    "temperature", "vitals", "signed", "dictated", "transcribed", "date",  "time",     "record",   "note",
};

std::string capitalize(std::string word) {
    if (!word.empty()) {
        word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
    }
    return word;
}

Label draw_label(const SyntheticConfig& c, Rng& rng) {
    const double u = rng.uniform();
    if (u < c.unknown_rate) {
        return Label::Unknown;
    }
    if (u < c.unknown_rate + (1.0 - c.unknown_rate) * c.smoker_rate) {
        return rng.bernoulli(0.5) ? Label::CurrentSmoker : Label::PastSmoker;
    }
    return Label::NonSmoker;
}

bool is_smoker(Label l) {
    return l == Label::CurrentSmoker || l == Label::PastSmoker;
}

struct Plan {
    const SyntheticConfig& config;
    const std::vector<std::string>& fillers;
    const std::vector<std::string>& planted;
    const std::vector<bool>& is_signal;
};

std::string make_text(const Plan& p, Label label, Rng& rng) {
    const auto& c = p.config;
    const double s = c.signal_strength;
    const double p0 = c.base_rate;
    const double p_smoker = p0 + s * (1.0 - p0);
    const double p_non = p0 * (1.0 - s);

    std::vector<std::size_t> terms;
    for (std::size_t t = 0; t < p.planted.size(); ++t) {
        double prob = p0;
        if (p.is_signal[t] && label != Label::Unknown) {
            prob = is_smoker(label) ? p_smoker : p_non;
        }
        if (rng.bernoulli(prob)) {
            terms.push_back(t);
        }
    }
    rng.shuffle(terms);

    std::size_t n_fill = c.filler_min + rng.index(c.filler_max - c.filler_min + 1);
    n_fill = std::max(n_fill, terms.size() + 1);

    // Each planted term goes into its own gap between two fillers, so terms
    // are never adjacent and cannot fuse into a longer lexicon phrase.
    std::vector<std::size_t> gaps(n_fill - 1);
    std::iota(gaps.begin(), gaps.end(), 0);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        std::swap(gaps[i], gaps[i + rng.index(gaps.size() - i)]);
    }
    std::vector<std::ptrdiff_t> term_at_gap(n_fill - 1, -1);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        term_at_gap[gaps[i]] = static_cast<std::ptrdiff_t>(terms[i]);
    }

    std::vector<std::string> tokens;
    tokens.reserve(n_fill + terms.size());
    for (std::size_t f = 0; f < n_fill; ++f) {
        tokens.push_back(p.fillers[rng.index(p.fillers.size())]);
        if (f + 1 < n_fill && term_at_gap[f] >= 0) {
            std::string term = p.planted[static_cast<std::size_t>(term_at_gap[f])];
            // Some terms are written in capitals, as in abbreviations.
            if (rng.bernoulli(0.1)) {
                std::transform(term.begin(), term.end(), term.begin(),
                               [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
            }
            tokens.push_back(std::move(term));
        }
    }

    std::string text;
    std::size_t until_stop = 6 + rng.index(8);
    bool sentence_start = true;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!text.empty()) {
            text += rng.bernoulli(0.05) ? "\n" : " ";
        }
        text += sentence_start ? capitalize(tokens[i]) : tokens[i];
        sentence_start = false;
        if (--until_stop == 0 || i + 1 == tokens.size()) {
            text += '.';
            sentence_start = true;
            until_stop = 6 + rng.index(8);
        }
    }
    return text;
}

LabeledCorpus make_split(const Plan& p, std::size_t n, const std::string& prefix, Rng& rng) {
    LabeledCorpus corpus;
    corpus.label_space = LabelSpace::Raw4;
    const std::size_t width = std::to_string(n).size();
    for (std::size_t i = 0; i < n; ++i) {
        Note note;
        std::string num = std::to_string(i + 1);
        note.id = prefix + "-" + std::string(width - num.size(), '0') + num;
        note.label = draw_label(p.config, rng);
        note.text = make_text(p, note.label, rng);
        corpus.notes.push_back(std::move(note));
    }
    return corpus;
}

}  // namespace

void SyntheticConfig::validate() const {
    auto prob = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw UsageError(std::string(name) + " must be in [0, 1]");
        }
    };
    prob(signal_strength, "signal_strength");
    prob(signal_fraction, "signal_fraction");
    prob(base_rate, "base_rate");
    prob(smoker_rate, "smoker_rate");
    prob(unknown_rate, "unknown_rate");
    if (n_train == 0 || n_test == 0) {
        throw UsageError("synthetic corpora need at least one train and one test note");
    }
    if (n_terms == 0) {
        throw UsageError("n_terms must be at least 1");
    }
    if (filler_min == 0 || filler_min > filler_max) {
        throw UsageError("filler range must satisfy 1 <= filler_min <= filler_max");
    }
}

std::vector<std::string> filler_words(const Lexicon& lexicon) {
    // Words split on every non-word byte, matching the scanner's boundaries.
    std::unordered_set<std::string> term_words;
    for (const auto& term : lexicon.terms) {
        std::string word;
        for (const char c : term + " ") {
            const auto ch = static_cast<unsigned char>(c);
            if (std::isalnum(ch) || ch >= 0x80) {
                word += c;
            } else if (!word.empty()) {
                term_words.insert(word);
                word.clear();
            }
        }
    }
    std::vector<std::string> out;
    for (const char* w : kFillerCandidates) {
        if (!term_words.contains(w)) {
            out.emplace_back(w);
        }
    }
    return out;
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config, const Lexicon& lexicon) {
    config.validate();
    if (lexicon.terms.size() < config.n_terms) {
        throw UsageError("lexicon has " + std::to_string(lexicon.terms.size()) + " terms, " +
                         std::to_string(config.n_terms) + " requested");
    }
    const auto fillers = filler_words(lexicon);
    if (fillers.empty()) {
        throw UsageError("every filler word collides with a lexicon term");
    }

    Rng pick(Rng::derive(config.seed, 0));
    std::vector<std::size_t> idx(lexicon.terms.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < config.n_terms; ++i) {
        std::swap(idx[i], idx[i + pick.index(idx.size() - i)]);
    }
    SyntheticCorpus out;
    for (std::size_t i = 0; i < config.n_terms; ++i) {
        out.planted_terms.push_back(lexicon.terms[idx[i]]);
    }
    const auto n_signal = static_cast<std::size_t>(
        std::llround(config.signal_fraction * static_cast<double>(config.n_terms)));
    std::vector<bool> is_signal(config.n_terms, false);
    for (std::size_t i = 0; i < n_signal; ++i) {
        is_signal[i] = true;
        out.signal_terms.push_back(out.planted_terms[i]);
    }

    const Plan plan{config, fillers, out.planted_terms, is_signal};
    Rng train_rng(Rng::derive(config.seed, 1));
    Rng test_rng(Rng::derive(config.seed, 2));
    out.train = make_split(plan, config.n_train, "train", train_rng);
    out.test = make_split(plan, config.n_test, "test", test_rng);
    return out;
}

}  // namespace phenonote
