#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "phenonote/corpus.hpp"
#include "phenonote/lexicon.hpp"

namespace phenonote {

/// Planted-signal corpus parameters.
///
/// Each note is a bag of filler words with lexicon terms planted between them.
/// Every planted term t has a base presence rate p0. For the signal subset,
/// presence depends on the label:
///   P(t | smoker)     = p0 + s * (1 - p0)
///   P(t | non-smoker) = p0 * (1 - s)
/// so s = 0 carries no signal and s = 1 makes the signal terms a perfect
/// indicator. Smokers are split evenly between current and past smokers.
struct SyntheticConfig {
    std::size_t n_train = 400;
    std::size_t n_test = 100;
    std::size_t n_terms = 300;  ///< distinct lexicon terms in play
    double signal_strength = 0.8;
    double signal_fraction = 0.05;  ///< share of the planted terms that carry signal
    double base_rate = 0.12;        ///< p0
    double smoker_rate = 0.4;
    double unknown_rate = 0.0;  ///< notes labelled unknown (no signal)
    std::size_t filler_min = 20;
    std::size_t filler_max = 60;
    std::uint64_t seed = 0;

    /// Throws UsageError for probabilities outside [0, 1], empty splits or an
    /// inverted filler range.
    void validate() const;
};

struct SyntheticCorpus {
    LabeledCorpus train;
    LabeledCorpus test;
    std::vector<std::string> planted_terms;
    std::vector<std::string> signal_terms;
};

/// Filler vocabulary shared by all generated notes: words that never occur
/// inside any term of `lexicon`, so that scanning a note finds exactly the
/// planted terms.
std::vector<std::string> filler_words(const Lexicon& lexicon);

/// Generate raw-label train and test corpora. Throws UsageError when the
/// lexicon has fewer than n_terms terms or no filler word survives.
SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config, const Lexicon& lexicon);

}  // namespace phenonote
