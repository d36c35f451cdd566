#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phenonote {

/// Smoking-status label. The first four values form the raw space; Smoker only
/// appears after consolidation. NonSmoker is shared by both spaces.
enum class Label { CurrentSmoker, PastSmoker, NonSmoker, Unknown, Smoker };

enum class LabelSpace { Raw4, Binary2 };

enum class CorpusFormat { Jsonl, N2c2Xml };

struct Note {
    std::string id;
    std::string text;
    Label label = Label::Unknown;

    bool operator==(const Note&) const = default;
};

struct LabeledCorpus {
    std::vector<Note> notes;
    LabelSpace label_space = LabelSpace::Raw4;

    std::size_t size() const { return notes.size(); }
    bool empty() const { return notes.empty(); }
    bool operator==(const LabeledCorpus&) const = default;
};

/// Canonical lowercase label string ("current smoker", "non-smoker", ...).
std::string_view label_name(Label label);

/// Case-insensitive parse of the accepted label strings. Surrounding
/// whitespace is ignored. Returns nullopt for anything else.
std::optional<Label> parse_label(std::string_view text);

/// Number of classes in a label space (4 or 2).
std::size_t label_space_size(LabelSpace space);

/// Dense class index of a label within its space.
/// Raw4: current=0, past=1, non=2, unknown=3. Binary2: non-smoker=0, smoker=1.
std::size_t class_index(Label label, LabelSpace space);

/// Inverse of class_index.
Label label_at(std::size_t index, LabelSpace space);

std::vector<std::string> class_names(LabelSpace space);

std::string_view label_space_name(LabelSpace space);

/// Binary2 when every label is "smoker" or "non-smoker" and at least one is
/// "smoker"; Raw4 otherwise.
LabelSpace infer_label_space(std::span<const Label> labels);

/// Apply the space to labels read from a file: in Raw4 a bare "smoker" is a
/// current smoker.
void resolve_labels(std::vector<Label>& labels, LabelSpace space);

struct ParsedLabels {
    std::vector<Label> labels;
    LabelSpace space = LabelSpace::Raw4;
};

/// Parse label strings (e.g. a CSV label column) with the same space
/// inference as corpus ingestion. Throws DataError naming the bad entry.
ParsedLabels parse_labels(std::span<const std::string> names, std::string_view source);
LabelSpace parse_label_space(std::string_view text);

/// Load a corpus from disk. The result preserves file order.
///
/// Label space is inferred for JSONL: a file whose labels are all "smoker" or
/// "non-smoker" with at least one "smoker" is read as Binary2. Otherwise the
/// corpus is Raw4 and a bare "smoker" label is read as CurrentSmoker.
LabeledCorpus ingest_corpus(const std::filesystem::path& path, CorpusFormat format);

LabeledCorpus parse_jsonl_corpus(std::istream& in, std::string_view source);
LabeledCorpus parse_n2c2_xml(std::string_view xml, std::string_view source);

void write_jsonl_corpus(const LabeledCorpus& corpus, std::ostream& out);
std::string to_jsonl(const LabeledCorpus& corpus);

/// Lowercase (Unicode simple case mapping) and collapse whitespace runs to a
/// single space, trimming both ends.
std::string normalize_text(std::string_view text);

LabeledCorpus normalize_text(const LabeledCorpus& corpus);

/// What consolidation does with Unknown notes. Drop is the training
/// behaviour; AsNonSmoker exists for evaluating on unfiltered test sets.
enum class UnknownPolicy { Drop, AsNonSmoker };

struct ConsolidationResult {
    LabeledCorpus corpus;
    std::size_t removed_unknown = 0;
};

/// Map current/past smokers to Smoker and keep NonSmoker. Unknown notes are
/// dropped (or relabelled, per policy). Relative order is preserved.
/// Throws DataError if the corpus is already Binary2.
ConsolidationResult consolidate_labels(const LabeledCorpus& corpus,
                                       UnknownPolicy policy = UnknownPolicy::Drop);

}  // namespace phenonote
