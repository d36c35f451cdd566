#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phenonote/corpus.hpp"

namespace phenonote {

// PHEB1 layout (all integers and floats little-endian):
//   "PHEB1" | version u8 (=1) | mode u8 (0 averaged, 1 per_chunk) | count u32 | dim u32
//   then per record:
//     id_len u16 | id bytes (UTF-8) | [per_chunk: chunk_count u16] | chunk_count * dim f32
inline constexpr std::string_view kPhebMagic = "PHEB1";
inline constexpr std::uint8_t kPhebVersion = 1;

enum class EmbeddingMode : std::uint8_t { Averaged = 0, PerChunk = 1 };

struct EmbeddingRecord {
    std::string id;
    std::size_t chunks = 1;     ///< always 1 in averaged mode
    std::vector<float> values;  ///< chunks x dim

    bool operator==(const EmbeddingRecord&) const = default;
};

struct EmbeddingSet {
    std::uint32_t dim = 0;
    EmbeddingMode mode = EmbeddingMode::Averaged;
    std::vector<EmbeddingRecord> records;
    std::optional<std::vector<Label>> labels;  ///< from a sidecar, never stored in the file

    std::size_t size() const { return records.size(); }
    bool operator==(const EmbeddingSet&) const = default;
};

/// Throws DataError if a record has the wrong length, a non-finite value, an
/// empty or oversized id, a bad chunk count, or ids repeat.
void validate(const EmbeddingSet& set);

std::string encode_embeddings(const EmbeddingSet& set);
/// `source` names the input in error messages. Errors carry the byte offset.
EmbeddingSet decode_embeddings(std::string_view bytes, std::string_view source);

EmbeddingSet read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);

/// Exact size in bytes of the encoded set.
std::size_t encoded_size(const EmbeddingSet& set);

/// Per-note mean over chunk vectors, accumulated in double and stored as
/// float. Averaged input passes through unchanged.
EmbeddingSet average_chunks(const EmbeddingSet& set);

/// Labels for every record, looked up by id in a sidecar corpus (JSONL with
/// id/label, text optional). Throws DataError for ids missing from the sidecar.
std::vector<Label> align_labels(const EmbeddingSet& set, const LabeledCorpus& sidecar);

/// Read a label sidecar: JSONL objects with "id" and "label" ("text" optional).
LabeledCorpus read_label_sidecar(const std::filesystem::path& path);

/// Linearly separable synthetic set: class c is centred on 3 * e_(c mod dim)
/// (shifted further for c >= dim) with uniform noise in [-0.5, 0.5] per axis.
/// Records are named "emb-<i>"; labels cycle through `classes`.
EmbeddingSet synthesize_embeddings(std::size_t n, std::uint32_t dim, std::size_t classes, std::uint64_t seed,
                                   std::size_t chunks_per_note = 1);

/// Embeddings for every note of a corpus, separable by the note's class index
/// in `space`. Ids and order follow the corpus.
EmbeddingSet synthesize_embeddings_for(const LabeledCorpus& corpus, LabelSpace space, std::uint32_t dim,
                                       std::uint64_t seed);

/// Human-readable header and per-note chunk counts.
std::string describe_embeddings(const EmbeddingSet& set);

}  // namespace phenonote
