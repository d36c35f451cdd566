#include "phenonote/embeddings.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "phenonote/error.hpp"
#include "phenonote/io.hpp"
#include "phenonote/rng.hpp"

namespace phenonote {

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559, "PHEB1 needs IEEE-754 binary32");

void put_u16(std::string& out, std::uint16_t v) {
    out += static_cast<char>(v & 0xFF);
    out += static_cast<char>((v >> 8) & 0xFF);
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out += static_cast<char>((v >> (8 * i)) & 0xFF);
    }
}

void put_f32(std::string& out, float f) {
    put_u32(out, std::bit_cast<std::uint32_t>(f));
}

class Reader {
public:
    Reader(std::string_view bytes, std::string_view source) : bytes_(bytes), source_(source) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    [[noreturn]] void fail(const std::string& what, std::size_t at) const {
        throw DataError(std::string(source_) + ": " + what + " at byte offset " + std::to_string(at));
    }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n) {
            fail(std::string("truncated ") + what, pos_);
        }
    }

    std::uint8_t u8(const char* what) {
        need(1, what);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }

    std::uint16_t u16(const char* what) {
        need(2, what);
        const auto b0 = static_cast<std::uint8_t>(bytes_[pos_]);
        const auto b1 = static_cast<std::uint8_t>(bytes_[pos_ + 1]);
        pos_ += 2;
        return static_cast<std::uint16_t>(b0 | (b1 << 8));
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_ + static_cast<std::size_t>(i)]))
                 << (8 * i);
        }
        pos_ += 4;
        return v;
    }

    float f32(const char* what) {
        const std::size_t at = pos_;
        const float f = std::bit_cast<float>(u32(what));
        if (!std::isfinite(f)) {
            fail("non-finite float", at);
        }
        return f;
    }

    std::string_view take(std::size_t n, const char* what) {
        need(n, what);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

private:
    std::string_view bytes_;
    std::string_view source_;
    std::size_t pos_ = 0;
};

Label synthetic_label(std::size_t cls, std::size_t classes) {
    return classes == 2 ? label_at(cls, LabelSpace::Binary2) : label_at(cls, LabelSpace::Raw4);
}

}  // namespace

void validate(const EmbeddingSet& set) {
    if (set.records.size() > 0xFFFFFFFFULL) {
        throw DataError("too many embedding records");
    }
    std::unordered_set<std::string_view> ids;
    for (std::size_t r = 0; r < set.records.size(); ++r) {
        const auto& rec = set.records[r];
        const std::string where = "embedding record " + std::to_string(r + 1) + " ('" + rec.id + "')";
        if (rec.id.empty() || rec.id.size() > 0xFFFF) {
            throw DataError(where + ": id length must be in [1, 65535]");
        }
        if (!ids.insert(rec.id).second) {
            throw DataError(where + ": duplicate id");
        }
        if (rec.chunks == 0 || rec.chunks > 0xFFFF) {
            throw DataError(where + ": chunk count must be in [1, 65535]");
        }
        if (set.mode == EmbeddingMode::Averaged && rec.chunks != 1) {
            throw DataError(where + ": averaged records have exactly one vector");
        }
        if (rec.values.size() != rec.chunks * set.dim) {
            throw DataError(where + ": expected " + std::to_string(rec.chunks * set.dim) + " values, found " +
                            std::to_string(rec.values.size()));
        }
        for (float v : rec.values) {
            if (!std::isfinite(v)) {
                throw DataError(where + ": non-finite value");
            }
        }
    }
    if (set.labels && set.labels->size() != set.records.size()) {
        throw DataError("embedding labels do not align with records");
    }
}

std::size_t encoded_size(const EmbeddingSet& set) {
    std::size_t n = kPhebMagic.size() + 2 + 4 + 4;
    for (const auto& rec : set.records) {
        n += 2 + rec.id.size() + (set.mode == EmbeddingMode::PerChunk ? 2 : 0) + 4 * rec.values.size();
    }
    return n;
}

std::string encode_embeddings(const EmbeddingSet& set) {
    validate(set);
    std::string out;
    out.reserve(encoded_size(set));
    out += kPhebMagic;
    out += static_cast<char>(kPhebVersion);
    out += static_cast<char>(set.mode);
    put_u32(out, static_cast<std::uint32_t>(set.records.size()));
    put_u32(out, set.dim);
    for (const auto& rec : set.records) {
        put_u16(out, static_cast<std::uint16_t>(rec.id.size()));
        out += rec.id;
        if (set.mode == EmbeddingMode::PerChunk) {
            put_u16(out, static_cast<std::uint16_t>(rec.chunks));
        }
        for (float v : rec.values) {
            put_f32(out, v);
        }
    }
    return out;
}

EmbeddingSet decode_embeddings(std::string_view bytes, std::string_view source) {
    Reader in(bytes, source);
    const auto magic = in.take(kPhebMagic.size(), "magic");
    if (magic != kPhebMagic) {
        in.fail("bad magic (expected PHEB1)", 0);
    }
    const std::size_t version_at = in.offset();
    if (in.u8("version") != kPhebVersion) {
        in.fail("unsupported version", version_at);
    }
    const std::size_t mode_at = in.offset();
    const auto mode = in.u8("mode");
    if (mode > 1) {
        in.fail("bad mode byte", mode_at);
    }
    EmbeddingSet set;
    set.mode = static_cast<EmbeddingMode>(mode);
    const auto count = in.u32("record count");
    set.dim = in.u32("dim");
    std::unordered_set<std::string> ids;
    set.records.reserve(std::min<std::size_t>(count, 1u << 20));
    for (std::uint32_t r = 0; r < count; ++r) {
        const std::size_t rec_at = in.offset();
        EmbeddingRecord rec;
        const auto id_len = in.u16("id length");
        if (id_len == 0) {
            in.fail("empty id", rec_at);
        }
        rec.id = std::string(in.take(id_len, "id"));
        if (!ids.insert(rec.id).second) {
            in.fail("duplicate id '" + rec.id + "'", rec_at);
        }
        if (set.mode == EmbeddingMode::PerChunk) {
            const std::size_t chunk_at = in.offset();
            rec.chunks = in.u16("chunk count");
            if (rec.chunks == 0) {
                in.fail("zero chunk count", chunk_at);
            }
        }
        const std::size_t n = rec.chunks * set.dim;
        in.need(4 * n, "vector data");
        rec.values.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            rec.values[k] = in.f32("vector data");
        }
        set.records.push_back(std::move(rec));
    }
    if (in.remaining() != 0) {
        in.fail(std::to_string(in.remaining()) + " trailing bytes", in.offset());
    }
    return set;
}

EmbeddingSet read_embeddings(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.empty()) {
        throw DataError(path.string() + ": empty embedding file");
    }
    return decode_embeddings(bytes, path.string());
}

void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
    write_file_atomic(path, encode_embeddings(set));
}

EmbeddingSet average_chunks(const EmbeddingSet& set) {
    EmbeddingSet out;
    out.dim = set.dim;
    out.mode = EmbeddingMode::Averaged;
    out.labels = set.labels;
    out.records.reserve(set.records.size());
    for (const auto& rec : set.records) {
        if (rec.chunks == 0) {
            throw DataError("note '" + rec.id + "' has no chunks");
        }
        std::vector<double> acc(set.dim, 0.0);
        for (std::size_t c = 0; c < rec.chunks; ++c) {
            for (std::size_t d = 0; d < set.dim; ++d) {
                acc[d] += rec.values[c * set.dim + d];
            }
        }
        EmbeddingRecord avg;
        avg.id = rec.id;
        avg.chunks = 1;
        avg.values.resize(set.dim);
        for (std::size_t d = 0; d < set.dim; ++d) {
            avg.values[d] = static_cast<float>(acc[d] / static_cast<double>(rec.chunks));
        }
        out.records.push_back(std::move(avg));
    }
    return out;
}

LabeledCorpus read_label_sidecar(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    LabeledCorpus corpus;
    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": malformed JSON: " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("label") || !j["label"].is_string()) {
            throw DataError(where + ": expected an object with 'id' and 'label'");
        }
        Note n;
        n.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
        if (!seen.insert(n.id).second) {
            throw DataError(where + ": duplicate id '" + n.id + "'");
        }
        const auto label_text = j["label"].get<std::string>();
        const auto label = parse_label(label_text);
        if (!label) {
            throw DataError(where + ": unknown label '" + label_text + "'");
        }
        n.label = *label;
        if (j.contains("text") && j["text"].is_string()) {
            n.text = j["text"].get<std::string>();
        }
        corpus.notes.push_back(std::move(n));
    }
    std::vector<Label> labels;
    for (const auto& n : corpus.notes) {
        labels.push_back(n.label);
    }
    corpus.label_space = infer_label_space(labels);
    resolve_labels(labels, corpus.label_space);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        corpus.notes[i].label = labels[i];
    }
    return corpus;
}

std::vector<Label> align_labels(const EmbeddingSet& set, const LabeledCorpus& sidecar) {
    std::unordered_map<std::string_view, Label> by_id;
    for (const auto& n : sidecar.notes) {
        by_id.emplace(n.id, n.label);
    }
    std::vector<Label> out;
    out.reserve(set.records.size());
    for (const auto& rec : set.records) {
        auto it = by_id.find(rec.id);
        if (it == by_id.end()) {
            throw DataError("no label for embedding id '" + rec.id + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

EmbeddingSet synthesize_embeddings(std::size_t n, std::uint32_t dim, std::size_t classes, std::uint64_t seed,
                                   std::size_t chunks_per_note) {
    if (classes < 2 || classes > 4) {
        throw UsageError("synthetic embeddings support 2 to 4 classes");
    }
    if (dim < classes) {
        throw UsageError("synthetic embeddings need dim >= classes");
    }
    if (chunks_per_note == 0 || chunks_per_note > 0xFFFF) {
        throw UsageError("chunks per note must be in [1, 65535]");
    }
    Rng rng(seed);
    EmbeddingSet set;
    set.dim = dim;
    set.mode = chunks_per_note == 1 ? EmbeddingMode::Averaged : EmbeddingMode::PerChunk;
    set.labels.emplace();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cls = i % classes;
        EmbeddingRecord rec;
        rec.id = "emb-" + std::to_string(i);
        rec.chunks = chunks_per_note;
        rec.values.resize(chunks_per_note * dim);
        for (std::size_t c = 0; c < chunks_per_note; ++c) {
            for (std::size_t d = 0; d < dim; ++d) {
                const double centre = d == cls ? 3.0 : 0.0;
                rec.values[c * dim + d] = static_cast<float>(centre + rng.uniform(-0.5, 0.5));
            }
        }
        set.records.push_back(std::move(rec));
        set.labels->push_back(synthetic_label(cls, classes));
    }
    return set;
}

EmbeddingSet synthesize_embeddings_for(const LabeledCorpus& corpus, LabelSpace space, std::uint32_t dim,
                                       std::uint64_t seed) {
    const std::size_t classes = label_space_size(space);
    if (dim < classes) {
        throw UsageError("synthetic embeddings need dim >= classes");
    }
    Rng rng(seed);
    EmbeddingSet set;
    set.dim = dim;
    set.mode = EmbeddingMode::Averaged;
    set.labels.emplace();
    for (const auto& note : corpus.notes) {
        const std::size_t cls = class_index(note.label, space);
        EmbeddingRecord rec;
        rec.id = note.id;
        rec.values.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            const double centre = d == cls ? 3.0 : 0.0;
            rec.values[d] = static_cast<float>(centre + rng.uniform(-0.5, 0.5));
        }
        set.records.push_back(std::move(rec));
        set.labels->push_back(note.label);
    }
    return set;
}

std::string describe_embeddings(const EmbeddingSet& set) {
    std::ostringstream out;
    out << "format: PHEB1 v" << static_cast<int>(kPhebVersion) << "\n";
    out << "mode: " << (set.mode == EmbeddingMode::Averaged ? "averaged" : "per_chunk") << "\n";
    out << "count: " << set.records.size() << "\n";
    out << "dim: " << set.dim << "\n";
    for (const auto& rec : set.records) {
        out << rec.id << "\t" << rec.chunks << "\n";
    }
    return out.str();
}

}  // namespace phenonote
