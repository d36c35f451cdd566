#include "phenonote/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <clocale>
#include <cwctype>
#include <istream>
#include <locale.h>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "phenonote/error.hpp"
#include "phenonote/io.hpp"

namespace phenonote {

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& ch : out) {
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

// C.UTF-8 gives towlower the Unicode simple case mapping. If the locale is
// missing the fallback handles ASCII only.
locale_t utf8_locale() {
    static locale_t loc = [] {
        locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(nullptr));
        if (l == static_cast<locale_t>(nullptr)) {
            l = newlocale(LC_CTYPE_MASK, "en_US.UTF-8", static_cast<locale_t>(nullptr));
        }
        return l;
    }();
    return loc;
}

char32_t to_lower_cp(char32_t cp) {
    if (cp < 0x80) {
        return static_cast<char32_t>(std::tolower(static_cast<int>(cp)));
    }
    locale_t loc = utf8_locale();
    if (loc == static_cast<locale_t>(nullptr)) {
        return cp;
    }
    return static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc));
}

bool is_space_cp(char32_t cp) {
    if (cp < 0x80) {
        return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' || cp == '\f';
    }
    locale_t loc = utf8_locale();
    if (loc == static_cast<locale_t>(nullptr)) {
        return cp == 0xA0;
    }
    return cp == 0xA0 || iswspace_l(static_cast<wint_t>(cp), loc) != 0;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

// Decode one code point at s[i]; returns the byte length, or 0 if the
// sequence is invalid (the caller then copies the byte through untouched).
std::size_t decode_utf8(std::string_view s, std::size_t i, char32_t& cp) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        cp = b0;
        return 1;
    }
    std::size_t len = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return 0;
    }
    if (i + len > s.size()) {
        return 0;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            return 0;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong forms and surrogates.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        return 0;
    }
    return len;
}

void check_unique_ids(const LabeledCorpus& corpus, std::string_view source) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < corpus.notes.size(); ++i) {
        if (!seen.insert(corpus.notes[i].id).second) {
            throw DataError(std::string(source) + ": duplicate id '" + corpus.notes[i].id + "' at record " +
                            std::to_string(i + 1));
        }
    }
}

bool blank(std::string_view s) {
    return normalize_text(s).empty();
}

// Pick the label space after all records are read (see ingest_corpus docs).
LabeledCorpus finish_corpus(std::vector<Note> notes, std::vector<Label> parsed, std::string_view source) {
    LabeledCorpus corpus;
    corpus.label_space = infer_label_space(parsed);
    resolve_labels(parsed, corpus.label_space);
    for (std::size_t i = 0; i < notes.size(); ++i) {
        notes[i].label = parsed[i];
    }
    corpus.notes = std::move(notes);
    check_unique_ids(corpus, source);
    return corpus;
}

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out += s[i];
            continue;
        }
        const auto semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 8) {
            out += s[i];
            continue;
        }
        const auto ent = s.substr(i + 1, semi - i - 1);
        if (ent == "amp") {
            out += '&';
        } else if (ent == "lt") {
            out += '<';
        } else if (ent == "gt") {
            out += '>';
        } else if (ent == "quot") {
            out += '"';
        } else if (ent == "apos") {
            out += '\'';
        } else if (!ent.empty() && ent[0] == '#') {
            char32_t cp = 0;
            try {
                cp = static_cast<char32_t>(ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')
                                               ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                                               : std::stoul(std::string(ent.substr(1))));
            } catch (const std::exception&) {
                out += s[i];
                continue;
            }
            append_utf8(out, cp);
        } else {
            out += s[i];
            continue;
        }
        i = semi;
    }
    return out;
}

std::optional<std::string> attribute(std::string_view tag, std::string_view name) {
    std::size_t pos = 0;
    const std::string upper_tag = ascii_lower(tag);
    const std::string key = ascii_lower(name);
    while ((pos = upper_tag.find(key, pos)) != std::string::npos) {
        const bool boundary = pos == 0 || std::isspace(static_cast<unsigned char>(upper_tag[pos - 1]));
        std::size_t p = pos + key.size();
        while (p < tag.size() && std::isspace(static_cast<unsigned char>(tag[p]))) {
            ++p;
        }
        if (boundary && p < tag.size() && tag[p] == '=') {
            ++p;
            while (p < tag.size() && std::isspace(static_cast<unsigned char>(tag[p]))) {
                ++p;
            }
            if (p < tag.size() && (tag[p] == '"' || tag[p] == '\'')) {
                const char q = tag[p];
                const auto end = tag.find(q, p + 1);
                if (end != std::string_view::npos) {
                    return decode_entities(tag.substr(p + 1, end - p - 1));
                }
            }
        }
        pos += key.size();
    }
    return std::nullopt;
}

}  // namespace

std::string_view label_name(Label label) {
    switch (label) {
        case Label::CurrentSmoker:
            return "current smoker";
        case Label::PastSmoker:
            return "past smoker";
        case Label::NonSmoker:
            return "non-smoker";
        case Label::Unknown:
            return "unknown";
        case Label::Smoker:
            return "smoker";
    }
    return "unknown";
}

std::optional<Label> parse_label(std::string_view text) {
    const std::string s = ascii_lower(trim(text));
    if (s == "current smoker") {
        return Label::CurrentSmoker;
    }
    if (s == "past smoker") {
        return Label::PastSmoker;
    }
    if (s == "non-smoker") {
        return Label::NonSmoker;
    }
    if (s == "unknown") {
        return Label::Unknown;
    }
    if (s == "smoker") {
        return Label::Smoker;
    }
    return std::nullopt;
}

std::size_t label_space_size(LabelSpace space) {
    return space == LabelSpace::Raw4 ? 4 : 2;
}

std::size_t class_index(Label label, LabelSpace space) {
    if (space == LabelSpace::Binary2) {
        switch (label) {
            case Label::NonSmoker:
                return 0;
            case Label::Smoker:
                return 1;
            default:
                throw DataError("label '" + std::string(label_name(label)) + "' is not in the binary space");
        }
    }
    switch (label) {
        case Label::CurrentSmoker:
            return 0;
        case Label::PastSmoker:
            return 1;
        case Label::NonSmoker:
            return 2;
        case Label::Unknown:
            return 3;
        default:
            throw DataError("label 'smoker' is not in the raw space");
    }
}

Label label_at(std::size_t index, LabelSpace space) {
    if (space == LabelSpace::Binary2) {
        if (index > 1) {
            throw DataError("binary class index out of range: " + std::to_string(index));
        }
        return index == 0 ? Label::NonSmoker : Label::Smoker;
    }
    static constexpr Label raw[] = {Label::CurrentSmoker, Label::PastSmoker, Label::NonSmoker, Label::Unknown};
    if (index > 3) {
        throw DataError("raw class index out of range: " + std::to_string(index));
    }
    return raw[index];
}

std::vector<std::string> class_names(LabelSpace space) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < label_space_size(space); ++i) {
        names.emplace_back(label_name(label_at(i, space)));
    }
    return names;
}

std::string_view label_space_name(LabelSpace space) {
    return space == LabelSpace::Raw4 ? "raw4" : "binary2";
}

LabelSpace parse_label_space(std::string_view text) {
    const auto s = ascii_lower(trim(text));
    if (s == "raw4") {
        return LabelSpace::Raw4;
    }
    if (s == "binary2") {
        return LabelSpace::Binary2;
    }
    throw UsageError("unknown label space '" + std::string(text) + "' (expected raw4 or binary2)");
}

LabelSpace infer_label_space(std::span<const Label> labels) {
    const bool binary =
        !labels.empty() &&
        std::all_of(labels.begin(), labels.end(), [](Label l) { return l == Label::Smoker || l == Label::NonSmoker; }) &&
        std::any_of(labels.begin(), labels.end(), [](Label l) { return l == Label::Smoker; });
    return binary ? LabelSpace::Binary2 : LabelSpace::Raw4;
}

void resolve_labels(std::vector<Label>& labels, LabelSpace space) {
    if (space == LabelSpace::Raw4) {
        std::replace(labels.begin(), labels.end(), Label::Smoker, Label::CurrentSmoker);
    }
}

ParsedLabels parse_labels(std::span<const std::string> names, std::string_view source) {
    ParsedLabels out;
    out.labels.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto l = parse_label(names[i]);
        if (!l) {
            throw DataError(std::string(source) + ": unknown label '" + names[i] + "' at entry " +
                            std::to_string(i + 1));
        }
        out.labels.push_back(*l);
    }
    out.space = infer_label_space(out.labels);
    resolve_labels(out.labels, out.space);
    return out;
}

LabeledCorpus parse_jsonl_corpus(std::istream& in, std::string_view source) {
    const std::string src(source);
    std::vector<Note> notes;
    std::vector<Label> parsed;
    std::string line;
    std::size_t line_no = 0;
    std::size_t record = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        ++record;
        const std::string where = src + ": record " + std::to_string(record) + " (line " + std::to_string(line_no) + ")";
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": malformed JSON: " + e.what());
        }
        if (!j.is_object()) {
            throw DataError(where + ": expected a JSON object");
        }
        for (const char* key : {"id", "text", "label"}) {
            if (!j.contains(key)) {
                throw DataError(where + ": missing key '" + key + "'");
            }
        }
        Note note;
        if (j["id"].is_string()) {
            note.id = j["id"].get<std::string>();
        } else if (j["id"].is_number_integer()) {
            note.id = std::to_string(j["id"].get<long long>());
        } else {
            throw DataError(where + ": 'id' must be a string or integer");
        }
        if (!j["text"].is_string() || !j["label"].is_string()) {
            throw DataError(where + ": 'text' and 'label' must be strings");
        }
        note.text = j["text"].get<std::string>();
        if (blank(note.text)) {
            throw DataError(where + ": empty text for id '" + note.id + "'");
        }
        const auto label_text = j["label"].get<std::string>();
        const auto label = parse_label(label_text);
        if (!label) {
            throw DataError(where + ": unknown label '" + label_text +
                            "' (accepted: current smoker, past smoker, smoker, non-smoker, unknown)");
        }
        parsed.push_back(*label);
        notes.push_back(std::move(note));
    }
    return finish_corpus(std::move(notes), std::move(parsed), source);
}

LabeledCorpus parse_n2c2_xml(std::string_view xml, std::string_view source) {
    const std::string src(source);
    const std::string lower = ascii_lower(xml);
    std::vector<Note> notes;
    std::vector<Label> parsed;
    std::size_t pos = 0;
    std::size_t record = 0;
    while ((pos = lower.find("<record", pos)) != std::string::npos) {
        ++record;
        const std::string where = src + ": record " + std::to_string(record);
        const auto tag_end = lower.find('>', pos);
        const auto rec_end = lower.find("</record>", pos);
        if (tag_end == std::string::npos || rec_end == std::string::npos) {
            throw DataError(where + ": unterminated RECORD element");
        }
        const auto id = attribute(xml.substr(pos, tag_end - pos), "id");
        if (!id) {
            throw DataError(where + ": RECORD without ID attribute");
        }
        const auto body_begin = tag_end + 1;
        const std::string_view body_lower(lower.data() + body_begin, rec_end - body_begin);

        const auto smoking = body_lower.find("<smoking");
        if (smoking == std::string_view::npos) {
            throw DataError(where + ": missing SMOKING element");
        }
        const auto smoking_end = body_lower.find('>', smoking);
        const auto status = attribute(xml.substr(body_begin + smoking, smoking_end - smoking), "status");
        if (!status) {
            throw DataError(where + ": SMOKING element without STATUS");
        }
        const auto label = parse_label(*status);
        if (!label) {
            throw DataError(where + ": unknown label '" + *status + "'");
        }

        const auto text_open = body_lower.find("<text>");
        const auto text_close = body_lower.find("</text>");
        if (text_open == std::string_view::npos || text_close == std::string_view::npos || text_close < text_open) {
            throw DataError(where + ": missing TEXT element");
        }
        std::string_view raw = xml.substr(body_begin + text_open + 6, text_close - text_open - 6);
        std::string text;
        const auto cdata = raw.find("<![CDATA[");
        if (cdata != std::string_view::npos) {
            const auto cdata_end = raw.find("]]>", cdata);
            if (cdata_end == std::string_view::npos) {
                throw DataError(where + ": unterminated CDATA section");
            }
            text = std::string(raw.substr(cdata + 9, cdata_end - cdata - 9));
        } else {
            text = decode_entities(raw);
        }
        if (blank(text)) {
            throw DataError(where + ": empty text for id '" + *id + "'");
        }
        notes.push_back(Note{*id, std::move(text), Label::Unknown});
        parsed.push_back(*label);
        pos = rec_end + 9;
    }
    return finish_corpus(std::move(notes), std::move(parsed), source);
}

LabeledCorpus ingest_corpus(const std::filesystem::path& path, CorpusFormat format) {
    const std::string content = read_file(path);
    if (format == CorpusFormat::N2c2Xml) {
        return parse_n2c2_xml(content, path.string());
    }
    std::istringstream in(content);
    return parse_jsonl_corpus(in, path.string());
}

void write_jsonl_corpus(const LabeledCorpus& corpus, std::ostream& out) {
    out << to_jsonl(corpus);
}

std::string to_jsonl(const LabeledCorpus& corpus) {
    std::string out;
    for (const auto& note : corpus.notes) {
        nlohmann::ordered_json j;
        j["id"] = note.id;
        j["text"] = note.text;
        j["label"] = label_name(note.label);
        out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t cp = 0;
        const std::size_t len = decode_utf8(text, i, cp);
        if (len == 0) {
            if (pending_space && !out.empty()) {
                out += ' ';
            }
            pending_space = false;
            out += text[i];
            ++i;
            continue;
        }
        i += len;
        if (is_space_cp(cp)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) {
            out += ' ';
        }
        pending_space = false;
        append_utf8(out, to_lower_cp(cp));
    }
    return out;
}

LabeledCorpus normalize_text(const LabeledCorpus& corpus) {
    LabeledCorpus out = corpus;
    for (auto& note : out.notes) {
        note.text = normalize_text(note.text);
    }
    return out;
}

ConsolidationResult consolidate_labels(const LabeledCorpus& corpus, UnknownPolicy policy) {
    if (corpus.label_space == LabelSpace::Binary2) {
        throw DataError("corpus labels are already consolidated");
    }
    ConsolidationResult result;
    result.corpus.label_space = LabelSpace::Binary2;
    result.corpus.notes.reserve(corpus.notes.size());
    for (const auto& note : corpus.notes) {
        Note n = note;
        switch (note.label) {
            case Label::CurrentSmoker:
            case Label::PastSmoker:
            case Label::Smoker:
                n.label = Label::Smoker;
                break;
            case Label::NonSmoker:
                n.label = Label::NonSmoker;
                break;
            case Label::Unknown:
                ++result.removed_unknown;
                if (policy == UnknownPolicy::Drop) {
                    continue;
                }
                n.label = Label::NonSmoker;
                break;
        }
        result.corpus.notes.push_back(std::move(n));
    }
    return result;
}

}  // namespace phenonote
