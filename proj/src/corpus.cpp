#include "sarclab/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sarclab/errors.hpp"
#include "sarclab/rng.hpp"
#include "unicode.hpp"

namespace sarclab {

namespace {

std::string trimmed(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

std::size_t Corpus::count_label(int label) const {
    return static_cast<std::size_t>(
        std::count_if(documents.begin(), documents.end(),
                      [&](const Document& d) { return d.label == label; }));
}

bool Corpus::has_star_ratings() const {
    return !documents.empty() &&
           std::all_of(documents.begin(), documents.end(),
                       [](const Document& d) { return d.star_rating.has_value(); });
}

std::size_t Vocabulary::add(const std::string& token) {
    auto [it, inserted] = index_.try_emplace(token, tokens_.size());
    if (inserted) tokens_.push_back(token);
    return it->second;
}

std::ptrdiff_t Vocabulary::find(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

int FoldAssignment::fold_of(const std::string& id) const {
    auto it = assignment.find(id);
    if (it == assignment.end())
        throw ValidationError("no fold assignment for document id '" + id + "'");
    return it->second;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    enum class Run { none, alnum, punct };
    Run run = Run::none;

    auto flush = [&] {
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
        run = Run::none;
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto d = unicode::decode(text, pos);
        if (d.valid && unicode::is_whitespace(d.cp)) {
            flush();
            pos += d.length;
            continue;
        }
        const bool alnum = d.valid && unicode::is_alphanumeric(d.cp);
        const Run want = alnum ? Run::alnum : Run::punct;
        if (run != Run::none && run != want) flush();
        run = want;
        if (alnum) {
            unicode::append_utf8(current, unicode::to_lower(d.cp));
        } else {
            // punctuation/special bytes pass through unchanged
            current.append(text, pos, d.length);
        }
        pos += d.length;
    }
    flush();
    return tokens;
}

Vocabulary build_vocabulary(const std::vector<Document>& documents) {
    if (documents.empty())
        throw ValidationError("build_vocabulary: no documents");
    Vocabulary vocab;
    for (const auto& doc : documents)
        for (const auto& tok : tokenize(doc.text)) vocab.add(tok);
    if (vocab.size() == 0)
        throw ValidationError("build_vocabulary: all documents tokenize to nothing");
    return vocab;
}

namespace {

void validate_label(long label, std::size_t line) {
    if (label != 0 && label != 1)
        throw ValidationError("line " + std::to_string(line) +
                              ": label must be 0 or 1, got " + std::to_string(label));
}

void validate_star(long star, std::size_t line) {
    if (star < 1 || star > 5)
        throw ValidationError("line " + std::to_string(line) +
                              ": star must be in [1,5], got " + std::to_string(star));
}

Corpus load_jsonl(std::istream& in, const std::string& name, LoadReport& report) {
    Corpus corpus;
    corpus.name = name;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trimmed(line).empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!rec.is_object() || !rec.contains("text") || !rec.contains("label") ||
            !rec["text"].is_string() || trimmed(rec["text"].get<std::string>()).empty()) {
            ++report.skipped;
            report.skipped_lines.push_back(lineno);
            continue;
        }
        if (!rec["label"].is_number_integer())
            throw ValidationError("line " + std::to_string(lineno) +
                                  ": label must be an integer");
        const long label = rec["label"].get<long>();
        validate_label(label, lineno);

        Document doc;
        doc.text = rec["text"].get<std::string>();
        doc.label = static_cast<int>(label);
        doc.id = rec.contains("id") && rec["id"].is_string()
                     ? rec["id"].get<std::string>()
                     : std::to_string(lineno);
        if (rec.contains("star")) {
            if (!rec["star"].is_number_integer())
                throw ValidationError("line " + std::to_string(lineno) +
                                      ": star must be an integer");
            const long star = rec["star"].get<long>();
            validate_star(star, lineno);
            doc.star_rating = static_cast<int>(star);
        }
        doc.source_corpus = name;
        corpus.documents.push_back(std::move(doc));
        ++report.loaded;
    }
    return corpus;
}

// RFC 4180 record reader; handles quoted fields with embedded newlines.
// Returns false at end of input. `line` reports the record's starting line.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields,
                     std::size_t& line, std::size_t& next_line) {
    fields.clear();
    int c = in.get();
    if (c == EOF) return false;
    line = next_line;

    std::string field;
    bool quoted = false;
    bool any = false;
    while (true) {
        if (c == EOF) {
            fields.push_back(field);
            return true;
        }
        any = true;
        if (quoted) {
            if (c == '"') {
                const int peek = in.peek();
                if (peek == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++next_line;
                field.push_back(static_cast<char>(c));
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get();
            ++next_line;
            fields.push_back(field);
            return true;
        } else {
            field.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
    (void)any;
}

Corpus load_csv(std::istream& in, const std::string& name, LoadReport& report) {
    Corpus corpus;
    corpus.name = name;

    std::vector<std::string> fields;
    std::size_t line = 0;
    std::size_t next_line = 1;
    if (!read_csv_record(in, fields, line, next_line))
        throw ParseError("empty csv file");

    std::ptrdiff_t col_text = -1, col_label = -1, col_id = -1, col_star = -1;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string h = trimmed(fields[i]);
        if (h == "text") col_text = static_cast<std::ptrdiff_t>(i);
        else if (h == "label") col_label = static_cast<std::ptrdiff_t>(i);
        else if (h == "id") col_id = static_cast<std::ptrdiff_t>(i);
        else if (h == "star") col_star = static_cast<std::ptrdiff_t>(i);
        // unknown columns are ignored
    }
    if (col_text < 0 || col_label < 0)
        throw ParseError("csv header must contain 'text' and 'label' columns");

    auto parse_int = [](const std::string& s, std::size_t ln) -> long {
        try {
            std::size_t used = 0;
            const long v = std::stol(trimmed(s), &used);
            if (used != trimmed(s).size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(ln) +
                             ": expected an integer, got '" + s + "'");
        }
    };

    while (read_csv_record(in, fields, line, next_line)) {
        if (fields.size() == 1 && trimmed(fields[0]).empty()) continue;
        const auto need = static_cast<std::size_t>(
            std::max({col_text, col_label, std::ptrdiff_t{0}}));
        if (fields.size() <= need)
            throw ParseError("line " + std::to_string(line) + ": too few fields");

        const std::string text = fields[static_cast<std::size_t>(col_text)];
        const std::string label_field =
            fields[static_cast<std::size_t>(col_label)];
        if (trimmed(text).empty() || trimmed(label_field).empty()) {
            ++report.skipped;
            report.skipped_lines.push_back(line);
            continue;
        }
        const long label = parse_int(label_field, line);
        validate_label(label, line);

        Document doc;
        doc.text = text;
        doc.label = static_cast<int>(label);
        doc.id = std::to_string(line);
        if (col_id >= 0 && static_cast<std::size_t>(col_id) < fields.size() &&
            !trimmed(fields[static_cast<std::size_t>(col_id)]).empty())
            doc.id = fields[static_cast<std::size_t>(col_id)];
        if (col_star >= 0 && static_cast<std::size_t>(col_star) < fields.size() &&
            !trimmed(fields[static_cast<std::size_t>(col_star)]).empty()) {
            const long star =
                parse_int(fields[static_cast<std::size_t>(col_star)], line);
            validate_star(star, line);
            doc.star_rating = static_cast<int>(star);
        }
        doc.source_corpus = name;
        corpus.documents.push_back(std::move(doc));
        ++report.loaded;
    }
    return corpus;
}

}  // namespace

CorpusFormat format_from_extension(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return CorpusFormat::csv;
    return CorpusFormat::jsonl;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const std::string& name, LoadReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open corpus file: " + path.string());
    const std::string corpus_name = name.empty() ? path.stem().string() : name;
    LoadReport local;
    LoadReport& rep = report ? *report : local;
    Corpus corpus = format == CorpusFormat::jsonl
                        ? load_jsonl(in, corpus_name, rep)
                        : load_csv(in, corpus_name, rep);
    if (in.bad())
        throw IoError("read failure on corpus file: " + path.string());
    return corpus;
}

namespace {

// Shuffles each class separately and deals contiguous chunks to folds, the
// first (count mod k) folds receiving one extra member.
void assign_class(const Corpus& corpus, int label, int k, std::uint64_t seed,
                  FoldAssignment& out) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.documents.size(); ++i)
        if (corpus.documents[i].label == label) members.push_back(i);

    if (members.size() < static_cast<std::size_t>(k))
        throw ValidationError("class " + std::to_string(label) + " has " +
                              std::to_string(members.size()) +
                              " members, fewer than k=" + std::to_string(k));

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label) + 1));
    std::shuffle(members.begin(), members.end(), rng);

    const std::size_t base = members.size() / static_cast<std::size_t>(k);
    const std::size_t rem = members.size() % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t take = base + (static_cast<std::size_t>(f) < rem ? 1 : 0);
        for (std::size_t j = 0; j < take; ++j, ++pos) {
            const auto& doc = corpus.documents[members[pos]];
            auto [it, inserted] = out.assignment.emplace(doc.id, f);
            if (!inserted)
                throw ValidationError("duplicate document id '" + doc.id + "'");
        }
    }
}

}  // namespace

FoldAssignment stratified_kfold(const Corpus& corpus, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("k must be >= 2");
    FoldAssignment folds;
    folds.k = k;
    assign_class(corpus, 0, k, seed, folds);
    assign_class(corpus, 1, k, seed, folds);
    return folds;
}

FoldAssignment union_folds(const std::vector<Corpus>& corpora, int k,
                           std::uint64_t seed) {
    if (corpora.empty()) throw ValidationError("union_folds: no corpora");
    FoldAssignment merged;
    merged.k = k;
    for (const auto& corpus : corpora) {
        // same seed per corpus: a single corpus degenerates to stratified_kfold
        const FoldAssignment folds = stratified_kfold(corpus, k, seed);
        for (const auto& [id, f] : folds.assignment) {
            auto [it, inserted] = merged.assignment.emplace(id, f);
            if (!inserted)
                throw ValidationError("document id '" + id +
                                      "' appears in more than one corpus");
        }
    }
    return merged;
}

}  // namespace sarclab
