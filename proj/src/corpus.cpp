#include "lingua_adapt/corpus.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "lingua_adapt/error.hpp"
#include "lingua_adapt/random.hpp"
#include "lingua_adapt/text.hpp"

namespace lingua_adapt {

namespace fs = std::filesystem;

Corpus Corpus::from_texts(std::vector<std::string> texts, std::string source_id) {
    Corpus c;
    c.source_id = std::move(source_id);
    c.docs.reserve(texts.size());
    for (auto& t : texts) {
        c.docs.push_back(Document{std::move(t)});
    }
    return c;
}

CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "lines") return CorpusFormat::Lines;
    if (name == "jsonl") return CorpusFormat::Jsonl;
    fail(ErrorCode::InvalidArgument, "unknown corpus format '" + std::string(name) + "'");
}

namespace {

std::string read_file(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        fail(ErrorCode::FileNotFound, "corpus file not found: " + path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::FileNotFound, "cannot open corpus file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

std::vector<std::string_view> split_lines(std::string_view content) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t nl = content.find('\n', start);
        if (nl == std::string_view::npos) nl = content.size();
        std::string_view line = content.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = nl + 1;
    }
    return lines;
}

std::string checked_text(std::string_view raw, Utf8Mode mode, std::size_t line_no,
                         const fs::path& path, std::size_t& replacements) {
    if (is_valid_utf8(raw)) return std::string(raw);
    if (mode == Utf8Mode::Strict) {
        fail(ErrorCode::InvalidUtf8, path.string() + ":" + std::to_string(line_no) +
                                         ": invalid UTF-8 byte sequence");
    }
    return sanitize_utf8(raw, &replacements);
}

} // namespace

Corpus load_corpus(const fs::path& path, CorpusFormat format, Utf8Mode mode) {
    const std::string content = read_file(path);
    Corpus corpus;
    corpus.source_id = path.filename().string();
    const auto lines = split_lines(content);
    corpus.docs.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (format == CorpusFormat::Lines) {
            corpus.docs.push_back(
                Document{checked_text(lines[i], mode, line_no, path, corpus.replacements)});
            continue;
        }
        if (lines[i].find_first_not_of(" \t") == std::string_view::npos) continue;
        const std::string line = checked_text(lines[i], mode, line_no, path, corpus.replacements);
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            fail(ErrorCode::MalformedRecord,
                 path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        auto it = record.is_object() ? record.find("text") : record.end();
        if (!record.is_object() || it == record.end() || !it->is_string()) {
            fail(ErrorCode::MalformedRecord, path.string() + ":" + std::to_string(line_no) +
                                                 ": record has no string \"text\" field");
        }
        corpus.docs.push_back(Document{it->get<std::string>()});
    }
    return corpus;
}

void save_corpus_lines(const Corpus& corpus, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    for (const auto& doc : corpus.docs) {
        if (doc.text.find('\n') != std::string::npos) {
            fail(ErrorCode::InvalidArgument, "document contains a newline; use jsonl");
        }
        out << doc.text << '\n';
    }
}

std::string normalize_text(std::string_view text) {
    return nfc(text);
}

Corpus sample_documents(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
    const std::size_t total = corpus.size();
    const std::size_t take = std::min(n, total);
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 0x5A4D504CULL));
    for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, total - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    Corpus out;
    out.source_id = corpus.source_id;
    out.docs.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.docs.push_back(corpus.docs[order[i]]);
    }
    return out;
}

CorpusStats byte_stats(const Corpus& corpus) {
    CorpusStats s;
    s.n_docs = corpus.size();
    s.replacements = corpus.replacements;
    for (const auto& doc : corpus.docs) {
        s.total_bytes += doc.byte_len();
        s.total_chars += count_codepoints(doc.text);
    }
    s.mean_doc_bytes = s.n_docs > 0 ? static_cast<double>(s.total_bytes) / s.n_docs : 0.0;
    return s;
}

nlohmann::ordered_json to_json(const CorpusStats& stats) {
    nlohmann::ordered_json j;
    j["n_docs"] = stats.n_docs;
    j["total_bytes"] = stats.total_bytes;
    j["total_chars"] = stats.total_chars;
    j["mean_doc_bytes"] = stats.mean_doc_bytes;
    j["replacements"] = stats.replacements;
    return j;
}

} // namespace lingua_adapt
