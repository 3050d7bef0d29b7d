#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace lingua_adapt {

struct Document {
    std::string text;

    std::size_t byte_len() const noexcept { return text.size(); }
};

struct Corpus {
    std::vector<Document> docs;
    std::string source_id;
    // Number of U+FFFD substitutions made while loading in lenient mode.
    std::size_t replacements = 0;

    std::size_t size() const noexcept { return docs.size(); }
    bool empty() const noexcept { return docs.empty(); }

    static Corpus from_texts(std::vector<std::string> texts, std::string source_id = "memory");
};

struct CorpusStats {
    std::size_t n_docs = 0;
    std::size_t total_bytes = 0;
    std::size_t total_chars = 0;
    double mean_doc_bytes = 0.0;
    std::size_t replacements = 0;
};

enum class CorpusFormat { Lines, Jsonl };
enum class Utf8Mode { Strict, Lenient };

CorpusFormat parse_corpus_format(std::string_view name);

/// Reads one document per line (`Lines`) or one {"text": ...} record per
/// non-blank line (`Jsonl`). A trailing newline does not start a new document
/// and a CR before LF is dropped.
Corpus load_corpus(const std::filesystem::path& path,
                   CorpusFormat format = CorpusFormat::Lines,
                   Utf8Mode mode = Utf8Mode::Strict);

/// Writes documents one per line; documents must not contain '\n'.
void save_corpus_lines(const Corpus& corpus, const std::filesystem::path& path);

std::string normalize_text(std::string_view text);

/// min(n, size) documents drawn uniformly without replacement; order is the
/// draw order of a partial Fisher-Yates shuffle seeded by `seed`.
Corpus sample_documents(const Corpus& corpus, std::size_t n, std::uint64_t seed);

CorpusStats byte_stats(const Corpus& corpus);

nlohmann::ordered_json to_json(const CorpusStats& stats);

} // namespace lingua_adapt
