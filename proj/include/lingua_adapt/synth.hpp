#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lingua_adapt/corpus.hpp"
#include "lingua_adapt/random.hpp"

namespace lingua_adapt {

/// Parameters of a toy language: a Zipf-distributed lexicon over a contiguous
/// code point range, with a first-order successor preference so that text has
/// learnable structure.
struct SynthOptions {
    char32_t letters_begin = U'a';
    char32_t letters_end = U'z';      // inclusive
    std::size_t lexicon_size = 2000;
    std::size_t min_word_letters = 2;
    std::size_t max_word_letters = 7;
    std::size_t min_doc_words = 8;
    std::size_t max_doc_words = 24;
    double zipf_exponent = 1.05;
    double successor_prob = 0.6;
    std::size_t successors_per_word = 4;
    std::uint64_t seed = 0;
};

SynthOptions ascii_language(std::uint64_t seed);
/// Georgian Mkhedruli letters (U+10D0..U+10F0): three UTF-8 bytes each, no
/// ASCII overlap and stable under NFC.
SynthOptions georgian_language(std::uint64_t seed);

class SyntheticLanguage {
public:
    explicit SyntheticLanguage(const SynthOptions& options);

    const std::vector<std::string>& lexicon() const noexcept { return words_; }

    /// One document: words joined by single spaces.
    std::string document(Rng& rng) const;

    Corpus corpus(std::size_t n_docs, std::uint64_t seed, std::string source_id = "synthetic") const;

private:
    std::size_t draw_zipf(Rng& rng) const;

    SynthOptions options_;
    std::vector<std::string> words_;
    std::vector<double> cumulative_;
    std::vector<std::vector<std::size_t>> successors_;
};

} // namespace lingua_adapt
