#include "lingua_adapt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "lingua_adapt/error.hpp"
#include "lingua_adapt/text.hpp"

namespace lingua_adapt {

SynthOptions ascii_language(std::uint64_t seed) {
    SynthOptions o;
    o.letters_begin = U'a';
    o.letters_end = U'z';
    o.seed = seed;
    return o;
}

SynthOptions georgian_language(std::uint64_t seed) {
    SynthOptions o;
    o.letters_begin = U'ა';
    o.letters_end = U'ჰ';
    o.seed = seed;
    return o;
}

SyntheticLanguage::SyntheticLanguage(const SynthOptions& options) : options_(options) {
    if (options.letters_end < options.letters_begin || options.lexicon_size == 0 ||
        options.min_word_letters == 0 || options.max_word_letters < options.min_word_letters ||
        options.min_doc_words == 0 || options.max_doc_words < options.min_doc_words) {
        fail(ErrorCode::InvalidArgument, "invalid synthetic language options");
    }
    Rng rng(derive_seed(options.seed, 0x4C455849ULL));
    const auto n_letters = static_cast<std::size_t>(options.letters_end - options.letters_begin) + 1;
    std::uniform_int_distribution<std::size_t> letter(0, n_letters - 1);
    std::uniform_int_distribution<std::size_t> length(options.min_word_letters, options.max_word_letters);

    std::unordered_set<std::string> seen;
    std::size_t attempts = 0;
    while (words_.size() < options.lexicon_size) {
        if (++attempts > options.lexicon_size * 100) {
            fail(ErrorCode::InvalidArgument, "alphabet too small for the requested lexicon size");
        }
        std::string w;
        const std::size_t len = length(rng);
        for (std::size_t i = 0; i < len; ++i) {
            append_utf8(w, options.letters_begin + static_cast<char32_t>(letter(rng)));
        }
        if (seen.insert(w).second) words_.push_back(std::move(w));
    }

    cumulative_.resize(words_.size());
    double acc = 0.0;
    for (std::size_t r = 0; r < words_.size(); ++r) {
        acc += 1.0 / std::pow(static_cast<double>(r + 1), options.zipf_exponent);
        cumulative_[r] = acc;
    }
    for (auto& c : cumulative_) c /= acc;

    successors_.resize(words_.size());
    for (auto& s : successors_) {
        for (std::size_t i = 0; i < options.successors_per_word; ++i) s.push_back(draw_zipf(rng));
    }
}

std::size_t SyntheticLanguage::draw_zipf(Rng& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
}

std::string SyntheticLanguage::document(Rng& rng) const {
    std::uniform_int_distribution<std::size_t> n_words(options_.min_doc_words, options_.max_doc_words);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const std::size_t n = n_words(rng);
    std::string doc;
    std::size_t w = draw_zipf(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const auto& succ = successors_[w];
            if (!succ.empty() && coin(rng) < options_.successor_prob) {
                w = succ[std::uniform_int_distribution<std::size_t>(0, succ.size() - 1)(rng)];
            } else {
                w = draw_zipf(rng);
            }
            doc.push_back(' ');
        }
        doc += words_[w];
    }
    return doc;
}

Corpus SyntheticLanguage::corpus(std::size_t n_docs, std::uint64_t seed, std::string source_id) const {
    Rng rng(derive_seed(seed, 0x444F4353ULL));
    Corpus c;
    c.source_id = std::move(source_id);
    c.docs.reserve(n_docs);
    for (std::size_t i = 0; i < n_docs; ++i) c.docs.push_back(Document{document(rng)});
    return c;
}

} // namespace lingua_adapt
