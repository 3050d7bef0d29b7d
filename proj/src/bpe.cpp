#include "lingua_adapt/bpe.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

#include "json.hpp"
#include "lingua_adapt/error.hpp"
#include "lingua_adapt/parallel.hpp"
#include "lingua_adapt/text.hpp"

namespace lingua_adapt {

std::string_view to_string(Provenance p) {
    return p == Provenance::Base ? "base" : "added";
}

TokenizerModel::TokenizerModel() {
    tokens_.reserve(kBaseSize);
    tokens_.emplace_back(kBosName);
    provenance_.push_back(Provenance::Base);
    for (int b = 0; b < 256; ++b) {
        add_token(std::string(1, static_cast<char>(b)), Provenance::Base);
    }
}

TokenId TokenizerModel::add_token(std::string bytes, Provenance prov) {
    const auto id = static_cast<TokenId>(tokens_.size());
    index_.emplace(bytes, id);
    tokens_.push_back(std::move(bytes));
    provenance_.push_back(prov);
    return id;
}

const std::string& TokenizerModel::token_bytes(TokenId id) const {
    if (id >= tokens_.size()) {
        fail(ErrorCode::InvalidTokenId, "token id " + std::to_string(id) + " out of range");
    }
    return tokens_[id];
}

Provenance TokenizerModel::provenance(TokenId id) const {
    if (id >= tokens_.size()) {
        fail(ErrorCode::InvalidTokenId, "token id " + std::to_string(id) + " out of range");
    }
    return provenance_[id];
}

std::optional<TokenId> TokenizerModel::find(std::string_view bytes) const {
    auto it = index_.find(std::string(bytes));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> TokenizerModel::merge_rank(TokenId left, TokenId right) const {
    auto it = ranks_.find(pair_key(left, right));
    if (it == ranks_.end()) return std::nullopt;
    return it->second;
}

TokenId TokenizerModel::add_merge(TokenId left, TokenId right, Provenance prov) {
    if (left >= tokens_.size() || right >= tokens_.size() || is_special(left) ||
        is_special(right)) {
        fail(ErrorCode::InvalidTokenId, "merge operands must be existing non-special tokens");
    }
    const auto key = pair_key(left, right);
    if (ranks_.count(key) != 0) {
        fail(ErrorCode::InvalidArgument, "duplicate merge pair (" + std::to_string(left) + ", " +
                                             std::to_string(right) + ")");
    }
    std::string bytes = tokens_[left] + tokens_[right];
    TokenId result;
    if (auto existing = find(bytes)) {
        result = *existing;
    } else {
        result = add_token(std::move(bytes), prov);
    }
    ranks_.emplace(key, static_cast<std::uint32_t>(merges_.size()));
    merges_.push_back(MergeRule{left, right, result});
    return result;
}

std::vector<std::string_view> split_words(std::string_view text) {
    auto is_ws = [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    };
    std::vector<std::string_view> words;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (is_ws(c)) {
            if (c == ' ' && i + 1 < n && !is_ws(static_cast<unsigned char>(text[i + 1]))) {
                std::size_t j = i + 1;
                while (j < n && !is_ws(static_cast<unsigned char>(text[j]))) ++j;
                words.push_back(text.substr(i, j - i));
                i = j;
            } else {
                words.push_back(text.substr(i, 1));
                ++i;
            }
        } else {
            std::size_t j = i;
            while (j < n && !is_ws(static_cast<unsigned char>(text[j]))) ++j;
            words.push_back(text.substr(i, j - i));
            i = j;
        }
    }
    return words;
}

TokenIdSeq TokenizerModel::encode_word(std::string_view word) const {
    const std::size_t n = word.size();
    TokenIdSeq syms(n);
    for (std::size_t i = 0; i < n; ++i) {
        syms[i] = byte_token(static_cast<std::uint8_t>(word[i]));
    }
    if (n < 2 || merges_.empty()) return syms;

    // Doubly linked list over positions; the heap yields (rank, position) so
    // the lowest-rank pair fires first and equal ranks fire left to right.
    std::vector<std::int64_t> prev(n), next(n);
    for (std::size_t i = 0; i < n; ++i) {
        prev[i] = static_cast<std::int64_t>(i) - 1;
        next[i] = (i + 1 < n) ? static_cast<std::int64_t>(i + 1) : -1;
    }
    struct Cand {
        std::uint32_t rank;
        std::size_t pos;
        TokenId left;
        TokenId right;
        bool operator>(const Cand& o) const {
            return rank != o.rank ? rank > o.rank : pos > o.pos;
        }
    };
    std::priority_queue<Cand, std::vector<Cand>, std::greater<>> heap;
    auto push = [&](std::size_t pos) {
        const std::int64_t nx = next[pos];
        if (nx < 0) return;
        if (auto r = merge_rank(syms[pos], syms[static_cast<std::size_t>(nx)])) {
            heap.push(Cand{*r, pos, syms[pos], syms[static_cast<std::size_t>(nx)]});
        }
    };
    std::vector<bool> alive(n, true);
    for (std::size_t i = 0; i + 1 < n; ++i) push(i);

    while (!heap.empty()) {
        const Cand c = heap.top();
        heap.pop();
        if (!alive[c.pos] || syms[c.pos] != c.left) continue;
        const std::int64_t nx = next[c.pos];
        if (nx < 0) continue;
        const auto right = static_cast<std::size_t>(nx);
        if (syms[right] != c.right) continue;

        syms[c.pos] = merges_[c.rank].result;
        alive[right] = false;
        next[c.pos] = next[right];
        if (next[right] >= 0) prev[static_cast<std::size_t>(next[right])] = static_cast<std::int64_t>(c.pos);
        if (prev[c.pos] >= 0) push(static_cast<std::size_t>(prev[c.pos]));
        push(c.pos);
    }

    TokenIdSeq out;
    out.reserve(n);
    for (std::int64_t i = 0; i >= 0; i = next[static_cast<std::size_t>(i)]) {
        out.push_back(syms[static_cast<std::size_t>(i)]);
    }
    return out;
}

TokenIdSeq TokenizerModel::encode(std::string_view text) const {
    const std::string normalized = nfc(text);
    TokenIdSeq out;
    out.reserve(normalized.size());
    for (auto word : split_words(normalized)) {
        auto ids = encode_word(word);
        out.insert(out.end(), ids.begin(), ids.end());
    }
    return out;
}

std::string TokenizerModel::decode_bytes(std::span<const TokenId> ids) const {
    std::string out;
    for (TokenId id : ids) {
        if (id >= tokens_.size()) {
            fail(ErrorCode::InvalidTokenId, "token id " + std::to_string(id) + " out of range");
        }
        if (is_special(id)) continue;
        out += tokens_[id];
    }
    return out;
}

std::string TokenizerModel::decode(std::span<const TokenId> ids) const {
    return sanitize_utf8(decode_bytes(ids));
}

bool operator==(const TokenizerModel& a, const TokenizerModel& b) {
    return a.tokens_ == b.tokens_ && a.provenance_ == b.provenance_ && a.merges_ == b.merges_ &&
           a.requested_vocab_size_ == b.requested_vocab_size_;
}

std::string TokenizerModel::to_json_string() const {
    using nlohmann::ordered_json;
    std::ostringstream os;
    os << "{\n";
    os << "  \"version\": 1,\n";
    os << "  \"normalization\": \"nfc\",\n";
    os << "  \"specials\": [\"" << kBosName << "\"],\n";
    os << "  \"requested_vocab_size\": " << requested_vocab_size_ << ",\n";
    os << "  \"achieved_vocab_size\": " << tokens_.size() << ",\n";
    os << "  \"tokens\": [\n";
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        ordered_json t;
        t["id"] = i;
        t["bytes"] = to_hex(tokens_[i]);
        t["provenance"] = to_string(provenance_[i]);
        os << "    " << t.dump() << (i + 1 < tokens_.size() ? ",\n" : "\n");
    }
    os << "  ],\n";
    os << "  \"merges\": [\n";
    for (std::size_t i = 0; i < merges_.size(); ++i) {
        const auto& m = merges_[i];
        os << "    [" << m.left << ", " << m.right << ", " << m.result << "]"
           << (i + 1 < merges_.size() ? ",\n" : "\n");
    }
    os << "  ]\n}\n";
    return os.str();
}

TokenizerModel TokenizerModel::from_json_string(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::MalformedFile, std::string("tokenizer model: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != 1) {
            fail(ErrorCode::MalformedFile, "tokenizer model: unsupported version");
        }
        if (j.at("normalization").get<std::string>() != "nfc") {
            fail(ErrorCode::IncompatibleAlphabet, "tokenizer model: normalization must be nfc");
        }
        const auto specials = j.at("specials").get<std::vector<std::string>>();
        if (specials.size() != 1 || specials[0] != kBosName) {
            fail(ErrorCode::IncompatibleAlphabet, "tokenizer model: specials must be [\"<bos>\"]");
        }
        const auto& tokens = j.at("tokens");
        if (!tokens.is_array() || tokens.size() < kBaseSize) {
            fail(ErrorCode::IncompatibleAlphabet, "tokenizer model: missing byte alphabet");
        }
        TokenizerModel model;
        std::vector<std::string> surfaces;
        std::vector<Provenance> provs;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const auto& t = tokens[i];
            if (t.at("id").get<std::size_t>() != i) {
                fail(ErrorCode::MalformedFile, "tokenizer model: token ids must be dense and ordered");
            }
            surfaces.push_back(from_hex(t.at("bytes").get<std::string>()));
            const auto p = t.at("provenance").get<std::string>();
            if (p != "base" && p != "added") {
                fail(ErrorCode::MalformedFile, "tokenizer model: bad provenance '" + p + "'");
            }
            provs.push_back(p == "base" ? Provenance::Base : Provenance::Added);
        }
        for (std::size_t i = 0; i < kBaseSize; ++i) {
            if (surfaces[i] != model.tokens_[i]) {
                fail(ErrorCode::IncompatibleAlphabet,
                     "tokenizer model: token " + std::to_string(i) + " is not the expected special/byte");
            }
        }
        for (const auto& m : j.at("merges")) {
            if (!m.is_array() || m.size() != 3) {
                fail(ErrorCode::MalformedFile, "tokenizer model: merge must be [left, right, result]");
            }
            const auto l = m[0].get<TokenId>();
            const auto r = m[1].get<TokenId>();
            const auto res = m[2].get<TokenId>();
            if (l >= model.vocab_size() || r >= model.vocab_size()) {
                fail(ErrorCode::MalformedFile, "tokenizer model: merge refers to a later token");
            }
            const std::size_t before = model.vocab_size();
            const auto got = model.add_merge(l, r, res < provs.size() ? provs[res] : Provenance::Base);
            if (got != res || (got >= before && surfaces[got] != model.tokens_[got])) {
                fail(ErrorCode::MalformedFile, "tokenizer model: merge result mismatch at rule (" +
                                                   std::to_string(l) + ", " + std::to_string(r) + ")");
            }
        }
        if (model.vocab_size() != surfaces.size()) {
            fail(ErrorCode::MalformedFile, "tokenizer model: tokens not produced by any merge rule");
        }
        for (std::size_t i = 0; i < provs.size(); ++i) model.provenance_[i] = provs[i];
        if (j.at("achieved_vocab_size").get<std::size_t>() != model.vocab_size()) {
            fail(ErrorCode::MalformedFile, "tokenizer model: achieved_vocab_size disagrees with tokens");
        }
        model.requested_vocab_size_ = j.at("requested_vocab_size").get<std::size_t>();
        return model;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, std::string("tokenizer model: ") + e.what());
    }
}

void TokenizerModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << to_json_string();
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

TokenizerModel TokenizerModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::FileNotFound, "tokenizer model not found: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct TrainWord {
    std::vector<TokenId> syms;
    std::int64_t count;
};

struct PairEntry {
    std::int64_t count;
    TokenId left;
    TokenId right;
};

// Max-heap order: higher count first, then smaller (left, right).
struct PairLess {
    bool operator()(const PairEntry& a, const PairEntry& b) const {
        if (a.count != b.count) return a.count < b.count;
        if (a.left != b.left) return a.left > b.left;
        return a.right > b.right;
    }
};

std::uint64_t key_of(TokenId l, TokenId r) {
    return (static_cast<std::uint64_t>(l) << 32) | r;
}

} // namespace

BpeTrainResult train_bpe_detailed(const Corpus& corpus, std::size_t target_vocab_size,
                                  [[maybe_unused]] std::uint64_t seed) {
    if (target_vocab_size < TokenizerModel::kBaseSize) {
        fail(ErrorCode::VocabTooSmall, "target vocab size " + std::to_string(target_vocab_size) +
                                           " is below the 257-token byte alphabet");
    }
    if (corpus.empty()) fail(ErrorCode::EmptyCorpus, "cannot train a tokenizer on an empty corpus");

    std::map<std::string, std::int64_t> word_counts;
    for (const auto& doc : corpus.docs) {
        const std::string norm = nfc(doc.text);
        for (auto w : split_words(norm)) ++word_counts[std::string(w)];
    }

    std::vector<TrainWord> words;
    words.reserve(word_counts.size());
    for (const auto& [w, c] : word_counts) {
        TrainWord tw;
        tw.count = c;
        tw.syms.reserve(w.size());
        for (unsigned char b : w) tw.syms.push_back(TokenizerModel::byte_token(b));
        words.push_back(std::move(tw));
    }

    std::unordered_map<std::uint64_t, std::int64_t> pair_counts;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> pair_words;
    for (std::uint32_t wi = 0; wi < words.size(); ++wi) {
        const auto& s = words[wi].syms;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            const auto k = key_of(s[i], s[i + 1]);
            pair_counts[k] += words[wi].count;
            auto& lst = pair_words[k];
            if (lst.empty() || lst.back() != wi) lst.push_back(wi);
        }
    }

    std::priority_queue<PairEntry, std::vector<PairEntry>, PairLess> heap;
    for (const auto& [k, c] : pair_counts) {
        heap.push(PairEntry{c, static_cast<TokenId>(k >> 32), static_cast<TokenId>(k & 0xFFFFFFFFu)});
    }

    BpeTrainResult result;
    TokenizerModel& model = result.model;
    model.set_requested_vocab_size(target_vocab_size);
    std::vector<std::uint32_t> stamp(words.size(), 0);
    std::uint32_t round = 0;

    while (model.vocab_size() < target_vocab_size) {
        PairEntry best{0, 0, 0};
        bool found = false;
        while (!heap.empty()) {
            const PairEntry top = heap.top();
            heap.pop();
            auto it = pair_counts.find(key_of(top.left, top.right));
            if (it != pair_counts.end() && it->second == top.count && top.count > 0) {
                best = top;
                found = true;
                break;
            }
        }
        if (!found || best.count < 2) break;

        const TokenId new_id = model.add_merge(best.left, best.right, Provenance::Base);
        result.merge_counts.push_back(best.count);
        ++round;

        const auto best_key = key_of(best.left, best.right);
        std::vector<std::uint32_t> affected = std::move(pair_words[best_key]);
        pair_words.erase(best_key);

        std::unordered_map<std::uint64_t, std::int64_t> delta;
        for (std::uint32_t wi : affected) {
            if (stamp[wi] == round) continue;
            stamp[wi] = round;
            auto& w = words[wi];
            auto& s = w.syms;
            bool has = false;
            for (std::size_t i = 0; i + 1 < s.size(); ++i) {
                if (s[i] == best.left && s[i + 1] == best.right) {
                    has = true;
                    break;
                }
            }
            if (!has) continue;
            for (std::size_t i = 0; i + 1 < s.size(); ++i) delta[key_of(s[i], s[i + 1])] -= w.count;
            std::vector<TokenId> merged;
            merged.reserve(s.size());
            for (std::size_t i = 0; i < s.size();) {
                if (i + 1 < s.size() && s[i] == best.left && s[i + 1] == best.right) {
                    merged.push_back(new_id);
                    i += 2;
                } else {
                    merged.push_back(s[i]);
                    ++i;
                }
            }
            s = std::move(merged);
            for (std::size_t i = 0; i + 1 < s.size(); ++i) {
                const auto k = key_of(s[i], s[i + 1]);
                delta[k] += w.count;
                if (s[i] == new_id || s[i + 1] == new_id) {
                    auto& lst = pair_words[k];
                    if (lst.empty() || lst.back() != wi) lst.push_back(wi);
                }
            }
        }
        for (const auto& [k, d] : delta) {
            if (d == 0) continue;
            auto& c = pair_counts[k];
            c += d;
            if (c <= 0) {
                pair_counts.erase(k);
            } else {
                heap.push(PairEntry{c, static_cast<TokenId>(k >> 32), static_cast<TokenId>(k & 0xFFFFFFFFu)});
            }
        }
    }
    return result;
}

TokenizerModel train_bpe(const Corpus& corpus, std::size_t target_vocab_size, std::uint64_t seed) {
    return train_bpe_detailed(corpus, target_vocab_size, seed).model;
}

std::vector<TokenIdSeq> encode_corpus(const TokenizerModel& model, const Corpus& corpus) {
    std::vector<TokenIdSeq> out(corpus.size());
    parallel_for(corpus.size(), [&](std::size_t begin, std::size_t end) {
        std::unordered_map<std::string, TokenIdSeq> cache;
        for (std::size_t i = begin; i < end; ++i) {
            const std::string norm = nfc(corpus.docs[i].text);
            auto& ids = out[i];
            for (auto w : split_words(norm)) {
                auto key = std::string(w);
                auto it = cache.find(key);
                if (it == cache.end()) {
                    it = cache.emplace(std::move(key), model.encode_word(w)).first;
                }
                ids.insert(ids.end(), it->second.begin(), it->second.end());
            }
        }
    });
    return out;
}

} // namespace lingua_adapt
