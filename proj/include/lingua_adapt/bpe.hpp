#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lingua_adapt/corpus.hpp"

namespace lingua_adapt {

using TokenId = std::uint32_t;
using TokenIdSeq = std::vector<TokenId>;

enum class Provenance : std::uint8_t { Base, Added };

std::string_view to_string(Provenance p);

/// A merge rule; its rank is its index in TokenizerModel::merges().
struct MergeRule {
    TokenId left;
    TokenId right;
    TokenId result;

    friend bool operator==(const MergeRule&, const MergeRule&) = default;
};

/// Byte-level BPE vocabulary: <bos> at id 0, the 256 byte tokens at ids
/// 1..256, then learned tokens in the order their merge rules created them.
class TokenizerModel {
public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kFirstByte = 1;
    static constexpr TokenId kFirstMerged = 257;
    static constexpr std::size_t kBaseSize = 257;
    static constexpr std::string_view kBosName = "<bos>";

    /// Specials and bytes only, no merges.
    TokenizerModel();

    static constexpr TokenId byte_token(std::uint8_t b) { return kFirstByte + b; }

    std::size_t vocab_size() const noexcept { return tokens_.size(); }
    std::size_t requested_vocab_size() const noexcept { return requested_vocab_size_; }
    void set_requested_vocab_size(std::size_t n) { requested_vocab_size_ = n; }

    /// Surface bytes of a token. The <bos> special has the surface "<bos>"
    /// but is never matched by encode().
    const std::string& token_bytes(TokenId id) const;
    Provenance provenance(TokenId id) const;
    bool is_special(TokenId id) const noexcept { return id == kBos; }

    std::optional<TokenId> find(std::string_view bytes) const;
    std::optional<std::uint32_t> merge_rank(TokenId left, TokenId right) const;
    const std::vector<MergeRule>& merges() const noexcept { return merges_; }

    /// Appends a merge with the next rank. The result reuses an existing token
    /// with the same bytes, otherwise a new token is created with `prov`.
    /// Throws InvalidArgument if the (left, right) pair already has a rule.
    TokenId add_merge(TokenId left, TokenId right, Provenance prov);

    /// NFC-normalizes, pre-tokenizes and encodes. Never emits <bos>.
    TokenIdSeq encode(std::string_view text) const;
    /// Encodes one pre-tokenized word (raw bytes, no normalization).
    TokenIdSeq encode_word(std::string_view word_bytes) const;
    /// Concatenated token bytes, skipping <bos>. Throws InvalidTokenId.
    std::string decode_bytes(std::span<const TokenId> ids) const;
    /// decode_bytes() followed by UTF-8 decoding with U+FFFD replacement.
    std::string decode(std::span<const TokenId> ids) const;

    std::string to_json_string() const;
    static TokenizerModel from_json_string(std::string_view json);
    void save(const std::filesystem::path& path) const;
    static TokenizerModel load(const std::filesystem::path& path);

    friend bool operator==(const TokenizerModel& a, const TokenizerModel& b);

private:
    static std::uint64_t pair_key(TokenId l, TokenId r) {
        return (static_cast<std::uint64_t>(l) << 32) | r;
    }
    TokenId add_token(std::string bytes, Provenance prov);

    std::vector<std::string> tokens_;
    std::vector<Provenance> provenance_;
    std::vector<MergeRule> merges_;
    std::unordered_map<std::string, TokenId> index_;
    std::unordered_map<std::uint64_t, std::uint32_t> ranks_;
    std::size_t requested_vocab_size_ = kBaseSize;
};

/// Splits normalized text into words: an optional single leading 0x20 plus a
/// maximal run of non-whitespace bytes; any other whitespace byte is a word on its own.
std::vector<std::string_view> split_words(std::string_view text);

struct BpeTrainResult {
    TokenizerModel model;
    // Pair frequency at the time each merge was selected, by rank.
    std::vector<std::int64_t> merge_counts;
};

/// Greedy BPE over pre-tokenized word counts. Ties between equally frequent
/// pairs go to the smallest (left_id, right_id); pairs seen fewer than twice
/// are never merged, so training may stop below `target_vocab_size`.
BpeTrainResult train_bpe_detailed(const Corpus& corpus, std::size_t target_vocab_size,
                                  std::uint64_t seed = 0);

TokenizerModel train_bpe(const Corpus& corpus, std::size_t target_vocab_size,
                         std::uint64_t seed = 0);

/// Encodes every document, in parallel, with per-worker word caches.
std::vector<TokenIdSeq> encode_corpus(const TokenizerModel& model, const Corpus& corpus);

} // namespace lingua_adapt
