#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "lingua_adapt/aligned.hpp"
#include "lingua_adapt/bpe.hpp"
#include "lingua_adapt/vocab_merge.hpp"

namespace lingua_adapt {

enum class TableRole : std::uint8_t { Input = 0, Output = 1 };

/// Dense row-major |V| x d float matrix, one row per token.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t vocab_size, std::size_t dim, TableRole role = TableRole::Input);

    std::size_t vocab_size() const noexcept { return vocab_size_; }
    std::size_t dim() const noexcept { return dim_; }
    TableRole role() const noexcept { return role_; }

    std::span<float> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

    FloatVec& data() noexcept { return data_; }
    const FloatVec& data() const noexcept { return data_; }

    bool all_finite() const;

    friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

private:
    std::size_t vocab_size_ = 0;
    std::size_t dim_ = 0;
    TableRole role_ = TableRole::Input;
    FloatVec data_;
};

// "EMBT", u32 version, u8 role, 3 reserved bytes, u64 vocab_size, u64 dim,
// then vocab_size * dim little-endian binary32 values.
std::vector<std::uint8_t> serialize_table(const EmbeddingTable& table);
EmbeddingTable deserialize_table(std::span<const std::uint8_t> bytes);
void save_table(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_table(const std::filesystem::path& path);

enum class InitKind { Mean, Random, RandomToken, FocusLite };

InitKind parse_init_kind(std::string_view name);
std::string_view to_string(InitKind kind);

struct InitStrategy {
    InitKind kind = InitKind::Mean;
    std::uint64_t seed = 0;
    std::size_t focus_k = 10;
};

/// Base-tokenizer encoding of a token's surface bytes as an isolated word.
TokenIdSeq constituent_ids(const TokenizerModel& base, std::string_view token_bytes);

/// Returns a |merged| x d table: rows of `table` copied bit-exactly, rows of
/// the diff filled by `strategy`. `aux` is required for FocusLite and must
/// have one row per merged-model token.
EmbeddingTable init_new_rows(const EmbeddingTable& table, const TokenizerModel& merged,
                             const TokenizerModel& base, const VocabDiff& diff,
                             const InitStrategy& strategy, const EmbeddingTable* aux = nullptr);

} // namespace lingua_adapt
