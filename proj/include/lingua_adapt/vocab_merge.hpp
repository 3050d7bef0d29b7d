#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lingua_adapt/bpe.hpp"

namespace lingua_adapt {

/// The tokens of an extra vocabulary that the base vocabulary lacks, with
/// the ids they occupy once appended after the base tokens.
struct VocabDiff {
    std::vector<std::string> new_tokens;
    std::vector<TokenId> new_ids;
    std::size_t base_vocab_size = 0;
    std::size_t overlap_count = 0;
    std::size_t dropped_duplicate_merges = 0;

    std::size_t size() const noexcept { return new_tokens.size(); }
    bool empty() const noexcept { return new_tokens.empty(); }
};

VocabDiff diff_vocab(const TokenizerModel& base, const TokenizerModel& extra);

/// Base tokens and merges unchanged, followed by the extra merges in their
/// original order at strictly lower priority. Extra merges whose (left, right)
/// pair already has a base rule are dropped and counted.
std::pair<TokenizerModel, VocabDiff> merge_tokenizers(const TokenizerModel& base,
                                                      const TokenizerModel& extra);

/// Reconstructs the diff of a model produced by merge_tokenizers from its
/// base: the ids past the base vocabulary. Throws IncompatibleAlphabet when
/// `merged` does not extend `base`.
VocabDiff diff_from_merged(const TokenizerModel& base, const TokenizerModel& merged);

std::vector<TokenId> added_token_ids(const VocabDiff& diff);

/// {new_token_count, overlap_count, dropped_duplicate_merges, new_ids_range}
/// with new_ids_range the half-open [first, end) id interval.
nlohmann::ordered_json diff_report(const VocabDiff& diff);

/// Added ids recorded in a diff report.
std::vector<TokenId> added_ids_from_report(const nlohmann::json& report);

} // namespace lingua_adapt
