#include "lingua_adapt/vocab_merge.hpp"

#include "lingua_adapt/error.hpp"

namespace lingua_adapt {

namespace {

void check_alphabet(const TokenizerModel& a, const TokenizerModel& b) {
    for (TokenId id = 0; id < TokenizerModel::kBaseSize; ++id) {
        if (a.token_bytes(id) != b.token_bytes(id)) {
            fail(ErrorCode::IncompatibleAlphabet,
                 "tokenizers disagree on special/byte token " + std::to_string(id));
        }
    }
}

} // namespace

std::pair<TokenizerModel, VocabDiff> merge_tokenizers(const TokenizerModel& base,
                                                      const TokenizerModel& extra) {
    check_alphabet(base, extra);
    TokenizerModel merged = base;
    VocabDiff diff;
    diff.base_vocab_size = base.vocab_size();

    // extra id -> merged id, filled as extra's merges are replayed in rank order.
    std::vector<TokenId> remap(extra.vocab_size(), 0);
    for (TokenId id = 0; id < TokenizerModel::kBaseSize; ++id) remap[id] = id;

    for (const auto& rule : extra.merges()) {
        const TokenId left = remap[rule.left];
        const TokenId right = remap[rule.right];
        // Covers base pairs and, when `extra` is itself a merged model, pairs
        // already appended by an earlier extra rule.
        if (merged.merge_rank(left, right)) {
            ++diff.dropped_duplicate_merges;
            remap[rule.result] = *merged.find(extra.token_bytes(rule.result));
            continue;
        }
        remap[rule.result] = merged.add_merge(left, right, Provenance::Added);
    }

    for (TokenId id = static_cast<TokenId>(base.vocab_size()); id < merged.vocab_size(); ++id) {
        diff.new_tokens.push_back(merged.token_bytes(id));
        diff.new_ids.push_back(id);
    }
    for (TokenId id = TokenizerModel::kFirstMerged; id < extra.vocab_size(); ++id) {
        if (base.find(extra.token_bytes(id))) ++diff.overlap_count;
    }
    merged.set_requested_vocab_size(merged.vocab_size());
    return {std::move(merged), std::move(diff)};
}

VocabDiff diff_vocab(const TokenizerModel& base, const TokenizerModel& extra) {
    return merge_tokenizers(base, extra).second;
}

VocabDiff diff_from_merged(const TokenizerModel& base, const TokenizerModel& merged) {
    if (merged.vocab_size() < base.vocab_size() ||
        merged.merges().size() < base.merges().size()) {
        fail(ErrorCode::IncompatibleAlphabet, "merged tokenizer is smaller than its base");
    }
    for (TokenId id = 0; id < base.vocab_size(); ++id) {
        if (merged.token_bytes(id) != base.token_bytes(id)) {
            fail(ErrorCode::IncompatibleAlphabet,
                 "merged tokenizer does not preserve base token " + std::to_string(id));
        }
    }
    for (std::size_t r = 0; r < base.merges().size(); ++r) {
        if (!(merged.merges()[r] == base.merges()[r])) {
            fail(ErrorCode::IncompatibleAlphabet,
                 "merged tokenizer does not preserve base merge rank " + std::to_string(r));
        }
    }
    VocabDiff diff;
    diff.base_vocab_size = base.vocab_size();
    for (TokenId id = static_cast<TokenId>(base.vocab_size()); id < merged.vocab_size(); ++id) {
        diff.new_tokens.push_back(merged.token_bytes(id));
        diff.new_ids.push_back(id);
    }
    return diff;
}

std::vector<TokenId> added_token_ids(const VocabDiff& diff) {
    return diff.new_ids;
}

nlohmann::ordered_json diff_report(const VocabDiff& diff) {
    nlohmann::ordered_json j;
    j["new_token_count"] = diff.size();
    j["overlap_count"] = diff.overlap_count;
    j["dropped_duplicate_merges"] = diff.dropped_duplicate_merges;
    const std::size_t first = diff.base_vocab_size;
    j["new_ids_range"] = {first, first + diff.size()};
    return j;
}

std::vector<TokenId> added_ids_from_report(const nlohmann::json& report) {
    try {
        const auto range = report.at("new_ids_range").get<std::vector<std::size_t>>();
        if (range.size() != 2 || range[1] < range[0]) {
            fail(ErrorCode::MalformedFile, "merge report: new_ids_range must be [first, end)");
        }
        std::vector<TokenId> ids;
        for (std::size_t id = range[0]; id < range[1]; ++id) ids.push_back(static_cast<TokenId>(id));
        return ids;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, std::string("merge report: ") + e.what());
    }
}

} // namespace lingua_adapt
