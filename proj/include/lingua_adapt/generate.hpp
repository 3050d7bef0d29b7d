#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "lingua_adapt/bpe.hpp"
#include "lingua_adapt/toylm.hpp"

namespace lingua_adapt {

/// Anything that maps a token history to next-token logits.
class LanguageModel {
public:
    virtual ~LanguageModel() = default;
    virtual std::size_t vocab_size() const = 0;
    /// Writes vocab_size() logits for the token following `history`.
    virtual void next_logits(std::span<const TokenId> history, std::span<double> out) const = 0;
};

class ToyLanguageModel final : public LanguageModel {
public:
    explicit ToyLanguageModel(const LMCheckpoint& lm) : lm_(lm) {}

    std::size_t vocab_size() const override { return lm_.vocab_size(); }
    void next_logits(std::span<const TokenId> history, std::span<double> out) const override;

private:
    const LMCheckpoint& lm_;
};

/// Every token equally likely.
class UniformLanguageModel final : public LanguageModel {
public:
    explicit UniformLanguageModel(std::size_t vocab_size) : vocab_size_(vocab_size) {}
    std::size_t vocab_size() const override { return vocab_size_; }
    void next_logits(std::span<const TokenId> history, std::span<double> out) const override;

private:
    std::size_t vocab_size_;
};

/// log-softmax of the next-token logits.
void next_log_probs(const LanguageModel& model, std::span<const TokenId> history, std::span<double> out);

/// Monotonic seconds; injectable so timing contracts can be tested.
using Clock = std::function<double()>;
Clock steady_clock_seconds();

struct GenerationResult {
    std::string text;
    TokenIdSeq ids;
    double elapsed_seconds = 0.0;
};

/// Greedy decoding (argmax, ties to the lowest id). With `stop_on_newline`,
/// generation ends before the first token whose bytes contain '\n'; that
/// token is not returned. The timer covers prompt encoding and decoding.
GenerationResult generate_greedy(const LanguageModel& model, const TokenizerModel& tokenizer,
                                 std::string_view prompt, std::size_t max_tokens,
                                 bool stop_on_newline, const Clock& clock = steady_clock_seconds());

GenerationResult generate_greedy(const LMCheckpoint& lm, const TokenizerModel& tokenizer,
                                 std::string_view prompt, std::size_t max_tokens,
                                 bool stop_on_newline = true);

} // namespace lingua_adapt
