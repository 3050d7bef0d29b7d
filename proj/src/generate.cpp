#include "lingua_adapt/generate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "lingua_adapt/error.hpp"
#include "lingua_adapt/text.hpp"

namespace lingua_adapt {

void ToyLanguageModel::next_logits(std::span<const TokenId> history, std::span<double> out) const {
    std::vector<float> buf(lm_.vocab_size());
    next_token_logits(lm_, history, buf);
    std::copy(buf.begin(), buf.end(), out.begin());
}

void UniformLanguageModel::next_logits(std::span<const TokenId>, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
}

void next_log_probs(const LanguageModel& model, std::span<const TokenId> history, std::span<double> out) {
    model.next_logits(history, out);
    const double mx = *std::max_element(out.begin(), out.end());
    double sum = 0.0;
    for (double v : out) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    for (double& v : out) v -= lse;
}

Clock steady_clock_seconds() {
    return [] {
        using namespace std::chrono;
        return duration<double>(steady_clock::now().time_since_epoch()).count();
    };
}

GenerationResult generate_greedy(const LanguageModel& model, const TokenizerModel& tokenizer,
                                 std::string_view prompt, std::size_t max_tokens,
                                 bool stop_on_newline, const Clock& clock) {
    if (max_tokens == 0) fail(ErrorCode::InvalidArgument, "max_tokens must be at least 1");
    if (!is_valid_utf8(prompt)) fail(ErrorCode::InvalidPrompt, "prompt is not valid UTF-8");
    if (model.vocab_size() != tokenizer.vocab_size()) {
        fail(ErrorCode::ShapeMismatch, "model and tokenizer vocabulary sizes differ");
    }

    const double t0 = clock();
    TokenIdSeq history = tokenizer.encode(prompt);
    const std::size_t prompt_len = history.size();
    std::vector<double> logits(model.vocab_size());
    GenerationResult result;
    for (std::size_t i = 0; i < max_tokens; ++i) {
        model.next_logits(history, logits);
        // <bos> is context padding, never an output.
        TokenId best = 1;
        for (TokenId id = 2; id < logits.size(); ++id) {
            if (logits[id] > logits[best]) best = id;
        }
        if (stop_on_newline && tokenizer.token_bytes(best).find('\n') != std::string::npos) break;
        history.push_back(best);
    }
    result.ids.assign(history.begin() + static_cast<std::ptrdiff_t>(prompt_len), history.end());
    result.text = tokenizer.decode(result.ids);
    result.elapsed_seconds = clock() - t0;
    return result;
}

GenerationResult generate_greedy(const LMCheckpoint& lm, const TokenizerModel& tokenizer,
                                 std::string_view prompt, std::size_t max_tokens, bool stop_on_newline) {
    ToyLanguageModel model(lm);
    return generate_greedy(model, tokenizer, prompt, max_tokens, stop_on_newline);
}

} // namespace lingua_adapt
