#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "lingua_adapt/bpe.hpp"
#include "lingua_adapt/corpus.hpp"
#include "lingua_adapt/embed.hpp"
#include "lingua_adapt/vocab_merge.hpp"

namespace lingua_adapt {

struct LMConfig {
    std::size_t context_k = 8;
    std::size_t embed_dim = 64;
    std::size_t hidden_h = 256;
    std::size_t vocab_size = 0;
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const LMConfig&, const LMConfig&) = default;
};

/// Per-parameter buffers laid out like the model parameters (used for the
/// Adam moments and for gradients).
struct ParamBuffers {
    FloatVec E;
    FloatVec O;
    FloatVec W1;
    FloatVec b1;

    friend bool operator==(const ParamBuffers&, const ParamBuffers&) = default;
};

/// Fixed-context feed-forward LM:
///   hidden = ReLU(concat(E[ctx_1..ctx_k]) * W1 + b1),  logits = O * hidden.
/// The context is the k previous ids, left-padded with <bos>. There is no
/// per-token output bias, so every token owns exactly one row of E and of O.
struct LMCheckpoint {
    LMConfig config;
    EmbeddingTable E;        // vocab x d
    EmbeddingTable O;        // vocab x h
    FloatVec W1;   // (k*d) x h, row-major
    FloatVec b1;   // h
    ParamBuffers adam_m;
    ParamBuffers adam_v;
    std::uint64_t adam_t = 0;
    std::uint64_t step = 0;

    std::size_t vocab_size() const noexcept { return config.vocab_size; }
    bool all_finite() const;
};

struct TrainSchedule {
    std::size_t total_steps = 0;   // 0: one pass over the sequences
    std::size_t warmup_steps = 0;
    double base_lr = 1e-3;
    std::size_t batch_size = 8;
    bool freeze_body = false;
    double clip_norm = 1.0;
};

struct StepLog {
    std::uint64_t step;
    double lr;
    double loss;
};

inline constexpr std::size_t kMaxSequenceLength = 1024;

/// Parameters ~ N(0, 0.02^2) from config.seed; zero optimizer state.
LMCheckpoint new_lm(const LMConfig& config);

/// Mean next-token cross-entropy (nats) over every position of every sequence.
double forward_loss(const LMCheckpoint& lm, const std::vector<TokenIdSeq>& batch);

/// Logits for every vocabulary entry at each position of `seq` (row-major, |seq| x vocab).
std::vector<float> position_logits(const LMCheckpoint& lm, const TokenIdSeq& seq);

/// Logits for the token following `history` (only the last k ids matter).
void next_token_logits(const LMCheckpoint& lm, std::span<const TokenId> history, std::span<float> out);

/// Linear warmup to base_lr over warmup_steps, then cosine decay towards 0.
double cosine_warmup_lr(std::size_t step, const TrainSchedule& schedule);

/// Grows E and O to the merged vocabulary with the given strategy (applied to
/// each table independently); body weights are untouched and the Adam
/// moments of the new rows start at zero.
LMCheckpoint resize_vocab(const LMCheckpoint& lm, const TokenizerModel& merged,
                          const TokenizerModel& base, const VocabDiff& diff,
                          const InitStrategy& strategy, const EmbeddingTable* aux = nullptr);

/// Encodes documents and splits them into sequences of at most 1024 tokens;
/// empty documents contribute nothing.
std::vector<TokenIdSeq> make_sequences(const TokenizerModel& tokenizer, const Corpus& corpus);

/// Adam (0.9, 0.999, 1e-8) with global-norm clipping; trains `lm` in place.
std::vector<StepLog> train(LMCheckpoint& lm, const Corpus& corpus, const TokenizerModel& tokenizer,
                           const TrainSchedule& schedule);
std::vector<StepLog> train_sequences(LMCheckpoint& lm, const std::vector<TokenIdSeq>& sequences,
                                     const TrainSchedule& schedule);

struct WarmStartOptions {
    double fraction = 0.05;
    double lr = 1e-3;
    std::size_t batch_size = 8;
    std::size_t total_steps = 0;    // 0: one pass over the selected documents
    double warmup_fraction = 0.1;
};

/// Embedding-only training (body frozen) on the first ceil(fraction * n_docs) documents.
std::vector<StepLog> warm_start(LMCheckpoint& lm, const Corpus& corpus,
                                const TokenizerModel& tokenizer, const WarmStartOptions& options = {});

/// Mean loss over all sequences of a corpus, evaluated in fixed-size chunks.
double corpus_loss(const LMCheckpoint& lm, const TokenizerModel& tokenizer, const Corpus& corpus);
double sequences_loss(const LMCheckpoint& lm, const std::vector<TokenIdSeq>& sequences);

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::vector<double> rel_errors;
    std::size_t skipped_kinks = 0;
};

/// Central finite differences at 64-bit precision on `n_coords` randomly chosen
/// parameters against the analytic gradient.
/// rel = |g_a - g_n| / max(1e-8, |g_a| + |g_n|).
GradCheckResult grad_check(const LMCheckpoint& lm, const std::vector<TokenIdSeq>& batch,
                           std::size_t n_coords, double h = 1e-4, std::uint64_t seed = 0);

// Checkpoint directory: config.json, E.embt, O.embt, body.bin, optim.bin.
void save_checkpoint(const LMCheckpoint& lm, const std::filesystem::path& dir);
LMCheckpoint load_checkpoint(const std::filesystem::path& dir);

std::vector<std::uint8_t> serialize_body(const LMCheckpoint& lm);
std::vector<std::uint8_t> serialize_optimizer(const LMCheckpoint& lm);

} // namespace lingua_adapt
