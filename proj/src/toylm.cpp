#include "lingua_adapt/toylm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

#include "lingua_adapt/error.hpp"
#include "lingua_adapt/random.hpp"

namespace lingua_adapt {

namespace fs = std::filesystem;

void LMConfig::validate() const {
    if (context_k < 1 || embed_dim < 1 || hidden_h < 1) {
        fail(ErrorCode::InvalidArgument, "LM dimensions must all be at least 1");
    }
    if (vocab_size < TokenizerModel::kBaseSize) {
        fail(ErrorCode::InvalidArgument, "LM vocab_size must be at least 257");
    }
}

bool LMCheckpoint::all_finite() const {
    auto finite = [](const FloatVec& v) {
        return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
    };
    return E.all_finite() && O.all_finite() && finite(W1) && finite(b1);
}

namespace {

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct Weights {
    Eigen::Map<const RowMat<S>> E;
    Eigen::Map<const RowMat<S>> O;
    Eigen::Map<const RowMat<S>> W1;
    Eigen::Map<const Vec<S>> b1;
};

template <typename S>
struct Grads {
    Eigen::Map<RowMat<S>> E;
    Eigen::Map<RowMat<S>> O;
    Eigen::Map<RowMat<S>> W1;
    Eigen::Map<Vec<S>> b1;
};

struct Dims {
    Eigen::Index vocab, d, h, k;
};

template <typename S, typename Buf>
Weights<S> weights_of(const Buf& E, const Buf& O, const Buf& W1, const Buf& b1, const Dims& dm) {
    return Weights<S>{
        Eigen::Map<const RowMat<S>>(E.data(), dm.vocab, dm.d),
        Eigen::Map<const RowMat<S>>(O.data(), dm.vocab, dm.h),
        Eigen::Map<const RowMat<S>>(W1.data(), dm.k * dm.d, dm.h),
        Eigen::Map<const Vec<S>>(b1.data(), dm.h),
    };
}

template <typename S, typename Buf>
Grads<S> grads_of(Buf& E, Buf& O, Buf& W1, Buf& b1, const Dims& dm) {
    return Grads<S>{
        Eigen::Map<RowMat<S>>(E.data(), dm.vocab, dm.d),
        Eigen::Map<RowMat<S>>(O.data(), dm.vocab, dm.h),
        Eigen::Map<RowMat<S>>(W1.data(), dm.k * dm.d, dm.h),
        Eigen::Map<Vec<S>>(b1.data(), dm.h),
    };
}

Dims dims_of(const LMConfig& c) {
    return Dims{static_cast<Eigen::Index>(c.vocab_size), static_cast<Eigen::Index>(c.embed_dim),
                static_cast<Eigen::Index>(c.hidden_h), static_cast<Eigen::Index>(c.context_k)};
}

struct LossSum {
    double total = 0.0;
    std::size_t count = 0;
    std::uint64_t mask_hash = 1469598103934665603ULL;
};

constexpr Eigen::Index kChunk = 256;

void validate_batch(const std::vector<TokenIdSeq>& batch, std::size_t vocab) {
    for (const auto& seq : batch) {
        if (seq.empty()) fail(ErrorCode::EmptySequence, "sequence with no tokens");
        for (TokenId id : seq) {
            if (id >= vocab) {
                fail(ErrorCode::InvalidTokenId, "token id " + std::to_string(id) +
                                                    " outside LM vocabulary of " + std::to_string(vocab));
            }
        }
    }
}

// Sums next-token losses over all positions. When `g` is set, accumulates
// grad_scale * d(sum)/d(theta) into it; body gradients only if `body_grads`.
template <typename S>
LossSum loss_and_grad(const Weights<S>& w, const Dims& dm, const std::vector<TokenIdSeq>& batch,
                      Grads<S>* g, bool body_grads, S grad_scale, bool hash_mask = false) {
    struct Pos {
        const TokenIdSeq* seq;
        std::size_t i;
    };
    std::vector<Pos> positions;
    for (const auto& seq : batch) {
        for (std::size_t i = 0; i < seq.size(); ++i) positions.push_back(Pos{&seq, i});
    }

    LossSum out;
    const Eigen::Index kd = dm.k * dm.d;
    RowMat<S> X, pre, logits, dlogits, dpre, dX;
    std::vector<TokenId> ctx_ids;
    const auto n_total = static_cast<Eigen::Index>(positions.size());

    for (Eigen::Index start = 0; start < n_total; start += kChunk) {
        const Eigen::Index n = std::min(kChunk, n_total - start);
        X.resize(n, kd);
        ctx_ids.assign(static_cast<std::size_t>(n * dm.k), TokenizerModel::kBos);
        for (Eigen::Index r = 0; r < n; ++r) {
            const auto& p = positions[static_cast<std::size_t>(start + r)];
            for (Eigen::Index j = 0; j < dm.k; ++j) {
                const auto src = static_cast<std::int64_t>(p.i) - dm.k + j;
                const TokenId id = src >= 0 ? (*p.seq)[static_cast<std::size_t>(src)] : TokenizerModel::kBos;
                ctx_ids[static_cast<std::size_t>(r * dm.k + j)] = id;
                X.row(r).segment(j * dm.d, dm.d) = w.E.row(id);
            }
        }
        pre.noalias() = X * w.W1;
        pre.rowwise() += w.b1.transpose();
        if (hash_mask) {
            for (Eigen::Index r = 0; r < n; ++r) {
                for (Eigen::Index c = 0; c < dm.h; ++c) {
                    out.mask_hash = (out.mask_hash ^ (pre(r, c) > S(0) ? 1u : 0u)) * 1099511628211ULL;
                }
            }
        }
        const RowMat<S> hidden = pre.cwiseMax(S(0));
        logits.noalias() = hidden * w.O.transpose();

        if (g) dlogits.resize(n, dm.vocab);
        for (Eigen::Index r = 0; r < n; ++r) {
            const auto& p = positions[static_cast<std::size_t>(start + r)];
            const TokenId target = (*p.seq)[p.i];
            auto row = logits.row(r);
            const S mx = row.maxCoeff();
            const S sum = (row.array() - mx).exp().sum();
            const S lse = mx + std::log(sum);
            out.total += static_cast<double>(lse - row(target));
            if (g) {
                dlogits.row(r) = ((row.array() - lse).exp() * grad_scale).matrix();
                dlogits(r, target) -= grad_scale;
            }
        }
        out.count += static_cast<std::size_t>(n);
        if (!g) continue;

        g->O.noalias() += dlogits.transpose() * hidden;
        dpre.noalias() = dlogits * w.O;
        dpre = (pre.array() > S(0)).select(dpre, S(0));
        if (body_grads) {
            g->W1.noalias() += X.transpose() * dpre;
            g->b1 += dpre.colwise().sum().transpose();
        }
        dX.noalias() = dpre * w.W1.transpose();
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index j = 0; j < dm.k; ++j) {
                const TokenId id = ctx_ids[static_cast<std::size_t>(r * dm.k + j)];
                g->E.row(id) += dX.row(r).segment(j * dm.d, dm.d);
            }
        }
    }
    return out;
}

ParamBuffers zero_buffers(const LMConfig& c) {
    ParamBuffers b;
    b.E.assign(c.vocab_size * c.embed_dim, 0.0f);
    b.O.assign(c.vocab_size * c.hidden_h, 0.0f);
    b.W1.assign(c.context_k * c.embed_dim * c.hidden_h, 0.0f);
    b.b1.assign(c.hidden_h, 0.0f);
    return b;
}

Weights<float> weights_of(const LMCheckpoint& lm) {
    return weights_of<float>(lm.E.data(), lm.O.data(), lm.W1, lm.b1, dims_of(lm.config));
}

} // namespace

LMCheckpoint new_lm(const LMConfig& config) {
    config.validate();
    LMCheckpoint lm;
    lm.config = config;
    lm.E = EmbeddingTable(config.vocab_size, config.embed_dim, TableRole::Input);
    lm.O = EmbeddingTable(config.vocab_size, config.hidden_h, TableRole::Output);
    lm.W1.assign(config.context_k * config.embed_dim * config.hidden_h, 0.0f);
    lm.b1.assign(config.hidden_h, 0.0f);

    std::normal_distribution<double> gauss(0.0, 0.02);
    auto fill = [&](FloatVec& v, std::uint64_t key) {
        auto rng = make_rng(config.seed, key);
        for (auto& x : v) x = static_cast<float>(gauss(rng));
    };
    fill(lm.E.data(), 1);
    fill(lm.O.data(), 2);
    fill(lm.W1, 3);
    fill(lm.b1, 4);
    lm.adam_m = zero_buffers(config);
    lm.adam_v = zero_buffers(config);
    return lm;
}

double forward_loss(const LMCheckpoint& lm, const std::vector<TokenIdSeq>& batch) {
    validate_batch(batch, lm.vocab_size());
    const auto s = loss_and_grad<float>(weights_of(lm), dims_of(lm.config), batch, nullptr, false, 0.0f);
    return s.count ? s.total / static_cast<double>(s.count) : 0.0;
}

std::vector<float> position_logits(const LMCheckpoint& lm, const TokenIdSeq& seq) {
    validate_batch({seq}, lm.vocab_size());
    const auto dm = dims_of(lm.config);
    const auto w = weights_of(lm);
    const auto n = static_cast<Eigen::Index>(seq.size());
    RowMat<float> X(n, dm.k * dm.d);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index j = 0; j < dm.k; ++j) {
            const auto src = r - dm.k + j;
            const TokenId id = src >= 0 ? seq[static_cast<std::size_t>(src)] : TokenizerModel::kBos;
            X.row(r).segment(j * dm.d, dm.d) = w.E.row(id);
        }
    }
    RowMat<float> pre = X * w.W1;
    pre.rowwise() += w.b1.transpose();
    const RowMat<float> logits = pre.cwiseMax(0.0f) * w.O.transpose();
    return std::vector<float>(logits.data(), logits.data() + logits.size());
}

void next_token_logits(const LMCheckpoint& lm, std::span<const TokenId> history, std::span<float> out) {
    const auto dm = dims_of(lm.config);
    if (out.size() != lm.vocab_size()) fail(ErrorCode::ShapeMismatch, "logit buffer has the wrong size");
    const auto w = weights_of(lm);
    Vec<float> x(dm.k * dm.d);
    const auto n = static_cast<std::int64_t>(history.size());
    for (Eigen::Index j = 0; j < dm.k; ++j) {
        const std::int64_t src = n - dm.k + j;
        const TokenId id = src >= 0 ? history[static_cast<std::size_t>(src)] : TokenizerModel::kBos;
        if (id >= lm.vocab_size()) fail(ErrorCode::InvalidTokenId, "history id outside LM vocabulary");
        x.segment(j * dm.d, dm.d) = w.E.row(id).transpose();
    }
    Vec<float> hidden = w.W1.transpose() * x + w.b1;
    hidden = hidden.cwiseMax(0.0f);
    Eigen::Map<Vec<float>>(out.data(), dm.vocab).noalias() = w.O * hidden;
}

double cosine_warmup_lr(std::size_t step, const TrainSchedule& schedule) {
    if (step >= schedule.total_steps) {
        fail(ErrorCode::StepOutOfRange, "step " + std::to_string(step) + " outside schedule of " +
                                            std::to_string(schedule.total_steps) + " steps");
    }
    if (step < schedule.warmup_steps) {
        return schedule.base_lr * static_cast<double>(step + 1) / static_cast<double>(schedule.warmup_steps);
    }
    const double progress = static_cast<double>(step - schedule.warmup_steps) /
                            static_cast<double>(schedule.total_steps - schedule.warmup_steps);
    return schedule.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

LMCheckpoint resize_vocab(const LMCheckpoint& lm, const TokenizerModel& merged,
                          const TokenizerModel& base, const VocabDiff& diff,
                          const InitStrategy& strategy, const EmbeddingTable* aux) {
    if (lm.vocab_size() != base.vocab_size()) {
        fail(ErrorCode::ShapeMismatch, "checkpoint vocabulary (" + std::to_string(lm.vocab_size()) +
                                           ") does not match the base tokenizer (" +
                                           std::to_string(base.vocab_size()) + ")");
    }
    LMCheckpoint out = lm;
    out.E = init_new_rows(lm.E, merged, base, diff, strategy, aux);
    out.O = init_new_rows(lm.O, merged, base, diff, strategy, aux);
    out.config.vocab_size = merged.vocab_size();
    auto grow = [](FloatVec& v, std::size_t n) { v.resize(n, 0.0f); };
    grow(out.adam_m.E, out.E.data().size());
    grow(out.adam_v.E, out.E.data().size());
    grow(out.adam_m.O, out.O.data().size());
    grow(out.adam_v.O, out.O.data().size());
    return out;
}

std::vector<TokenIdSeq> make_sequences(const TokenizerModel& tokenizer, const Corpus& corpus) {
    std::vector<TokenIdSeq> seqs;
    for (auto& ids : encode_corpus(tokenizer, corpus)) {
        for (std::size_t start = 0; start < ids.size(); start += kMaxSequenceLength) {
            const std::size_t end = std::min(ids.size(), start + kMaxSequenceLength);
            seqs.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(start),
                              ids.begin() + static_cast<std::ptrdiff_t>(end));
        }
    }
    return seqs;
}

namespace {

void adam_update(FloatVec& p, const FloatVec& g, FloatVec& m,
                 FloatVec& v, float lr, float bc1, float bc2, float scale) {
    constexpr float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const float gi = g[i] * scale;
        m[i] = b1 * m[i] + (1.0f - b1) * gi;
        v[i] = b2 * v[i] + (1.0f - b2) * gi * gi;
        const float mhat = m[i] / bc1;
        const float vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

double sum_squares(const FloatVec& v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return s;
}

} // namespace

std::vector<StepLog> train_sequences(LMCheckpoint& lm, const std::vector<TokenIdSeq>& sequences,
                                     const TrainSchedule& schedule) {
    if (sequences.empty()) fail(ErrorCode::EmptyCorpus, "no training sequences");
    if (schedule.base_lr <= 0.0) fail(ErrorCode::InvalidArgument, "base_lr must be positive");
    if (schedule.batch_size == 0) fail(ErrorCode::InvalidArgument, "batch_size must be positive");
    validate_batch(sequences, lm.vocab_size());

    TrainSchedule sched = schedule;
    if (sched.total_steps == 0) {
        sched.total_steps = (sequences.size() + sched.batch_size - 1) / sched.batch_size;
    }
    if (sched.warmup_steps > sched.total_steps) {
        fail(ErrorCode::InvalidArgument, "warmup_steps exceeds total_steps");
    }

    const auto dm = dims_of(lm.config);
    ParamBuffers grad = zero_buffers(lm.config);
    if (lm.adam_m.E.size() != grad.E.size() || lm.adam_m.O.size() != grad.O.size()) {
        lm.adam_m = zero_buffers(lm.config);
        lm.adam_v = zero_buffers(lm.config);
        lm.adam_t = 0;
    }

    std::vector<std::size_t> order(sequences.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = order.size();
    std::uint64_t epoch = 0;
    const std::uint64_t start_step = lm.step;

    std::vector<StepLog> log;
    log.reserve(sched.total_steps);
    std::vector<TokenIdSeq> batch;
    for (std::size_t s = 0; s < sched.total_steps; ++s) {
        batch.clear();
        while (batch.size() < sched.batch_size && batch.size() < sequences.size()) {
            if (cursor == order.size()) {
                auto rng = make_rng(lm.config.seed, (start_step << 20) ^ epoch++);
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            batch.push_back(sequences[order[cursor++]]);
        }

        std::fill(grad.E.begin(), grad.E.end(), 0.0f);
        std::fill(grad.O.begin(), grad.O.end(), 0.0f);
        std::fill(grad.W1.begin(), grad.W1.end(), 0.0f);
        std::fill(grad.b1.begin(), grad.b1.end(), 0.0f);

        std::size_t n_pos = 0;
        for (const auto& q : batch) n_pos += q.size();
        auto g = grads_of<float>(grad.E, grad.O, grad.W1, grad.b1, dm);
        const auto res = loss_and_grad<float>(weights_of(lm), dm, batch, &g, !sched.freeze_body,
                                              1.0f / static_cast<float>(n_pos));
        const double loss = res.total / static_cast<double>(res.count);

        double sq = sum_squares(grad.E) + sum_squares(grad.O);
        if (!sched.freeze_body) sq += sum_squares(grad.W1) + sum_squares(grad.b1);
        const double gnorm = std::sqrt(sq);
        const float clip = (sched.clip_norm > 0.0 && gnorm > sched.clip_norm)
                               ? static_cast<float>(sched.clip_norm / gnorm)
                               : 1.0f;

        const double lr = cosine_warmup_lr(s, sched);
        ++lm.adam_t;
        const auto t = static_cast<double>(lm.adam_t);
        const auto bc1 = static_cast<float>(1.0 - std::pow(0.9, t));
        const auto bc2 = static_cast<float>(1.0 - std::pow(0.999, t));
        const auto flr = static_cast<float>(lr);
        adam_update(lm.E.data(), grad.E, lm.adam_m.E, lm.adam_v.E, flr, bc1, bc2, clip);
        adam_update(lm.O.data(), grad.O, lm.adam_m.O, lm.adam_v.O, flr, bc1, bc2, clip);
        if (!sched.freeze_body) {
            adam_update(lm.W1, grad.W1, lm.adam_m.W1, lm.adam_v.W1, flr, bc1, bc2, clip);
            adam_update(lm.b1, grad.b1, lm.adam_m.b1, lm.adam_v.b1, flr, bc1, bc2, clip);
        }
        log.push_back(StepLog{lm.step, lr, loss});
        ++lm.step;
    }
    return log;
}

std::vector<StepLog> train(LMCheckpoint& lm, const Corpus& corpus, const TokenizerModel& tokenizer,
                           const TrainSchedule& schedule) {
    if (corpus.empty()) fail(ErrorCode::EmptyCorpus, "cannot train on an empty corpus");
    if (tokenizer.vocab_size() != lm.vocab_size()) {
        fail(ErrorCode::ShapeMismatch, "tokenizer and LM vocabulary sizes differ");
    }
    return train_sequences(lm, make_sequences(tokenizer, corpus), schedule);
}

std::vector<StepLog> warm_start(LMCheckpoint& lm, const Corpus& corpus,
                                const TokenizerModel& tokenizer, const WarmStartOptions& options) {
    if (!(options.fraction > 0.0 && options.fraction <= 1.0)) {
        fail(ErrorCode::InvalidFraction, "warm-start fraction must lie in (0, 1]");
    }
    if (corpus.empty()) fail(ErrorCode::EmptyCorpus, "cannot warm-start on an empty corpus");
    const auto n = static_cast<std::size_t>(std::ceil(options.fraction * static_cast<double>(corpus.size())));
    if (n == 0) fail(ErrorCode::InvalidFraction, "warm-start fraction selects no documents");
    Corpus head;
    head.source_id = corpus.source_id;
    head.docs.assign(corpus.docs.begin(), corpus.docs.begin() + static_cast<std::ptrdiff_t>(n));
    if (tokenizer.vocab_size() != lm.vocab_size()) {
        fail(ErrorCode::ShapeMismatch, "tokenizer and LM vocabulary sizes differ");
    }
    const auto seqs = make_sequences(tokenizer, head);
    if (seqs.empty()) fail(ErrorCode::InvalidFraction, "warm-start documents contain no tokens");

    TrainSchedule sched;
    sched.base_lr = options.lr;
    sched.batch_size = options.batch_size;
    sched.freeze_body = true;
    sched.total_steps = options.total_steps > 0 ? options.total_steps
                                                : (seqs.size() + options.batch_size - 1) / options.batch_size;
    sched.warmup_steps = static_cast<std::size_t>(options.warmup_fraction * static_cast<double>(sched.total_steps));
    return train_sequences(lm, seqs, sched);
}

double sequences_loss(const LMCheckpoint& lm, const std::vector<TokenIdSeq>& sequences) {
    return forward_loss(lm, sequences);
}

double corpus_loss(const LMCheckpoint& lm, const TokenizerModel& tokenizer, const Corpus& corpus) {
    const auto seqs = make_sequences(tokenizer, corpus);
    if (seqs.empty()) fail(ErrorCode::EmptyCorpus, "corpus has no tokens");
    return forward_loss(lm, seqs);
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckResult grad_check(const LMCheckpoint& lm, const std::vector<TokenIdSeq>& batch,
                           std::size_t n_coords, double h, std::uint64_t seed) {
    validate_batch(batch, lm.vocab_size());
    using DoubleVec = std::vector<double, AlignedAllocator<double>>;
    const auto dm = dims_of(lm.config);
    auto widen = [](const FloatVec& v) { return DoubleVec(v.begin(), v.end()); };
    DoubleVec E = widen(lm.E.data()), O = widen(lm.O.data()), W1 = widen(lm.W1), b1 = widen(lm.b1);
    DoubleVec gE(E.size(), 0.0), gO(O.size(), 0.0), gW1(W1.size(), 0.0), gb1(b1.size(), 0.0);

    std::size_t n_pos = 0;
    for (const auto& q : batch) n_pos += q.size();
    const double inv_n = 1.0 / static_cast<double>(n_pos);

    auto g = grads_of<double>(gE, gO, gW1, gb1, dm);
    const auto base = loss_and_grad<double>(weights_of<double>(E, O, W1, b1, dm), dm, batch, &g, true,
                                            inv_n, true);

    // Rows of E that the batch actually reads; other E rows have zero gradient.
    std::vector<TokenId> used_rows{TokenizerModel::kBos};
    for (const auto& q : batch) used_rows.insert(used_rows.end(), q.begin(), q.end());
    std::sort(used_rows.begin(), used_rows.end());
    used_rows.erase(std::unique(used_rows.begin(), used_rows.end()), used_rows.end());

    struct Group {
        DoubleVec* param;
        const DoubleVec* grad;
    };
    const Group groups[] = {{&E, &gE}, {&O, &gO}, {&W1, &gW1}, {&b1, &gb1}};

    Rng rng(derive_seed(seed, 0x47524144ULL));
    GradCheckResult result;
    const std::size_t max_attempts = n_coords * 20 + 100;
    std::size_t attempts = 0;
    while (result.rel_errors.size() < n_coords && attempts++ < max_attempts) {
        const std::size_t gi = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
        const Group& grp = groups[gi];
        std::size_t idx;
        if (gi == 0) {
            const TokenId row = used_rows[std::uniform_int_distribution<std::size_t>(0, used_rows.size() - 1)(rng)];
            idx = row * static_cast<std::size_t>(dm.d) +
                  std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(dm.d) - 1)(rng);
        } else {
            idx = std::uniform_int_distribution<std::size_t>(0, grp.param->size() - 1)(rng);
        }
        const double saved = (*grp.param)[idx];
        (*grp.param)[idx] = saved + h;
        const auto plus = loss_and_grad<double>(weights_of<double>(E, O, W1, b1, dm), dm, batch, nullptr,
                                                false, 0.0, true);
        (*grp.param)[idx] = saved - h;
        const auto minus = loss_and_grad<double>(weights_of<double>(E, O, W1, b1, dm), dm, batch, nullptr,
                                                 false, 0.0, true);
        (*grp.param)[idx] = saved;

        // A ReLU changing state inside [-h, h] makes the difference quotient
        // meaningless; such coordinates are redrawn and counted.
        if (plus.mask_hash != base.mask_hash || minus.mask_hash != base.mask_hash) {
            ++result.skipped_kinks;
            continue;
        }
        const double numeric = (plus.total - minus.total) * inv_n / (2.0 * h);
        const double analytic = (*grp.grad)[idx];
        const double rel = std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
        result.rel_errors.push_back(rel);
        result.max_rel_error = std::max(result.max_rel_error, rel);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoint files

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_floats(std::vector<std::uint8_t>& out, const FloatVec& v) {
    for (float x : v) put_u32(out, std::bit_cast<std::uint32_t>(x));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& b, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + i]) << (8 * i);
    return v;
}

void get_floats(const std::vector<std::uint8_t>& b, std::size_t& off, FloatVec& v) {
    for (auto& x : v) {
        x = std::bit_cast<float>(get_u32(b, off));
        off += 4;
    }
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::FileNotFound, "missing checkpoint file: " + path.string());
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

} // namespace

std::vector<std::uint8_t> serialize_body(const LMCheckpoint& lm) {
    std::vector<std::uint8_t> out{'B', 'O', 'D', 'Y'};
    put_u32(out, 1);
    put_floats(out, lm.W1);
    put_floats(out, lm.b1);
    return out;
}

std::vector<std::uint8_t> serialize_optimizer(const LMCheckpoint& lm) {
    std::vector<std::uint8_t> out{'O', 'P', 'T', 'M'};
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(lm.adam_t & 0xFFFFFFFFu));
    put_u32(out, static_cast<std::uint32_t>(lm.adam_t >> 32));
    for (const ParamBuffers* b : {&lm.adam_m, &lm.adam_v}) {
        put_floats(out, b->E);
        put_floats(out, b->O);
        put_floats(out, b->W1);
        put_floats(out, b->b1);
    }
    return out;
}

void save_checkpoint(const LMCheckpoint& lm, const fs::path& dir) {
    if (!lm.all_finite()) fail(ErrorCode::NonFiniteValue, "checkpoint contains NaN or Inf");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create checkpoint directory " + dir.string());

    nlohmann::ordered_json cfg;
    cfg["context_k"] = lm.config.context_k;
    cfg["embed_dim"] = lm.config.embed_dim;
    cfg["hidden_h"] = lm.config.hidden_h;
    cfg["vocab_size"] = lm.config.vocab_size;
    cfg["seed"] = lm.config.seed;
    cfg["step"] = lm.step;
    {
        std::ofstream out(dir / "config.json", std::ios::binary);
        if (!out) fail(ErrorCode::IoError, "cannot write " + (dir / "config.json").string());
        out << cfg.dump(2) << '\n';
    }
    save_table(lm.E, dir / "E.embt");
    save_table(lm.O, dir / "O.embt");
    write_bytes(dir / "body.bin", serialize_body(lm));
    write_bytes(dir / "optim.bin", serialize_optimizer(lm));
}

LMCheckpoint load_checkpoint(const fs::path& dir) {
    LMCheckpoint lm;
    {
        std::ifstream in(dir / "config.json", std::ios::binary);
        if (!in) fail(ErrorCode::FileNotFound, "checkpoint config not found: " + (dir / "config.json").string());
        try {
            const auto cfg = nlohmann::json::parse(in);
            lm.config.context_k = cfg.at("context_k").get<std::size_t>();
            lm.config.embed_dim = cfg.at("embed_dim").get<std::size_t>();
            lm.config.hidden_h = cfg.at("hidden_h").get<std::size_t>();
            lm.config.vocab_size = cfg.at("vocab_size").get<std::size_t>();
            lm.config.seed = cfg.at("seed").get<std::uint64_t>();
            lm.step = cfg.at("step").get<std::uint64_t>();
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::MalformedFile, std::string("checkpoint config: ") + e.what());
        }
    }
    lm.config.validate();
    const auto& c = lm.config;
    lm.E = load_table(dir / "E.embt");
    lm.O = load_table(dir / "O.embt");
    if (lm.E.vocab_size() != c.vocab_size || lm.E.dim() != c.embed_dim || lm.O.vocab_size() != c.vocab_size ||
        lm.O.dim() != c.hidden_h) {
        fail(ErrorCode::ShapeMismatch, "embedding tables disagree with checkpoint config");
    }
    lm.W1.assign(c.context_k * c.embed_dim * c.hidden_h, 0.0f);
    lm.b1.assign(c.hidden_h, 0.0f);
    const auto body = read_bytes(dir / "body.bin");
    if (body.size() < 8 || std::memcmp(body.data(), "BODY", 4) != 0 || get_u32(body, 4) != 1) {
        fail(ErrorCode::BadMagic, "body.bin is not a version-1 BODY file");
    }
    if (body.size() != 8 + 4 * (lm.W1.size() + lm.b1.size())) {
        fail(ErrorCode::ShapeMismatch, "body.bin size disagrees with checkpoint config");
    }
    std::size_t off = 8;
    get_floats(body, off, lm.W1);
    get_floats(body, off, lm.b1);

    lm.adam_m = zero_buffers(c);
    lm.adam_v = zero_buffers(c);
    if (fs::exists(dir / "optim.bin")) {
        const auto opt = read_bytes(dir / "optim.bin");
        const std::size_t per = lm.adam_m.E.size() + lm.adam_m.O.size() + lm.adam_m.W1.size() + lm.adam_m.b1.size();
        if (opt.size() < 16 || std::memcmp(opt.data(), "OPTM", 4) != 0 || get_u32(opt, 4) != 1) {
            fail(ErrorCode::BadMagic, "optim.bin is not a version-1 OPTM file");
        }
        if (opt.size() != 16 + 8 * per) {
            fail(ErrorCode::ShapeMismatch, "optim.bin size disagrees with checkpoint config");
        }
        lm.adam_t = get_u32(opt, 8) | (static_cast<std::uint64_t>(get_u32(opt, 12)) << 32);
        off = 16;
        for (ParamBuffers* b : {&lm.adam_m, &lm.adam_v}) {
            get_floats(opt, off, b->E);
            get_floats(opt, off, b->O);
            get_floats(opt, off, b->W1);
            get_floats(opt, off, b->b1);
        }
    }
    if (!lm.all_finite()) fail(ErrorCode::NonFiniteValue, "checkpoint contains NaN or Inf");
    return lm;
}

} // namespace lingua_adapt
