#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "expect_error.hpp"
#include "lingua_adapt/synth.hpp"
#include "lingua_adapt/toylm.hpp"
#include "temp_dir.hpp"

using namespace lingua_adapt;
using testing_support::code_of;

namespace {

LMConfig tiny(std::size_t vocab = 260, std::uint64_t seed = 1) {
    LMConfig c;
    c.context_k = 2;
    c.embed_dim = 4;
    c.hidden_h = 8;
    c.vocab_size = vocab;
    c.seed = seed;
    return c;
}

std::vector<TokenIdSeq> random_batch(std::size_t vocab, std::uint64_t seed, std::size_t n = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<TokenId> id(1, static_cast<TokenId>(vocab - 1));
    std::uniform_int_distribution<std::size_t> len(1, 12);
    std::vector<TokenIdSeq> b(n);
    for (auto& s : b) {
        s.resize(len(rng));
        for (auto& t : s) t = id(rng);
    }
    return b;
}

Corpus repetitive_corpus() {
    return Corpus::from_texts({"the cat sat on the mat", "the cat sat on the mat", "the dog sat on the log",
                               "the cat sat on the mat", "the dog sat on the log"});
}

} // namespace

TEST_SUITE("toylm") {

TEST_CASE("new model shapes and seeding") {
    const auto lm = new_lm(tiny(258));
    CHECK(lm.E.vocab_size() == 258);
    CHECK(lm.E.dim() == 4);
    CHECK(lm.O.vocab_size() == 258);
    CHECK(lm.O.dim() == 8);
    CHECK(lm.W1.size() == 8 * 8);
    CHECK(lm.b1.size() == 8);
    CHECK(lm.step == 0);
    CHECK(lm.E.role() == TableRole::Input);
    CHECK(lm.O.role() == TableRole::Output);

    const auto again = new_lm(tiny(258));
    CHECK(again.E == lm.E);
    CHECK(again.O == lm.O);
    CHECK(again.W1 == lm.W1);
    CHECK_FALSE(new_lm(tiny(258, 2)).E == lm.E);

    double sq = 0.0;
    for (float x : lm.O.data()) sq += static_cast<double>(x) * x;
    const double sd = std::sqrt(sq / static_cast<double>(lm.O.data().size()));
    CHECK(sd == doctest::Approx(0.02).epsilon(0.1));
}

TEST_CASE("invalid configs") {
    LMConfig c = tiny();
    c.hidden_h = 0;
    CHECK(code_of([&] { new_lm(c); }) == ErrorCode::InvalidArgument);
    c = tiny(100);
    CHECK(code_of([&] { new_lm(c); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("untrained loss is near uniform") {
    LMConfig c;
    c.vocab_size = 1000;
    c.seed = 3;
    const auto lm = new_lm(c);
    const double loss = forward_loss(lm, random_batch(1000, 4, 8));
    CHECK(loss == doctest::Approx(std::log(1000.0)).epsilon(0.05));
    CHECK(forward_loss(lm, random_batch(1000, 4, 8)) == loss);
}

TEST_CASE("loss errors") {
    const auto lm = new_lm(tiny());
    CHECK(code_of([&] { forward_loss(lm, {TokenIdSeq{}}); }) == ErrorCode::EmptySequence);
    CHECK(code_of([&] { forward_loss(lm, {TokenIdSeq{1, 260}}); }) == ErrorCode::InvalidTokenId);
}

TEST_CASE("logits agree with the loss") {
    const auto lm = new_lm(tiny());
    const TokenIdSeq seq{5, 9, 200, 7};
    const auto logits = position_logits(lm, seq);
    REQUIRE(logits.size() == seq.size() * 260);
    double total = 0.0;
    for (std::size_t p = 0; p < seq.size(); ++p) {
        const float* row = logits.data() + p * 260;
        double mx = row[0];
        for (std::size_t v = 0; v < 260; ++v) mx = std::max(mx, static_cast<double>(row[v]));
        double z = 0.0;
        for (std::size_t v = 0; v < 260; ++v) z += std::exp(row[v] - mx);
        total += -(row[seq[p]] - mx - std::log(z));
    }
    CHECK(forward_loss(lm, {seq}) == doctest::Approx(total / seq.size()).epsilon(1e-5));

    std::vector<float> next(260);
    next_token_logits(lm, TokenIdSeq{5, 9}, next);
    for (std::size_t v = 0; v < 260; ++v) CHECK(next[v] == doctest::Approx(logits[2 * 260 + v]).epsilon(1e-5));
}

TEST_CASE("cosine warmup schedule") {
    TrainSchedule s;
    s.total_steps = 1000;
    s.warmup_steps = 100;
    s.base_lr = 0.01;
    CHECK(cosine_warmup_lr(0, s) == doctest::Approx(0.01 / 100));
    CHECK(cosine_warmup_lr(49, s) == doctest::Approx(0.005));
    CHECK(cosine_warmup_lr(100, s) == 0.01);
    CHECK(cosine_warmup_lr(550, s) == doctest::Approx(0.005));
    CHECK(cosine_warmup_lr(999, s) < 1e-6);
    CHECK(code_of([&] { cosine_warmup_lr(1000, s); }) == ErrorCode::StepOutOfRange);
    s.warmup_steps = 0;
    CHECK(cosine_warmup_lr(0, s) == 0.01);
}

TEST_CASE("gradient check on random small configs") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        LMConfig c = tiny(260 + seed, seed);
        c.context_k = 1 + seed;
        auto lm = new_lm(c);
        // Larger weights make the ReLU pattern and the softmax non-trivial.
        for (auto& x : lm.W1) x *= 20.0f;
        for (auto& x : lm.O.data()) x *= 20.0f;
        const auto r = grad_check(lm, random_batch(c.vocab_size, seed), 50, 1e-4, seed);
        CHECK(r.rel_errors.size() == 50);
        CHECK(r.max_rel_error < 1e-3);
    }
}

TEST_CASE("finite differences converge at second order") {
    auto lm = new_lm(tiny(270, 9));
    for (auto& x : lm.W1) x *= 20.0f;
    for (auto& x : lm.O.data()) x *= 20.0f;
    const auto batch = random_batch(270, 9);
    const auto coarse = grad_check(lm, batch, 30, 1e-2, 5);
    const auto fine = grad_check(lm, batch, 30, 5e-3, 5);
    // Same coordinates unless a kink forced a redraw.
    if (coarse.skipped_kinks == 0 && fine.skipped_kinks == 0) {
        CHECK((fine.max_rel_error < 0.4 * coarse.max_rel_error || fine.max_rel_error < 1e-8));
    }
}

TEST_CASE("resize with mean init") {
    SyntheticLanguage ka(georgian_language(5));
    const Corpus c = ka.corpus(50, 1);
    const TokenizerModel base;
    const auto extra = train_bpe(c, 320);
    const auto [merged, diff] = merge_tokenizers(base, extra);
    auto lm = new_lm(tiny(base.vocab_size()));
    lm.adam_m.E.assign(lm.adam_m.E.size(), 1.0f);   // pretend a run happened

    const auto r = resize_vocab(lm, merged, base, diff, {InitKind::Mean});
    CHECK(r.vocab_size() == merged.vocab_size());
    CHECK(r.W1 == lm.W1);
    CHECK(r.b1 == lm.b1);
    CHECK(r.step == lm.step);
    CHECK(serialize_body(r) == serialize_body(lm));
    for (std::size_t k = 0; k < diff.size(); ++k) {
        const auto parts = constituent_ids(base, diff.new_tokens[k]);
        for (const auto* tables : {&lm.E, &lm.O}) {
            const auto& out = tables == &lm.E ? r.E : r.O;
            for (std::size_t j = 0; j < tables->dim(); ++j) {
                double m = 0.0;
                for (TokenId p : parts) m += tables->row(p)[j];
                m /= static_cast<double>(parts.size());
                CHECK(out.row(diff.new_ids[k])[j] == doctest::Approx(m).epsilon(1e-6));
            }
        }
    }
    // Moments: old rows kept, new rows zero.
    CHECK(r.adam_m.E[0] == 1.0f);
    CHECK(r.adam_m.E.back() == 0.0f);
    CHECK(r.adam_m.E.size() == r.E.data().size());

    const auto same = resize_vocab(lm, base, base, VocabDiff{{}, {}, base.vocab_size()}, {InitKind::Mean});
    CHECK(same.E == lm.E);
    CHECK(same.O == lm.O);
}

TEST_CASE("resize leaves base-token predictions alone") {
    SyntheticLanguage en(ascii_language(2));
    SyntheticLanguage ka(georgian_language(3));
    const auto base = train_bpe(en.corpus(100, 1), 300);
    const auto extra = train_bpe(ka.corpus(100, 2), 400);
    const auto [merged, diff] = merge_tokenizers(base, extra);
    const auto lm = new_lm(tiny(base.vocab_size()));
    const auto big = resize_vocab(lm, merged, base, diff, {InitKind::Random, 4});

    const std::string text = en.corpus(1, 9).docs[0].text;
    const auto ids = base.encode(text);
    REQUIRE(merged.encode(text) == ids);
    const auto small_logits = position_logits(lm, ids);
    const auto big_logits = position_logits(big, ids);
    for (std::size_t p = 0; p < ids.size(); ++p) {
        for (std::size_t v = 0; v < base.vocab_size(); ++v) {
            CHECK(big_logits[p * merged.vocab_size() + v] ==
                  doctest::Approx(small_logits[p * base.vocab_size() + v]).epsilon(1e-6));
        }
    }
}

TEST_CASE("training reduces loss and is reproducible") {
    const TokenizerModel tok = train_bpe(repetitive_corpus(), 280);
    LMConfig c;
    c.context_k = 4;
    c.embed_dim = 16;
    c.hidden_h = 32;
    c.vocab_size = tok.vocab_size();
    c.seed = 7;
    TrainSchedule s;
    s.total_steps = 200;
    s.warmup_steps = 10;
    s.base_lr = 1e-2;
    s.batch_size = 2;

    auto a = new_lm(c);
    const auto log_a = train(a, repetitive_corpus(), tok, s);
    REQUIRE(log_a.size() == 200);
    CHECK(log_a.back().loss < log_a.front().loss);
    CHECK(corpus_loss(a, tok, repetitive_corpus()) < 1.0);
    CHECK(a.step == 200);
    CHECK(a.all_finite());

    auto b = new_lm(c);
    const auto log_b = train(b, repetitive_corpus(), tok, s);
    for (std::size_t i = 0; i < log_a.size(); ++i) CHECK(log_a[i].loss == log_b[i].loss);
    CHECK(a.E == b.E);
    CHECK(a.W1 == b.W1);
}

TEST_CASE("one pass by default") {
    const TokenizerModel tok;
    auto lm = new_lm(tiny(257));
    TrainSchedule s;
    s.batch_size = 2;
    const auto log = train(lm, repetitive_corpus(), tok, s);
    CHECK(log.size() == 3);
}

TEST_CASE("freezing the body") {
    const TokenizerModel tok;
    auto lm = new_lm(tiny(257));
    const auto body = serialize_body(lm);
    const auto E0 = lm.E;
    const auto O0 = lm.O;
    TrainSchedule s;
    s.total_steps = 20;
    s.freeze_body = true;
    train(lm, repetitive_corpus(), tok, s);
    CHECK(serialize_body(lm) == body);
    CHECK((!(lm.E == E0) || !(lm.O == O0)));
}

TEST_CASE("warm start") {
    const TokenizerModel tok;
    auto lm = new_lm(tiny(257));
    const auto body = serialize_body(lm);
    const auto E0 = lm.E;
    WarmStartOptions w;
    w.fraction = 0.4;
    const auto log = warm_start(lm, repetitive_corpus(), tok, w);
    CHECK(log.size() == 1);   // ceil(0.4 * 5) = 2 documents, batch 8
    CHECK(serialize_body(lm) == body);
    CHECK_FALSE(lm.E == E0);

    w.fraction = 0.0;
    CHECK(code_of([&] { warm_start(lm, repetitive_corpus(), tok, w); }) == ErrorCode::InvalidFraction);
    w.fraction = 1.5;
    CHECK(code_of([&] { warm_start(lm, repetitive_corpus(), tok, w); }) == ErrorCode::InvalidFraction);
    w.fraction = 0.5;
    CHECK(code_of([&] { warm_start(lm, Corpus{}, tok, w); }) == ErrorCode::EmptyCorpus);
}

TEST_CASE("training errors") {
    const TokenizerModel tok;
    auto lm = new_lm(tiny(257));
    CHECK(code_of([&] { train(lm, Corpus{}, tok, {}); }) == ErrorCode::EmptyCorpus);
    auto wrong = new_lm(tiny(300));
    CHECK(code_of([&] { train(wrong, repetitive_corpus(), tok, {}); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("long documents are chunked") {
    const TokenizerModel tok;
    const Corpus c = Corpus::from_texts({std::string(2500, 'x'), "", "ab"});
    const auto seqs = make_sequences(tok, c);
    REQUIRE(seqs.size() == 4);
    CHECK(seqs[0].size() == 1024);
    CHECK(seqs[1].size() == 1024);
    CHECK(seqs[2].size() == 452);
    CHECK(seqs[3].size() == 2);
}

TEST_CASE("checkpoint round trip") {
    testing_support::TempDir dir;
    const TokenizerModel tok;
    auto lm = new_lm(tiny(257));
    TrainSchedule s;
    s.total_steps = 3;
    train(lm, repetitive_corpus(), tok, s);
    save_checkpoint(lm, dir / "ck");
    const auto back = load_checkpoint(dir / "ck");
    CHECK(back.config == lm.config);
    CHECK(back.E == lm.E);
    CHECK(back.O == lm.O);
    CHECK(back.W1 == lm.W1);
    CHECK(back.b1 == lm.b1);
    CHECK(back.adam_m == lm.adam_m);
    CHECK(back.adam_v == lm.adam_v);
    CHECK(back.adam_t == 3);
    CHECK(back.step == 3);

    const auto body = testing_support::read_file(dir / "ck" / "body.bin");
    CHECK(body.substr(0, 4) == "BODY");
    CHECK(body.size() == 8 + 4 * (64 + 8));
    const auto cfg = nlohmann::json::parse(testing_support::read_file(dir / "ck" / "config.json"));
    CHECK(cfg["context_k"] == 2);
    CHECK(cfg["step"] == 3);

    // Resuming continues from the saved step with the saved moments.
    auto resumed = back;
    train(resumed, repetitive_corpus(), tok, s);
    CHECK(resumed.step == 6);

    std::filesystem::remove(dir / "ck" / "optim.bin");
    CHECK(load_checkpoint(dir / "ck").adam_t == 0);
    testing_support::write_file(dir / "ck" / "body.bin", "XXXX");
    CHECK(code_of([&] { load_checkpoint(dir / "ck"); }) == ErrorCode::BadMagic);
    CHECK(code_of([&] { load_checkpoint(dir / "nothing"); }) == ErrorCode::FileNotFound);
}

} // TEST_SUITE
