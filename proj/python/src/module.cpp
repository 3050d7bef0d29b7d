#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lingua_adapt/bpe.hpp"
#include "lingua_adapt/corpus.hpp"
#include "lingua_adapt/embed.hpp"
#include "lingua_adapt/error.hpp"
#include "lingua_adapt/generate.hpp"
#include "lingua_adapt/metrics.hpp"
#include "lingua_adapt/synth.hpp"
#include "lingua_adapt/toylm.hpp"
#include "lingua_adapt/vocab_merge.hpp"

namespace py = pybind11;
using namespace lingua_adapt;

namespace {

Corpus to_corpus(std::vector<std::string> texts) {
    return Corpus::from_texts(std::move(texts), "python");
}

py::array_t<float> table_array(const EmbeddingTable& t) {
    py::array_t<float> out({t.vocab_size(), t.dim()});
    auto* dst = out.mutable_data();
    const auto& src = t.data();
    std::copy(src.begin(), src.end(), dst);
    return out;
}

py::dict report_dict(const nlohmann::ordered_json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

std::map<std::string, double> metrics_of(const py::dict& d) {
    return d.cast<std::map<std::string, double>>();
}

py::tuple merge(const TokenizerModel& base, const TokenizerModel& extra) {
    auto [merged, diff] = merge_tokenizers(base, extra);
    return py::make_tuple(std::move(merged), report_dict(diff_report(diff)));
}

LMCheckpoint resize(const LMCheckpoint& lm, const TokenizerModel& base, const TokenizerModel& merged,
                    const std::string& strategy, std::uint64_t seed) {
    InitStrategy st;
    st.kind = parse_init_kind(strategy);
    st.seed = seed;
    return resize_vocab(lm, merged, base, diff_from_merged(base, merged), st);
}

std::vector<double> train_lm(LMCheckpoint& lm, const TokenizerModel& tok, std::vector<std::string> texts,
                             std::size_t steps, std::size_t warmup, double lr, std::size_t batch_size,
                             bool freeze_body) {
    TrainSchedule s;
    s.total_steps = steps;
    s.warmup_steps = warmup;
    s.base_lr = lr;
    s.batch_size = batch_size;
    s.freeze_body = freeze_body;
    std::vector<double> losses;
    for (const auto& log : train(lm, to_corpus(std::move(texts)), tok, s)) losses.push_back(log.loss);
    return losses;
}

std::vector<double> warm_start_lm(LMCheckpoint& lm, const TokenizerModel& tok, std::vector<std::string> texts,
                                  double fraction, double lr, std::size_t batch_size) {
    WarmStartOptions w;
    w.fraction = fraction;
    w.lr = lr;
    w.batch_size = batch_size;
    std::vector<double> losses;
    for (const auto& log : warm_start(lm, to_corpus(std::move(texts)), tok, w)) losses.push_back(log.loss);
    return losses;
}

std::vector<std::string> synthetic(const std::string& language, std::size_t docs, std::uint64_t seed,
                                   std::uint64_t lexicon_seed) {
    if (language != "ascii" && language != "georgian") fail(ErrorCode::InvalidArgument, "unknown language: " + language);
    const SynthOptions opts = language == "georgian" ? georgian_language(lexicon_seed) : ascii_language(lexicon_seed);
    std::vector<std::string> out;
    for (auto& d : SyntheticLanguage(opts).corpus(docs, seed).docs) out.push_back(std::move(d.text));
    return out;
}

} // namespace

PYBIND11_MODULE(_lingua_adapt, m) {
    m.doc() = "Vocabulary extension for byte-level BPE language models.";

    // Leaked on purpose: the translator may run during interpreter shutdown.
    static auto* error_type = new py::object(py::exception<Error>(m, "LinguaAdaptError"));
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = (*error_type)(py::str(std::string(to_string(e.code())) + ": " + e.what()));
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error_type->ptr(), exc.ptr());
        }
    });

    py::class_<TokenizerModel>(m, "Tokenizer")
        .def(py::init<>())
        .def_static("train", [](std::vector<std::string> texts, std::size_t vocab_size, std::uint64_t seed) {
            return train_bpe(to_corpus(std::move(texts)), vocab_size, seed);
        }, py::arg("texts"), py::arg("vocab_size"), py::arg("seed") = 0)
        .def_static("load", &TokenizerModel::load, py::arg("path"))
        .def_static("from_json", [](const std::string& s) { return TokenizerModel::from_json_string(s); })
        .def("save", &TokenizerModel::save, py::arg("path"))
        .def("to_json", &TokenizerModel::to_json_string)
        .def_property_readonly("vocab_size", &TokenizerModel::vocab_size)
        .def_property_readonly("n_merges", [](const TokenizerModel& t) { return t.merges().size(); })
        .def("token_bytes", [](const TokenizerModel& t, TokenId id) { return py::bytes(t.token_bytes(id)); })
        .def("encode", [](const TokenizerModel& t, const std::string& text) { return t.encode(text); })
        .def("decode", [](const TokenizerModel& t, const TokenIdSeq& ids) { return t.decode(ids); });

    m.def("merge_tokenizers", &merge, py::arg("base"), py::arg("extra"),
          "Returns (merged tokenizer, diff report dict).");

    m.def("fertility", [](const TokenizerModel& t, std::vector<std::string> texts) {
        return report_dict(to_json(fertility(t, to_corpus(std::move(texts)))));
    }, py::arg("tokenizer"), py::arg("texts"));

    m.def("bleu", [](const std::vector<std::string>& cands, const std::vector<std::string>& refs,
                     const TokenizerModel& t, std::size_t max_n, bool smooth) {
        BleuOptions o;
        o.max_n = max_n;
        o.smoothing = smooth ? BleuSmoothing::AddK : BleuSmoothing::None;
        return bleu(cands, refs, t, o);
    }, py::arg("candidates"), py::arg("references"), py::arg("tokenizer"), py::arg("max_n") = 4,
       py::arg("smooth") = false);

    m.def("percent_gen", [](const TokenIdSeq& ids, const TokenIdSeq& added) { return percent_gen(ids, added); },
          py::arg("ids"), py::arg("added"));

    m.def("forgetting_delta", [](const py::dict& base, const py::dict& adapted) {
        MetricsReport b, a;
        b.metrics = metrics_of(base);
        a.metrics = metrics_of(adapted);
        const auto d = forgetting_delta(b, a);
        return py::make_tuple(d.deltas, d.mean_delta);
    }, py::arg("base"), py::arg("adapted"), "Returns (per-metric deltas, mean delta).");

    m.def("synthetic_corpus", &synthetic, py::arg("language"), py::arg("docs"), py::arg("seed") = 0,
          py::arg("lexicon_seed") = 1);

    py::class_<LMCheckpoint>(m, "LanguageModel")
        .def(py::init([](std::size_t vocab_size, std::size_t context_k, std::size_t embed_dim,
                         std::size_t hidden, std::uint64_t seed) {
            LMConfig c;
            c.vocab_size = vocab_size;
            c.context_k = context_k;
            c.embed_dim = embed_dim;
            c.hidden_h = hidden;
            c.seed = seed;
            return new_lm(c);
        }), py::arg("vocab_size"), py::arg("context_k") = 8, py::arg("embed_dim") = 64, py::arg("hidden") = 256,
             py::arg("seed") = 0)
        .def_static("load", &load_checkpoint, py::arg("dir"))
        .def("save", &save_checkpoint, py::arg("dir"))
        .def_property_readonly("vocab_size", &LMCheckpoint::vocab_size)
        .def_property_readonly("E", [](const LMCheckpoint& lm) { return table_array(lm.E); })
        .def_property_readonly("O", [](const LMCheckpoint& lm) { return table_array(lm.O); })
        .def("loss", [](const LMCheckpoint& lm, const TokenizerModel& t, std::vector<std::string> texts) {
            return corpus_loss(lm, t, to_corpus(std::move(texts)));
        }, py::arg("tokenizer"), py::arg("texts"))
        .def("train", &train_lm, py::arg("tokenizer"), py::arg("texts"), py::arg("steps") = 0,
             py::arg("warmup") = 0, py::arg("lr") = 1e-3, py::arg("batch_size") = 8, py::arg("freeze_body") = false,
             "Trains in place and returns the per-step losses.")
        .def("warm_start", &warm_start_lm, py::arg("tokenizer"), py::arg("texts"), py::arg("fraction") = 0.05,
             py::arg("lr") = 1e-3, py::arg("batch_size") = 8)
        .def("resize_vocab", &resize, py::arg("base"), py::arg("merged"), py::arg("strategy") = "mean",
             py::arg("seed") = 0, "Returns a copy grown to the merged vocabulary.")
        .def("generate", [](const LMCheckpoint& lm, const TokenizerModel& t, const std::string& prompt,
                            std::size_t max_tokens) {
            const auto r = generate_greedy(lm, t, prompt, max_tokens);
            return py::make_tuple(r.text, r.ids);
        }, py::arg("tokenizer"), py::arg("prompt"), py::arg("max_tokens") = 200);
}
