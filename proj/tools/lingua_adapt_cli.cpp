// lingua-adapt: tokenizer extension, embedding init, toy LM training and
// evaluation from the command line.

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lingua_adapt/bpe.hpp"
#include "lingua_adapt/corpus.hpp"
#include "lingua_adapt/embed.hpp"
#include "lingua_adapt/error.hpp"
#include "lingua_adapt/format.hpp"
#include "lingua_adapt/generate.hpp"
#include "lingua_adapt/metrics.hpp"
#include "lingua_adapt/plot.hpp"
#include "lingua_adapt/synth.hpp"
#include "lingua_adapt/toylm.hpp"
#include "lingua_adapt/vocab_merge.hpp"

namespace fs = std::filesystem;
using namespace lingua_adapt;
using ojson = nlohmann::ordered_json;

namespace {

// --config FILE: a flat JSON object whose keys are long flag names (either
// "vocab-size" or "vocab_size"), or an object keyed by subcommand name.
// Flags given on the command line win over file values.
class JsonConfig : public CLI::Config {
public:
    explicit JsonConfig(const CLI::App* app) : app_(app) {}

    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");

        std::vector<CLI::ConfigItem> items;
        const auto subs = app_->get_subcommands();
        const std::string active = subs.empty() ? std::string() : subs.front()->get_name();
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                if (key != active) continue;
                for (const auto& [k, v] : value.items()) items.push_back(item(active, k, v));
            } else if (!active.empty()) {
                items.push_back(item(active, key, value));
            }
        }
        return items;
    }

private:
    static CLI::ConfigItem item(const std::string& parent, std::string key, const nlohmann::json& v) {
        CLI::ConfigItem it;
        it.parents = {parent};
        for (auto& c : key) c = (c == '_') ? '-' : c;
        it.name = key;
        auto scalar = [](const nlohmann::json& x) {
            if (x.is_string()) return x.get<std::string>();
            if (x.is_boolean()) return std::string(x.get<bool>() ? "true" : "false");
            return x.dump();
        };
        if (v.is_array()) {
            for (const auto& x : v) it.inputs.push_back(scalar(x));
        } else {
            it.inputs.push_back(scalar(v));
        }
        return it;
    }

    const CLI::App* app_;
};

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::FileNotFound, "file not found: " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::MalformedFile, path.string() + ": " + e.what());
    }
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Corpus read_corpus(const std::string& path, const std::string& format, bool lenient) {
    return load_corpus(path, parse_corpus_format(format), lenient ? Utf8Mode::Lenient : Utf8Mode::Strict);
}

void require_same_vocab(const LMCheckpoint& lm, const TokenizerModel& tok) {
    if (lm.vocab_size() != tok.vocab_size()) {
        fail(ErrorCode::ShapeMismatch, "checkpoint has " + std::to_string(lm.vocab_size()) +
                                           " vocabulary rows but the tokenizer has " +
                                           std::to_string(tok.vocab_size()) + " tokens");
    }
}

std::string loss_csv_row(std::uint64_t step, const char* phase, const StepLog& s) {
    return std::to_string(step) + ',' + phase + ',' + format_number(s.lr) + ',' + format_number(s.loss) + '\n';
}

struct CorpusArgs {
    std::string path;
    std::string format = "lines";
    bool lenient = false;
};

void add_corpus_flags(CLI::App* cmd, CorpusArgs& a, const std::string& flag, bool required = true) {
    auto* opt = cmd->add_option(flag, a.path, "Corpus file")->check(CLI::ExistingFile);
    if (required) opt->required();
    cmd->add_option("--format", a.format, "Corpus format: lines or jsonl")
        ->check(CLI::IsMember({"lines", "jsonl"}));
    cmd->add_flag("--lenient", a.lenient, "Replace invalid UTF-8 with U+FFFD instead of failing");
}

// ---------------------------------------------------------------------------

struct TrainTokenizerArgs {
    CorpusArgs corpus;
    std::size_t vocab_size = 0;
    std::size_t sample_n = 300000;
    std::uint64_t seed = 0;
    std::string out;
};

void run_train_tokenizer(const TrainTokenizerArgs& a) {
    const Corpus full = read_corpus(a.corpus.path, a.corpus.format, a.corpus.lenient);
    if (a.sample_n > full.size()) {
        warn("--sample-n " + std::to_string(a.sample_n) + " exceeds the corpus size " +
             std::to_string(full.size()) + "; using the full corpus");
    }
    const Corpus sample = sample_documents(full, a.sample_n, a.seed);
    const TokenizerModel model = train_bpe(sample, a.vocab_size, a.seed);
    model.save(a.out);
    ojson j;
    j["requested_vocab_size"] = a.vocab_size;
    j["achieved_vocab_size"] = model.vocab_size();
    j["merges"] = model.merges().size();
    j["documents"] = sample.size();
    j["out"] = a.out;
    std::cout << j.dump() << '\n';
}

struct MergeArgs {
    std::string base, extra, out, report;
};

void run_merge_vocab(const MergeArgs& a) {
    const auto base = TokenizerModel::load(a.base);
    const auto extra = TokenizerModel::load(a.extra);
    const auto [merged, diff] = merge_tokenizers(base, extra);
    merged.save(a.out);
    const ojson report = diff_report(diff);
    if (!a.report.empty()) write_text(a.report, report.dump(2) + '\n');
    std::cout << report.dump() << '\n';
}

struct SweepArgs {
    std::string base;
    CorpusArgs train;
    CorpusArgs eval;   // read with the training corpus format
    std::vector<std::size_t> sizes{1000, 5000, 10000};
    std::size_t sample_n = 300000;
    std::uint64_t seed = 0;
    std::string out;
};

void run_sweep_vocab(const SweepArgs& a) {
    const auto base = TokenizerModel::load(a.base);
    const Corpus train = read_corpus(a.train.path, a.train.format, a.train.lenient);
    const Corpus eval = read_corpus(a.eval.path, a.train.format, a.train.lenient);
    const Corpus sample = sample_documents(train, a.sample_n, a.seed);

    std::ostringstream csv;
    csv << "size,delta_v,avg_tokens_per_doc,tokens_per_byte\n";
    PlotSeries series{"merged", {}, {}};
    const auto base_fert = fertility(base, eval, "base");
    for (std::size_t size : a.sizes) {
        const auto extra = train_bpe(sample, size, a.seed);
        const auto [merged, diff] = merge_tokenizers(base, extra);
        const auto f = fertility(merged, eval, "merged-" + std::to_string(size));
        csv << size << ',' << diff.size() << ',' << format_number(f.avg_tokens_per_doc) << ','
            << (f.tokens_per_byte ? format_number(*f.tokens_per_byte) : std::string()) << '\n';
        series.x.push_back(static_cast<double>(diff.size()));
        series.y.push_back(f.avg_tokens_per_doc);
    }
    PlotSeries base_line{"base", {}, {}};
    for (double x : series.x) {
        base_line.x.push_back(x);
        base_line.y.push_back(base_fert.avg_tokens_per_doc);
    }

    const fs::path out(a.out);
    fs::create_directories(out);
    write_text(out / "sweep.csv", csv.str());
    write_text(out / "sweep.svg",
               line_chart_svg({series, base_line}, {"Fertility vs. added vocabulary", "new tokens (|dV|)",
                                                    "avg tokens per document"}));
    std::cout << csv.str();
}

struct InitArgs {
    std::string checkpoint, base_tok, merged_tok, strategy = "mean", aux, out;
    std::uint64_t seed = 0;
    std::size_t focus_k = 10;
};

void run_init_embeddings(const InitArgs& a) {
    InitStrategy strategy;
    strategy.kind = parse_init_kind(a.strategy);
    strategy.seed = a.seed;
    strategy.focus_k = a.focus_k;
    if (strategy.kind == InitKind::FocusLite && a.aux.empty()) {
        fail(ErrorCode::MissingAuxEmbedding, "--strategy focus needs --aux");
    }
    const auto lm = load_checkpoint(a.checkpoint);
    const auto base = TokenizerModel::load(a.base_tok);
    const auto merged = TokenizerModel::load(a.merged_tok);
    require_same_vocab(lm, base);
    const VocabDiff diff = diff_from_merged(base, merged);
    std::optional<EmbeddingTable> aux;
    if (!a.aux.empty()) aux = load_table(a.aux);
    const auto resized = resize_vocab(lm, merged, base, diff, strategy, aux ? &*aux : nullptr);
    save_checkpoint(resized, a.out);
    ojson j;
    j["strategy"] = std::string(to_string(strategy.kind));
    j["old_vocab_size"] = lm.vocab_size();
    j["new_vocab_size"] = resized.vocab_size();
    j["out"] = a.out;
    std::cout << j.dump() << '\n';
}

struct TrainLmArgs {
    std::string checkpoint, tokenizer, out, loss_log;
    CorpusArgs corpus;
    long long steps = -1;
    std::size_t warmup = 0;
    double lr = 1e-3;
    std::size_t batch_size = 8;
    std::optional<double> warm_start_frac;
    double warm_start_lr = 1e-3;
    bool freeze_body = false;
    std::uint64_t seed = 0;
    std::size_t context_k = 8, embed_dim = 64, hidden = 256;
};

void run_train_lm(const TrainLmArgs& a) {
    const auto tok = TokenizerModel::load(a.tokenizer);
    const Corpus corpus = read_corpus(a.corpus.path, a.corpus.format, a.corpus.lenient);
    LMCheckpoint lm;
    if (a.checkpoint.empty()) {
        LMConfig c;
        c.context_k = a.context_k;
        c.embed_dim = a.embed_dim;
        c.hidden_h = a.hidden;
        c.vocab_size = tok.vocab_size();
        c.seed = a.seed;
        lm = new_lm(c);
    } else {
        lm = load_checkpoint(a.checkpoint);
        require_same_vocab(lm, tok);
    }

    std::string csv = "step,phase,lr,loss\n";
    std::size_t n_steps = 0;
    double first = NAN, last = NAN;
    auto record = [&](const std::vector<StepLog>& log, const char* phase) {
        for (const auto& s : log) {
            csv += loss_csv_row(s.step, phase, s);
            if (std::isnan(first)) first = s.loss;
            last = s.loss;
        }
        n_steps += log.size();
    };

    const auto t0 = std::chrono::steady_clock::now();
    if (a.warm_start_frac) {
        WarmStartOptions w;
        w.fraction = *a.warm_start_frac;
        w.lr = a.warm_start_lr;
        w.batch_size = a.batch_size;
        record(warm_start(lm, corpus, tok, w), "warm_start");
    }
    if (a.steps != 0) {
        TrainSchedule s;
        s.total_steps = a.steps < 0 ? 0 : static_cast<std::size_t>(a.steps);
        s.warmup_steps = a.warmup;
        s.base_lr = a.lr;
        s.batch_size = a.batch_size;
        s.freeze_body = a.freeze_body;
        record(train(lm, corpus, tok, s), "cpt");
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    save_checkpoint(lm, a.out);
    const fs::path loss_path = a.loss_log.empty() ? fs::path(a.out) / "loss.csv" : fs::path(a.loss_log);
    write_text(loss_path, csv);

    ojson j;
    j["steps"] = n_steps;
    j["first_loss"] = n_steps ? format_number(first) : "";
    j["final_loss"] = n_steps ? format_number(last) : "";
    j["elapsed_seconds"] = seconds;
    j["out"] = a.out;
    j["loss_log"] = loss_path.string();
    std::cout << j.dump() << '\n';
}

struct EvalArgs {
    std::string checkpoint, tokenizer, task, kind = "mc", added_from, out;
    std::size_t max_tokens = 200;
    bool uniform = false;
};

void run_eval_cmd(const EvalArgs& a) {
    const auto tok = TokenizerModel::load(a.tokenizer);
    const TaskKind kind = parse_task_kind(a.kind);
    const TaskSet tasks = load_tasks(a.task, kind);

    std::optional<LMCheckpoint> lm;
    std::unique_ptr<LanguageModel> model;
    if (a.uniform) {
        model = std::make_unique<UniformLanguageModel>(tok.vocab_size());
    } else {
        if (a.checkpoint.empty()) fail(ErrorCode::InvalidArgument, "--checkpoint is required unless --uniform");
        lm = load_checkpoint(a.checkpoint);
        require_same_vocab(*lm, tok);
        model = std::make_unique<ToyLanguageModel>(*lm);
    }

    EvalOptions opts;
    opts.gen_max_tokens = a.max_tokens;
    opts.tokenizer_id = fs::path(a.tokenizer).filename().string();
    opts.checkpoint_id = a.uniform ? "uniform" : fs::path(a.checkpoint).filename().string();
    if (!a.added_from.empty()) {
        opts.added = added_ids_from_report(read_json(a.added_from));
    } else if (kind == TaskKind::Generation) {
        warn("--added-from not given; percent_gen is omitted from the report");
    }

    MetricsReport report = run_eval(*model, tok, tasks, opts);
    report.meta["timestamp"] = utc_timestamp();
    if (!a.out.empty()) {
        if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
        save_report(report, a.out);
    }
    std::cout << to_json(report).dump() << '\n';
}

struct CompareArgs {
    std::string base_report, adapted_report, out;
};

void run_compare(const CompareArgs& a) {
    const auto base = load_report(a.base_report);
    const auto adapted = load_report(a.adapted_report);
    const auto d = forgetting_delta(base, adapted);

    ojson j;
    j["deltas"] = ojson::object();
    std::string csv = "metric,base,adapted,delta\n";
    for (const auto& [name, delta] : d.deltas) {
        j["deltas"][name] = tidy(delta);
        csv += name + ',' + format_number(base.metrics.at(name)) + ',' + format_number(adapted.metrics.at(name)) +
               ',' + format_number(delta) + '\n';
    }
    j["mean_delta"] = tidy(d.mean_delta);
    csv += "mean,,," + format_number(d.mean_delta) + '\n';

    const fs::path out(a.out);
    fs::create_directories(out);
    write_text(out / "delta.json", j.dump(2) + '\n');
    write_text(out / "delta.csv", csv);
    std::cout << csv;
}

void run_corpus_stats(const CorpusArgs& a) {
    std::cout << to_json(byte_stats(read_corpus(a.path, a.format, a.lenient))).dump() << '\n';
}

struct FertilityArgs {
    std::string tokenizer;
    CorpusArgs corpus;
};

void run_fertility(const FertilityArgs& a) {
    const auto tok = TokenizerModel::load(a.tokenizer);
    const Corpus c = read_corpus(a.corpus.path, a.corpus.format, a.corpus.lenient);
    std::cout << to_json(fertility(tok, c, fs::path(a.tokenizer).filename().string())).dump() << '\n';
}

struct GenerateArgs {
    std::string checkpoint, tokenizer, prompt;
    std::size_t max_tokens = 50;
    bool keep_newlines = false;
};

void run_generate(const GenerateArgs& a) {
    const auto tok = TokenizerModel::load(a.tokenizer);
    const auto lm = load_checkpoint(a.checkpoint);
    require_same_vocab(lm, tok);
    const auto r = generate_greedy(lm, tok, a.prompt, a.max_tokens, !a.keep_newlines);
    ojson j;
    j["text"] = r.text;
    j["ids"] = r.ids;
    j["elapsed_seconds"] = r.elapsed_seconds;
    std::cout << j.dump() << '\n';
}

struct SynthArgs {
    std::string language = "ascii", out;
    std::size_t docs = 1000;
    std::uint64_t seed = 0;
    std::uint64_t lexicon_seed = 1;
};

void run_make_synthetic(const SynthArgs& a) {
    const SynthOptions opts = a.language == "georgian" ? georgian_language(a.lexicon_seed)
                                                       : ascii_language(a.lexicon_seed);
    const Corpus c = SyntheticLanguage(opts).corpus(a.docs, a.seed);
    if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
    save_corpus_lines(c, a.out);
    std::cout << to_json(byte_stats(c)).dump() << '\n';
}

void print_error(const std::string& code, const std::string& message) {
    ojson j;
    j["error"] = code;
    j["message"] = message;
    std::cerr << j.dump() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extend a base tokenizer and toy LM to a new language and measure the effect"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "JSON file with flag values (command-line flags take precedence)");
    app.config_formatter(std::make_shared<JsonConfig>(&app));

    TrainTokenizerArgs tt;
    auto* c_tt = app.add_subcommand("train-tokenizer", "Train a byte-level BPE tokenizer on a corpus sample");
    add_corpus_flags(c_tt, tt.corpus, "--corpus");
    c_tt->add_option("--vocab-size", tt.vocab_size, "Target vocabulary size (> 256)")->required();
    c_tt->add_option("--sample-n", tt.sample_n, "Documents sampled for training");
    c_tt->add_option("--seed", tt.seed, "Sampling seed");
    c_tt->add_option("--out", tt.out, "Output tokenizer model file")->required();

    MergeArgs mv;
    auto* c_mv = app.add_subcommand("merge-vocab", "Append the new tokens of an extra tokenizer to a base");
    c_mv->add_option("--base", mv.base, "Base tokenizer model")->required()->check(CLI::ExistingFile);
    c_mv->add_option("--extra", mv.extra, "Extra tokenizer model")->required()->check(CLI::ExistingFile);
    c_mv->add_option("--out", mv.out, "Merged tokenizer model file")->required();
    c_mv->add_option("--report", mv.report, "Merge report (JSON)");

    SweepArgs sw;
    auto* c_sw = app.add_subcommand("sweep-vocab", "Fertility of merged tokenizers across extra vocab sizes");
    c_sw->add_option("--base", sw.base, "Base tokenizer model")->required()->check(CLI::ExistingFile);
    add_corpus_flags(c_sw, sw.train, "--corpus-train");
    c_sw->add_option("--corpus-eval", sw.eval.path, "Evaluation corpus")->required()->check(CLI::ExistingFile);
    c_sw->add_option("--sizes", sw.sizes, "Comma-separated target vocabulary sizes")->delimiter(',');
    c_sw->add_option("--sample-n", sw.sample_n, "Documents sampled for tokenizer training");
    c_sw->add_option("--seed", sw.seed, "Sampling seed");
    c_sw->add_option("--out", sw.out, "Output directory (sweep.csv, sweep.svg)")->required();

    InitArgs ie;
    auto* c_ie = app.add_subcommand("init-embeddings", "Resize a checkpoint to a merged vocabulary");
    c_ie->add_option("--checkpoint", ie.checkpoint, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
    c_ie->add_option("--base-tok", ie.base_tok, "Base tokenizer model")->required()->check(CLI::ExistingFile);
    c_ie->add_option("--merged-tok", ie.merged_tok, "Merged tokenizer model")->required()->check(CLI::ExistingFile);
    c_ie->add_option("--strategy", ie.strategy, "mean, random, random_token or focus");
    c_ie->add_option("--aux", ie.aux, "Auxiliary embedding table for focus (one row per merged token)");
    c_ie->add_option("--focus-k", ie.focus_k, "Neighbours used by focus");
    c_ie->add_option("--seed", ie.seed, "Seed for random strategies");
    c_ie->add_option("--out", ie.out, "Output checkpoint directory")->required();

    TrainLmArgs tl;
    auto* c_tl = app.add_subcommand("train-lm", "Train or continue training the toy LM");
    c_tl->add_option("--checkpoint", tl.checkpoint, "Checkpoint to continue from (new model if omitted)")
        ->check(CLI::ExistingDirectory);
    c_tl->add_option("--tokenizer", tl.tokenizer, "Tokenizer model")->required()->check(CLI::ExistingFile);
    add_corpus_flags(c_tl, tl.corpus, "--corpus");
    c_tl->add_option("--steps", tl.steps, "Training steps; -1 for one pass, 0 to skip");
    c_tl->add_option("--warmup", tl.warmup, "Linear warmup steps");
    c_tl->add_option("--lr", tl.lr, "Peak learning rate");
    c_tl->add_option("--batch-size", tl.batch_size, "Sequences per step");
    c_tl->add_option("--warm-start-frac", tl.warm_start_frac,
                     "Run an embedding-only warm start on this fraction of the corpus first");
    c_tl->add_option("--warm-start-lr", tl.warm_start_lr, "Warm-start learning rate");
    c_tl->add_flag("--freeze-body", tl.freeze_body, "Train only the embedding and unembedding rows");
    c_tl->add_option("--seed", tl.seed, "Seed for a new model and for batch order");
    c_tl->add_option("--context-k", tl.context_k, "Context length of a new model");
    c_tl->add_option("--embed-dim", tl.embed_dim, "Embedding size of a new model");
    c_tl->add_option("--hidden", tl.hidden, "Hidden size of a new model");
    c_tl->add_option("--out", tl.out, "Output checkpoint directory")->required();
    c_tl->add_option("--loss-log", tl.loss_log, "Per-step loss CSV (default: <out>/loss.csv)");

    EvalArgs ev;
    auto* c_ev = app.add_subcommand("eval", "Score a checkpoint on a task file");
    c_ev->add_option("--checkpoint", ev.checkpoint, "Checkpoint directory")->check(CLI::ExistingDirectory);
    c_ev->add_flag("--uniform", ev.uniform, "Use a uniform-logit model instead of a checkpoint");
    c_ev->add_option("--tokenizer", ev.tokenizer, "Tokenizer model")->required()->check(CLI::ExistingFile);
    c_ev->add_option("--task", ev.task, "Task file (JSON lines)")->required()->check(CLI::ExistingFile);
    c_ev->add_option("--kind", ev.kind, "mc or gen")->check(CLI::IsMember({"mc", "gen"}));
    c_ev->add_option("--max-tokens", ev.max_tokens, "Generation cap per item");
    c_ev->add_option("--added-from", ev.added_from, "Merge report listing the added token ids")
        ->check(CLI::ExistingFile);
    c_ev->add_option("--out", ev.out, "Metrics report (JSON)");

    CompareArgs cp;
    auto* c_cp = app.add_subcommand("compare", "Per-metric deltas between two reports");
    c_cp->add_option("--base-report", cp.base_report, "Report of the base model")->required()->check(CLI::ExistingFile);
    c_cp->add_option("--adapted-report", cp.adapted_report, "Report of the adapted model")
        ->required()
        ->check(CLI::ExistingFile);
    c_cp->add_option("--out", cp.out, "Output directory (delta.json, delta.csv)")->required();

    CorpusArgs cs;
    auto* c_cs = app.add_subcommand("corpus-stats", "Document and byte counts of a corpus");
    add_corpus_flags(c_cs, cs, "--corpus");

    FertilityArgs fe;
    auto* c_fe = app.add_subcommand("fertility", "Average tokens per document under a tokenizer");
    c_fe->add_option("--tokenizer", fe.tokenizer, "Tokenizer model")->required()->check(CLI::ExistingFile);
    add_corpus_flags(c_fe, fe.corpus, "--corpus");

    GenerateArgs ge;
    auto* c_ge = app.add_subcommand("generate", "Greedy continuation of a prompt");
    c_ge->add_option("--checkpoint", ge.checkpoint, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
    c_ge->add_option("--tokenizer", ge.tokenizer, "Tokenizer model")->required()->check(CLI::ExistingFile);
    c_ge->add_option("--prompt", ge.prompt, "Prompt text")->required();
    c_ge->add_option("--max-tokens", ge.max_tokens, "Generation cap");
    c_ge->add_flag("--keep-newlines", ge.keep_newlines, "Do not stop at the first newline token");

    SynthArgs sy;
    auto* c_sy = app.add_subcommand("make-synthetic", "Write a synthetic Zipfian corpus");
    c_sy->add_option("--language", sy.language, "ascii or georgian")->check(CLI::IsMember({"ascii", "georgian"}));
    c_sy->add_option("--docs", sy.docs, "Number of documents");
    c_sy->add_option("--seed", sy.seed, "Document seed");
    c_sy->add_option("--lexicon-seed", sy.lexicon_seed, "Lexicon seed");
    c_sy->add_option("--out", sy.out, "Output corpus file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("UsageError", e.what());
        return 2;
    }

    try {
        if (*c_tt) run_train_tokenizer(tt);
        else if (*c_mv) run_merge_vocab(mv);
        else if (*c_sw) run_sweep_vocab(sw);
        else if (*c_ie) run_init_embeddings(ie);
        else if (*c_tl) run_train_lm(tl);
        else if (*c_ev) run_eval_cmd(ev);
        else if (*c_cp) run_compare(cp);
        else if (*c_cs) run_corpus_stats(cs);
        else if (*c_fe) run_fertility(fe);
        else if (*c_ge) run_generate(ge);
        else if (*c_sy) run_make_synthetic(sy);
    } catch (const Error& e) {
        print_error(std::string(to_string(e.code())), e.what());
        return is_user_error(e.code()) ? 2 : 1;
    } catch (const fs::filesystem_error& e) {
        print_error("IoError", e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("Internal", e.what());
        return 1;
    }
    return 0;
}
