#include "lingua_adapt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "lingua_adapt/error.hpp"
#include "lingua_adapt/parallel.hpp"
#include "lingua_adapt/text.hpp"

namespace lingua_adapt {

FertilityReport fertility(const TokenizerModel& tokenizer, const Corpus& corpus, std::string tokenizer_id) {
    if (corpus.empty()) fail(ErrorCode::EmptyCorpus, "fertility needs at least one document");
    FertilityReport r;
    r.tokenizer_id = std::move(tokenizer_id);
    r.n_docs = corpus.size();
    for (const auto& ids : encode_corpus(tokenizer, corpus)) r.total_tokens += ids.size();
    r.avg_tokens_per_doc = static_cast<double>(r.total_tokens) / static_cast<double>(r.n_docs);
    std::size_t bytes = 0;
    for (const auto& d : corpus.docs) bytes += d.byte_len();
    if (bytes > 0) r.tokens_per_byte = static_cast<double>(r.total_tokens) / static_cast<double>(bytes);
    return r;
}

nlohmann::ordered_json to_json(const FertilityReport& report) {
    nlohmann::ordered_json j;
    j["tokenizer_id"] = report.tokenizer_id;
    j["n_docs"] = report.n_docs;
    j["total_tokens"] = report.total_tokens;
    j["avg_tokens_per_doc"] = report.avg_tokens_per_doc;
    if (report.tokens_per_byte) {
        j["tokens_per_byte"] = *report.tokens_per_byte;
    } else {
        j["tokens_per_byte"] = nullptr;
    }
    return j;
}

double percent_gen(std::span<const TokenId> ids, std::span<const TokenId> added) {
    if (ids.empty()) fail(ErrorCode::EmptyGeneration, "no generated tokens");
    const std::unordered_set<TokenId> set(added.begin(), added.end());
    std::size_t hits = 0;
    for (TokenId id : ids) hits += set.count(id);
    return 100.0 * static_cast<double>(hits) / static_cast<double>(ids.size());
}

double throughput(std::size_t n_examples, double elapsed_seconds) {
    if (!(elapsed_seconds > 0.0)) {
        fail(ErrorCode::NonPositiveDuration, "elapsed time must be positive");
    }
    return static_cast<double>(n_examples) / elapsed_seconds;
}

TaskKind parse_task_kind(std::string_view name) {
    if (name == "mc" || name == "multiple_choice") return TaskKind::MultipleChoice;
    if (name == "gen" || name == "generation") return TaskKind::Generation;
    fail(ErrorCode::InvalidArgument, "unknown task kind '" + std::string(name) + "'");
}

TaskSet load_tasks(const std::filesystem::path& path, TaskKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::FileNotFound, "task file not found: " + path.string());
    TaskSet set;
    set.kind = kind;
    set.task_id = path.stem().string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        try {
            const auto j = nlohmann::json::parse(line);
            if (kind == TaskKind::MultipleChoice) {
                McItem item;
                item.prompt = j.at("prompt").get<std::string>();
                item.choices = j.at("choices").get<std::vector<std::string>>();
                const auto label = j.at("label").get<std::int64_t>();
                if (item.choices.size() < 2) fail(ErrorCode::MalformedRecord, where + "need at least 2 choices");
                if (label < 0 || static_cast<std::size_t>(label) >= item.choices.size()) {
                    fail(ErrorCode::MalformedRecord, where + "label out of range");
                }
                item.label = static_cast<std::size_t>(label);
                set.mc_items.push_back(std::move(item));
            } else {
                GenItem item;
                item.prompt = j.at("prompt").get<std::string>();
                item.reference = j.at("reference").get<std::string>();
                if (item.prompt.empty()) fail(ErrorCode::MalformedRecord, where + "empty prompt");
                set.gen_items.push_back(std::move(item));
            }
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::MalformedRecord, where + e.what());
        }
    }
    return set;
}

McScore score_multiple_choice(const LanguageModel& model, const TokenizerModel& tokenizer, const McItem& item) {
    if (item.choices.size() < 2) fail(ErrorCode::InvalidArgument, "multiple choice item needs at least 2 choices");
    const TokenIdSeq prompt_ids = tokenizer.encode(item.prompt);
    std::vector<double> logp(model.vocab_size());
    McScore out;
    for (const auto& choice : item.choices) {
        if (choice.empty()) fail(ErrorCode::EmptyChoice, "choice with zero bytes");
        TokenIdSeq history = prompt_ids;
        double total = 0.0;
        for (TokenId t : tokenizer.encode(choice)) {
            next_log_probs(model, history, logp);
            total += logp[t];
            history.push_back(t);
        }
        out.scores.push_back(total / static_cast<double>(choice.size()));
    }
    out.chosen = 0;
    for (std::size_t i = 1; i < out.scores.size(); ++i) {
        if (out.scores[i] > out.scores[out.chosen]) out.chosen = i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// BLEU

namespace {

std::string ngram_key(const TokenIdSeq& ids, std::size_t start, std::size_t n) {
    return std::string(reinterpret_cast<const char*>(ids.data() + start), n * sizeof(TokenId));
}

std::unordered_map<std::string, std::size_t> ngram_counts(const TokenIdSeq& ids, std::size_t n) {
    std::unordered_map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i + n <= ids.size(); ++i) ++counts[ngram_key(ids, i, n)];
    return counts;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

} // namespace

double bleu(std::span<const std::string> candidates, std::span<const std::string> references,
            const TokenizerModel& tokenizer, const BleuOptions& options) {
    if (candidates.size() != references.size()) {
        fail(ErrorCode::LengthMismatch, "candidate and reference counts differ");
    }
    if (candidates.empty()) fail(ErrorCode::EmptyCandidateSet, "no candidates to score");
    if (options.max_n < 1) fail(ErrorCode::InvalidArgument, "max_n must be at least 1");

    const std::size_t max_n = options.max_n;
    std::vector<double> matches(max_n + 1, 0.0), totals(max_n + 1, 0.0), ref_totals(max_n + 1, 0.0);
    double cand_len = 0.0, ref_len = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const TokenIdSeq c = tokenizer.encode(trim(candidates[i]));
        const TokenIdSeq r = tokenizer.encode(trim(references[i]));
        cand_len += static_cast<double>(c.size());
        ref_len += static_cast<double>(r.size());
        for (std::size_t n = 1; n <= max_n; ++n) {
            const auto cc = ngram_counts(c, n);
            const auto rc = ngram_counts(r, n);
            for (const auto& [gram, count] : cc) {
                auto it = rc.find(gram);
                if (it != rc.end()) matches[n] += static_cast<double>(std::min(count, it->second));
            }
            if (c.size() >= n) totals[n] += static_cast<double>(c.size() - n + 1);
            if (r.size() >= n) ref_totals[n] += static_cast<double>(r.size() - n + 1);
        }
    }
    if (cand_len == 0.0) return 0.0;

    double log_sum = 0.0;
    std::size_t orders = 0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        if (totals[n] == 0.0 && ref_totals[n] == 0.0) continue;
        double p;
        if (options.smoothing == BleuSmoothing::AddK && n > 1) {
            p = (matches[n] + options.k) / (totals[n] + options.k);
        } else {
            p = totals[n] > 0.0 ? matches[n] / totals[n] : 0.0;
        }
        if (p <= 0.0) return 0.0;
        log_sum += std::log(p);
        ++orders;
    }
    const double bp = cand_len < ref_len ? std::exp(1.0 - ref_len / cand_len) : 1.0;
    const double score = 100.0 * bp * std::exp(log_sum / static_cast<double>(orders));
    return std::clamp(score, 0.0, 100.0);
}

// ---------------------------------------------------------------------------
// Evaluation driver

MetricsReport run_eval(const LanguageModel& model, const TokenizerModel& tokenizer, const TaskSet& tasks,
                       const EvalOptions& options) {
    if (tasks.size() == 0) fail(ErrorCode::EmptyCorpus, "task set is empty");
    MetricsReport report;
    report.meta["tokenizer_id"] = options.tokenizer_id;
    report.meta["checkpoint_id"] = options.checkpoint_id;
    report.meta["task_id"] = tasks.task_id;
    report.meta["task_kind"] = tasks.kind == TaskKind::MultipleChoice ? "mc" : "gen";
    report.meta["n_items"] = tasks.size();

    if (tasks.kind == TaskKind::MultipleChoice) {
        const double t0 = options.clock();
        std::vector<std::uint8_t> correct(tasks.mc_items.size(), 0);
        parallel_for(tasks.mc_items.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const auto& item = tasks.mc_items[i];
                correct[i] = score_multiple_choice(model, tokenizer, item).chosen == item.label ? 1 : 0;
            }
        });
        std::size_t hits = 0;
        for (auto c : correct) hits += c;
        report.metrics["accuracy"] = 100.0 * static_cast<double>(hits) / static_cast<double>(correct.size());
        report.meta["elapsed_seconds"] = options.clock() - t0;
        return report;
    }

    std::vector<std::string> candidates, references;
    TokenIdSeq pooled;
    const double t0 = options.clock();
    for (const auto& item : tasks.gen_items) {
        auto gen = generate_greedy(model, tokenizer, item.prompt, options.gen_max_tokens,
                                   options.stop_on_newline, options.clock);
        pooled.insert(pooled.end(), gen.ids.begin(), gen.ids.end());
        candidates.push_back(std::move(gen.text));
        references.push_back(item.reference);
    }
    const double elapsed = options.clock() - t0;

    report.metrics["bleu"] = bleu(candidates, references, tokenizer);
    report.metrics["avg_gen_tokens"] =
        static_cast<double>(pooled.size()) / static_cast<double>(tasks.gen_items.size());
    report.metrics["throughput"] = throughput(tasks.gen_items.size(), elapsed);
    if (options.added) {
        if (pooled.empty()) {
            report.meta["percent_gen_note"] = "no tokens generated";
        } else {
            report.metrics["percent_gen"] = percent_gen(pooled, *options.added);
        }
    }
    report.meta["elapsed_seconds"] = elapsed;
    return report;
}

} // namespace lingua_adapt
