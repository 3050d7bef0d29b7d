#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lingua_adapt/bpe.hpp"
#include "lingua_adapt/corpus.hpp"
#include "lingua_adapt/generate.hpp"

namespace lingua_adapt {

struct FertilityReport {
    double avg_tokens_per_doc = 0.0;
    std::optional<double> tokens_per_byte;
    std::size_t total_tokens = 0;
    std::size_t n_docs = 0;
    std::string tokenizer_id;
};

/// Average number of tokens per document (not per word).
FertilityReport fertility(const TokenizerModel& tokenizer, const Corpus& corpus,
                          std::string tokenizer_id = "");

nlohmann::ordered_json to_json(const FertilityReport& report);

/// 100 * (fraction of `ids` found in `added`).
double percent_gen(std::span<const TokenId> ids, std::span<const TokenId> added);

double throughput(std::size_t n_examples, double elapsed_seconds);

struct McItem {
    std::string prompt;
    std::vector<std::string> choices;
    std::size_t label = 0;
};

struct GenItem {
    std::string prompt;
    std::string reference;
};

enum class TaskKind { MultipleChoice, Generation };

TaskKind parse_task_kind(std::string_view name);

struct TaskSet {
    TaskKind kind = TaskKind::MultipleChoice;
    std::string task_id;
    std::vector<McItem> mc_items;
    std::vector<GenItem> gen_items;

    std::size_t size() const noexcept {
        return kind == TaskKind::MultipleChoice ? mc_items.size() : gen_items.size();
    }
};

/// JSON-lines task file: {"prompt","choices","label"} or {"prompt","reference"}.
TaskSet load_tasks(const std::filesystem::path& path, TaskKind kind);

struct McScore {
    std::size_t chosen = 0;
    std::vector<double> scores;   // log-probability per UTF-8 byte of each choice
};

/// Scores each choice by its summed token log-probability (conditioned on the
/// prompt and the preceding choice tokens) divided by the choice's byte
/// length. Highest score wins; ties go to the lowest index.
McScore score_multiple_choice(const LanguageModel& model, const TokenizerModel& tokenizer,
                              const McItem& item);

enum class BleuSmoothing { None, AddK };

struct BleuOptions {
    std::size_t max_n = 4;
    BleuSmoothing smoothing = BleuSmoothing::None;
    double k = 1.0;
};

/// Corpus BLEU in [0, 100] over token ids from `tokenizer`. Orders for which
/// neither candidates nor references have any n-gram are left out of the
/// geometric mean.
double bleu(std::span<const std::string> candidates, std::span<const std::string> references,
            const TokenizerModel& tokenizer, const BleuOptions& options = {});

struct MetricsReport {
    std::map<std::string, double> metrics;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

nlohmann::ordered_json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);
MetricsReport load_report(const std::filesystem::path& path);
void save_report(const MetricsReport& report, const std::filesystem::path& path);
/// "metric,value" header then one row per metric, sorted by name.
std::string report_csv(const MetricsReport& report);

struct ForgettingDelta {
    std::map<std::string, double> deltas;   // adapted - base, shared names only
    double mean_delta = 0.0;
};

ForgettingDelta forgetting_delta(const MetricsReport& base, const MetricsReport& adapted);

struct EvalOptions {
    std::size_t gen_max_tokens = 200;
    bool stop_on_newline = true;
    std::optional<std::vector<TokenId>> added;
    std::string tokenizer_id;
    std::string checkpoint_id;
    Clock clock = steady_clock_seconds();
};

/// Multiple choice -> "accuracy". Generation -> "bleu", "avg_gen_tokens",
/// "throughput" (items per second of generation wall time) and, when added
/// ids are known, "percent_gen" over all generated ids pooled.
MetricsReport run_eval(const LanguageModel& model, const TokenizerModel& tokenizer,
                       const TaskSet& tasks, const EvalOptions& options);

} // namespace lingua_adapt
