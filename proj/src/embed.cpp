#include "lingua_adapt/embed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "lingua_adapt/error.hpp"
#include "lingua_adapt/parallel.hpp"
#include "lingua_adapt/random.hpp"

namespace lingua_adapt {

EmbeddingTable::EmbeddingTable(std::size_t vocab_size, std::size_t dim, TableRole role)
    : vocab_size_(vocab_size), dim_(dim), role_(role), data_(vocab_size * dim, 0.0f) {}

bool EmbeddingTable::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// File format

namespace {

constexpr std::size_t kHeaderSize = 28;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> b, std::size_t off, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[off + i]) << (8 * i);
    return v;
}

} // namespace

std::vector<std::uint8_t> serialize_table(const EmbeddingTable& table) {
    if (!table.all_finite()) {
        fail(ErrorCode::NonFiniteValue, "embedding table contains NaN or Inf");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + 4 * table.data().size());
    out.insert(out.end(), {'E', 'M', 'B', 'T'});
    put_u32(out, 1);
    out.push_back(static_cast<std::uint8_t>(table.role()));
    out.insert(out.end(), {0, 0, 0});
    put_u64(out, table.vocab_size());
    put_u64(out, table.dim());
    for (float v : table.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

EmbeddingTable deserialize_table(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), "EMBT", 4) != 0) {
        fail(ErrorCode::BadMagic, "not an embedding table (missing EMBT magic)");
    }
    if (get_le(bytes, 4, 4) != 1) {
        fail(ErrorCode::BadMagic, "unsupported embedding table version");
    }
    const auto role_byte = bytes[8];
    if (role_byte > 1) fail(ErrorCode::BadMagic, "invalid embedding table role");
    const std::uint64_t vocab = get_le(bytes, 12, 8);
    const std::uint64_t dim = get_le(bytes, 20, 8);
    if (dim != 0 && vocab > (bytes.size() / 4) / dim + 1) {
        fail(ErrorCode::ShapeMismatch, "embedding table header declares more rows than the file holds");
    }
    if (bytes.size() != kHeaderSize + 4 * vocab * dim) {
        fail(ErrorCode::ShapeMismatch,
             "embedding table body has " + std::to_string((bytes.size() - kHeaderSize) / 4) +
                 " floats, header declares " + std::to_string(vocab) + " x " + std::to_string(dim));
    }
    EmbeddingTable table(vocab, dim, static_cast<TableRole>(role_byte));
    auto& data = table.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bytes, kHeaderSize + 4 * i, 4)));
    }
    if (!table.all_finite()) {
        fail(ErrorCode::NonFiniteValue, "embedding table file contains NaN or Inf");
    }
    return table;
}

void save_table(const EmbeddingTable& table, const std::filesystem::path& path) {
    const auto bytes = serialize_table(table);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

EmbeddingTable load_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::FileNotFound, "embedding table not found: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_table(bytes);
}

// ---------------------------------------------------------------------------
// Initialization

InitKind parse_init_kind(std::string_view name) {
    if (name == "mean") return InitKind::Mean;
    if (name == "random") return InitKind::Random;
    if (name == "random_token" || name == "random-token") return InitKind::RandomToken;
    if (name == "focus" || name == "focus_lite" || name == "focus-lite") return InitKind::FocusLite;
    fail(ErrorCode::InvalidArgument, "unknown init strategy '" + std::string(name) + "'");
}

std::string_view to_string(InitKind kind) {
    switch (kind) {
    case InitKind::Mean: return "mean";
    case InitKind::Random: return "random";
    case InitKind::RandomToken: return "random_token";
    case InitKind::FocusLite: return "focus_lite";
    }
    return "unknown";
}

TokenIdSeq constituent_ids(const TokenizerModel& base, std::string_view token_bytes) {
    return base.encode_word(token_bytes);
}

namespace {

void fill_mean(const EmbeddingTable& src, const TokenizerModel& base, const VocabDiff& diff,
               EmbeddingTable& out) {
    const std::size_t d = src.dim();
    parallel_for(diff.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(d);
        for (std::size_t k = begin; k < end; ++k) {
            const auto parts = constituent_ids(base, diff.new_tokens[k]);
            if (parts.empty()) {
                fail(ErrorCode::EmptyConstituents, "new token has no base constituents");
            }
            std::fill(acc.begin(), acc.end(), 0.0);
            for (TokenId t : parts) {
                const auto r = src.row(t);
                for (std::size_t j = 0; j < d; ++j) acc[j] += r[j];
            }
            auto dst = out.row(diff.new_ids[k]);
            const double n = static_cast<double>(parts.size());
            for (std::size_t j = 0; j < d; ++j) dst[j] = static_cast<float>(acc[j] / n);
        }
    });
}

void fill_random(const EmbeddingTable& src, const VocabDiff& diff, std::uint64_t seed,
                 EmbeddingTable& out) {
    const std::size_t d = src.dim();
    const std::size_t n = src.vocab_size();
    std::vector<double> mean(d, 0.0), stdev(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = src.row(i);
        for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
    }
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = src.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double c = r[j] - mean[j];
            stdev[j] += c * c;
        }
    }
    for (auto& s : stdev) s = std::sqrt(s / static_cast<double>(n));

    parallel_for(diff.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            auto rng = make_rng(seed, diff.new_ids[k]);
            std::normal_distribution<double> gauss(0.0, 1.0);
            auto dst = out.row(diff.new_ids[k]);
            for (std::size_t j = 0; j < d; ++j) {
                dst[j] = static_cast<float>(mean[j] + stdev[j] * gauss(rng));
            }
        }
    });
}

void fill_random_token(const EmbeddingTable& src, const VocabDiff& diff, std::uint64_t seed,
                       EmbeddingTable& out) {
    const std::size_t n = src.vocab_size();
    parallel_for(diff.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            auto rng = make_rng(seed, diff.new_ids[k]);
            // <bos> (id 0) is never a donor.
            std::uniform_int_distribution<std::size_t> pick(n > 1 ? 1 : 0, n - 1);
            const auto r = src.row(pick(rng));
            std::copy(r.begin(), r.end(), out.row(diff.new_ids[k]).begin());
        }
    });
}

double norm(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

void fill_focus(const EmbeddingTable& src, const VocabDiff& diff, const EmbeddingTable& aux,
                std::size_t focus_k, EmbeddingTable& out) {
    const std::size_t n = src.vocab_size();
    const std::size_t d = src.dim();
    std::vector<double> aux_norm(aux.vocab_size());
    for (std::size_t i = 0; i < aux.vocab_size(); ++i) aux_norm[i] = norm(aux.row(i));

    parallel_for(diff.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, TokenId>> sims;
        std::vector<double> acc(d);
        for (std::size_t k = begin; k < end; ++k) {
            const TokenId v = diff.new_ids[k];
            const auto av = aux.row(v);
            sims.clear();
            for (TokenId u = 1; u < n; ++u) {
                const auto au = aux.row(u);
                double dot = 0.0;
                for (std::size_t j = 0; j < aux.dim(); ++j) dot += static_cast<double>(av[j]) * au[j];
                const double denom = aux_norm[v] * aux_norm[u];
                sims.emplace_back(denom > 0.0 ? dot / denom : 0.0, u);
            }
            const std::size_t k_eff = std::min(focus_k, sims.size());
            std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k_eff), sims.end(),
                              [](const auto& a, const auto& b) {
                                  return a.first != b.first ? a.first > b.first : a.second < b.second;
                              });
            const double top = sims[0].first;
            double z = 0.0;
            for (std::size_t i = 0; i < k_eff; ++i) z += std::exp(sims[i].first - top);
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t i = 0; i < k_eff; ++i) {
                const double w = std::exp(sims[i].first - top) / z;
                const auto r = src.row(sims[i].second);
                for (std::size_t j = 0; j < d; ++j) acc[j] += w * r[j];
            }
            auto dst = out.row(v);
            for (std::size_t j = 0; j < d; ++j) dst[j] = static_cast<float>(acc[j]);
        }
    });
}

} // namespace

EmbeddingTable init_new_rows(const EmbeddingTable& table, const TokenizerModel& merged,
                             const TokenizerModel& base, const VocabDiff& diff,
                             const InitStrategy& strategy, const EmbeddingTable* aux) {
    if (table.vocab_size() != base.vocab_size()) {
        fail(ErrorCode::ShapeMismatch, "table has " + std::to_string(table.vocab_size()) +
                                           " rows but the base tokenizer has " +
                                           std::to_string(base.vocab_size()) + " tokens");
    }
    if (merged.vocab_size() != base.vocab_size() + diff.size()) {
        fail(ErrorCode::ShapeMismatch, "merged tokenizer size does not equal base size plus diff size");
    }
    for (std::size_t k = 0; k < diff.size(); ++k) {
        if (diff.new_ids[k] != base.vocab_size() + k) {
            fail(ErrorCode::ShapeMismatch, "diff ids are not contiguous after the base vocabulary");
        }
    }
    if (strategy.kind == InitKind::FocusLite) {
        if (aux == nullptr) {
            fail(ErrorCode::MissingAuxEmbedding, "focus_lite initialization needs an auxiliary embedding table");
        }
        if (aux->vocab_size() != merged.vocab_size()) {
            fail(ErrorCode::DimensionMismatch, "auxiliary table has " + std::to_string(aux->vocab_size()) +
                                                   " rows, merged tokenizer has " +
                                                   std::to_string(merged.vocab_size()));
        }
        if (strategy.focus_k < 1) fail(ErrorCode::InvalidArgument, "focus_k must be at least 1");
    }

    EmbeddingTable out(merged.vocab_size(), table.dim(), table.role());
    std::copy(table.data().begin(), table.data().end(), out.data().begin());
    if (diff.empty()) return out;

    switch (strategy.kind) {
    case InitKind::Mean: fill_mean(table, base, diff, out); break;
    case InitKind::Random: fill_random(table, diff, strategy.seed, out); break;
    case InitKind::RandomToken: fill_random_token(table, diff, strategy.seed, out); break;
    case InitKind::FocusLite: fill_focus(table, diff, *aux, strategy.focus_k, out); break;
    }
    return out;
}

} // namespace lingua_adapt
