#include <atomic>
#include <cstdlib>
#include <map>
#include <set>

#include "doctest.h"
#include "expect_error.hpp"
#include "lingua_adapt/bpe.hpp"
#include "lingua_adapt/format.hpp"
#include "lingua_adapt/parallel.hpp"
#include "lingua_adapt/plot.hpp"
#include "lingua_adapt/synth.hpp"
#include "lingua_adapt/text.hpp"

using namespace lingua_adapt;

TEST_SUITE("support") {

TEST_CASE("synthetic languages are deterministic and script-pure") {
    SyntheticLanguage en(ascii_language(1));
    SyntheticLanguage ka(georgian_language(1));
    CHECK(en.lexicon().size() == 2000);
    const Corpus a = ka.corpus(100, 3);
    const Corpus b = SyntheticLanguage(georgian_language(1)).corpus(100, 3);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.docs[i].text == b.docs[i].text);

    for (const auto& d : a.docs) {
        CHECK(is_valid_utf8(d.text));
        CHECK(nfc(d.text) == d.text);
        for (unsigned char c : d.text) CHECK((c == ' ' || c >= 0x80));
    }
    for (const auto& d : en.corpus(100, 3).docs) {
        for (unsigned char c : d.text) CHECK((c == ' ' || (c >= 'a' && c <= 'z')));
    }
    CHECK_FALSE(en.corpus(5, 1).docs[0].text == en.corpus(5, 2).docs[0].text);
}

TEST_CASE("synthetic word frequencies are skewed") {
    SyntheticLanguage en(ascii_language(2));
    std::map<std::string, int> freq;
    for (const auto& d : en.corpus(500, 1).docs) {
        for (auto w : split_words(d.text)) ++freq[std::string(w[0] == ' ' ? w.substr(1) : w)];
    }
    CHECK(freq[en.lexicon()[0]] > 10 * std::max(1, freq[en.lexicon()[1000]]));
}

TEST_CASE("synthetic option validation") {
    SynthOptions o = ascii_language(1);
    o.letters_end = U'b';
    o.max_word_letters = 2;
    CHECK(testing_support::code_of([&] { SyntheticLanguage{o}; }) == ErrorCode::InvalidArgument);
}

TEST_CASE("svg chart") {
    PlotSeries s{"tokens/doc", {1000, 5000, 10000}, {20.5, 12.0, 10.25}};
    const std::string svg = line_chart_svg({s}, {"Fertility <vs> size", "extra vocab", "tokens/doc"});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("Fertility &lt;vs&gt; size") != std::string::npos);
    CHECK(line_chart_svg({s}, {}) == line_chart_svg({s}, {}));

    const std::string single = line_chart_svg({PlotSeries{"one", {1000}, {3.0}}}, {});
    CHECK(single.find("nan") == std::string::npos);
    CHECK(single.find("<circle") != std::string::npos);
}

TEST_CASE("parallel_for covers every index once") {
    for (const char* threads : {"1", "3", "8"}) {
        ::setenv("LINGUA_ADAPT_THREADS", threads, 1);
        std::vector<std::atomic<int>> hits(1001);
        parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) ++hits[i];
        });
        for (const auto& h : hits) CHECK(h.load() == 1);
    }
    ::setenv("LINGUA_ADAPT_THREADS", "3", 1);
    CHECK(thread_count() == 3);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t b, std::size_t) {
                        if (b > 0) fail(ErrorCode::Internal, "boom");
                    }),
                    Error);
    ::unsetenv("LINGUA_ADAPT_THREADS");
}

TEST_CASE("number formatting") {
    CHECK(format_number(62.18 - 73.19) == "-11.01");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1.0 / 3.0) == "0.3333333333");
}

TEST_CASE("error classification") {
    CHECK(is_user_error(ErrorCode::VocabTooSmall));
    CHECK(is_user_error(ErrorCode::MissingAuxEmbedding));
    CHECK_FALSE(is_user_error(ErrorCode::IoError));
    CHECK_FALSE(is_user_error(ErrorCode::Internal));
    CHECK(to_string(ErrorCode::NoSharedMetrics) == "NoSharedMetrics");
}

} // TEST_SUITE
