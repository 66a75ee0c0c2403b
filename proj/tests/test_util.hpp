#pragma once

// Shared helpers for the test suites.

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ramie/core.hpp"
#include "ramie/detail/rng.hpp"

namespace ramie_test {

/// Unique scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("ramie_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string random_word(std::mt19937_64& rng, std::size_t min_len = 2,
                               std::size_t max_len = 9) {
    const std::size_t len =
        min_len + ramie::detail::uniform_below(rng, max_len - min_len + 1);
    std::string word;
    for (std::size_t i = 0; i < len; ++i)
        word.push_back(static_cast<char>('a' + ramie::detail::uniform_below(rng, 26)));
    return word;
}

inline std::string random_sentence(std::mt19937_64& rng, std::size_t min_words = 3,
                                   std::size_t max_words = 12) {
    const std::size_t n =
        min_words + ramie::detail::uniform_below(rng, max_words - min_words + 1);
    std::string sentence;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) sentence += ' ';
        sentence += random_word(rng);
    }
    return sentence;
}

/// Random junk including structural characters, for parser totality fuzzing.
inline std::string random_garbage(std::mt19937_64& rng, std::size_t max_len = 200) {
    static const std::string pool =
        "abcdefghijklmnopqrstuvwxyz [](){}'\",:\\\t\n_-0123456789";
    const std::size_t len = ramie::detail::uniform_below(rng, max_len + 1);
    std::string out;
    for (std::size_t i = 0; i < len; ++i)
        out.push_back(pool[ramie::detail::uniform_below(rng, pool.size())]);
    return out;
}

inline ramie::EntityType random_entity_type(std::mt19937_64& rng) {
    return static_cast<ramie::EntityType>(
        ramie::detail::uniform_below(rng, ramie::kNumEntityTypes));
}

inline ramie::RelationType random_relation(std::mt19937_64& rng) {
    return static_cast<ramie::RelationType>(ramie::detail::uniform_below(rng, 3));
}

inline ramie::UsageStatus random_usage(std::mt19937_64& rng) {
    return static_cast<ramie::UsageStatus>(ramie::detail::uniform_below(rng, 4));
}

/// Random gold output of the given task, over a small item alphabet so that
/// duplicates and partial overlaps actually occur.
inline ramie::GoldOutput random_gold(std::mt19937_64& rng, ramie::TaskKind task,
                                     std::size_t max_items = 4) {
    using namespace ramie;
    switch (task) {
        case TaskKind::NER: {
            NerMentions mentions;
            const std::size_t n = detail::uniform_below(rng, max_items + 1);
            for (std::size_t i = 0; i < n; ++i)
                mentions.push_back(make_mention(random_word(rng, 2, 5),
                                                random_entity_type(rng)));
            return mentions;
        }
        case TaskKind::RE:
            return random_relation(rng);
        case TaskKind::TE: {
            TeTriples triples;
            const std::size_t n = detail::uniform_below(rng, max_items + 1);
            for (std::size_t i = 0; i < n; ++i)
                triples.push_back(make_triple(random_word(rng, 2, 5), random_relation(rng),
                                              random_word(rng, 2, 5)));
            return triples;
        }
        case TaskKind::UC:
            return random_usage(rng);
    }
    throw ramie::Error("unreachable");
}

inline ramie::Record make_record(std::string id, ramie::TaskKind task, std::string text,
                                 ramie::GoldOutput gold) {
    ramie::Record record;
    record.id = std::move(id);
    record.task = task;
    record.text = std::move(text);
    if (task == ramie::TaskKind::RE) {
        record.re_head = "head";
        record.re_tail = "tail";
    }
    record.gold = std::move(gold);
    return record;
}

}  // namespace ramie_test
