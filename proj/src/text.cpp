#include "mred/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <unordered_set>

namespace mred::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> words = {
        "a",     "about", "above",  "after", "again", "against", "all",   "am",    "an",    "and",
        "ani",   "any",   "are",    "as",    "at",    "be",      "becaus", "because", "been", "befor",
        "before", "be",   "below",  "between", "both", "but",    "by",    "can",   "could", "did",
        "do",    "doe",   "does",   "down",  "dure",  "during",  "each",  "few",   "for",   "from",
        "further", "had", "has",    "have",  "he",    "her",     "here",  "hi",    "him",   "his",
        "how",   "i",     "if",     "in",    "into",  "is",      "it",    "its",   "itself", "just",
        "me",    "more",  "most",   "my",    "no",    "nor",     "not",   "now",   "of",    "off",
        "on",    "onc",   "once",   "onli",  "only",  "or",      "other", "our",   "out",   "over",
        "own",   "same",  "she",    "should", "so",   "some",    "such",  "than",  "that",  "the",
        "their", "them",  "then",   "there", "these", "they",    "thi",   "this",  "those", "through",
        "to",    "too",   "under",  "until", "up",    "veri",    "very",  "wa",    "was",   "we",
        "were",  "what",  "when",   "where", "which", "while",   "who",   "whom",  "whi",   "why",
        "will",  "with",  "would",  "you",   "your",  "also",    "s",     "t",     "e",     "g",
    };
    return words;
}

}  // namespace

std::string_view trim(std::string_view s) noexcept {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::vector<std::string_view> whitespace_tokens(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::size_t word_count(std::string_view s) noexcept {
    std::size_t n = 0;
    bool in_token = false;
    for (char c : s) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++n;
        }
    }
    return n;
}

std::vector<std::string> rouge_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        out.push_back(cur.size() > 3 ? porter_stem(cur) : cur);
        cur.clear();
    };
    for (char raw : s) {
        const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))
            cur.push_back(c);
        else
            flush();
    }
    flush();
    // The stemmer can only emit [a-z0-9]; re-check to mirror the reference
    // tokenizer's final validity filter.
    std::erase_if(out, [](const std::string& t) {
        return t.empty() || !std::all_of(t.begin(), t.end(), [](char c) {
            return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
        });
    });
    return out;
}

bool is_stopword(std::string_view token) noexcept { return stopwords().contains(token); }

std::vector<std::string> content_tokens(std::string_view s) {
    auto tokens = rouge_tokens(s);
    std::erase_if(tokens, [](const std::string& t) { return is_stopword(t); });
    return tokens;
}

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace mred::text
