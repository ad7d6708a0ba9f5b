#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mred::text {

std::string_view trim(std::string_view s) noexcept;

/// Whitespace-delimited tokens.
std::vector<std::string_view> whitespace_tokens(std::string_view s);

/// Number of whitespace-delimited tokens; this is the "word count" used by
/// the length filter and all length analytics.
std::size_t word_count(std::string_view s) noexcept;

/// Porter stemmer, NLTK_EXTENSIONS variant (the one rouge_score uses).
/// Input is expected lowercase ASCII.
std::string porter_stem(std::string_view word);

/// ROUGE tokenization: lowercase, non-[a-z0-9] runs become separators,
/// tokens longer than three characters are Porter-stemmed.
std::vector<std::string> rouge_tokens(std::string_view s);

bool is_stopword(std::string_view token) noexcept;

/// rouge_tokens() with English stopwords removed. Used by the similarity
/// functions behind merge and the ranking engines.
std::vector<std::string> content_tokens(std::string_view s);

/// 64-bit FNV-1a, used for config hashes.
std::uint64_t fnv1a(std::string_view s) noexcept;
std::string hex64(std::uint64_t v);

}  // namespace mred::text
