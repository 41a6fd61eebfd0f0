#pragma once

#include <array>
#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hux {

inline std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

// Lowercased alphanumeric runs; every other byte is a separator.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

inline std::set<std::string> token_set(std::string_view text) {
    auto tokens = tokenize(text);
    return {tokens.begin(), tokens.end()};
}

// Fixed stopword list used by the mock keyword generator and nowhere else.
inline const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "a",    "an",   "and",  "are",  "as",   "at",   "be",   "been", "but",
        "by",   "did",  "do",   "does", "for",  "from", "had",  "has",  "have",
        "he",   "her",  "his",  "i",    "in",   "is",   "it",   "its",  "me",
        "my",   "of",   "off",  "on",   "or",   "our",  "she",  "so",   "that",
        "the",  "their", "them", "there", "these", "they", "this", "those",
        "to",   "was",  "we",   "were", "with", "you",  "your"};
    return words;
}

inline bool is_stopword(const std::string& token) {
    return stopwords().count(token) > 0;
}

// Word-level tokenization that keeps intra-word punctuation (so "t-shirt"
// survives as one word). Used for keyword phrase extraction.
inline std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    auto is_word_char = [](unsigned char c) { return std::isalnum(c) != 0; };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_word_char(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if ((c == '-' || c == '\'') && !current.empty() && i + 1 < text.size() &&
                   is_word_char(static_cast<unsigned char>(text[i + 1]))) {
            current.push_back(static_cast<char>(c));
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

} // namespace hux
