#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace raider::text {

/// Python `repr` of a str: single quotes unless the text contains a single
/// quote and no double quote.
std::string py_repr(std::string_view s);

/// Python `repr` of a list of str, e.g. `['plant', 'medicine1']`.
std::string py_list(std::span<const std::string> items);

std::string py_bool(bool value);

/// Rounds to two decimals and prints like Python's float repr (`0.6`, `2.5`,
/// `0.0`).
std::string format_length(double meters);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Lowercases and collapses runs of space, underscore and hyphen into one
/// space; leading and trailing separators are dropped.
std::string fold_name(std::string_view s);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - levenshtein / max(len); 1.0 for two empty strings.
double edit_similarity(std::string_view a, std::string_view b);

/// Lowercased alphanumeric tokens; punctuation is stripped ("user's" -> "users").
std::vector<std::string> tokenize(std::string_view s);

/// Cosine similarity of token-frequency vectors.
double token_cosine(std::string_view a, std::string_view b);

bool contains_ci(std::string_view haystack, std::string_view needle);

std::vector<std::string> split_lines(std::string_view s);

}  // namespace raider::text
