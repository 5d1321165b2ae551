#pragma once

// Small UTF-8 helpers. Case mapping and letter classification cover ASCII,
// Latin-1, Latin Extended-A/B, Greek and Cyrillic, which is what the
// tagger's corpora contain; other scripts pass through unchanged.

#include <string>
#include <string_view>
#include <vector>

namespace sekira::text {

bool is_valid_utf8(std::string_view s);

// Splits into code points. A byte that does not start a well-formed sequence
// becomes a one-byte element of its own.
std::vector<std::string> utf8_chars(std::string_view s);

std::string to_lower(std::string_view s);

// True if any code point is a letter or a decimal digit.
bool has_letter_or_digit(std::string_view s);

// Fields separated by runs of spaces or tabs; a trailing '\r' is dropped.
std::vector<std::string_view> split_fields(std::string_view line);

std::string_view strip_cr(std::string_view line);

}  // namespace sekira::text
