#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace vlcurate::unicode {

// Sentinel yielded for bytes that do not form a valid UTF-8 sequence.
inline constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes the codepoint starting at `pos` and advances `pos` past it.
// Invalid sequences consume one byte and yield kInvalid.
char32_t decode_next(std::string_view text, std::size_t& pos);

// Counts codepoints; each invalid byte counts as one.
std::size_t codepoint_count(std::string_view text);

// Letters, digits and underscore: the codepoints that join into word tokens.
bool is_word(char32_t cp);

// Han ideographs and kana, emitted as single-codepoint tokens.
bool is_cjk(char32_t cp);

// Control (minus whitespace), format, surrogate, private-use and
// noncharacter codepoints; kInvalid is abnormal as well.
bool is_abnormal(char32_t cp);

// ASCII-only lowercase copy, for case-insensitive keyword matching.
std::string ascii_lower(std::string_view text);

}  // namespace vlcurate::unicode
