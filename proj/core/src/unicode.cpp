#include "unicode.hpp"

#include <algorithm>

namespace vlcurate::unicode {

char32_t decode_next(std::string_view text, std::size_t& pos) {
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
    const unsigned char b0 = byte(pos);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++pos;
        return kInvalid;
    }
    if (pos + static_cast<std::size_t>(len) > text.size()) {
        ++pos;
        return kInvalid;
    }
    for (int i = 1; i < len; ++i) {
        const unsigned char b = byte(pos + static_cast<std::size_t>(i));
        if ((b & 0xC0) != 0x80) {
            ++pos;
            return kInvalid;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    // Overlong encodings, surrogates and out-of-range values are invalid.
    static constexpr char32_t kMinByLen[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinByLen[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++pos;
        return kInvalid;
    }
    pos += static_cast<std::size_t>(len);
    return cp;
}

std::size_t codepoint_count(std::string_view text) {
    std::size_t n = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        decode_next(text, pos);
        ++n;
    }
    return n;
}

namespace {

struct Range {
    char32_t lo;
    char32_t hi;
};

bool in_ranges(char32_t cp, const Range* ranges, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (cp >= ranges[i].lo && cp <= ranges[i].hi) return true;
    }
    return false;
}

// Letter blocks of the major scripts. Not a full Unicode table, but a
// deterministic approximation that keeps every alphabetic script we expect
// in vision-language corpora tokenizing sensibly.
constexpr Range kWordRanges[] = {
    {0x00C0, 0x00D6}, {0x00D8, 0x00F6}, {0x00F8, 0x02AF},  // Latin-1 + extended
    {0x0370, 0x0373}, {0x0376, 0x0377}, {0x037B, 0x037D},
    {0x0386, 0x0386}, {0x0388, 0x03FF},                      // Greek
    {0x0400, 0x0481}, {0x048A, 0x052F},                      // Cyrillic
    {0x0531, 0x0556}, {0x0561, 0x0587},                      // Armenian
    {0x05D0, 0x05EA}, {0x05EF, 0x05F2},                      // Hebrew
    {0x0620, 0x064A}, {0x0660, 0x0669}, {0x066E, 0x06D3},    // Arabic
    {0x0900, 0x0963}, {0x0966, 0x096F}, {0x0971, 0x097F},    // Devanagari
    {0x0980, 0x09FF}, {0x0A00, 0x0AFF}, {0x0B00, 0x0BFF},    // Bengali..Tamil
    {0x0C00, 0x0CFF}, {0x0D00, 0x0DFF},                      // Telugu..Sinhala
    {0x0E01, 0x0E3A}, {0x0E40, 0x0E4E},                      // Thai
    {0x10A0, 0x10FF},                                        // Georgian
    {0x1100, 0x11FF}, {0xAC00, 0xD7A3},                      // Hangul
    {0x1E00, 0x1FFF},                                        // Latin/Greek extended
    {0xFB00, 0xFB17},                                        // Latin ligatures
    {0xFF10, 0xFF19}, {0xFF21, 0xFF3A}, {0xFF41, 0xFF5A},    // fullwidth alnum
};

constexpr Range kCjkRanges[] = {
    {0x3040, 0x309F},    // hiragana
    {0x30A0, 0x30FF},    // katakana
    {0x3400, 0x4DBF},    // CJK ext A
    {0x4E00, 0x9FFF},    // CJK unified
    {0xF900, 0xFAFF},    // CJK compat
    {0x20000, 0x2A6DF},  // CJK ext B
};

// Format (Cf) codepoints.
constexpr Range kFormatRanges[] = {
    {0x00AD, 0x00AD}, {0x0600, 0x0605}, {0x061C, 0x061C}, {0x06DD, 0x06DD},
    {0x070F, 0x070F}, {0x08E2, 0x08E2}, {0x180E, 0x180E}, {0x200B, 0x200F},
    {0x202A, 0x202E}, {0x2060, 0x2064}, {0x2066, 0x206F}, {0xFEFF, 0xFEFF},
    {0xFFF9, 0xFFFB}, {0x110BD, 0x110BD}, {0x110CD, 0x110CD},
    {0x13430, 0x13438}, {0x1BCA0, 0x1BCA3}, {0x1D173, 0x1D17A},
    {0xE0001, 0xE0001}, {0xE0020, 0xE007F},
};

// Private use (Co).
constexpr Range kPrivateUseRanges[] = {
    {0xE000, 0xF8FF}, {0xF0000, 0xFFFFD}, {0x100000, 0x10FFFD},
};

}  // namespace

bool is_word(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') ||
               (cp >= 'a' && cp <= 'z') || cp == '_';
    }
    return is_cjk(cp) || in_ranges(cp, kWordRanges, std::size(kWordRanges));
}

bool is_cjk(char32_t cp) {
    return in_ranges(cp, kCjkRanges, std::size(kCjkRanges));
}

bool is_abnormal(char32_t cp) {
    if (cp == kInvalid) return true;
    if (cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v') return false;
    if (cp < 0x20 || cp == 0x7F || (cp >= 0x80 && cp <= 0x9F)) return true;  // Cc
    if (cp >= 0xD800 && cp <= 0xDFFF) return true;                           // Cs
    if (cp >= 0xFDD0 && cp <= 0xFDEF) return true;                           // noncharacters
    if ((cp & 0xFFFE) == 0xFFFE) return true;
    if (in_ranges(cp, kFormatRanges, std::size(kFormatRanges))) return true;
    if (in_ranges(cp, kPrivateUseRanges, std::size(kPrivateUseRanges))) return true;
    return false;
}

std::string ascii_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    });
    return out;
}

}  // namespace vlcurate::unicode
