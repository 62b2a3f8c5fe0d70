#ifndef SARCLAB_UNICODE_HPP
#define SARCLAB_UNICODE_HPP

#include <cstdint>
#include <string>

namespace sarclab::unicode {

struct Decoded {
    char32_t cp;
    int length;      // bytes consumed
    bool valid;      // false -> single raw byte passed through
};

// Decodes the next UTF-8 code point at s[pos]. Never reads past s.size().
Decoded decode(const std::string& s, std::size_t pos);

bool is_whitespace(char32_t cp);

// Unicode categories L* and Nd (table of the major blocks)
bool is_alphanumeric(char32_t cp);

char32_t to_lower(char32_t cp);

void append_utf8(std::string& out, char32_t cp);

}  // namespace sarclab::unicode

#endif
