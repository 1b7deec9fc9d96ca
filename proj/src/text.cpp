#include "mbrlab/text.hpp"

#include <stdexcept>

#include "mbrlab/error.hpp"

namespace mbrlab {

namespace {

// Decodes one scalar value starting at `pos`; returns the sequence length or 0
// if the bytes there are not a valid UTF-8 sequence.
std::size_t decode_one(std::string_view s, std::size_t pos, char32_t& out) noexcept {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    out = b0;
    return 1;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, cp = b0 & 0x07, min = 0x10000;
  } else {
    return 0;
  }
  if (pos + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[pos + k]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  out = cp;
  return len;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

void replace_all(std::u32string& s, std::u32string_view from, std::u32string_view to) {
  if (from.empty()) return;
  std::u32string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (true) {
    const auto hit = s.find(from, pos);
    if (hit == std::u32string::npos) break;
    out.append(s, pos, hit - pos);
    out.append(to);
    pos = hit + from.size();
  }
  out.append(s, pos, std::u32string::npos);
  s = std::move(out);
}

bool is_ascii_digit(char32_t c) noexcept { return c >= U'0' && c <= U'9'; }
bool is_period_or_comma(char32_t c) noexcept { return c == U'.' || c == U','; }

// Symbols isolated unconditionally: { | } ~ [ \ ] ^ _ ` space ! " # $ % &
// ( ) * + : ; < = > ? @ /
bool is_13a_symbol(char32_t c) noexcept {
  return (c >= U'{' && c <= U'~') || (c >= U'[' && c <= U'`') || (c >= U' ' && c <= U'&') ||
         (c >= U'(' && c <= U'+') || (c >= U':' && c <= U'@') || c == U'/';
}

// Rewrites every non-overlapping two-character window matching `pred`,
// scanning left to right the way a regex substitution does.
template <typename Pred, typename Emit>
std::u32string rewrite_pairs(const std::u32string& s, Pred pred, Emit emit) {
  std::u32string out;
  out.reserve(s.size() + s.size() / 2);
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && pred(s[i], s[i + 1])) {
      emit(out, s[i], s[i + 1]);
      i += 2;
    } else {
      out.push_back(s[i]);
      ++i;
    }
  }
  return out;
}

}  // namespace

std::optional<std::size_t> find_invalid_utf8(std::string_view bytes) {
  std::size_t pos = 0;
  char32_t cp = 0;
  while (pos < bytes.size()) {
    const auto len = decode_one(bytes, pos, cp);
    if (len == 0) return pos;
    pos += len;
  }
  return std::nullopt;
}

std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t pos = 0;
  char32_t cp = 0;
  while (pos < bytes.size()) {
    const auto len = decode_one(bytes, pos, cp);
    if (len == 0) {
      throw Error("utf8", "invalid UTF-8 at byte " + std::to_string(pos));
    }
    out.push_back(cp);
    pos += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) append_utf8(out, c);
  return out;
}

bool is_unicode_space(char32_t c) noexcept {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x1C: case 0x1D: case 0x1E: case 0x1F: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

TokenSequence tokenize_13a(std::string_view text) {
  std::u32string line = decode_utf8(text);

  replace_all(line, U"<skipped>", U"");
  replace_all(line, U"-\n", U"");
  replace_all(line, U"\n", U" ");
  if (line.find(U'&') != std::u32string::npos) {
    replace_all(line, U"&quot;", U"\"");
    replace_all(line, U"&amp;", U"&");
    replace_all(line, U"&lt;", U"<");
    replace_all(line, U"&gt;", U">");
  }

  std::u32string spaced;
  spaced.reserve(line.size() * 2 + 2);
  spaced.push_back(U' ');
  for (char32_t c : line) {
    if (is_13a_symbol(c)) {
      spaced.push_back(U' ');
      spaced.push_back(c);
      spaced.push_back(U' ');
    } else {
      spaced.push_back(c);
    }
  }
  spaced.push_back(U' ');

  // period/comma unless preceded by a digit
  spaced = rewrite_pairs(
      spaced, [](char32_t a, char32_t b) { return !is_ascii_digit(a) && is_period_or_comma(b); },
      [](std::u32string& out, char32_t a, char32_t b) {
        out.push_back(a);
        out.push_back(U' ');
        out.push_back(b);
        out.push_back(U' ');
      });
  // period/comma unless followed by a digit
  spaced = rewrite_pairs(
      spaced, [](char32_t a, char32_t b) { return is_period_or_comma(a) && !is_ascii_digit(b); },
      [](std::u32string& out, char32_t a, char32_t b) {
        out.push_back(U' ');
        out.push_back(a);
        out.push_back(U' ');
        out.push_back(b);
      });
  // dash preceded by a digit
  spaced = rewrite_pairs(
      spaced, [](char32_t a, char32_t b) { return is_ascii_digit(a) && b == U'-'; },
      [](std::u32string& out, char32_t a, char32_t b) {
        out.push_back(a);
        out.push_back(U' ');
        out.push_back(b);
        out.push_back(U' ');
      });

  TokenSequence result;
  result.raw = std::string(text);
  std::size_t i = 0;
  while (i < spaced.size()) {
    while (i < spaced.size() && is_unicode_space(spaced[i])) ++i;
    const std::size_t start = i;
    while (i < spaced.size() && !is_unicode_space(spaced[i])) ++i;
    if (i > start) {
      result.tokens.push_back(encode_utf8(std::u32string_view(spaced).substr(start, i - start)));
    }
  }
  return result;
}

WordNgrams word_ngrams(const std::vector<std::string>& tokens, int n) {
  if (n < 1) throw std::invalid_argument("word_ngrams: n must be >= 1");
  WordNgrams out;
  out.order = n;
  const auto order = static_cast<std::size_t>(n);
  if (tokens.size() < order) return out;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    ++out.counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + order)];
  }
  return out;
}

std::u32string strip_whitespace(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (!is_unicode_space(c)) out.push_back(c);
  }
  return out;
}

CharNgrams char_ngrams(std::string_view text, int n, bool strip) {
  if (n < 1) throw std::invalid_argument("char_ngrams: n must be >= 1");
  std::u32string chars = decode_utf8(text);
  if (strip) chars = strip_whitespace(chars);
  CharNgrams out;
  out.order = n;
  const auto order = static_cast<std::size_t>(n);
  if (chars.size() < order) return out;
  for (std::size_t i = 0; i + order <= chars.size(); ++i) {
    ++out.counts[chars.substr(i, order)];
  }
  return out;
}

}  // namespace mbrlab
