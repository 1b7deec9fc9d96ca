#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mbrlab {

// ---------------------------------------------------------------------------
// UTF-8 helpers
// ---------------------------------------------------------------------------

// Returns the byte offset of the first invalid UTF-8 sequence, if any.
// Overlong encodings, surrogates and code points above U+10FFFF are invalid.
std::optional<std::size_t> find_invalid_utf8(std::string_view bytes);

// Decodes UTF-8 into Unicode scalar values; throws Error("utf8") with the byte
// offset on invalid input.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view text);

// Same whitespace set as Python's str.split()/str.isspace().
bool is_unicode_space(char32_t c) noexcept;

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

struct TokenSequence {
  std::string raw;
  std::vector<std::string> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
};

// The "13a" (mteval-v13a) tokenizer used by corpus BLEU. Case is preserved.
TokenSequence tokenize_13a(std::string_view text);

// ---------------------------------------------------------------------------
// N-gram bookkeeping
// ---------------------------------------------------------------------------

template <typename Gram>
struct NgramMultiset {
  int order = 1;
  std::map<Gram, std::uint32_t> counts;

  std::uint64_t total() const noexcept {
    std::uint64_t sum = 0;
    for (const auto& [gram, count] : counts) sum += count;
    return sum;
  }
};

using WordNgrams = NgramMultiset<std::vector<std::string>>;
using CharNgrams = NgramMultiset<std::u32string>;

WordNgrams word_ngrams(const std::vector<std::string>& tokens, int n);
CharNgrams char_ngrams(std::string_view text, int n, bool strip_whitespace);

// Removes every Unicode whitespace character.
std::u32string strip_whitespace(std::u32string_view text);

}  // namespace mbrlab
