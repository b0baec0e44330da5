#include <array>
#include <string>
#include <vector>

#include "arvote/corpus.hpp"

namespace arvote {

namespace {

constexpr std::array<std::string_view, 2> kNoiseMarkers = {"@USER", "LINK"};

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x21 && u <= 0x2f) || (u >= 0x3a && u <= 0x40) || (u >= 0x5b && u <= 0x60 && u != 0x5f) ||
         (u >= 0x7b && u <= 0x7e);
}

// Strips noise markers opening the token; "@USER:" becomes ":".
std::string_view strip_markers(std::string_view token) {
  for (bool changed = true; changed && !token.empty();) {
    changed = false;
    for (auto marker : kNoiseMarkers) {
      if (token.substr(0, marker.size()) != marker) continue;
      if (token.size() == marker.size() || is_ascii_punct(token[marker.size()])) {
        token.remove_prefix(marker.size());
        changed = true;
      }
    }
  }
  return token;
}

// U+0640 tatweel is D9 80; harakat U+064B..U+0652 are D9 8B..D9 92.
std::string strip_arabic_marks(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (static_cast<unsigned char>(s[i]) == 0xd9 && i + 1 < s.size()) {
      const auto next = static_cast<unsigned char>(s[i + 1]);
      if (next == 0x80 || (next >= 0x8b && next <= 0x92)) {
        ++i;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

}  // namespace

std::string clean_text(std::string_view raw, const CleanOptions& options) {
  std::string normalized;
  if (options.normalize_arabic) {
    normalized = strip_arabic_marks(raw);
    raw = normalized;
  }

  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && is_ascii_space(raw[i])) ++i;
    const std::size_t start = i;
    while (i < raw.size() && !is_ascii_space(raw[i])) ++i;
    if (i > start) {
      auto token = strip_markers(raw.substr(start, i - start));
      if (!token.empty()) tokens.push_back(token);
    }
  }

  std::size_t first = 0;
  if (options.strip_rt == RtMode::kLeading) {
    while (first < tokens.size() && tokens[first] == "RT") ++first;
  }

  std::string out;
  out.reserve(raw.size());
  for (std::size_t k = first; k < tokens.size(); ++k) {
    if (options.strip_rt == RtMode::kAnywhere && tokens[k] == "RT") continue;
    if (!out.empty()) out.push_back(' ');
    out.append(tokens[k]);
  }
  return out;
}

Dataset clean_dataset(Dataset d, const CleanOptions& options) {
  for (auto& e : d.examples) e.text = clean_text(e.text, options);
  return d;
}

}  // namespace arvote
