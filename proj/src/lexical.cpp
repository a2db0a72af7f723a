#include "radeval/lexical.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "radeval/error.hpp"

namespace radeval {

namespace {

// Length in bytes of the whitespace code point starting at text[pos], or 0.
std::size_t whitespace_length(std::string_view text, std::size_t pos) {
  const auto byte = [&](std::size_t i) -> unsigned char {
    return i < text.size() ? static_cast<unsigned char>(text[i]) : 0;
  };
  const unsigned char b0 = byte(pos);
  if (b0 == ' ' || (b0 >= 0x09 && b0 <= 0x0D) || (b0 >= 0x1C && b0 <= 0x1F)) return 1;
  if (b0 == 0xC2 && (byte(pos + 1) == 0x85 || byte(pos + 1) == 0xA0)) return 2;  // NEL, NBSP
  if (b0 == 0xE1 && byte(pos + 1) == 0x9A && byte(pos + 2) == 0x80) return 3;   // U+1680
  if (b0 == 0xE2) {
    const unsigned char b1 = byte(pos + 1);
    const unsigned char b2 = byte(pos + 2);
    if (b1 == 0x80 && ((b2 >= 0x80 && b2 <= 0x8A) || b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF)) {
      return 3;  // U+2000..U+200A, U+2028, U+2029, U+202F
    }
    if (b1 == 0x81 && b2 == 0x9F) return 3;  // U+205F
  }
  if (b0 == 0xE3 && byte(pos + 1) == 0x80 && byte(pos + 2) == 0x80) return 3;  // U+3000
  return 0;
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) || (u >= 0x5B && u <= 0x60) ||
         (u >= 0x7B && u <= 0x7E);
}

void emit(std::string_view raw, TokenSequence& out) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && is_ascii_punct(raw[begin])) ++begin;
  while (end > begin && is_ascii_punct(raw[end - 1])) --end;
  if (begin == end) return;
  std::string token(raw.substr(begin, end - begin));
  for (char& c : token) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  out.push_back(std::move(token));
}

using NgramCounts = std::map<std::vector<std::string_view>, std::size_t>;

NgramCounts count_ngrams(const TokenSequence& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                       tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    ++counts[gram];
  }
  return counts;
}

}  // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence out;
  std::size_t start = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (const std::size_t ws = whitespace_length(text, pos); ws > 0) {
      emit(text.substr(start, pos - start), out);
      pos += ws;
      start = pos;
    } else {
      ++pos;
    }
  }
  emit(text.substr(start), out);
  return out;
}

double bleu(std::span<const TokenSequence> candidates, std::span<const TokenSequence> references,
            const BleuOptions& options) {
  if (candidates.size() != references.size()) {
    throw std::invalid_argument("bleu: candidate and reference lists differ in length");
  }
  if (candidates.empty()) throw Error("empty corpus");
  if (options.max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");

  const auto max_n = static_cast<std::size_t>(options.max_n);
  std::vector<std::size_t> matched(max_n, 0);
  std::vector<std::size_t> total(max_n, 0);
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cand_len += candidates[i].size();
    ref_len += references[i].size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      const NgramCounts cand = count_ngrams(candidates[i], n);
      const NgramCounts ref = count_ngrams(references[i], n);
      for (const auto& [gram, count] : cand) {
        total[n - 1] += count;
        auto it = ref.find(gram);
        if (it != ref.end()) matched[n - 1] += std::min(count, it->second);
      }
    }
  }
  if (cand_len == 0) return 0.0;

  double log_sum = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    double p = 0.0;
    if (matched[n] > 0) {
      p = static_cast<double>(matched[n]) / static_cast<double>(total[n]);
    } else if (options.smoothing == BleuSmoothing::add_epsilon) {
      p = options.epsilon / static_cast<double>(std::max<std::size_t>(total[n], 1));
    } else {
      return 0.0;
    }
    log_sum += std::log(p);
  }
  const double geo_mean = std::exp(log_sum / static_cast<double>(max_n));
  const double bp = cand_len < ref_len
                        ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len))
                        : 1.0;
  return bp * geo_mean;
}

double sentence_bleu(const TokenSequence& candidate, const TokenSequence& reference,
                     const BleuOptions& options) {
  return bleu(std::span<const TokenSequence>(&candidate, 1),
              std::span<const TokenSequence>(&reference, 1), options);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PrecisionRecallF1 rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
  if (candidate.empty() && reference.empty()) return {1.0, 1.0, 1.0};
  if (candidate.empty() || reference.empty()) return {0.0, 0.0, 0.0};
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  PrecisionRecallF1 out;
  out.precision = lcs / static_cast<double>(candidate.size());
  out.recall = lcs / static_cast<double>(reference.size());
  if (lcs > 0) out.f1 = 2.0 * (out.precision * out.recall) / (out.precision + out.recall);
  return out;
}

double corpus_rouge_l(std::span<const TokenSequence> candidates,
                      std::span<const TokenSequence> references) {
  if (candidates.size() != references.size()) {
    throw std::invalid_argument("rouge_l: candidate and reference lists differ in length");
  }
  if (candidates.empty()) throw Error("empty corpus");
  double sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    sum += rouge_l(candidates[i], references[i]).f1;
  }
  return sum / static_cast<double>(candidates.size());
}

}  // namespace radeval
