#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace radeval {

/// Lowercased tokens produced by tokenize().
using TokenSequence = std::vector<std::string>;

/// Canonical tokenizer: ASCII-lowercases, splits on Unicode whitespace,
/// strips leading and trailing ASCII punctuation from each token (so
/// "3.5," becomes "3.5" and internal hyphens survive) and drops empty
/// tokens. Non-ASCII bytes pass through unchanged.
TokenSequence tokenize(std::string_view text);

enum class BleuSmoothing { none, add_epsilon };

struct BleuOptions {
  int max_n = 4;
  BleuSmoothing smoothing = BleuSmoothing::none;
  double epsilon = 1e-9;
};

/// Corpus-level BLEU against one reference per candidate: clipped n-gram
/// counts are summed over the corpus before forming the modified
/// precisions, combined by geometric mean, with brevity penalty
/// exp(1 - r/c) when c < r. Returns 0 when the candidates are all empty or
/// (without smoothing) any n-gram precision is 0.
/// Throws radeval::Error "empty corpus" for empty input and
/// std::invalid_argument for mismatched list lengths.
double bleu(std::span<const TokenSequence> candidates, std::span<const TokenSequence> references,
            const BleuOptions& options = {});

/// Single-pair convenience wrapper over bleu().
double sentence_bleu(const TokenSequence& candidate, const TokenSequence& reference,
                     const BleuOptions& options = {});

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Longest-common-subsequence length by dynamic programming.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// ROUGE-L with beta = 1. Both empty scores 1, exactly one empty scores 0.
PrecisionRecallF1 rouge_l(const TokenSequence& candidate, const TokenSequence& reference);

/// Unweighted mean of per-pair ROUGE-L F1.
double corpus_rouge_l(std::span<const TokenSequence> candidates,
                      std::span<const TokenSequence> references);

}  // namespace radeval
