#pragma once

// Independent reference implementations used as test oracles. These stay
// deliberately naive and share no code with the library implementations they
// check.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dialectqe/rng.hpp"

namespace testsupport {

// Brute-force sequence BPE over string symbols: full pair recount each step,
// highest count wins, ties to the lexicographically smallest (left, right)
// pair, merges applied left to right without overlap.
struct BruteForceBpe {
  std::vector<std::pair<std::string, std::string>> merges;

  static void apply(std::vector<std::string>& seq, const std::string& left,
                    const std::string& right) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < seq.size()) {
      if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
        out.push_back(left + right);
        i += 2;
      } else {
        out.push_back(seq[i]);
        i += 1;
      }
    }
    seq = std::move(out);
  }

  void train(const std::vector<std::string>& corpus, std::size_t target_vocab,
             std::size_t min_pair_frequency) {
    std::vector<std::vector<std::string>> seqs;
    for (const auto& text : corpus) {
      std::vector<std::string> seq;
      for (unsigned char b : text) seq.push_back(std::string(1, static_cast<char>(b)));
      seqs.push_back(std::move(seq));
    }
    std::size_t vocab = 256;
    while (vocab < target_vocab) {
      std::map<std::pair<std::string, std::string>, std::size_t> counts;
      for (const auto& seq : seqs)
        for (std::size_t i = 0; i + 1 < seq.size(); ++i)
          ++counts[{seq[i], seq[i + 1]}];
      if (counts.empty()) break;
      std::pair<std::string, std::string> best;
      std::size_t best_count = 0;
      for (const auto& [pair, count] : counts) {
        // std::map iterates pairs in ascending order, so on a tie the first
        // (lexicographically smallest) pair sticks.
        if (count > best_count) {
          best_count = count;
          best = pair;
        }
      }
      if (best_count < min_pair_frequency) break;
      merges.push_back(best);
      for (auto& seq : seqs) apply(seq, best.first, best.second);
      ++vocab;
    }
  }
};

// Spearman via the 1 - 6*sum(d^2)/(n(n^2-1)) shortcut; valid only without ties.
inline double spearman_no_ties_shortcut(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto rank_of = [n](const std::vector<double>& v) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t less = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (v[j] < v[i]) ++less;
      r[i] = static_cast<double>(less + 1);
    }
    return r;
  };
  const std::vector<double> rx = rank_of(x);
  const std::vector<double> ry = rank_of(y);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

// Random scalar vector with entries in [lo, hi).
inline std::vector<double> random_vector(dialectqe::SplitMix64& rng, std::size_t n,
                                         double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.next_double();
  return v;
}

// Random well-formed UTF-8 string covering 1..4 byte sequences.
inline std::string random_utf8(dialectqe::SplitMix64& rng, std::size_t max_chars) {
  const std::size_t n = 1 + rng.next_below(max_chars);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    char32_t cp = 0;
    switch (rng.next_below(4)) {
      case 0: cp = static_cast<char32_t>(rng.next_below(0x80)); break;
      case 1: cp = static_cast<char32_t>(0x80 + rng.next_below(0x800 - 0x80)); break;
      case 2:
        do {
          cp = static_cast<char32_t>(0x800 + rng.next_below(0x10000 - 0x800));
        } while (cp >= 0xD800 && cp <= 0xDFFF);  // no surrogates
        break;
      default:
        cp = static_cast<char32_t>(0x10000 + rng.next_below(0x110000 - 0x10000));
        break;
    }
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
  return out;
}

// Random corpus of short byte strings over a small alphabet, which makes pair
// collisions (and tie-breaks) frequent.
inline std::vector<std::string> random_small_corpus(dialectqe::SplitMix64& rng,
                                                    std::size_t max_total_bytes) {
  static const char alphabet[] = "abcdxy ";
  std::vector<std::string> corpus;
  std::size_t total = 0;
  while (total < max_total_bytes) {
    const std::size_t len = 1 + rng.next_below(40);
    std::string s;
    for (std::size_t i = 0; i < len; ++i)
      s.push_back(alphabet[rng.next_below(sizeof(alphabet) - 1)]);
    total += s.size();
    corpus.push_back(std::move(s));
    if (corpus.size() > 200) break;
  }
  return corpus;
}

}  // namespace testsupport
