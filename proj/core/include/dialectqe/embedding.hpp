#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dialectqe {

struct EmbeddingVector {
  std::vector<double> values;
  std::uint64_t source_text_hash = 0;

  std::size_t dim() const { return values.size(); }
};

enum class Pooling { mean, last };

Pooling pooling_from_string(const std::string& name);
const char* to_string(Pooling mode);

// Collapses per-token vectors into one. mean: elementwise average;
// last: final vector unchanged.
EmbeddingVector pool(const std::vector<EmbeddingVector>& vectors, Pooling mode);

}  // namespace dialectqe
