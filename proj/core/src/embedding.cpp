#include "dialectqe/embedding.hpp"

#include "dialectqe/errors.hpp"

namespace dialectqe {

Pooling pooling_from_string(const std::string& name) {
  if (name == "mean") return Pooling::mean;
  if (name == "last") return Pooling::last;
  raise(ErrorKind::config, "unknown pooling mode: " + name);
}

const char* to_string(Pooling mode) {
  return mode == Pooling::mean ? "mean" : "last";
}

EmbeddingVector pool(const std::vector<EmbeddingVector>& vectors, Pooling mode) {
  if (vectors.empty())
    raise(ErrorKind::validation, "pool: empty vector list");
  const std::size_t dim = vectors.front().dim();
  for (const auto& v : vectors) {
    if (v.dim() != dim)
      raise(ErrorKind::dimension, "pool: ragged dimensions");
  }
  if (mode == Pooling::last) return vectors.back();

  EmbeddingVector out;
  out.values.assign(dim, 0.0);
  out.source_text_hash = vectors.front().source_text_hash;
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < dim; ++i) out.values[i] += v.values[i];
  }
  const double inv = 1.0 / static_cast<double>(vectors.size());
  for (double& x : out.values) x *= inv;
  return out;
}

}  // namespace dialectqe
