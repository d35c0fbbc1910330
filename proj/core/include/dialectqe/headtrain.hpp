#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dialectqe/corpus.hpp"
#include "dialectqe/embedding.hpp"
#include "dialectqe/modelgate.hpp"

namespace dialectqe::headtrain {

struct HeadConfig {
  std::size_t input_dim = 0;       // must equal the provider embedding dim
  Pooling pooling = Pooling::mean;
  double learning_rate = 2e-5;
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  bool hidden_layer = false;       // optional 256-dim tanh layer for ablation
  std::size_t hidden_dim = 256;
};

struct AdamState {
  std::vector<double> m;  // first moments, one per parameter
  std::vector<double> v;  // second moments
  std::uint64_t step = 0;
};

// Affine map input_dim -> 1 by default; parameters are packed flat so the
// optional hidden layer shares the same optimizer path.
// Affine layout: [w_0..w_{d-1}, b]. Hidden layout: [W1 (h x d), b1, w2, b2].
struct RegressionHead {
  HeadConfig cfg;
  std::vector<double> params;
  AdamState opt;

  std::span<const double> weights() const;  // affine weight view
  double bias() const;
};

RegressionHead make_head(const HeadConfig& cfg);

double forward(const RegressionHead& head, const EmbeddingVector& x);

double mse(std::span<const double> preds, std::span<const double> targets);

// Batch-mean MSE and its gradient over all packed parameters.
double loss_and_grad(const RegressionHead& head,
                     std::span<const EmbeddingVector> xs,
                     std::span<const double> ys,
                     std::vector<double>& grad_out);

// Standard Adam with bias correction over the packed parameter vector.
void adam_step(RegressionHead& head, std::span<const double> grad,
               const HeadConfig& cfg);
// Affine-head convenience: separate weight/bias gradients.
void adam_step(RegressionHead& head, const std::vector<double>& grad_w,
               double grad_b, const HeadConfig& cfg);

struct TrainSample {
  EmbeddingVector x;
  double gold = 0.0;
};

struct TrainTrace {
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

// Mini-batch MSE training with a seeded per-epoch shuffle. Embeddings are
// inputs only and are never written to.
TrainTrace train(RegressionHead& head, const std::vector<TrainSample>& data,
                 const HeadConfig& cfg);

// Maps a record to the text whose embedding feeds the head.
using RecordText = std::function<std::string(const corpus::EvalRecord&)>;

// Disk cache for provider embeddings, keyed by (provider identity, text).
// An empty directory disables caching.
class EmbedCache {
public:
  EmbedCache() = default;
  explicit EmbedCache(std::string dir);

  bool enabled() const { return !dir_.empty(); }
  std::optional<EmbeddingVector> get(const std::string& identity,
                                     const std::string& text) const;
  void put(const std::string& identity, const std::string& text,
           const EmbeddingVector& vec) const;
  EmbeddingVector get_or_fetch(const modelgate::Client& client,
                               const std::string& text, Pooling pooling) const;

private:
  std::string dir_;
};

// Embeds each record's configured text (cache first), runs the head, keeps
// input order. Provider and dimension errors carry the failing record id.
std::vector<double> predict(const RegressionHead& head,
                            const std::vector<corpus::EvalRecord>& records,
                            const modelgate::Client& client,
                            const EmbedCache& cache,
                            const RecordText& record_text);

void save_head(const RegressionHead& head, const std::string& path);
RegressionHead load_head(const std::string& path);

// Two-column record file: epoch index and mean loss.
void save_loss_trace(const TrainTrace& trace, const std::string& path);

}  // namespace dialectqe::headtrain
