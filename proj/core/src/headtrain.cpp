#include "dialectqe/headtrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dialectqe/errors.hpp"
#include "dialectqe/rng.hpp"

namespace dialectqe::headtrain {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t param_count(const HeadConfig& cfg) {
  if (!cfg.hidden_layer) return cfg.input_dim + 1;
  return cfg.hidden_dim * cfg.input_dim + cfg.hidden_dim + cfg.hidden_dim + 1;
}

void check_input(const RegressionHead& head, const EmbeddingVector& x) {
  if (x.dim() != head.cfg.input_dim)
    raise(ErrorKind::dimension,
          "embedding dim " + std::to_string(x.dim()) + " does not match head dim " +
              std::to_string(head.cfg.input_dim));
}

// Forward pass through the hidden layer; returns pred, fills h = tanh(W1 x + b1).
double mlp_forward(const RegressionHead& head, std::span<const double> x,
                   std::vector<double>& h) {
  const std::size_t d = head.cfg.input_dim;
  const std::size_t hd = head.cfg.hidden_dim;
  const double* w1 = head.params.data();
  const double* b1 = w1 + hd * d;
  const double* w2 = b1 + hd;
  const double b2 = *(w2 + hd);

  h.resize(hd);
  double pred = b2;
  for (std::size_t j = 0; j < hd; ++j) {
    double a = b1[j];
    const double* row = w1 + j * d;
    for (std::size_t i = 0; i < d; ++i) a += row[i] * x[i];
    h[j] = std::tanh(a);
    pred += w2[j] * h[j];
  }
  return pred;
}

}  // namespace

std::span<const double> RegressionHead::weights() const {
  if (cfg.hidden_layer)
    raise(ErrorKind::config, "weights(): head has a hidden layer");
  return std::span<const double>(params.data(), cfg.input_dim);
}

double RegressionHead::bias() const {
  return params.back();
}

RegressionHead make_head(const HeadConfig& cfg) {
  if (cfg.input_dim == 0)
    raise(ErrorKind::config, "head input_dim must be positive");
  if (cfg.learning_rate <= 0)
    raise(ErrorKind::config, "learning_rate must be positive");
  if (cfg.hidden_layer && cfg.hidden_dim == 0)
    raise(ErrorKind::config, "hidden_dim must be positive");

  RegressionHead head;
  head.cfg = cfg;
  head.params.assign(param_count(cfg), 0.0);
  head.opt.m.assign(head.params.size(), 0.0);
  head.opt.v.assign(head.params.size(), 0.0);

  if (cfg.hidden_layer) {
    // Symmetry-breaking seeded init; the affine head stays at zero (convex).
    SplitMix64 rng(cfg.seed);
    const std::size_t d = cfg.input_dim, hd = cfg.hidden_dim;
    const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hd));
    for (std::size_t i = 0; i < hd * d; ++i)
      head.params[i] = (rng.next_double() * 2.0 - 1.0) * s1;
    for (std::size_t i = 0; i < hd; ++i)
      head.params[hd * d + hd + i] = (rng.next_double() * 2.0 - 1.0) * s2;
  }
  return head;
}

double forward(const RegressionHead& head, const EmbeddingVector& x) {
  check_input(head, x);
  if (head.cfg.hidden_layer) {
    std::vector<double> h;
    return mlp_forward(head, x.values, h);
  }
  const std::size_t d = head.cfg.input_dim;
  double out = head.params[d];  // bias
  for (std::size_t i = 0; i < d; ++i) out += head.params[i] * x.values[i];
  return out;
}

double mse(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size())
    raise(ErrorKind::validation, "mse: length mismatch");
  if (preds.empty())
    raise(ErrorKind::validation, "mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - targets[i];
    s += d * d;
  }
  return s / static_cast<double>(preds.size());
}

double loss_and_grad(const RegressionHead& head,
                     std::span<const EmbeddingVector> xs,
                     std::span<const double> ys,
                     std::vector<double>& grad_out) {
  if (xs.size() != ys.size() || xs.empty())
    raise(ErrorKind::validation, "loss_and_grad: bad batch");
  grad_out.assign(head.params.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  const std::size_t d = head.cfg.input_dim;
  double loss = 0.0;

  if (!head.cfg.hidden_layer) {
    for (std::size_t k = 0; k < xs.size(); ++k) {
      check_input(head, xs[k]);
      const double pred = forward(head, xs[k]);
      const double r = pred - ys[k];
      loss += r * r;
      const double g = 2.0 * r * inv_n;
      for (std::size_t i = 0; i < d; ++i) grad_out[i] += g * xs[k].values[i];
      grad_out[d] += g;
    }
    return loss * inv_n;
  }

  const std::size_t hd = head.cfg.hidden_dim;
  const double* w2 = head.params.data() + hd * d + hd;
  std::vector<double> h;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    check_input(head, xs[k]);
    const double pred = mlp_forward(head, xs[k].values, h);
    const double r = pred - ys[k];
    loss += r * r;
    const double g = 2.0 * r * inv_n;  // dL/dpred
    double* gw1 = grad_out.data();
    double* gb1 = gw1 + hd * d;
    double* gw2 = gb1 + hd;
    double* gb2 = gw2 + hd;
    *gb2 += g;
    for (std::size_t j = 0; j < hd; ++j) {
      gw2[j] += g * h[j];
      const double ga = g * w2[j] * (1.0 - h[j] * h[j]);  // through tanh
      gb1[j] += ga;
      double* grow = gw1 + j * d;
      const double* xv = xs[k].values.data();
      for (std::size_t i = 0; i < d; ++i) grow[i] += ga * xv[i];
    }
  }
  return loss * inv_n;
}

void adam_step(RegressionHead& head, std::span<const double> grad,
               const HeadConfig& cfg) {
  if (grad.size() != head.params.size())
    raise(ErrorKind::dimension, "adam_step: gradient size mismatch");
  for (double g : grad) {
    if (!std::isfinite(g))
      raise(ErrorKind::validation,
            "adam_step: non-finite gradient at step " +
                std::to_string(head.opt.step + 1));
  }
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const std::uint64_t t = ++head.opt.step;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    double& m = head.opt.m[i];
    double& v = head.opt.v[i];
    m = b1 * m + (1.0 - b1) * grad[i];
    v = b2 * v + (1.0 - b2) * grad[i] * grad[i];
    const double m_hat = m / corr1;
    const double v_hat = v / corr2;
    head.params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
  }
}

void adam_step(RegressionHead& head, const std::vector<double>& grad_w,
               double grad_b, const HeadConfig& cfg) {
  if (head.cfg.hidden_layer)
    raise(ErrorKind::config, "weight/bias adam_step applies to the affine head");
  if (grad_w.size() != head.cfg.input_dim)
    raise(ErrorKind::dimension, "adam_step: weight gradient size mismatch");
  std::vector<double> grad = grad_w;
  grad.push_back(grad_b);
  adam_step(head, grad, cfg);
}

TrainTrace train(RegressionHead& head, const std::vector<TrainSample>& data,
                 const HeadConfig& cfg) {
  if (data.empty())
    raise(ErrorKind::validation, "train: empty dataset");
  if (cfg.batch_size == 0 || cfg.epochs == 0)
    raise(ErrorKind::config, "train: epochs and batch_size must be positive");
  for (const auto& s : data) {
    if (s.x.dim() != cfg.input_dim)
      raise(ErrorKind::dimension, "train: sample dim mismatch");
    if (!std::isfinite(s.gold))
      raise(ErrorKind::validation, "train: non-finite gold target");
  }

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 shuffle_rng(cfg.seed);

  TrainTrace trace;
  trace.epoch_loss.reserve(cfg.epochs);
  std::vector<EmbeddingVector> bx;
  std::vector<double> by;
  std::vector<double> grad;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    fisher_yates(order, shuffle_rng);
    double weighted_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      bx.clear();
      by.clear();
      for (std::size_t i = start; i < stop; ++i) {
        bx.push_back(data[order[i]].x);
        by.push_back(data[order[i]].gold);
      }
      const double loss = loss_and_grad(head, bx, by, grad);
      adam_step(head, grad, cfg);
      weighted_loss += loss * static_cast<double>(stop - start);
    }
    trace.epoch_loss.push_back(weighted_loss / static_cast<double>(n));
  }
  return trace;
}

EmbedCache::EmbedCache(std::string dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
      raise(ErrorKind::io, "cannot create embedding cache dir: " + dir_);
  }
}

namespace {

std::string cache_file(const std::string& dir, const std::string& identity,
                       const std::string& text) {
  const std::uint64_t key = fnv1a64(identity + '\x1f' + text);
  char name[32];
  std::snprintf(name, sizeof(name), "%016llx.json",
                static_cast<unsigned long long>(key));
  return (fs::path(dir) / name).string();
}

}  // namespace

std::optional<EmbeddingVector> EmbedCache::get(const std::string& identity,
                                               const std::string& text) const {
  if (!enabled()) return std::nullopt;
  const std::string path = cache_file(dir_, identity, text);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("values"))
    return std::nullopt;  // unreadable cache entries are treated as misses
  if (doc.value("text_hash", std::uint64_t{0}) != fnv1a64(text)) return std::nullopt;
  EmbeddingVector v;
  for (const auto& x : doc["values"]) v.values.push_back(x.get<double>());
  v.source_text_hash = fnv1a64(text);
  return v;
}

void EmbedCache::put(const std::string& identity, const std::string& text,
                     const EmbeddingVector& vec) const {
  if (!enabled()) return;
  json doc;
  doc["text_hash"] = fnv1a64(text);
  doc["dim"] = vec.dim();
  doc["values"] = vec.values;
  const std::string path = cache_file(dir_, identity, text);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    raise(ErrorKind::io, "cannot write embedding cache entry: " + path);
  out << doc.dump() << "\n";
}

EmbeddingVector EmbedCache::get_or_fetch(const modelgate::Client& client,
                                         const std::string& text,
                                         Pooling pooling) const {
  if (auto hit = get(client.identity(), text)) return *hit;
  EmbeddingVector v = client.embed(text, pooling);
  put(client.identity(), text, v);
  return v;
}

std::vector<double> predict(const RegressionHead& head,
                            const std::vector<corpus::EvalRecord>& records,
                            const modelgate::Client& client,
                            const EmbedCache& cache,
                            const RecordText& record_text) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    try {
      const EmbeddingVector v =
          cache.get_or_fetch(client, record_text(rec), head.cfg.pooling);
      out.push_back(forward(head, v));
    } catch (const Error& e) {
      throw Error(e.kind(), "record '" + rec.id + "': " + e.what());
    }
  }
  return out;
}

void save_head(const RegressionHead& head, const std::string& path) {
  json doc;
  doc["format"] = "dialectqe-head";
  doc["version"] = 1;
  doc["input_dim"] = head.cfg.input_dim;
  doc["pooling"] = to_string(head.cfg.pooling);
  doc["hidden_layer"] = head.cfg.hidden_layer;
  doc["hidden_dim"] = head.cfg.hidden_dim;
  doc["learning_rate"] = head.cfg.learning_rate;
  doc["epochs"] = head.cfg.epochs;
  doc["batch_size"] = head.cfg.batch_size;
  doc["seed"] = head.cfg.seed;
  doc["adam_beta1"] = head.cfg.adam_beta1;
  doc["adam_beta2"] = head.cfg.adam_beta2;
  doc["adam_eps"] = head.cfg.adam_eps;
  doc["params"] = head.params;
  doc["opt_m"] = head.opt.m;
  doc["opt_v"] = head.opt.v;
  doc["opt_step"] = head.opt.step;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    raise(ErrorKind::io, "cannot write head checkpoint: " + path);
  out << doc.dump(1, '\t') << "\n";
}

RegressionHead load_head(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(ErrorKind::io, "cannot open head checkpoint: " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || doc.value("format", "") != "dialectqe-head")
    raise(ErrorKind::format, "corrupt head checkpoint: " + path);
  if (doc.value("version", -1) != 1)
    raise(ErrorKind::format, "unsupported head checkpoint version in " + path);

  HeadConfig cfg;
  try {
    cfg.input_dim = doc.at("input_dim").get<std::size_t>();
    cfg.pooling = pooling_from_string(doc.at("pooling").get<std::string>());
    cfg.hidden_layer = doc.at("hidden_layer").get<bool>();
    cfg.hidden_dim = doc.at("hidden_dim").get<std::size_t>();
    cfg.learning_rate = doc.at("learning_rate").get<double>();
    cfg.epochs = doc.at("epochs").get<std::size_t>();
    cfg.batch_size = doc.at("batch_size").get<std::size_t>();
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    cfg.adam_beta1 = doc.at("adam_beta1").get<double>();
    cfg.adam_beta2 = doc.at("adam_beta2").get<double>();
    cfg.adam_eps = doc.at("adam_eps").get<double>();

    RegressionHead head;
    head.cfg = cfg;
    head.params = doc.at("params").get<std::vector<double>>();
    head.opt.m = doc.at("opt_m").get<std::vector<double>>();
    head.opt.v = doc.at("opt_v").get<std::vector<double>>();
    head.opt.step = doc.at("opt_step").get<std::uint64_t>();
    if (head.params.size() != param_count(cfg) ||
        head.opt.m.size() != head.params.size() ||
        head.opt.v.size() != head.params.size())
      raise(ErrorKind::format, "corrupt head checkpoint: parameter sizes disagree");
    return head;
  } catch (const json::exception& e) {
    raise(ErrorKind::format, "corrupt head checkpoint: " + std::string(e.what()));
  }
}

void save_loss_trace(const TrainTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    raise(ErrorKind::io, "cannot write loss trace: " + path);
  char buf[64];
  for (std::size_t i = 0; i < trace.epoch_loss.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.17g\n", i + 1, trace.epoch_loss[i]);
    out << buf;
  }
}

}  // namespace dialectqe::headtrain
