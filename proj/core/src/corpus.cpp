#include "dialectqe/corpus.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "dialectqe/errors.hpp"
#include "dialectqe/rng.hpp"
#include "dialectqe/textnorm.hpp"

namespace dialectqe::corpus {

namespace {

using nlohmann::json;

std::string line_msg(const std::string& path, std::size_t line, const std::string& what) {
  return path + ":" + std::to_string(line) + ": " + what;
}

double parse_score_cell(const std::string& cell, const std::string& path, std::size_t line) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    raise(ErrorKind::parse, line_msg(path, line, "not a number: '" + cell + "'"));
  if (!(v >= 0.0 && v <= 100.0))
    raise(ErrorKind::validation,
          line_msg(path, line, "score " + cell + " outside [0,100]"));
  return v;
}

void check_record(EvalRecord& rec, const std::string& path, std::size_t line,
                  std::unordered_set<std::string>& seen_ids) {
  if (textnorm::trim(rec.id).empty())
    raise(ErrorKind::validation, line_msg(path, line, "empty id"));
  if (!seen_ids.insert(rec.id).second)
    raise(ErrorKind::validation, line_msg(path, line, "duplicate id '" + rec.id + "'"));
  if (textnorm::trim(rec.source).empty())
    raise(ErrorKind::validation, line_msg(path, line, "empty source"));
  if (textnorm::trim(rec.hypothesis).empty())
    raise(ErrorKind::validation, line_msg(path, line, "empty hypothesis"));
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cells;
}

std::vector<EvalRecord> load_tsv(std::istream& in, const std::string& path) {
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line))
    return {};
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_tabs(line);
  static const char* kFixed[] = {"id", "source", "reference", "hypothesis"};
  if (header.size() < 5)
    raise(ErrorKind::parse, line_msg(path, 1, "header needs at least 5 columns"));
  for (std::size_t i = 0; i < 4; ++i) {
    if (header[i] != kFixed[i])
      raise(ErrorKind::parse,
            line_msg(path, 1, "expected column '" + std::string(kFixed[i]) +
                                  "', got '" + header[i] + "'"));
  }
  for (std::size_t i = 4; i < header.size(); ++i) {
    if (header[i].rfind("score_a", 0) != 0)
      raise(ErrorKind::parse, line_msg(path, 1, "unexpected column '" + header[i] + "'"));
  }

  std::vector<EvalRecord> records;
  std::unordered_set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const std::vector<std::string> cells = split_tabs(line);
    if (cells.size() != header.size())
      raise(ErrorKind::parse,
            line_msg(path, line_no,
                     "expected " + std::to_string(header.size()) + " columns, got " +
                         std::to_string(cells.size())));

    EvalRecord rec;
    rec.id = cells[0];
    rec.source = cells[1];
    rec.reference = cells[2];
    rec.hypothesis = cells[3];
    for (std::size_t i = 4; i < cells.size(); ++i)
      rec.raw_scores.push_back(parse_score_cell(cells[i], path, line_no));
    check_record(rec, path, line_no, seen_ids);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<EvalRecord> load_jsonl(std::istream& in, const std::string& path) {
  std::vector<EvalRecord> records;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (textnorm::trim(line).empty()) continue;

    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object())
      raise(ErrorKind::parse, line_msg(path, line_no, "malformed JSON record"));

    EvalRecord rec;
    try {
      rec.id = row.at("id").get<std::string>();
      rec.source = row.at("source").get<std::string>();
      rec.hypothesis = row.at("hypothesis").get<std::string>();
      if (row.contains("reference") && !row["reference"].is_null())
        rec.reference = row["reference"].get<std::string>();
      for (const auto& s : row.at("raw_scores")) {
        if (!s.is_number())
          raise(ErrorKind::parse, line_msg(path, line_no, "non-numeric score"));
        const double v = s.get<double>();
        if (!(v >= 0.0 && v <= 100.0))
          raise(ErrorKind::validation,
                line_msg(path, line_no, "score outside [0,100]"));
        rec.raw_scores.push_back(v);
      }
    } catch (const json::exception& e) {
      raise(ErrorKind::parse, line_msg(path, line_no, e.what()));
    }
    check_record(rec, path, line_no, seen_ids);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

GoldOrder gold_order_from_string(const std::string& name) {
  if (name == "average_then_z") return GoldOrder::average_then_z;
  if (name == "z_then_average") return GoldOrder::z_then_average;
  raise(ErrorKind::config, "unknown normalization order: " + name);
}

const char* to_string(GoldOrder order) {
  return order == GoldOrder::average_then_z ? "average_then_z" : "z_then_average";
}

std::vector<EvalRecord> load_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(ErrorKind::io, "cannot open dataset file: " + path);

  // Sniff: record-per-line JSON starts with '{'.
  int c = in.peek();
  while (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
    in.get();
    c = in.peek();
  }
  if (c == '{') return load_jsonl(in, path);
  return load_tsv(in, path);
}

double average_annotators(const EvalRecord& record) {
  if (record.raw_scores.empty())
    raise(ErrorKind::validation, "record '" + record.id + "' has no scores");
  const double sum =
      std::accumulate(record.raw_scores.begin(), record.raw_scores.end(), 0.0);
  return sum / static_cast<double>(record.raw_scores.size());
}

std::vector<double> z_normalize(const std::vector<double>& values) {
  if (values.size() < 2)
    raise(ErrorKind::validation, "z_normalize: need at least 2 values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) {
    const double d = v - mean;
    var += d * d;
  }
  var /= n;
  if (var == 0.0)
    raise(ErrorKind::degenerate, "z_normalize: zero standard deviation");
  const double inv_std = 1.0 / std::sqrt(var);
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back((v - mean) * inv_std);
  return out;
}

void assign_gold(std::vector<EvalRecord>& records, GoldOrder order) {
  if (records.empty()) return;
  if (order == GoldOrder::average_then_z) {
    std::vector<double> means;
    means.reserve(records.size());
    for (const auto& r : records) means.push_back(average_annotators(r));
    const std::vector<double> z = z_normalize(means);
    for (std::size_t i = 0; i < records.size(); ++i) records[i].gold = z[i];
    return;
  }

  // z_then_average: z-normalize each annotator column, then average per record.
  const std::size_t k = records.front().raw_scores.size();
  for (const auto& r : records) {
    if (r.raw_scores.size() != k)
      raise(ErrorKind::validation,
            "z_then_average needs a uniform annotator count; record '" + r.id +
                "' differs");
  }
  if (k == 0)
    raise(ErrorKind::validation, "records have no scores");
  std::vector<std::vector<double>> cols(k);
  for (std::size_t a = 0; a < k; ++a) {
    cols[a].reserve(records.size());
    for (const auto& r : records) cols[a].push_back(r.raw_scores[a]);
    cols[a] = z_normalize(cols[a]);
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    double s = 0.0;
    for (std::size_t a = 0; a < k; ++a) s += cols[a][i];
    records[i].gold = s / static_cast<double>(k);
  }
}

std::pair<std::vector<EvalRecord>, std::vector<EvalRecord>> split(
    const std::vector<EvalRecord>& records, const SplitSpec& spec) {
  if (spec.train_count + spec.test_count > records.size())
    raise(ErrorKind::validation,
          "split: train+test (" + std::to_string(spec.train_count + spec.test_count) +
              ") exceeds dataset size (" + std::to_string(records.size()) + ")");

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(spec.seed);
  fisher_yates(order, rng);

  std::pair<std::vector<EvalRecord>, std::vector<EvalRecord>> out;
  out.first.reserve(spec.train_count);
  out.second.reserve(spec.test_count);
  for (std::size_t i = 0; i < spec.train_count; ++i)
    out.first.push_back(records[order[i]]);
  for (std::size_t i = 0; i < spec.test_count; ++i)
    out.second.push_back(records[order[spec.train_count + i]]);
  return out;
}

}  // namespace dialectqe::corpus
