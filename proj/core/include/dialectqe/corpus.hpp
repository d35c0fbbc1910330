#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dialectqe::corpus {

// One source sentence with its machine translation and human judgments.
// `reference` may be empty (reference-less evaluation needs none).
// `gold` stays unset until assign_gold runs.
struct EvalRecord {
  std::string id;
  std::string source;
  std::string reference;
  std::string hypothesis;
  std::vector<double> raw_scores;  // per-annotator DA values in [0,100]
  std::optional<double> gold;      // normalized target, z-space
};

struct SplitSpec {
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  std::uint64_t seed = 0;
};

// Gold construction order. The dataset description reads average-then-z;
// the per-annotator alternative is kept selectable.
enum class GoldOrder { average_then_z, z_then_average };

GoldOrder gold_order_from_string(const std::string& name);
const char* to_string(GoldOrder order);

// Loads either tab-separated (header: id, source, reference, hypothesis,
// score_a1..score_aN) or record-per-line JSON with the same field names.
// The format is sniffed from the first non-space byte.
std::vector<EvalRecord> load_records(const std::string& path);

double average_annotators(const EvalRecord& record);

// (x - mean) / population_std. Requires length >= 2 and nonzero variance.
std::vector<double> z_normalize(const std::vector<double>& values);

// Fills `gold` for every record over the whole dataset.
void assign_gold(std::vector<EvalRecord>& records,
                 GoldOrder order = GoldOrder::average_then_z);

// Deterministic seeded shuffle (Fisher-Yates over splitmix64), then the first
// train_count records form train and the next test_count form test.
std::pair<std::vector<EvalRecord>, std::vector<EvalRecord>> split(
    const std::vector<EvalRecord>& records, const SplitSpec& spec);

}  // namespace dialectqe::corpus
