#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathrouter/core/path.hpp"

namespace pathrouter::retrieval {
struct RetrievalIndex;
}

namespace pathrouter::harness {

enum class Category { Numeric, HowWhy, Definition, FactPlusExplanation, Other };

std::string_view to_string(Category c) noexcept;
std::optional<Category> parse_category(std::string_view s) noexcept;
/// Path a category is meant to take under the seed rules.
Path aligned_path(Category c) noexcept;

struct QARecord {
    std::string query_id;
    std::string question;
    std::vector<std::string> gold_answers;
    std::vector<std::string> doc_refs;
    std::vector<std::string> table_refs;
    std::optional<Category> category;
};

nlohmann::json to_json(const QARecord& r);

/// Line-delimited {"query_id","question","gold_answers",...}. The only
/// format is "jsonl" (ConfigError otherwise). Bad records are SchemaError
/// naming the record index; repeated query ids are SchemaError too.
std::vector<QARecord> load_dataset(const std::filesystem::path& file, std::string_view format = "jsonl");
std::vector<QARecord> parse_dataset(std::string_view document);

/// Every doc_ref and table_ref must exist in the index (SchemaError).
void validate_refs(const std::vector<QARecord>& records, const retrieval::RetrievalIndex& index);

/// Seeded permutation of [0, n): Fisher-Yates over mt19937_64 with an
/// unbiased bounded draw, identical on every platform.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

struct DatasetSplit {
    std::vector<QARecord> train;
    std::vector<QARecord> eval;
};

inline constexpr std::size_t kDefaultEvalN = 500;
inline constexpr std::size_t kDefaultTrainN = 100;

/// Eval is carved first so it depends only on (records, seed, eval_n);
/// train takes up to train_n of the remainder. Both keep input order.
DatasetSplit split_dataset(const std::vector<QARecord>& records, std::uint64_t seed,
                           std::size_t eval_n = kDefaultEvalN, std::size_t train_n = kDefaultTrainN);

}  // namespace pathrouter::harness
