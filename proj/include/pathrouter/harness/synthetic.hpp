#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pathrouter/core/path.hpp"
#include "pathrouter/harness/dataset.hpp"
#include "pathrouter/qa/client.hpp"
#include "pathrouter/retrieval/table_store.hpp"
#include "pathrouter/rules/ruleset.hpp"

namespace pathrouter::harness {

// Synthetic financial-QA workloads. Every question is built from templates
// that fire exactly one seed rule, so its category fixes its routed path.

struct WorkloadQuery {
    std::string question;
    Category category = Category::Other;
};

inline constexpr std::string_view kCaseStudyQuestion = "What is the 2019 carrying amount of interest rate swaps?";
inline constexpr std::string_view kCaseStudyGold = "494 million";
inline constexpr std::string_view kCaseStudyHybridAnswer = "2,763";

/// `per_category` distinct questions for each of the four categories,
/// interleaved in a seeded order. Throws ConfigError when the templates
/// cannot supply that many distinct questions.
std::vector<WorkloadQuery> generate_workload(std::size_t per_category, std::uint64_t seed);

enum class FixtureProfile {
    /// Each query is answerable only on its category's path.
    Aligned,
    /// 500 queries whose per-path accuracies are LLM 0.05, Doc 0.10,
    /// DB 0.15, Hybrid 0.19 and whose oracle accuracy is 0.264.
    Complementary,
};

struct FixtureConfig {
    FixtureProfile profile = FixtureProfile::Aligned;
    std::size_t per_category = 100;  ///< Aligned only
    std::uint64_t seed = 0;
};

struct ReplayRecord {
    std::string query_id;
    Path path = Path::LLM;
    qa::ReplayAnswer answer;
};

struct Fixture {
    std::vector<QARecord> dataset;
    std::vector<std::pair<std::string, std::string>> corpus;
    std::vector<retrieval::Table> tables;
    std::vector<ReplayRecord> replay;

    qa::ReplayClient replay_client() const;
    retrieval::TableStore table_store() const;
};

/// The case-study question is always included as a numeric query answered
/// correctly on DB and incorrectly ("2,763") on Hybrid.
Fixture generate_fixture(const FixtureConfig& config);

/// Seed rules with the numeric rule replaced by one that sends numeric
/// questions to Doc with delta +1.
rules::RuleSet poisoned_rules();

/// Writes dataset.jsonl, corpus.jsonl, replay.jsonl, tables/manifest.jsonl
/// plus one CSV per table, seed_rules.jsonl and poisoned_rules.jsonl.
void write_fixture(const Fixture& fixture, const std::filesystem::path& dir);

}  // namespace pathrouter::harness
