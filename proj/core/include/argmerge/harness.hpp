#pragma once

// Claim-verification accuracy for single agent runs and their combinations.

#include "argmerge/aggregation.hpp"
#include "argmerge/dfquad.hpp"
#include "argmerge/retrieval.hpp"
#include "argmerge/similarity.hpp"
#include "argmerge/tree_qbaf.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace argmerge {

struct LabeledClaim {
    std::string claim_id;
    std::string text;
    Date closing_date;
    bool gold_label = false;
    /// Optional pre-generated retrieval queries.
    std::vector<std::string> queries;
};

/// JSON list of {"claim_id", "text", "closing_date", "gold", "queries"?}.
/// Throws SchemaError, including on a repeated claim_id.
std::vector<LabeledClaim> load_dataset(const std::filesystem::path& path);

enum class BaseScoreMode { Fixed, Estimated };
/// "fixed-0.5" / "estimated".
std::string_view to_string(BaseScoreMode mode) noexcept;
std::optional<BaseScoreMode> parse_base_score_mode(std::string_view text);

/// Pre-generated frameworks of one agent, one per claim.
struct AgentRun {
    std::string agent_name;
    int depth = 1;
    BaseScoreMode mode = BaseScoreMode::Fixed;
    std::map<std::string, TreeQbaf> frameworks;
};

/// {"agent", "depth", "base_score_mode", "frameworks": {claim_id: qbaf}},
/// where each qbaf is an inline QBAF object or a path relative to the file.
AgentRun load_agent_run(const std::filesystem::path& path);

/// One agent's runs under each base-score mode it was evaluated with.
struct AgentEntry {
    std::string name;
    std::map<BaseScoreMode, AgentRun> runs;
};

struct ExperimentSpec {
    std::vector<LabeledClaim> claims;
    std::vector<AgentEntry> agents;
    double delta = 0.5;
    std::vector<AggregatorKind> aggregators{AggregatorKind::Average, AggregatorKind::Maximum};
    double decision_threshold = kDefaultDecisionThreshold;
    /// Restricts evaluation to these claims when non-empty.
    std::vector<std::string> claim_filter;
    std::string provider = "offline";
    std::size_t parallelism = 0; // 0: hardware concurrency
};

/// {"dataset": path, "agents": [{"name", "runs": {"fixed-0.5": path,
/// "estimated": path}}], "delta", "aggregators", "threshold", "claims",
/// "provider"}. Paths are relative to the spec file. Throws SchemaError.
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct LabelCounts {
    std::size_t correct = 0;
    std::size_t total = 0;
};

struct AccuracyResult {
    std::size_t correct = 0;
    std::size_t total = 0;
    LabelCounts gold_true;
    LabelCounts gold_false;

    double fraction() const noexcept {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }
    /// Percentage rounded half up, computed exactly from the counts.
    int rounded_percent() const noexcept;
};

/// Throws MissingPrediction listing every gold claim without a verdict.
AccuracyResult accuracy(const std::map<std::string, Verdict>& predictions,
                        const std::vector<LabeledClaim>& gold);

/// Verdict for every framework of a run.
std::map<std::string, Verdict> predict(const AgentRun& run, double threshold = kDefaultDecisionThreshold);

struct ResultRow {
    std::string label;
    std::vector<std::string> agents;
    bool combined = false;
    /// aggregator name -> mode -> accuracy. Single-agent rows repeat the
    /// same accuracy under every aggregator.
    std::map<std::string, std::map<BaseScoreMode, AccuracyResult>> cells;
};

struct ExperimentResult {
    std::vector<std::string> aggregators;
    std::vector<ResultRow> rows;

    /// One row per configuration, one column per aggregator; cells read
    /// "<fixed>/<estimated>" in percent.
    std::string render_table() const;
    std::string to_json() const;
};

/// Throws ClaimSetMismatch when runs cover different claims (after the
/// filter) and MissingPrediction when a dataset claim has no framework.
ExperimentResult run_experiment(const ExperimentSpec& spec);

} // namespace argmerge
