#pragma once

// Base score aggregation: maps a non-empty vector of scores in [0,1] to one
// score, subject to order-independence, boundedness, idempotence and
// monotonicity.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace argmerge {

enum class AggregatorKind { Average, Maximum };

std::string_view to_string(AggregatorKind kind) noexcept;
/// Accepts "avg"/"average" and "max"/"maximum".
std::optional<AggregatorKind> parse_aggregator_kind(std::string_view name);

/// Throws EmptyInput or DomainError.
double aggregate(AggregatorKind kind, std::span<const double> values);

/// A named aggregation function. Built-ins wrap aggregate(); custom ones
/// come from an AggregatorRegistry.
class Aggregator {
public:
    using Function = std::function<double(std::span<const double>)>;

    Aggregator(AggregatorKind kind);
    Aggregator(std::string name, Function fn) : name_(std::move(name)), fn_(std::move(fn)) {}

    const std::string& name() const noexcept { return name_; }
    /// Validates input (non-empty, all in [0,1]) before calling the function.
    double operator()(std::span<const double> values) const;

private:
    std::string name_;
    Function fn_;
};

enum class AggregatorLaw { OrderIndependence, Boundedness, Idempotence, Monotonicity };

std::string_view to_string(AggregatorLaw law) noexcept;

struct LawResult {
    AggregatorLaw law;
    bool passed = true;
    std::size_t samples = 0;
    /// First failing input(s); for monotonicity and order-independence both
    /// vectors of the pair.
    std::vector<std::vector<double>> counterexample;
    std::string detail;
};

struct LawReport {
    std::string aggregator;
    std::vector<LawResult> laws;

    bool all_passed() const noexcept;
    const LawResult& result(AggregatorLaw law) const;
};

inline constexpr double kLawTolerance = 1e-12;

/// Randomized check of all four laws over `sample_count` vectors of length
/// 1..16 drawn from a generator seeded with `seed`.
LawReport check_aggregator_laws(const Aggregator& aggregator, std::size_t sample_count,
                                std::uint64_t seed);
LawReport check_aggregator_laws(AggregatorKind kind, std::size_t sample_count, std::uint64_t seed);

/// Named aggregators. Registration runs the law checker and refuses any
/// function that fails it.
class AggregatorRegistry {
public:
    AggregatorRegistry();

    /// Returns the law report; the aggregator is registered only if it passed.
    LawReport register_aggregator(std::string name, Aggregator::Function fn,
                                  std::size_t sample_count = 1000, std::uint64_t seed = 42);

    std::optional<Aggregator> find(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, Aggregator, std::less<>> entries_;
};

} // namespace argmerge
