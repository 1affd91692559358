#include "argmerge/aggregation.hpp"

#include "argmerge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace argmerge {

namespace {

void check_input(std::span<const double> values) {
    if (values.empty()) {
        throw EmptyInput("base score aggregation needs at least one value");
    }
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw DomainError("aggregation input outside [0,1]: " + std::to_string(v));
        }
    }
}

// Neumaier-compensated mean.
double mean(std::span<const double> values) {
    double sum = 0.0;
    double compensation = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v)) {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    return (sum + compensation) / static_cast<double>(values.size());
}

std::string format_vector(std::span<const double> v) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << (i ? ", " : "") << v[i];
    }
    os << ')';
    return os.str();
}

class SampleSource {
public:
    explicit SampleSource(std::uint64_t seed) : rng_(seed) {}

    std::size_t length() { return std::uniform_int_distribution<std::size_t>(1, 16)(rng_); }

    // Mostly uniform, with boundary values and repeats mixed in.
    double value() {
        const int pick = std::uniform_int_distribution<int>(0, 19)(rng_);
        if (pick == 0) {
            return 0.0;
        }
        if (pick == 1) {
            return 1.0;
        }
        return unit_(rng_);
    }

    std::vector<double> vector() {
        std::vector<double> v(length());
        for (auto& x : v) {
            x = value();
        }
        if (v.size() > 1 && std::uniform_int_distribution<int>(0, 4)(rng_) == 0) {
            v.back() = v.front();
        }
        return v;
    }

    std::vector<double> permuted(std::vector<double> v) {
        std::shuffle(v.begin(), v.end(), rng_);
        return v;
    }

    std::vector<double> dominating(const std::vector<double>& v) {
        std::vector<double> w(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const bool raise = std::uniform_int_distribution<int>(0, 2)(rng_) != 0;
            w[i] = raise ? std::min(1.0, v[i] + unit_(rng_) * (1.0 - v[i])) : v[i];
        }
        return w;
    }

private:
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

} // namespace

std::string_view to_string(AggregatorKind kind) noexcept {
    return kind == AggregatorKind::Average ? "avg" : "max";
}

std::optional<AggregatorKind> parse_aggregator_kind(std::string_view name) {
    if (name == "avg" || name == "average") {
        return AggregatorKind::Average;
    }
    if (name == "max" || name == "maximum") {
        return AggregatorKind::Maximum;
    }
    return std::nullopt;
}

double aggregate(AggregatorKind kind, std::span<const double> values) {
    check_input(values);
    if (kind == AggregatorKind::Average) {
        return mean(values);
    }
    return *std::max_element(values.begin(), values.end());
}

Aggregator::Aggregator(AggregatorKind kind)
    : name_(to_string(kind)),
      fn_([kind](std::span<const double> v) { return aggregate(kind, v); }) {}

double Aggregator::operator()(std::span<const double> values) const {
    check_input(values);
    return fn_(values);
}

std::string_view to_string(AggregatorLaw law) noexcept {
    switch (law) {
    case AggregatorLaw::OrderIndependence:
        return "order-independence";
    case AggregatorLaw::Boundedness:
        return "boundedness";
    case AggregatorLaw::Idempotence:
        return "idempotence";
    case AggregatorLaw::Monotonicity:
        return "monotonicity";
    }
    return "?";
}

bool LawReport::all_passed() const noexcept {
    return std::all_of(laws.begin(), laws.end(), [](const LawResult& r) { return r.passed; });
}

const LawResult& LawReport::result(AggregatorLaw law) const {
    for (const auto& r : laws) {
        if (r.law == law) {
            return r;
        }
    }
    throw Error("law not present in report");
}

LawReport check_aggregator_laws(const Aggregator& omega, std::size_t sample_count,
                                std::uint64_t seed) {
    LawReport report{omega.name(), {}};
    const double tol = kLawTolerance;

    // Each law gets its own stream so adding samples to one does not shift another.
    {
        SampleSource src(seed);
        LawResult r;
        r.law = AggregatorLaw::OrderIndependence;
        for (std::size_t i = 0; i < sample_count && r.passed; ++i, ++r.samples) {
            auto v = src.vector();
            auto p = src.permuted(v);
            const double a = omega(v);
            const double b = omega(p);
            if (std::fabs(a - b) > tol) {
                r.passed = false;
                r.counterexample = {v, p};
                std::ostringstream os;
                os.precision(17);
                os << "w" << format_vector(v) << " = " << a << " but w" << format_vector(p)
                   << " = " << b;
                r.detail = os.str();
            }
        }
        report.laws.push_back(std::move(r));
    }
    {
        SampleSource src(seed + 1);
        LawResult r;
        r.law = AggregatorLaw::Boundedness;
        for (std::size_t i = 0; i < sample_count && r.passed; ++i, ++r.samples) {
            auto v = src.vector();
            const double w = omega(v);
            const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            if (!(w >= *lo - tol && w <= *hi + tol)) {
                r.passed = false;
                r.counterexample = {v};
                std::ostringstream os;
                os.precision(17);
                os << "w" << format_vector(v) << " = " << w << " outside [" << *lo << ", " << *hi
                   << "]";
                r.detail = os.str();
            }
        }
        report.laws.push_back(std::move(r));
    }
    {
        SampleSource src(seed + 2);
        LawResult r;
        r.law = AggregatorLaw::Idempotence;
        for (std::size_t i = 0; i < sample_count && r.passed; ++i, ++r.samples) {
            std::vector<double> v(src.length(), src.value());
            const double w = omega(v);
            if (std::fabs(w - v.front()) > tol) {
                r.passed = false;
                r.counterexample = {v};
                std::ostringstream os;
                os.precision(17);
                os << "w" << format_vector(v) << " = " << w;
                r.detail = os.str();
            }
        }
        report.laws.push_back(std::move(r));
    }
    {
        SampleSource src(seed + 3);
        LawResult r;
        r.law = AggregatorLaw::Monotonicity;
        for (std::size_t i = 0; i < sample_count && r.passed; ++i, ++r.samples) {
            auto v = src.vector();
            auto w = src.dominating(v);
            const double a = omega(v);
            const double b = omega(w);
            if (a > b + tol) {
                r.passed = false;
                r.counterexample = {v, w};
                std::ostringstream os;
                os.precision(17);
                os << "w" << format_vector(v) << " = " << a << " > w" << format_vector(w)
                   << " = " << b;
                r.detail = os.str();
            }
        }
        report.laws.push_back(std::move(r));
    }
    return report;
}

LawReport check_aggregator_laws(AggregatorKind kind, std::size_t sample_count, std::uint64_t seed) {
    return check_aggregator_laws(Aggregator(kind), sample_count, seed);
}

AggregatorRegistry::AggregatorRegistry() {
    entries_.emplace("avg", Aggregator(AggregatorKind::Average));
    entries_.emplace("max", Aggregator(AggregatorKind::Maximum));
}

LawReport AggregatorRegistry::register_aggregator(std::string name, Aggregator::Function fn,
                                                  std::size_t sample_count, std::uint64_t seed) {
    Aggregator candidate(name, std::move(fn));
    LawReport report = check_aggregator_laws(candidate, sample_count, seed);
    if (report.all_passed()) {
        entries_.insert_or_assign(std::move(name), std::move(candidate));
    }
    return report;
}

std::optional<Aggregator> AggregatorRegistry::find(std::string_view name) const {
    if (auto kind = parse_aggregator_kind(name)) {
        return Aggregator(*kind);
    }
    auto it = entries_.find(name);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<std::string> AggregatorRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : entries_) {
        out.push_back(name);
    }
    return out;
}

} // namespace argmerge
