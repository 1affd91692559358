#pragma once

// Bipolar and quantitative bipolar argumentation frameworks.
//
// Edges are stored source -> target: an attack (x, z) means x attacks z.
// Frameworks are immutable once built; use QbafBuilder to assemble one.

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace argmerge {

/// Non-empty opaque identifier, unique within one framework.
class ArgumentId {
public:
    explicit ArgumentId(std::string value);
    ArgumentId(const char* value) : ArgumentId(std::string(value)) {}

    const std::string& str() const noexcept { return value_; }

    friend auto operator<=>(const ArgumentId&, const ArgumentId&) = default;
    friend bool operator==(const ArgumentId&, const ArgumentId&) = default;

private:
    std::string value_;
};

enum class Relation { Attack, Support };

std::string_view to_string(Relation r) noexcept;

struct Argument {
    ArgumentId id;
    std::string text;
};

struct Edge {
    ArgumentId from;
    ArgumentId to;
    Relation kind;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Index-based edge, the representation used by algorithms.
struct Link {
    std::size_t from;
    std::size_t to;
    Relation kind;
};

/// A BAF <X, A, S>. Arguments keep their insertion order.
class Baf {
public:
    std::size_t size() const noexcept { return arguments_.size(); }
    std::span<const Argument> arguments() const noexcept { return arguments_; }
    const Argument& argument(std::size_t index) const { return arguments_.at(index); }
    std::span<const Link> links() const noexcept { return links_; }

    std::optional<std::size_t> find(const ArgumentId& id) const;
    /// Throws UnknownArgument.
    std::size_t index_of(const ArgumentId& id) const;
    bool contains(const ArgumentId& id) const { return find(id).has_value(); }

    std::optional<Relation> relation(const ArgumentId& from, const ArgumentId& to) const;
    std::vector<Edge> attacks() const;
    std::vector<Edge> supports() const;
    std::vector<Edge> edges() const;

private:
    friend class QbafBuilder;

    std::vector<Argument> arguments_;
    std::vector<Link> links_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// A QBAF <X, A, S, tau>; tau is total and valued in [0,1].
class Qbaf {
public:
    const Baf& baf() const noexcept { return baf_; }

    std::size_t size() const noexcept { return baf_.size(); }
    std::span<const Argument> arguments() const noexcept { return baf_.arguments(); }
    std::span<const Link> links() const noexcept { return baf_.links(); }
    std::size_t index_of(const ArgumentId& id) const { return baf_.index_of(id); }
    bool contains(const ArgumentId& id) const { return baf_.contains(id); }

    double base_score(std::size_t index) const { return base_scores_.at(index); }
    double base_score(const ArgumentId& id) const { return base_scores_[baf_.index_of(id)]; }
    std::span<const double> base_scores() const noexcept { return base_scores_; }

private:
    friend class QbafBuilder;

    Baf baf_;
    std::vector<double> base_scores_;
};

class QbafBuilder {
public:
    /// Throws InvalidFramework on a duplicate id, DomainError on a score outside [0,1].
    QbafBuilder& add_argument(ArgumentId id, std::string text, double base_score);

    /// Adding an edge that already exists with the same kind is a no-op.
    /// Throws InvalidFramework on a self-edge or when the pair already
    /// carries the other relation.
    QbafBuilder& add_edge(ArgumentId from, ArgumentId to, Relation kind);
    QbafBuilder& add_attack(ArgumentId from, ArgumentId to) {
        return add_edge(std::move(from), std::move(to), Relation::Attack);
    }
    QbafBuilder& add_support(ArgumentId from, ArgumentId to) {
        return add_edge(std::move(from), std::move(to), Relation::Support);
    }

    /// Throws InvalidFramework if an edge names an undeclared argument.
    Qbaf build() const;

private:
    struct PendingEdge {
        ArgumentId from;
        ArgumentId to;
        Relation kind;
    };

    std::vector<Argument> arguments_;
    std::vector<double> scores_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<PendingEdge> edges_;
    std::unordered_map<std::string, Relation> edge_kinds_;
};

/// A non-empty chain of edges; the target of each edge is the source of the next.
struct Path {
    std::vector<Edge> edges;

    std::size_t length() const noexcept { return edges.size(); }
    std::size_t attack_count() const noexcept;
};

/// Every simple path (no repeated argument, except that `from` may equal
/// `to` for a cycle) from `from` to `to`. Throws UnknownArgument.
std::vector<Path> paths(const Qbaf& q, const ArgumentId& from, const ArgumentId& to);

} // namespace argmerge

template <>
struct std::hash<argmerge::ArgumentId> {
    std::size_t operator()(const argmerge::ArgumentId& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
