#include "argmerge/qbaf.hpp"

#include "argmerge/errors.hpp"

#include <cmath>
#include <functional>

namespace argmerge {

namespace {

std::string edge_key(const std::string& from, const std::string& to) {
    // Length prefix keeps ("ab","c") and ("a","bc") apart.
    return std::to_string(from.size()) + ':' + from + to;
}

} // namespace

ArgumentId::ArgumentId(std::string value) : value_(std::move(value)) {
    if (value_.empty()) {
        throw InvalidFramework("argument id must be non-empty");
    }
}

std::string_view to_string(Relation r) noexcept {
    return r == Relation::Attack ? "attack" : "support";
}

std::optional<std::size_t> Baf::find(const ArgumentId& id) const {
    auto it = index_.find(id.str());
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t Baf::index_of(const ArgumentId& id) const {
    auto found = find(id);
    if (!found) {
        throw UnknownArgument(id.str());
    }
    return *found;
}

std::optional<Relation> Baf::relation(const ArgumentId& from, const ArgumentId& to) const {
    auto f = find(from);
    auto t = find(to);
    if (!f || !t) {
        return std::nullopt;
    }
    for (const Link& l : links_) {
        if (l.from == *f && l.to == *t) {
            return l.kind;
        }
    }
    return std::nullopt;
}

std::vector<Edge> Baf::edges() const {
    std::vector<Edge> out;
    out.reserve(links_.size());
    for (const Link& l : links_) {
        out.push_back(Edge{arguments_[l.from].id, arguments_[l.to].id, l.kind});
    }
    return out;
}

std::vector<Edge> Baf::attacks() const {
    std::vector<Edge> out;
    for (const Link& l : links_) {
        if (l.kind == Relation::Attack) {
            out.push_back(Edge{arguments_[l.from].id, arguments_[l.to].id, l.kind});
        }
    }
    return out;
}

std::vector<Edge> Baf::supports() const {
    std::vector<Edge> out;
    for (const Link& l : links_) {
        if (l.kind == Relation::Support) {
            out.push_back(Edge{arguments_[l.from].id, arguments_[l.to].id, l.kind});
        }
    }
    return out;
}

QbafBuilder& QbafBuilder::add_argument(ArgumentId id, std::string text, double base_score) {
    if (!std::isfinite(base_score) || base_score < 0.0 || base_score > 1.0) {
        throw DomainError("base score of '" + id.str() + "' outside [0,1]: " +
                          std::to_string(base_score));
    }
    if (index_.contains(id.str())) {
        throw InvalidFramework("duplicate argument id '" + id.str() + "'");
    }
    index_.emplace(id.str(), arguments_.size());
    arguments_.push_back(Argument{std::move(id), std::move(text)});
    scores_.push_back(base_score);
    return *this;
}

QbafBuilder& QbafBuilder::add_edge(ArgumentId from, ArgumentId to, Relation kind) {
    if (from == to) {
        throw InvalidFramework("self-edge on '" + from.str() + "'");
    }
    auto key = edge_key(from.str(), to.str());
    auto [it, inserted] = edge_kinds_.emplace(key, kind);
    if (!inserted) {
        if (it->second != kind) {
            throw InvalidFramework("pair ('" + from.str() + "', '" + to.str() +
                                   "') is already a " + std::string(to_string(it->second)) +
                                   "; attacks and supports must be disjoint");
        }
        return *this;
    }
    edges_.push_back(PendingEdge{std::move(from), std::move(to), kind});
    return *this;
}

Qbaf QbafBuilder::build() const {
    Qbaf q;
    q.baf_.arguments_ = arguments_;
    q.baf_.index_ = index_;
    q.base_scores_ = scores_;
    q.baf_.links_.reserve(edges_.size());
    for (const auto& e : edges_) {
        auto f = index_.find(e.from.str());
        auto t = index_.find(e.to.str());
        if (f == index_.end()) {
            throw InvalidFramework("edge source '" + e.from.str() + "' is not a declared argument");
        }
        if (t == index_.end()) {
            throw InvalidFramework("edge target '" + e.to.str() + "' is not a declared argument");
        }
        q.baf_.links_.push_back(Link{f->second, t->second, e.kind});
    }
    return q;
}

std::size_t Path::attack_count() const noexcept {
    std::size_t n = 0;
    for (const auto& e : edges) {
        n += e.kind == Relation::Attack ? 1 : 0;
    }
    return n;
}

std::vector<Path> paths(const Qbaf& q, const ArgumentId& from, const ArgumentId& to) {
    const std::size_t source = q.index_of(from);
    const std::size_t target = q.index_of(to);

    std::vector<std::vector<const Link*>> out_links(q.size());
    for (const Link& l : q.links()) {
        out_links[l.from].push_back(&l);
    }

    std::vector<Path> result;
    std::vector<const Link*> stack;
    std::vector<bool> on_path(q.size(), false);
    const auto& args = q.arguments();

    std::function<void(std::size_t)> walk = [&](std::size_t node) {
        for (const Link* l : out_links[node]) {
            if (l->to == target) {
                Path p;
                for (const Link* s : stack) {
                    p.edges.push_back(Edge{args[s->from].id, args[s->to].id, s->kind});
                }
                p.edges.push_back(Edge{args[l->from].id, args[l->to].id, l->kind});
                result.push_back(std::move(p));
                continue;
            }
            if (on_path[l->to]) {
                continue;
            }
            on_path[l->to] = true;
            stack.push_back(l);
            walk(l->to);
            stack.pop_back();
            on_path[l->to] = false;
        }
    };

    on_path[source] = true;
    walk(source);
    return result;
}

} // namespace argmerge
