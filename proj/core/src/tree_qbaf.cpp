#include "argmerge/tree_qbaf.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace argmerge {

namespace {

using Adjacency = std::vector<std::vector<std::size_t>>;

Adjacency out_adjacency(const Qbaf& q) {
    Adjacency out(q.size());
    for (const Link& l : q.links()) {
        out[l.from].push_back(l.to);
    }
    return out;
}

// Strongly connected components with more than one member (Kosaraju).
std::vector<std::vector<std::size_t>> cyclic_components(const Adjacency& out) {
    const std::size_t n = out.size();
    Adjacency in(n);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t w : out[v]) {
            in[w].push_back(v);
        }
    }

    std::vector<bool> seen(n, false);
    std::vector<std::size_t> finish;
    finish.reserve(n);
    for (std::size_t root = 0; root < n; ++root) {
        if (seen[root]) {
            continue;
        }
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        seen[root] = true;
        while (!stack.empty()) {
            auto& [v, next] = stack.back();
            if (next < out[v].size()) {
                std::size_t w = out[v][next++];
                if (!seen[w]) {
                    seen[w] = true;
                    stack.emplace_back(w, 0);
                }
            } else {
                finish.push_back(v);
                stack.pop_back();
            }
        }
    }

    std::vector<int> comp(n, -1);
    std::vector<std::vector<std::size_t>> result;
    int label = 0;
    for (auto it = finish.rbegin(); it != finish.rend(); ++it) {
        if (comp[*it] >= 0) {
            continue;
        }
        std::vector<std::size_t> members;
        std::vector<std::size_t> stack{*it};
        comp[*it] = label;
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            members.push_back(v);
            for (std::size_t w : in[v]) {
                if (comp[w] < 0) {
                    comp[w] = label;
                    stack.push_back(w);
                }
            }
        }
        ++label;
        if (members.size() > 1) {
            std::sort(members.begin(), members.end());
            result.push_back(std::move(members));
        }
    }
    return result;
}

// Number of paths from every argument to the target, saturated at 2.
std::vector<int> root_path_counts(const Adjacency& out, std::size_t target, bool acyclic) {
    const std::size_t n = out.size();
    std::vector<int> count(n, 0);

    if (acyclic) {
        std::vector<int> state(n, 0); // 0 new, 1 open, 2 done
        for (std::size_t root = 0; root < n; ++root) {
            if (state[root] != 0) {
                continue;
            }
            std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
            state[root] = 1;
            while (!stack.empty()) {
                auto& [v, next] = stack.back();
                if (next < out[v].size()) {
                    std::size_t w = out[v][next++];
                    if (w != target && state[w] == 0) {
                        state[w] = 1;
                        stack.emplace_back(w, 0);
                    }
                    continue;
                }
                int c = 0;
                for (std::size_t w : out[v]) {
                    c += (w == target) ? 1 : count[w];
                }
                count[v] = std::min(c, 2);
                state[v] = 2;
                stack.pop_back();
            }
        }
        return count;
    }

    // With cycles present, count simple paths directly, stopping at two.
    std::vector<bool> on_path(n, false);
    std::function<int(std::size_t, int)> walk = [&](std::size_t v, int found) {
        for (std::size_t w : out[v]) {
            if (found >= 2) {
                break;
            }
            if (w == target) {
                ++found;
                continue;
            }
            if (on_path[w]) {
                continue;
            }
            on_path[w] = true;
            found = walk(w, found);
            on_path[w] = false;
        }
        return found;
    };
    for (std::size_t v = 0; v < n; ++v) {
        if (v == target) {
            continue;
        }
        on_path[v] = true;
        count[v] = walk(v, 0);
        on_path[v] = false;
    }
    return count;
}

} // namespace

bool TreeReport::violates(int condition) const noexcept {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const TreeViolation& v) { return v.condition == condition; });
}

std::string TreeReport::summary() const {
    if (ok()) {
        return "ok";
    }
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i > 0) {
            os << "; ";
        }
        os << "(" << violations[i].condition << ") " << violations[i].message;
    }
    return os.str();
}

TreeReport validate_tree(const Qbaf& q, const ArgumentId& claim) {
    const std::size_t root = q.index_of(claim);
    const auto args = q.arguments();
    const Adjacency out = out_adjacency(q);
    TreeReport report;

    if (!out[root].empty()) {
        TreeViolation v{1, {claim}, {}};
        std::string targets;
        for (std::size_t w : out[root]) {
            v.arguments.push_back(args[w].id);
            targets += (targets.empty() ? "" : ", ") + args[w].id.str();
        }
        v.message = "claim '" + claim.str() + "' has outgoing edges to " + targets;
        report.violations.push_back(std::move(v));
    }

    const auto cycles = cyclic_components(out);
    for (const auto& members : cycles) {
        TreeViolation v{3, {}, {}};
        std::string names;
        for (std::size_t m : members) {
            v.arguments.push_back(args[m].id);
            names += (names.empty() ? "" : ", ") + args[m].id.str();
        }
        v.message = "cycle through {" + names + "}";
        report.violations.push_back(std::move(v));
    }

    const auto counts = root_path_counts(out, root, cycles.empty());
    for (std::size_t v = 0; v < q.size(); ++v) {
        if (v == root || counts[v] == 1) {
            continue;
        }
        std::string msg = "'" + args[v].id.str() + "' has " +
                          (counts[v] == 0 ? std::string("no path") : std::string("more than one path")) +
                          " to the claim";
        report.violations.push_back(TreeViolation{2, {args[v].id}, std::move(msg)});
    }
    return report;
}

std::string_view to_string(Stance s) noexcept {
    return s == Stance::Pro ? "pro" : "con";
}

TreeQbaf TreeQbaf::make(Qbaf q, const ArgumentId& claim) {
    TreeReport report = validate_tree(q, claim);
    if (!report.ok()) {
        throw InvalidTree(std::move(report));
    }

    TreeQbaf t;
    const std::size_t n = q.size();
    t.claim_ = q.index_of(claim);
    t.parent_.assign(n, std::nullopt);
    t.relation_.assign(n, Relation::Support);
    t.depth_.assign(n, 0);
    t.attackers_.assign(n, {});
    t.supporters_.assign(n, {});

    for (const Link& l : q.links()) {
        t.parent_[l.from] = l.to;
        t.relation_[l.from] = l.kind;
        (l.kind == Relation::Attack ? t.attackers_ : t.supporters_)[l.to].push_back(l.from);
    }

    t.layers_.push_back({t.claim_});
    while (true) {
        std::vector<std::size_t> next;
        for (std::size_t v : t.layers_.back()) {
            for (std::size_t c : t.attackers_[v]) {
                next.push_back(c);
            }
            for (std::size_t c : t.supporters_[v]) {
                next.push_back(c);
            }
        }
        if (next.empty()) {
            break;
        }
        std::sort(next.begin(), next.end());
        for (std::size_t c : next) {
            t.depth_[c] = t.layers_.size();
        }
        t.layers_.push_back(std::move(next));
    }
    t.max_depth_ = t.layers_.size() - 1;
    t.qbaf_ = std::move(q);
    return t;
}

std::optional<std::size_t> TreeQbaf::parent(std::size_t index) const {
    return parent_.at(index);
}

Children children(const TreeQbaf& q, const ArgumentId& parent) {
    const std::size_t p = q.qbaf().index_of(parent);
    const auto args = q.qbaf().arguments();
    Children c;
    for (std::size_t a : q.attackers(p)) {
        c.attackers.push_back(args[a].id);
    }
    for (std::size_t s : q.supporters(p)) {
        c.supporters.push_back(args[s].id);
    }
    return c;
}

std::map<ArgumentId, Stance> classify_pro_con(const TreeQbaf& q) {
    // Parents always sit one layer up, so a layer sweep sees them first.
    std::vector<Stance> stance(q.size(), Stance::Pro);
    for (const auto& layer : q.layers()) {
        for (std::size_t v : layer) {
            auto p = q.parent(v);
            if (!p) {
                continue;
            }
            bool flip = q.relation_to_parent(v) == Relation::Attack;
            Stance up = stance[*p];
            stance[v] = flip ? (up == Stance::Pro ? Stance::Con : Stance::Pro) : up;
        }
    }
    std::map<ArgumentId, Stance> out;
    const auto args = q.qbaf().arguments();
    for (std::size_t v = 0; v < q.size(); ++v) {
        out.emplace(args[v].id, stance[v]);
    }
    return out;
}

std::size_t depth(const TreeQbaf& q) {
    return q.max_depth();
}

} // namespace argmerge
