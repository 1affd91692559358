#include "argmerge/combinator.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace argmerge {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        if (rank_[a] < rank_[b]) {
            std::swap(a, b);
        }
        parent_[b] = a;
        if (rank_[a] == rank_[b]) {
            ++rank_[a];
        }
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned> rank_;
};

// One argument of the union of all inputs.
struct Node {
    std::size_t source;
    std::size_t local;
    std::size_t depth;
    std::optional<std::size_t> parent; // global index
    Relation relation;
};

bool canonical_less(const ProvenancedArgument& a, const ProvenancedArgument& b) {
    return a.source_index != b.source_index ? a.source_index < b.source_index : a.id < b.id;
}

} // namespace

std::optional<std::size_t> CombinedQbaf::cluster_of(std::size_t source, const ArgumentId& id) const {
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (const auto& m : clusters[c].members) {
            if (m.source_index == source && m.id == id) {
                return c;
            }
        }
    }
    return std::nullopt;
}

Qbaf CombinedQbaf::to_qbaf() const {
    QbafBuilder b;
    for (const auto& c : clusters) {
        b.add_argument(c.id, c.representative_text, c.aggregated_base_score);
    }
    for (const auto& e : attacks) {
        b.add_attack(clusters.at(e.from).id, clusters.at(e.to).id);
    }
    for (const auto& e : supports) {
        b.add_support(clusters.at(e.from).id, clusters.at(e.to).id);
    }
    return b.build();
}

TreeQbaf CombinedQbaf::to_tree() const {
    return TreeQbaf::make(to_qbaf(), claim().id);
}

CombinedQbaf combine(std::span<const TreeQbaf> inputs, Similarity& psi, const Aggregator& omega,
                     const CombineOptions& options) {
    if (inputs.size() < 2) {
        throw InvalidFramework("combining needs at least two frameworks, got " +
                               std::to_string(inputs.size()));
    }
    if (options.require_matching_claim_ids) {
        for (std::size_t i = 1; i < inputs.size(); ++i) {
            if (inputs[i].claim() != inputs[0].claim()) {
                throw ClaimMismatch("framework " + std::to_string(i) + " is for claim '" +
                                    inputs[i].claim().str() + "' but framework 0 is for '" +
                                    inputs[0].claim().str() + "'");
            }
        }
    }

    // Flatten X = union of X_i; global index order is (source, local index).
    std::vector<Node> nodes;
    std::vector<ProvenancedArgument> args;
    std::vector<std::size_t> offset(inputs.size());
    std::size_t max_depth = 0;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        const TreeQbaf& t = inputs[s];
        offset[s] = nodes.size();
        max_depth = std::max(max_depth, t.max_depth());
        for (std::size_t v = 0; v < t.size(); ++v) {
            const Argument& a = t.qbaf().arguments()[v];
            args.push_back(ProvenancedArgument{s, a.id, a.text, t.qbaf().base_score(v)});
            nodes.push_back(Node{s, v, t.depth_of(v), std::nullopt, Relation::Support});
        }
    }
    for (std::size_t g = 0; g < nodes.size(); ++g) {
        const TreeQbaf& t = inputs[nodes[g].source];
        if (auto p = t.parent(nodes[g].local)) {
            nodes[g].parent = offset[nodes[g].source] + *p;
            nodes[g].relation = t.relation_to_parent(nodes[g].local);
        }
    }

    DisjointSets sets(nodes.size());
    CombineStats stats;
    for (std::size_t s = 1; s < inputs.size(); ++s) {
        sets.unite(offset[0] + inputs[0].claim_index(), offset[s] + inputs[s].claim_index());
    }

    // Layer by layer; every node at depth d has its parent's cluster settled.
    std::vector<std::vector<std::size_t>> by_depth(max_depth + 1);
    for (std::size_t g = 0; g < nodes.size(); ++g) {
        by_depth[nodes[g].depth].push_back(g);
    }
    for (auto& layer : by_depth) {
        std::sort(layer.begin(), layer.end(), [&](std::size_t a, std::size_t b) {
            return canonical_less(args[a], args[b]);
        });
    }

    for (std::size_t d = 1; d <= max_depth; ++d) {
        ++stats.layers;
        const auto& layer = by_depth[d];

        std::vector<ArgumentRef> refs;
        refs.reserve(layer.size());
        for (std::size_t g : layer) {
            refs.push_back(args[g].ref());
        }
        psi.prepare(refs);

        // Group by (parent cluster, relation toward it). Members keep canonical order.
        std::map<std::pair<std::size_t, Relation>, std::vector<std::size_t>> groups;
        for (std::size_t g : layer) {
            groups[{sets.find(*nodes[g].parent), nodes[g].relation}].push_back(g);
        }
        for (const auto& [key, members] : groups) {
            for (std::size_t i = 0; i < members.size(); ++i) {
                for (std::size_t j = i + 1; j < members.size(); ++j) {
                    ++stats.similarity_comparisons;
                    const auto& x = args[members[i]];
                    const auto& y = args[members[j]];
                    if (psi(x.ref(), y.ref()) >= psi.threshold()) {
                        stats.merges += sets.unite(members[i], members[j]) ? 1 : 0;
                    }
                }
            }
        }
    }

    // Materialize clusters: ordered by depth, then by first member.
    std::map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t g = 0; g < nodes.size(); ++g) {
        components[sets.find(g)].push_back(g);
    }
    struct Pending {
        std::size_t depth;
        std::vector<std::size_t> members;
    };
    std::vector<Pending> pending;
    pending.reserve(components.size());
    for (auto& [root, members] : components) {
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return canonical_less(args[a], args[b]);
        });
        pending.push_back(Pending{nodes[members.front()].depth, std::move(members)});
    }
    std::sort(pending.begin(), pending.end(), [&](const Pending& a, const Pending& b) {
        if (a.depth != b.depth) {
            return a.depth < b.depth;
        }
        return canonical_less(args[a.members.front()], args[b.members.front()]);
    });

    CombinedQbaf out;
    out.provenance = CombineProvenance{inputs.size(), psi.threshold(), omega.name(), psi.provider_id()};
    std::vector<std::size_t> cluster_index(nodes.size());
    for (std::size_t c = 0; c < pending.size(); ++c) {
        Cluster cluster{ArgumentId("x" + std::to_string(c + 1)), {}, 0.0, {}};
        std::vector<double> scores;
        for (std::size_t g : pending[c].members) {
            cluster_index[g] = c;
            cluster.members.push_back(args[g]);
            scores.push_back(args[g].base_score);
        }
        cluster.aggregated_base_score = omega(scores);
        cluster.representative_text = cluster.members.front().text;
        out.clusters.push_back(std::move(cluster));
    }
    out.claim_cluster = cluster_index[offset[0] + inputs[0].claim_index()];

    // Lift member edges to cluster edges.
    std::map<ClusterEdge, std::pair<Relation, std::size_t>> lifted; // -> kind, witness node
    for (std::size_t g = 0; g < nodes.size(); ++g) {
        if (!nodes[g].parent) {
            continue;
        }
        const ClusterEdge e{cluster_index[g], cluster_index[*nodes[g].parent]};
        auto [it, inserted] = lifted.emplace(e, std::pair{nodes[g].relation, g});
        if (!inserted && it->second.first != nodes[g].relation) {
            const auto& a = args[it->second.second];
            const auto& b = args[g];
            std::ostringstream os;
            os << "clusters " << out.clusters[e.from].id.str() << " -> " << out.clusters[e.to].id.str()
               << " lifted as both " << to_string(it->second.first) << " (from argument '"
               << a.id.str() << "' of framework " << a.source_index << ") and "
               << to_string(nodes[g].relation) << " (from argument '" << b.id.str()
               << "' of framework " << b.source_index << ")";
            throw RelationConflict(os.str());
        }
    }
    for (const auto& [edge, kind] : lifted) {
        (kind.first == Relation::Attack ? out.attacks : out.supports).push_back(edge);
    }
    out.stats = stats;
    return out;
}

CombinedQbaf combine(std::span<const TreeQbaf> inputs, const SimilarityConfig& config,
                     AggregatorKind aggregator, const CombineOptions& options) {
    auto psi = make_similarity(config);
    return combine(inputs, *psi, Aggregator(aggregator), options);
}

} // namespace argmerge
