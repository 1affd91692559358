#include "argmerge/combinator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace argmerge {

std::size_t CombinedReport::failures() const noexcept {
    return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [](const auto& f) {
        return f.severity == Severity::Failure;
    }));
}

std::size_t CombinedReport::warnings() const noexcept {
    return findings.size() - failures();
}

bool CombinedReport::has(std::string_view check, Severity severity) const {
    return std::any_of(findings.begin(), findings.end(), [&](const auto& f) {
        return f.check == check && f.severity == severity;
    });
}

std::string CombinedReport::summary() const {
    if (findings.empty()) {
        return "all checks passed";
    }
    std::ostringstream os;
    os << failures() << " failure(s), " << warnings() << " warning(s)";
    for (const auto& f : findings) {
        os << "\n  [" << (f.severity == Severity::Failure ? "FAIL" : "warn") << "] " << f.check
           << ": " << f.message;
    }
    return os.str();
}

namespace {

using MemberKey = std::pair<std::size_t, std::string>; // (source, id)

std::string show(const MemberKey& k) {
    return std::to_string(k.first) + ":" + k.second;
}

class Checker {
public:
    Checker(std::span<const TreeQbaf> inputs, const CombinedQbaf& out, Similarity& psi,
            const Aggregator& omega, double tolerance)
        : in_(inputs), out_(out), psi_(psi), omega_(omega), tol_(tolerance) {}

    CombinedReport run() {
        check_provenance();
        if (!check_shape()) {
            return std::move(report_);
        }
        check_partition();
        check_claim_cluster();
        check_base_scores();
        check_lifting();
        check_tree_and_stance();
        if (partition_ok_) {
            check_grouping_and_merges();
        }
        return std::move(report_);
    }

private:
    void fail(std::string check, std::string message) {
        report_.findings.push_back({std::move(check), Severity::Failure, std::move(message)});
    }
    void warn(std::string check, std::string message) {
        report_.findings.push_back({std::move(check), Severity::Warning, std::move(message)});
    }

    const std::string& cid(std::size_t c) const { return out_.clusters[c].id.str(); }

    void check_provenance() {
        const auto& p = out_.provenance;
        if (p.input_count != in_.size()) {
            fail("provenance", "records " + std::to_string(p.input_count) + " inputs, got " +
                                   std::to_string(in_.size()));
        }
        if (p.threshold != psi_.threshold()) {
            fail("provenance", "records threshold " + std::to_string(p.threshold) + ", similarity uses " +
                                   std::to_string(psi_.threshold()));
        }
        if (p.aggregator != omega_.name()) {
            fail("provenance", "records aggregator '" + p.aggregator + "', expected '" + omega_.name() + "'");
        }
        if (p.provider != psi_.provider_id()) {
            fail("provenance", "records provider '" + p.provider + "', expected '" + psi_.provider_id() + "'");
        }
    }

    // Index sanity; later checks rely on it.
    bool check_shape() {
        bool ok = true;
        const std::size_t n = out_.clusters.size();
        if (out_.claim_cluster >= n) {
            fail("qbaf", "claim cluster index " + std::to_string(out_.claim_cluster) + " out of range");
            ok = false;
        }
        for (const auto* edges : {&out_.attacks, &out_.supports}) {
            for (const auto& e : *edges) {
                if (e.from >= n || e.to >= n) {
                    fail("qbaf", "edge (" + std::to_string(e.from) + ", " + std::to_string(e.to) +
                                     ") names a missing cluster");
                    ok = false;
                }
            }
        }
        std::set<std::string> ids;
        for (const auto& c : out_.clusters) {
            if (!ids.insert(c.id.str()).second) {
                fail("qbaf", "duplicate cluster id " + c.id.str());
            }
            if (c.members.empty()) {
                fail("partition", "cluster " + c.id.str() + " has no members");
            }
            if (!std::isfinite(c.aggregated_base_score) || c.aggregated_base_score < 0.0 ||
                c.aggregated_base_score > 1.0) {
                fail("qbaf", "cluster " + c.id.str() + " base score outside [0,1]");
            }
        }
        return ok;
    }

    void check_partition() {
        std::map<MemberKey, std::vector<std::size_t>> seen;
        for (std::size_t c = 0; c < out_.clusters.size(); ++c) {
            for (const auto& m : out_.clusters[c].members) {
                const MemberKey key{m.source_index, m.id.str()};
                seen[key].push_back(c);
                if (m.source_index >= in_.size() || !in_[m.source_index].qbaf().contains(m.id)) {
                    fail("provenance", "cluster " + cid(c) + " member " + show(key) +
                                           " does not exist in the inputs");
                    partition_ok_ = false;
                    continue;
                }
                const auto& q = in_[m.source_index].qbaf();
                if (m.base_score != q.base_score(m.id)) {
                    fail("provenance", "member " + show(key) + " carries base score " +
                                           std::to_string(m.base_score) + ", source has " +
                                           std::to_string(q.base_score(m.id)));
                }
                if (m.text != q.arguments()[q.index_of(m.id)].text) {
                    fail("provenance", "member " + show(key) + " text differs from its source");
                }
            }
        }
        for (std::size_t s = 0; s < in_.size(); ++s) {
            for (const auto& a : in_[s].qbaf().arguments()) {
                const MemberKey key{s, a.id.str()};
                auto it = seen.find(key);
                if (it == seen.end()) {
                    fail("partition", "argument " + show(key) + " is in no cluster");
                    partition_ok_ = false;
                } else if (it->second.size() > 1) {
                    std::string where;
                    for (std::size_t c : it->second) {
                        where += (where.empty() ? "" : ", ") + cid(c);
                    }
                    fail("partition", "argument " + show(key) + " is in several clusters: " + where);
                    partition_ok_ = false;
                } else {
                    owner_[key] = it->second.front();
                }
            }
        }
    }

    std::optional<std::size_t> owner(std::size_t source, const ArgumentId& id) const {
        auto it = owner_.find({source, id.str()});
        if (it == owner_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    void check_claim_cluster() {
        const auto& claim = out_.clusters[out_.claim_cluster];
        for (std::size_t s = 0; s < in_.size(); ++s) {
            auto o = owner(s, in_[s].claim());
            if (!o || *o != out_.claim_cluster) {
                fail("claim-cluster", "claim " + show({s, in_[s].claim().str()}) + " is not in claim cluster " +
                                          claim.id.str());
            }
        }
        for (const auto& m : claim.members) {
            if (m.source_index < in_.size() && m.id != in_[m.source_index].claim()) {
                fail("claim-cluster", "claim cluster contains non-claim argument " +
                                          show({m.source_index, m.id.str()}));
            }
        }
    }

    void check_base_scores() {
        for (const auto& c : out_.clusters) {
            if (c.members.empty()) {
                continue;
            }
            std::vector<double> scores;
            for (const auto& m : c.members) {
                scores.push_back(m.base_score);
            }
            const double expected = omega_(scores);
            if (std::abs(expected - c.aggregated_base_score) > tol_) {
                std::ostringstream os;
                os.precision(17);
                os << "cluster " << c.id.str() << " has base score " << c.aggregated_base_score << ", "
                   << omega_.name() << " of its members is " << expected;
                fail("base-score", os.str());
            }
        }
    }

    void check_lifting() {
        std::set<std::pair<std::size_t, std::size_t>> lifted[2];
        for (const auto& e : out_.attacks) {
            lifted[0].insert({e.from, e.to});
        }
        for (const auto& e : out_.supports) {
            lifted[1].insert({e.from, e.to});
        }
        for (const auto& pair : lifted[0]) {
            if (lifted[1].contains(pair)) {
                fail("qbaf", "(" + cid(pair.first) + ", " + cid(pair.second) +
                                 ") is both an attack and a support");
            }
        }
        if (lifted[0].size() != out_.attacks.size() || lifted[1].size() != out_.supports.size()) {
            fail("qbaf", "duplicate lifted edges");
        }

        // Source edges grouped by the cluster pair they land on.
        std::map<std::pair<std::size_t, std::size_t>, MemberKey> witnesses[2];
        for (std::size_t s = 0; s < in_.size(); ++s) {
            const auto& q = in_[s].qbaf();
            for (const auto& link : q.links()) {
                const auto& x = q.arguments()[link.from].id;
                const auto& y = q.arguments()[link.to].id;
                auto cx = owner(s, x);
                auto cy = owner(s, y);
                if (!cx || !cy) {
                    continue;
                }
                const int k = link.kind == Relation::Attack ? 0 : 1;
                witnesses[k].try_emplace({*cx, *cy}, MemberKey{s, x.str() + " -> " + y.str()});
                if (!lifted[k].contains({*cx, *cy})) {
                    fail("lifting-complete", std::string(to_string(link.kind)) + " " +
                                                 show({s, x.str()}) + " -> " + y.str() + " has no lifted " +
                                                 std::string(to_string(link.kind)) + " (" + cid(*cx) +
                                                 ", " + cid(*cy) + ")");
                }
            }
        }
        for (int k = 0; k < 2; ++k) {
            for (const auto& pair : lifted[k]) {
                if (!witnesses[k].contains(pair)) {
                    fail("lifting-sound", std::string(k == 0 ? "attack" : "support") + " (" +
                                              cid(pair.first) + ", " + cid(pair.second) +
                                              ") has no member-level edge behind it");
                }
            }
        }
    }

    void check_tree_and_stance() {
        // Build the cluster framework directly from the output's fields.
        QbafBuilder b;
        try {
            for (const auto& c : out_.clusters) {
                b.add_argument(c.id, c.representative_text,
                               std::clamp(c.aggregated_base_score, 0.0, 1.0));
            }
            for (const auto& e : out_.attacks) {
                b.add_attack(out_.clusters[e.from].id, out_.clusters[e.to].id);
            }
            for (const auto& e : out_.supports) {
                b.add_support(out_.clusters[e.from].id, out_.clusters[e.to].id);
            }
        } catch (const Error& e) {
            fail("qbaf", e.what());
            return;
        }
        const Qbaf q = b.build();
        const ArgumentId& root = out_.clusters[out_.claim_cluster].id;
        const TreeReport tree = validate_tree(q, root);
        if (!tree.ok()) {
            fail("tree", tree.summary());
            return;
        }
        if (!partition_ok_) {
            return;
        }

        // Cluster stance by walking each cluster's unique out-edge to the root.
        std::vector<std::optional<Stance>> cluster_stance(out_.clusters.size());
        std::map<std::size_t, std::pair<std::size_t, bool>> out_edge; // from -> (to, attack)
        for (const auto& e : out_.attacks) {
            out_edge[e.from] = {e.to, true};
        }
        for (const auto& e : out_.supports) {
            out_edge[e.from] = {e.to, false};
        }
        for (std::size_t c = 0; c < out_.clusters.size(); ++c) {
            std::size_t at = c;
            std::size_t attacks = 0;
            for (std::size_t steps = 0; at != out_.claim_cluster && steps <= out_.clusters.size(); ++steps) {
                auto it = out_edge.find(at);
                if (it == out_edge.end()) {
                    break;
                }
                attacks += it->second.second ? 1 : 0;
                at = it->second.first;
            }
            if (at == out_.claim_cluster) {
                cluster_stance[c] = attacks % 2 == 0 ? Stance::Pro : Stance::Con;
            }
        }

        std::vector<std::map<ArgumentId, Stance>> source_stance;
        for (const auto& t : in_) {
            source_stance.push_back(classify_pro_con(t));
        }
        for (std::size_t c = 0; c < out_.clusters.size(); ++c) {
            if (!cluster_stance[c]) {
                fail("stance", "cluster " + cid(c) + " has no path to the claim cluster");
                continue;
            }
            bool some[2] = {false, false};
            for (const auto& m : out_.clusters[c].members) {
                const Stance s = source_stance[m.source_index].at(m.id);
                some[s == Stance::Pro ? 0 : 1] = true;
                if (s != *cluster_stance[c]) {
                    fail("stance", "member " + show({m.source_index, m.id.str()}) + " is " +
                                       std::string(to_string(s)) + " in its source but cluster " +
                                       cid(c) + " is " + std::string(to_string(*cluster_stance[c])));
                }
            }
            const bool pro = *cluster_stance[c] == Stance::Pro;
            if (!some[pro ? 0 : 1]) {
                fail("stance", "cluster " + cid(c) + " is " + std::string(to_string(*cluster_stance[c])) +
                                   " but no member is");
            }
        }
    }

    // Same-cluster members share a parent cluster and
    // relation, and no two similar candidates are left apart.
    void check_grouping_and_merges() {
        struct Info {
            std::size_t cluster;
            std::optional<std::size_t> parent_cluster;
            Relation relation = Relation::Support;
            ArgumentRef ref;
        };
        std::vector<Info> all;
        for (std::size_t s = 0; s < in_.size(); ++s) {
            const TreeQbaf& t = in_[s];
            for (std::size_t v = 0; v < t.size(); ++v) {
                const Argument& a = t.qbaf().arguments()[v];
                Info info{*owner(s, a.id), std::nullopt, Relation::Support,
                          ArgumentRef{s, a.id.str(), a.text}};
                // The parent is the unique out-neighbour in the source graph.
                for (const auto& link : t.qbaf().links()) {
                    if (link.from == v) {
                        info.parent_cluster = *owner(s, t.qbaf().arguments()[link.to].id);
                        info.relation = link.kind;
                    }
                }
                all.push_back(info);
            }
        }

        std::map<std::size_t, std::vector<std::size_t>> by_cluster;
        for (std::size_t i = 0; i < all.size(); ++i) {
            by_cluster[all[i].cluster].push_back(i);
        }
        const auto key = [](const Info& x) {
            return show({x.ref.source, std::string(x.ref.id)});
        };

        for (const auto& [c, members] : by_cluster) {
            if (c == out_.claim_cluster) {
                continue;
            }
            const Info& first = all[members.front()];
            bool grouped = true;
            for (std::size_t i : members) {
                const Info& x = all[i];
                if (x.parent_cluster != first.parent_cluster || x.relation != first.relation) {
                    fail("grouping", "cluster " + cid(c) + " mixes " + key(first) + " and " + key(x) +
                                         " whose parents or relations differ");
                    grouped = false;
                    break;
                }
            }
            if (!grouped || members.size() < 2) {
                continue;
            }
            // Members must be linked by a chain of >= threshold pairs; a
            // direct pair below threshold inside such a chain is the
            // transitive-closure deviation.
            std::vector<std::size_t> comp(members.size());
            for (std::size_t i = 0; i < comp.size(); ++i) {
                comp[i] = i;
            }
            const auto find = [&](std::size_t x) {
                while (comp[x] != x) {
                    x = comp[x];
                }
                return x;
            };
            std::vector<std::pair<std::size_t, std::size_t>> below;
            for (std::size_t i = 0; i < members.size(); ++i) {
                for (std::size_t j = i + 1; j < members.size(); ++j) {
                    if (psi_(all[members[i]].ref, all[members[j]].ref) >= psi_.threshold()) {
                        comp[find(i)] = find(j);
                    } else {
                        below.push_back({i, j});
                    }
                }
            }
            bool connected = true;
            for (std::size_t i = 1; i < members.size(); ++i) {
                if (find(i) != find(0)) {
                    connected = false;
                    fail("grouping", "cluster " + cid(c) + " joins " + key(all[members[0]]) + " and " +
                                         key(all[members[i]]) + " with no chain of similar pairs");
                }
            }
            if (connected) {
                for (const auto& [i, j] : below) {
                    std::ostringstream os;
                    os << "cluster " << cid(c) << " holds " << key(all[members[i]]) << " and "
                       << key(all[members[j]]) << " with similarity "
                       << psi_(all[members[i]].ref, all[members[j]].ref) << " < " << psi_.threshold();
                    warn("iff-deviation", os.str());
                }
            }
        }

        // Candidates (same parent cluster, same relation) that are similar
        // must share a cluster.
        std::map<std::pair<std::size_t, Relation>, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (all[i].parent_cluster) {
                groups[{*all[i].parent_cluster, all[i].relation}].push_back(i);
            }
        }
        for (const auto& [g, idx] : groups) {
            for (std::size_t i = 0; i < idx.size(); ++i) {
                for (std::size_t j = i + 1; j < idx.size(); ++j) {
                    const Info& x = all[idx[i]];
                    const Info& y = all[idx[j]];
                    if (x.cluster != y.cluster && psi_(x.ref, y.ref) >= psi_.threshold()) {
                        fail("missed-merge", key(x) + " (" + cid(x.cluster) + ") and " + key(y) + " (" +
                                                 cid(y.cluster) + ") share parent cluster and relation "
                                                 "and are similar but were not merged");
                    }
                }
            }
        }
    }

    std::span<const TreeQbaf> in_;
    const CombinedQbaf& out_;
    Similarity& psi_;
    const Aggregator& omega_;
    double tol_;
    CombinedReport report_;
    bool partition_ok_ = true;
    std::map<MemberKey, std::size_t> owner_;
};

} // namespace

CombinedReport validate_combined(std::span<const TreeQbaf> inputs, const CombinedQbaf& output,
                                 Similarity& psi, const Aggregator& omega, double tolerance) {
    return Checker(inputs, output, psi, omega, tolerance).run();
}

} // namespace argmerge
