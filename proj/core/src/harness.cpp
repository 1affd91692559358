#include "argmerge/harness.hpp"

#include "argmerge/combinator.hpp"
#include "argmerge/errors.hpp"
#include "argmerge/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <future>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

namespace argmerge {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json parse_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string() + ": malformed JSON (" + e.what() + ")");
    }
}

std::filesystem::path relative_to(const std::filesystem::path& base_file, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_file.parent_path() / path;
}

} // namespace

std::string_view to_string(BaseScoreMode mode) noexcept {
    return mode == BaseScoreMode::Fixed ? "fixed-0.5" : "estimated";
}

std::optional<BaseScoreMode> parse_base_score_mode(std::string_view text) {
    if (text == "fixed-0.5" || text == "fixed" || text == "0.5") {
        return BaseScoreMode::Fixed;
    }
    if (text == "estimated" || text == "est") {
        return BaseScoreMode::Estimated;
    }
    return std::nullopt;
}

std::vector<LabeledClaim> load_dataset(const std::filesystem::path& path) {
    const json doc = parse_file(path);
    const json& list = doc.is_object() && doc.contains("claims") ? doc.at("claims") : doc;
    if (!list.is_array()) {
        throw SchemaError(path.string() + ": expected a list of claims");
    }
    std::vector<LabeledClaim> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string where = path.string() + ": claims[" + std::to_string(i) + "]";
        try {
            const json& c = list[i];
            LabeledClaim claim;
            claim.claim_id = c.at("claim_id").get<std::string>();
            claim.text = c.value("text", std::string{});
            claim.closing_date = parse_date(c.at("closing_date").get<std::string>());
            claim.gold_label = c.at("gold").get<bool>();
            claim.queries = c.value("queries", std::vector<std::string>{});
            if (!seen.insert(claim.claim_id).second) {
                throw SchemaError("duplicate claim_id '" + claim.claim_id + "'");
            }
            out.push_back(std::move(claim));
        } catch (const json::exception& e) {
            throw SchemaError(where + ": " + e.what());
        } catch (const SchemaError& e) {
            throw SchemaError(where + ": " + e.what());
        }
    }
    return out;
}

AgentRun load_agent_run(const std::filesystem::path& path) {
    const json doc = parse_file(path);
    AgentRun run;
    try {
        run.agent_name = doc.at("agent").get<std::string>();
        run.depth = doc.value("depth", 1);
        const std::string mode = doc.value("base_score_mode", std::string("fixed-0.5"));
        auto parsed = parse_base_score_mode(mode);
        if (!parsed) {
            throw SchemaError(path.string() + ": unknown base_score_mode '" + mode + "'");
        }
        run.mode = *parsed;
        for (const auto& [claim_id, q] : doc.at("frameworks").items()) {
            const std::string origin = path.string() + ": frameworks." + claim_id;
            QbafDocument parsed_q = q.is_string() ? read_qbaf_document(relative_to(path, q.get<std::string>()))
                                                  : parse_qbaf(q.dump(), origin);
            run.frameworks.emplace(claim_id, TreeQbaf::make(std::move(parsed_q.qbaf), parsed_q.claim));
        }
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    return run;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    const json doc = parse_file(path);
    ExperimentSpec spec;
    try {
        spec.claims = load_dataset(relative_to(path, doc.at("dataset").get<std::string>()));
        for (const auto& a : doc.at("agents")) {
            AgentEntry entry;
            entry.name = a.at("name").get<std::string>();
            for (const auto& [mode_name, file] : a.at("runs").items()) {
                auto mode = parse_base_score_mode(mode_name);
                if (!mode) {
                    throw SchemaError(path.string() + ": agent '" + entry.name + "' has unknown run mode '" +
                                      mode_name + "'");
                }
                AgentRun run = load_agent_run(relative_to(path, file.get<std::string>()));
                run.agent_name = entry.name;
                run.mode = *mode;
                entry.runs.emplace(*mode, std::move(run));
            }
            spec.agents.push_back(std::move(entry));
        }
        spec.delta = doc.value("delta", spec.delta);
        if (doc.contains("aggregators")) {
            spec.aggregators.clear();
            for (const auto& name : doc.at("aggregators")) {
                auto kind = parse_aggregator_kind(name.get<std::string>());
                if (!kind) {
                    throw SchemaError(path.string() + ": unknown aggregator " + name.dump());
                }
                spec.aggregators.push_back(*kind);
            }
        }
        spec.decision_threshold = doc.value("threshold", spec.decision_threshold);
        spec.claim_filter = doc.value("claims", std::vector<std::string>{});
        spec.provider = doc.value("provider", spec.provider);
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    return spec;
}

int AccuracyResult::rounded_percent() const noexcept {
    if (total == 0) {
        return 0;
    }
    // floor(100 c / t + 1/2) without floating point.
    return static_cast<int>((200 * correct + total) / (2 * total));
}

AccuracyResult accuracy(const std::map<std::string, Verdict>& predictions,
                        const std::vector<LabeledClaim>& gold) {
    std::vector<std::string> missing;
    for (const auto& c : gold) {
        if (!predictions.contains(c.claim_id)) {
            missing.push_back(c.claim_id);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& id : missing) {
            list += (list.empty() ? "" : ", ") + id;
        }
        throw MissingPrediction("no prediction for claim(s): " + list, missing);
    }
    AccuracyResult r;
    for (const auto& c : gold) {
        const bool hit = predictions.at(c.claim_id).accepted() == c.gold_label;
        LabelCounts& bucket = c.gold_label ? r.gold_true : r.gold_false;
        ++bucket.total;
        ++r.total;
        if (hit) {
            ++bucket.correct;
            ++r.correct;
        }
    }
    return r;
}

std::map<std::string, Verdict> predict(const AgentRun& run, double threshold) {
    std::map<std::string, Verdict> out;
    for (const auto& [claim_id, q] : run.frameworks) {
        out.emplace(claim_id, verdict(evaluate_strengths(q), q.claim(), threshold));
    }
    return out;
}

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) {
            out += sep;
        }
        out += p;
    }
    return out;
}

// Applies `fn` to every index in [0, n) on up to `width` threads; results
// land in index order.
template <class Fn>
auto parallel_map(std::size_t n, std::size_t width, Fn fn) {
    using R = decltype(fn(std::size_t{0}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::future<void>> workers;
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            slots[i].emplace(fn(i));
        }
    };
    for (std::size_t t = 1; t < width; ++t) {
        workers.push_back(std::async(std::launch::async, work));
    }
    std::exception_ptr failure;
    try {
        work();
    } catch (...) {
        failure = std::current_exception();
        next = n;
    }
    for (auto& w : workers) {
        try {
            w.get();
        } catch (...) {
            if (!failure) {
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.agents.size() < 2) {
        throw Error("an experiment needs at least two agents, got " + std::to_string(spec.agents.size()));
    }
    if (spec.aggregators.empty()) {
        throw Error("an experiment needs at least one aggregator");
    }

    const std::set<std::string> filter(spec.claim_filter.begin(), spec.claim_filter.end());
    const auto selected = [&](const std::string& id) { return filter.empty() || filter.contains(id); };

    std::vector<LabeledClaim> gold;
    for (const auto& c : spec.claims) {
        if (selected(c.claim_id)) {
            gold.push_back(c);
        }
    }

    // Every run must cover the same claims.
    std::optional<std::set<std::string>> reference;
    std::string reference_name;
    for (const auto& agent : spec.agents) {
        if (agent.runs.empty()) {
            throw Error("agent '" + agent.name + "' has no runs");
        }
        for (const auto& [mode, run] : agent.runs) {
            std::set<std::string> ids;
            for (const auto& [id, q] : run.frameworks) {
                if (selected(id)) {
                    ids.insert(id);
                }
            }
            const std::string name = agent.name + "/" + std::string(to_string(mode));
            if (!reference) {
                reference = std::move(ids);
                reference_name = name;
                continue;
            }
            std::vector<std::string> diff;
            std::set_symmetric_difference(reference->begin(), reference->end(), ids.begin(), ids.end(),
                                          std::back_inserter(diff));
            if (!diff.empty()) {
                throw ClaimSetMismatch("runs " + reference_name + " and " + name +
                                           " cover different claims: " + join(diff, ", "),
                                       diff);
            }
        }
    }

    ExperimentResult result;
    for (auto kind : spec.aggregators) {
        result.aggregators.emplace_back(to_string(kind));
    }

    for (const auto& agent : spec.agents) {
        ResultRow row{agent.name, {agent.name}, false, {}};
        for (const auto& [mode, run] : agent.runs) {
            const auto acc = accuracy(predict(run, spec.decision_threshold), gold);
            for (const auto& agg : result.aggregators) {
                row.cells[agg][mode] = acc;
            }
        }
        result.rows.push_back(std::move(row));
    }

    SimilarityConfig config;
    config.threshold = spec.delta;
    config.provider = spec.provider;
    const auto scorer = make_pair_scorer(config);
    const std::size_t width =
        spec.parallelism != 0 ? spec.parallelism : std::max(1u, std::thread::hardware_concurrency());

    ResultRow combined;
    for (const auto& agent : spec.agents) {
        combined.agents.push_back(agent.name);
    }
    combined.label = join(combined.agents, "+");
    combined.combined = true;
    for (BaseScoreMode mode : {BaseScoreMode::Fixed, BaseScoreMode::Estimated}) {
        const bool available = std::all_of(spec.agents.begin(), spec.agents.end(),
                                           [&](const AgentEntry& a) { return a.runs.contains(mode); });
        if (!available) {
            continue;
        }
        for (AggregatorKind kind : spec.aggregators) {
            const Aggregator omega(kind);
            const auto verdicts = parallel_map(gold.size(), width, [&](std::size_t i) {
                const std::string& claim_id = gold[i].claim_id;
                std::vector<TreeQbaf> inputs;
                for (const auto& agent : spec.agents) {
                    const auto& frameworks = agent.runs.at(mode).frameworks;
                    auto it = frameworks.find(claim_id);
                    if (it == frameworks.end()) {
                        return std::optional<Verdict>{};
                    }
                    inputs.push_back(it->second);
                }
                Similarity psi(scorer, spec.delta);
                const CombinedQbaf merged = combine(inputs, psi, omega, CombineOptions{false});
                const TreeQbaf tree = merged.to_tree();
                return std::optional<Verdict>{verdict(evaluate_strengths(tree), tree.claim(),
                                                      spec.decision_threshold)};
            });
            std::map<std::string, Verdict> predictions;
            for (std::size_t i = 0; i < gold.size(); ++i) {
                if (verdicts[i]) {
                    predictions.emplace(gold[i].claim_id, *verdicts[i]);
                }
            }
            combined.cells[std::string(to_string(kind))][mode] = accuracy(predictions, gold);
        }
    }
    result.rows.push_back(std::move(combined));
    return result;
}

std::string ExperimentResult::render_table() const {
    const auto cell = [](const std::map<BaseScoreMode, AccuracyResult>& m) {
        const auto part = [&](BaseScoreMode mode) {
            auto it = m.find(mode);
            return it == m.end() ? std::string("-") : std::to_string(it->second.rounded_percent());
        };
        return part(BaseScoreMode::Fixed) + "/" + part(BaseScoreMode::Estimated);
    };
    std::size_t label_width = std::string("configuration").size();
    for (const auto& r : rows) {
        label_width = std::max(label_width, r.label.size());
    }
    std::ostringstream os;
    os << "# accuracy % as fixed-0.5/estimated base scores, rounded half up\n";
    os << std::left << std::setw(static_cast<int>(label_width + 2)) << "configuration";
    for (const auto& agg : aggregators) {
        os << std::setw(10) << agg;
    }
    os << '\n';
    for (const auto& r : rows) {
        os << std::setw(static_cast<int>(label_width + 2)) << r.label;
        for (const auto& agg : aggregators) {
            auto it = r.cells.find(agg);
            os << std::setw(10) << (it == r.cells.end() ? std::string("-/-") : cell(it->second));
        }
        os << '\n';
    }
    return os.str();
}

std::string ExperimentResult::to_json() const {
    ordered_json out;
    out["aggregators"] = aggregators;
    out["rounding"] = "half-up";
    ordered_json rs = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json cells = ordered_json::object();
        for (const auto& [agg, by_mode] : r.cells) {
            ordered_json modes = ordered_json::object();
            for (const auto& [mode, acc] : by_mode) {
                modes[std::string(to_string(mode))] = {
                    {"accuracy", acc.fraction()},
                    {"percent", acc.rounded_percent()},
                    {"correct", acc.correct},
                    {"total", acc.total},
                    {"gold_true", {{"correct", acc.gold_true.correct}, {"total", acc.gold_true.total}}},
                    {"gold_false", {{"correct", acc.gold_false.correct}, {"total", acc.gold_false.total}}}};
            }
            cells[agg] = std::move(modes);
        }
        rs.push_back({{"label", r.label}, {"agents", r.agents}, {"combined", r.combined}, {"cells", std::move(cells)}});
    }
    out["rows"] = std::move(rs);
    return out.dump(2) + "\n";
}

} // namespace argmerge
