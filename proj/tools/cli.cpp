#include "cli.hpp"

#include "argmerge/aggregation.hpp"
#include "argmerge/combinator.hpp"
#include "argmerge/dfquad.hpp"
#include "argmerge/errors.hpp"
#include "argmerge/harness.hpp"
#include "argmerge/io.hpp"
#include "argmerge/retrieval.hpp"
#include "argmerge/similarity.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace argmerge::cli {

namespace {

// A bad flag value detected after parsing.
struct UsageError {
    std::string message;
};

std::string provider_spec_for(const std::string& provider_id) {
    if (provider_id.starts_with("remote:")) {
        return "remote";
    }
    return provider_id;
}

int cmd_validate(const std::vector<std::string>& files, std::ostream& out, std::ostream& err) {
    int status = kExitOk;
    for (const auto& f : files) {
        try {
            const auto doc = read_qbaf_document(f);
            const TreeReport report = validate_tree(doc.qbaf, doc.claim);
            if (report.ok()) {
                out << f << ": ok (claim " << doc.claim.str() << ", " << doc.qbaf.size() << " arguments)\n";
                continue;
            }
            status = kExitFailure;
            out << f << ": invalid\n";
            for (const auto& v : report.violations) {
                static constexpr const char* kRoman[] = {"", "i", "ii", "iii"};
                out << "  condition (" << kRoman[std::clamp(v.condition, 0, 3)] << "): " << v.message << '\n';
            }
        } catch (const SchemaError& e) {
            status = kExitFailure;
            err << "schema error: " << e.what() << '\n';
        }
    }
    return status;
}

int cmd_strengths(const std::string& file, double threshold, std::ostream& out) {
    const TreeQbaf q = load_qbaf(file);
    const StrengthMap s = evaluate_strengths(q);
    const auto stance = classify_pro_con(q);
    std::size_t width = 8;
    for (const auto& a : q.qbaf().arguments()) {
        width = std::max(width, a.id.str().size());
    }
    out << std::left << std::setw(static_cast<int>(width + 2)) << "argument" << std::setw(8) << "depth"
        << std::setw(8) << "stance" << std::setw(12) << "base" << "strength\n";
    for (const auto& layer : q.layers()) {
        for (std::size_t i : layer) {
            const auto& id = q.qbaf().arguments()[i].id;
            out << std::setw(static_cast<int>(width + 2)) << id.str() << std::setw(8) << q.depth_of(i)
                << std::setw(8) << to_string(stance.at(id)) << std::setw(12) << q.qbaf().base_score(i)
                << std::setprecision(10) << s[i] << std::setprecision(6) << '\n';
        }
    }
    const Verdict v = verdict(s, q.claim(), threshold);
    out << "verdict: " << (v.accepted() ? "accepted" : "rejected") << " (strength " << std::setprecision(10)
        << v.strength << ", threshold " << threshold << ")\n";
    return kExitOk;
}

struct CombineArgs {
    std::vector<std::string> files;
    double delta = 0.5;
    std::string agg = "avg";
    std::string provider = "offline";
    std::string out_path;
    bool any_claim_id = false;
};

int cmd_combine(const CombineArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<TreeQbaf> inputs;
    for (const auto& f : a.files) {
        inputs.push_back(load_qbaf(f));
    }
    SimilarityConfig config;
    config.threshold = a.delta;
    config.provider = a.provider;
    auto psi = make_similarity(config);
    const Aggregator omega(*parse_aggregator_kind(a.agg));
    CombineOptions options;
    options.require_matching_claim_ids = !a.any_claim_id;
    const CombinedQbaf c = combine(inputs, *psi, omega, options);
    const CombinedReport report = validate_combined(inputs, c, *psi, omega);

    if (a.out_path.empty()) {
        out << combined_to_json(c, &report);
    } else {
        save_combined(c, a.out_path, &report);
        out << "wrote " << a.out_path << " (" << c.clusters.size() << " clusters)\n";
    }
    err << "validation: " << report.summary() << '\n';
    return report.ok() ? kExitOk : kExitFailure;
}

int cmd_eval(const std::string& spec_path, const std::string& json_path, std::ostream& out) {
    const ExperimentSpec spec = load_experiment_spec(spec_path);
    const ExperimentResult r = run_experiment(spec);
    out << r.render_table();
    if (!json_path.empty()) {
        write_text_file(json_path, r.to_json());
    }
    return kExitOk;
}

struct RetrieveArgs {
    std::string index;
    std::vector<std::string> queries;
    std::string cutoff;
    std::size_t k = kDefaultTopK;
    std::string provider;
};

int cmd_retrieve(const RetrieveArgs& a, std::ostream& out) {
    Date cutoff;
    try {
        cutoff = parse_date(a.cutoff);
    } catch (const SchemaError& e) {
        throw UsageError{"--cutoff: " + std::string(e.what())};
    }
    const RetrievalIndex index = RetrievalIndex::load(a.index);
    const std::string spec = a.provider.empty() ? provider_spec_for(index.provider_id()) : a.provider;
    auto provider = make_embedding_provider(spec, CachePolicy::None);
    if (provider->id() != index.provider_id()) {
        throw Error("index " + a.index + " was built with provider '" + index.provider_id() +
                    "', refusing to query it with '" + provider->id() + "'");
    }
    const auto hits = retrieve(index, *provider, a.queries, cutoff, a.k);
    int rank = 1;
    for (const auto& h : hits) {
        out << rank++ << '\t' << std::fixed << std::setprecision(6) << h.score << std::defaultfloat << '\t'
            << h.document->doc_id << '\t' << format_date(h.document->date) << '\t' << h.document->text << '\n';
    }
    return kExitOk;
}

struct IngestArgs {
    std::string corpus;
    std::string provider = "offline";
    std::string out_path;
    std::size_t batch_size = 32;
    std::size_t parallel = 1;
    std::string cache;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
    const auto docs = load_corpus(a.corpus);
    auto provider = make_embedding_provider(a.provider, a.cache.empty() ? CachePolicy::Memory : CachePolicy::Persistent,
                                            a.cache);
    IngestOptions options;
    options.batch_size = a.batch_size;
    options.parallelism = a.parallel;
    options.progress_path = a.out_path + ".partial";
    const RetrievalIndex index = ingest(docs, *provider, options);
    index.save(a.out_path);
    out << "indexed " << index.size() << " documents with " << index.provider_id() << " into " << a.out_path
        << '\n';
    return kExitOk;
}

int cmd_laws(const std::string& agg, std::size_t samples, std::uint64_t seed, std::ostream& out) {
    const LawReport report = check_aggregator_laws(*parse_aggregator_kind(agg), samples, seed);
    for (const auto& law : report.laws) {
        out << (law.passed ? "pass  " : "FAIL  ") << to_string(law.law) << " (" << law.samples << " samples)";
        if (!law.passed) {
            out << ": " << law.detail;
        }
        out << '\n';
    }
    return report.all_passed() ? kExitOk : kExitFailure;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tree-shaped QBAF evaluation, combination and retrieval", "argmerge"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    const CLI::IsMember agg_names({"avg", "average", "max", "maximum"});

    std::vector<std::string> validate_files;
    auto* validate = app.add_subcommand("validate", "Check QBAF files against the schema and tree conditions");
    validate->add_option("qbaf", validate_files, "QBAF files")->required()->check(CLI::ExistingFile);

    std::string strengths_file;
    double strengths_threshold = kDefaultDecisionThreshold;
    auto* strengths = app.add_subcommand("strengths", "Print DF-QuAD strengths and the claim verdict");
    strengths->add_option("qbaf", strengths_file, "QBAF file")->required()->check(CLI::ExistingFile);
    strengths->add_option("--threshold", strengths_threshold, "Acceptance threshold")->check(CLI::Range(0.0, 1.0));

    CombineArgs combine_args;
    auto* combine_cmd = app.add_subcommand("combine", "Merge QBAFs for the same claim");
    combine_cmd->add_option("qbaf", combine_args.files, "Two or more QBAF files")
        ->required()
        ->expected(2, -1)
        ->check(CLI::ExistingFile);
    combine_cmd->add_option("--delta", combine_args.delta, "Similarity threshold")->check(CLI::Range(0.0, 1.0));
    combine_cmd->add_option("--agg", combine_args.agg, "Base score aggregation: avg or max")->check(agg_names);
    combine_cmd->add_option("--provider", combine_args.provider,
                            "offline[:dim[:seed]], table:<file> or remote");
    combine_cmd->add_option("--out", combine_args.out_path, "Write the combined framework here");
    combine_cmd->add_flag("--any-claim-id", combine_args.any_claim_id,
                          "Identify the claims even when their ids differ");

    std::string eval_spec;
    std::string eval_json;
    auto* eval = app.add_subcommand("eval", "Run an accuracy experiment");
    eval->add_option("spec", eval_spec, "Experiment spec file")->required()->check(CLI::ExistingFile);
    eval->add_option("--json", eval_json, "Also write machine-readable results here");

    RetrieveArgs retrieve_args;
    auto* retrieve_cmd = app.add_subcommand("retrieve", "Top-k documents dated before a cutoff");
    retrieve_cmd->add_option("index", retrieve_args.index, "Index file")->required()->check(CLI::ExistingFile);
    retrieve_cmd->add_option("--query", retrieve_args.queries, "Query text; repeat to merge several")->required();
    retrieve_cmd->add_option("--cutoff", retrieve_args.cutoff, "Only documents strictly before YYYY-MM-DD")
        ->required();
    retrieve_cmd->add_option("--k", retrieve_args.k, "Number of documents")->check(CLI::PositiveNumber);
    retrieve_cmd->add_option("--provider", retrieve_args.provider, "Embedding provider (default: the index's)");

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "Embed a JSONL corpus into an index file");
    ingest_cmd->add_option("corpus", ingest_args.corpus, "Corpus file")->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--provider", ingest_args.provider, "offline[:dim[:seed]] or remote");
    ingest_cmd->add_option("--out", ingest_args.out_path, "Index file to write")->required();
    ingest_cmd->add_option("--batch-size", ingest_args.batch_size, "Texts per provider call")
        ->check(CLI::PositiveNumber);
    ingest_cmd->add_option("--parallel", ingest_args.parallel, "Batches in flight")->check(CLI::PositiveNumber);
    ingest_cmd->add_option("--cache", ingest_args.cache, "Persistent embedding cache file");

    std::string laws_agg;
    std::size_t laws_samples = 1000;
    std::uint64_t laws_seed = 42;
    auto* laws = app.add_subcommand("laws", "Check the aggregation laws");
    laws->add_option("--agg", laws_agg, "avg or max")->required()->check(agg_names);
    laws->add_option("--samples", laws_samples, "Random vectors per law")->check(CLI::PositiveNumber);
    laws->add_option("--seed", laws_seed, "Generator seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        err << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (validate->parsed()) {
            return cmd_validate(validate_files, out, err);
        }
        if (strengths->parsed()) {
            return cmd_strengths(strengths_file, strengths_threshold, out);
        }
        if (combine_cmd->parsed()) {
            return cmd_combine(combine_args, out, err);
        }
        if (eval->parsed()) {
            return cmd_eval(eval_spec, eval_json, out);
        }
        if (retrieve_cmd->parsed()) {
            return cmd_retrieve(retrieve_args, out);
        }
        if (ingest_cmd->parsed()) {
            return cmd_ingest(ingest_args, out);
        }
        if (laws->parsed()) {
            return cmd_laws(laws_agg, laws_samples, laws_seed, out);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.message << '\n';
        return kExitUsage;
    } catch (const InvalidTree& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace argmerge::cli
