#include "argmerge/retrieval.hpp"

#include "argmerge/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

namespace argmerge {

using nlohmann::json;

Date parse_date(std::string_view text) {
    const auto bad = [&] { return SchemaError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw bad();
    }
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    const auto num = [&](std::size_t at, std::size_t len, auto& out) {
        for (std::size_t i = at; i < at + len; ++i) {
            if (text[i] < '0' || text[i] > '9') {
                throw bad();
            }
        }
        std::from_chars(text.data() + at, text.data() + at + len, out);
    };
    num(0, 4, y);
    num(5, 2, m);
    num(8, 2, d);
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) {
        throw bad();
    }
    return date;
}

std::string format_date(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::vector<CorpusDocument> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open corpus " + path.string());
    }
    std::vector<CorpusDocument> docs;
    std::unordered_set<std::string> ids;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(lineno);
        try {
            const json j = json::parse(line);
            CorpusDocument d{j.at("doc_id").get<std::string>(), parse_date(j.at("date").get<std::string>()),
                             j.at("text").get<std::string>(), j.value("source", std::string{})};
            if (!ids.insert(d.doc_id).second) {
                throw SchemaError("duplicate doc_id '" + d.doc_id + "'");
            }
            docs.push_back(std::move(d));
        } catch (const json::exception& e) {
            throw SchemaError(where + ": " + e.what());
        } catch (const SchemaError& e) {
            throw SchemaError(where + ": " + e.what());
        }
    }
    return docs;
}

void save_corpus(std::span<const CorpusDocument> docs, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write corpus " + path.string());
    }
    for (const auto& d : docs) {
        out << json{{"doc_id", d.doc_id}, {"date", format_date(d.date)}, {"source", d.source}, {"text", d.text}}
                   .dump()
            << '\n';
    }
}

RetrievalIndex::RetrievalIndex(std::string provider_id, std::vector<CorpusDocument> documents,
                               std::vector<EmbeddingVector> embeddings)
    : provider_id_(std::move(provider_id)),
      documents_(std::move(documents)),
      embeddings_(std::move(embeddings)) {
    if (documents_.size() != embeddings_.size()) {
        throw Error("index has " + std::to_string(documents_.size()) + " documents but " +
                    std::to_string(embeddings_.size()) + " embeddings");
    }
    std::unordered_set<std::string> ids;
    for (const auto& d : documents_) {
        if (!ids.insert(d.doc_id).second) {
            throw Error("duplicate doc_id '" + d.doc_id + "'");
        }
    }
    for (const auto& e : embeddings_) {
        if (e.dimension() != embeddings_.front().dimension()) {
            throw DimensionMismatch("index vectors have differing dimensions");
        }
    }
}

std::size_t RetrievalIndex::dimension() const noexcept {
    return embeddings_.empty() ? 0 : embeddings_.front().dimension();
}

void RetrievalIndex::save(const std::filesystem::path& path) const {
    json docs = json::array();
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        const auto& d = documents_[i];
        const auto v = embeddings_[i].values();
        docs.push_back({{"doc_id", d.doc_id},
                        {"date", format_date(d.date)},
                        {"source", d.source},
                        {"text", d.text},
                        {"vector", std::vector<double>(v.begin(), v.end())}});
    }
    const json doc{{"format", "argmerge-index"},
                   {"version", kFormatVersion},
                   {"provider", provider_id_},
                   {"dimension", dimension()},
                   {"documents", std::move(docs)}};
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write index " + path.string());
    }
    out << doc.dump() << '\n';
}

RetrievalIndex RetrievalIndex::load(const std::filesystem::path& path,
                                    std::optional<std::string> expected_provider) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open index " + path.string());
    }
    try {
        const json doc = json::parse(in);
        if (doc.at("format") != "argmerge-index") {
            throw SchemaError(path.string() + ": not an index file");
        }
        if (doc.at("version").get<int>() != kFormatVersion) {
            throw SchemaError(path.string() + ": unsupported index version " + doc.at("version").dump());
        }
        auto provider = doc.at("provider").get<std::string>();
        if (expected_provider && *expected_provider != provider) {
            throw SchemaError(path.string() + ": index was built with provider '" + provider +
                              "', refusing to use it with '" + *expected_provider + "'");
        }
        const auto dim = doc.at("dimension").get<std::size_t>();
        std::vector<CorpusDocument> docs;
        std::vector<EmbeddingVector> vecs;
        for (const auto& d : doc.at("documents")) {
            docs.push_back(CorpusDocument{d.at("doc_id").get<std::string>(),
                                          parse_date(d.at("date").get<std::string>()),
                                          d.at("text").get<std::string>(), d.value("source", std::string{})});
            vecs.emplace_back(d.at("vector").get<std::vector<double>>());
            if (vecs.back().dimension() != dim) {
                throw SchemaError(path.string() + ": document '" + docs.back().doc_id + "' has dimension " +
                                  std::to_string(vecs.back().dimension()) + ", header says " +
                                  std::to_string(dim));
            }
        }
        return RetrievalIndex(std::move(provider), std::move(docs), std::move(vecs));
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

namespace {

// Checkpoint of finished embeddings: {"provider": id, "vectors": {doc_id: [...]}}.
class Progress {
public:
    Progress(std::filesystem::path path, std::string provider)
        : path_(std::move(path)), provider_(std::move(provider)) {
        if (path_.empty() || !std::filesystem::exists(path_)) {
            return;
        }
        std::ifstream in(path_);
        try {
            const json doc = json::parse(in);
            if (doc.at("provider").get<std::string>() != provider_) {
                return;
            }
            for (const auto& [id, v] : doc.at("vectors").items()) {
                done_.emplace(id, EmbeddingVector(v.get<std::vector<double>>()));
            }
        } catch (const json::exception& e) {
            throw SchemaError(path_.string() + ": " + e.what());
        }
    }

    const EmbeddingVector* find(const std::string& doc_id) const {
        auto it = done_.find(doc_id);
        return it == done_.end() ? nullptr : &it->second;
    }

    void record(const std::vector<std::string>& ids, std::vector<EmbeddingVector> vectors) {
        std::lock_guard lock(mutex_);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            done_.insert_or_assign(ids[i], std::move(vectors[i]));
        }
    }

    void flush() const {
        if (path_.empty()) {
            return;
        }
        std::lock_guard lock(mutex_);
        json vectors = json::object();
        for (const auto& [id, v] : done_) {
            vectors[id] = std::vector<double>(v.values().begin(), v.values().end());
        }
        std::ofstream out(path_);
        out << json{{"provider", provider_}, {"vectors", std::move(vectors)}}.dump();
    }

    void remove() const {
        if (!path_.empty()) {
            std::error_code ec;
            std::filesystem::remove(path_, ec);
        }
    }

private:
    std::filesystem::path path_;
    std::string provider_;
    mutable std::mutex mutex_;
    std::map<std::string, EmbeddingVector> done_;
};

} // namespace

RetrievalIndex ingest(std::span<const CorpusDocument> documents, EmbeddingProvider& provider,
                      const IngestOptions& options) {
    if (options.batch_size == 0) {
        throw Error("batch size must be at least 1");
    }
    std::unordered_set<std::string> ids;
    for (const auto& d : documents) {
        if (!ids.insert(d.doc_id).second) {
            throw Error("duplicate doc_id '" + d.doc_id + "'");
        }
    }

    Progress progress(options.progress_path, provider.id());
    std::vector<const CorpusDocument*> pending;
    for (const auto& d : documents) {
        if (!progress.find(d.doc_id)) {
            pending.push_back(&d);
        }
    }

    struct Batch {
        std::vector<std::string> ids;
        std::vector<std::string> texts;
    };
    std::vector<Batch> batches;
    for (std::size_t i = 0; i < pending.size(); i += options.batch_size) {
        Batch b;
        for (std::size_t j = i; j < std::min(pending.size(), i + options.batch_size); ++j) {
            b.ids.push_back(pending[j]->doc_id);
            b.texts.push_back(pending[j]->text);
        }
        batches.push_back(std::move(b));
    }

    const auto run_batch = [&](const Batch& b) {
        auto vectors = provider.embed(b.texts);
        if (vectors.size() != b.texts.size()) {
            throw ProviderError("provider returned " + std::to_string(vectors.size()) + " vectors for " +
                                    std::to_string(b.texts.size()) + " texts",
                                b.texts);
        }
        progress.record(b.ids, std::move(vectors));
    };

    const std::size_t width = std::max<std::size_t>(1, options.parallelism);
    for (std::size_t start = 0; start < batches.size(); start += width) {
        const std::size_t end = std::min(batches.size(), start + width);
        std::vector<std::future<void>> inflight;
        for (std::size_t i = start; i < end; ++i) {
            inflight.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async,
                                          run_batch, std::cref(batches[i])));
        }
        std::exception_ptr failure;
        for (auto& f : inflight) {
            try {
                f.get();
            } catch (...) {
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
        if (failure) {
            progress.flush();
            std::rethrow_exception(failure);
        }
    }

    std::vector<CorpusDocument> docs(documents.begin(), documents.end());
    std::vector<EmbeddingVector> vectors;
    vectors.reserve(docs.size());
    for (const auto& d : docs) {
        vectors.push_back(*progress.find(d.doc_id));
    }
    progress.remove();
    return RetrievalIndex(provider.id(), std::move(docs), std::move(vectors));
}

RetrievalIndex ingest(std::span<const CorpusDocument> documents, EmbeddingProvider& provider,
                      std::size_t batch_size) {
    IngestOptions options;
    options.batch_size = batch_size;
    return ingest(documents, provider, options);
}

std::vector<RetrievedDocument> retrieve_embedded(const RetrievalIndex& index,
                                                 std::span<const EmbeddingVector> queries, Date cutoff,
                                                 std::size_t k) {
    if (k == 0) {
        throw Error("k must be at least 1");
    }
    std::vector<RetrievedDocument> ranked;
    const auto docs = index.documents();
    const auto vecs = index.embeddings();
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (!(docs[i].date < cutoff)) {
            continue;
        }
        double best = 0.0;
        for (const auto& q : queries) {
            best = std::max(best, cosine(q, vecs[i]));
        }
        ranked.push_back(RetrievedDocument{&docs[i], best});
    }
    const auto better = [](const RetrievedDocument& a, const RetrievedDocument& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.document->doc_id < b.document->doc_id;
    };
    const std::size_t keep = std::min(k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), better);
    ranked.resize(keep);
    return ranked;
}

std::vector<RetrievedDocument> retrieve(const RetrievalIndex& index, EmbeddingProvider& provider,
                                        std::span<const std::string> queries, Date cutoff, std::size_t k) {
    if (k == 0) {
        throw Error("k must be at least 1");
    }
    if (queries.empty()) {
        throw EmptyInput("retrieve needs at least one query");
    }
    if (!index.empty() && provider.id() != index.provider_id()) {
        throw Error("index was built with provider '" + index.provider_id() + "' but the query uses '" +
                    provider.id() + "'");
    }
    const auto embedded = provider.embed(queries);
    if (embedded.size() != queries.size()) {
        throw ProviderError("provider returned the wrong number of query vectors",
                            std::vector<std::string>(queries.begin(), queries.end()));
    }
    return retrieve_embedded(index, embedded, cutoff, k);
}

std::vector<RetrievedDocument> retrieve(const RetrievalIndex& index, EmbeddingProvider& provider,
                                        std::string_view query, Date cutoff, std::size_t k) {
    const std::string q(query);
    return retrieve(index, provider, std::span<const std::string>(&q, 1), cutoff, k);
}

} // namespace argmerge
