#pragma once

// Date-filtered top-k evidence retrieval over a flat, exactly scanned index.

#include "argmerge/embedding.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace argmerge {

using Date = std::chrono::year_month_day;

/// Strict YYYY-MM-DD. Throws SchemaError.
Date parse_date(std::string_view text);
std::string format_date(Date d);

struct CorpusDocument {
    std::string doc_id;
    Date date;
    std::string text;
    std::string source;

    friend bool operator==(const CorpusDocument&, const CorpusDocument&) = default;
};

/// One JSON object per line: {"doc_id", "date", "source", "text"}. Blank
/// lines are skipped. Throws SchemaError naming the line.
std::vector<CorpusDocument> load_corpus(const std::filesystem::path& path);
void save_corpus(std::span<const CorpusDocument> docs, const std::filesystem::path& path);

class RetrievalIndex {
public:
    RetrievalIndex() = default;
    /// Throws Error when the lists differ in length, doc ids repeat, or
    /// vector dimensions differ.
    RetrievalIndex(std::string provider_id, std::vector<CorpusDocument> documents,
                   std::vector<EmbeddingVector> embeddings);

    const std::string& provider_id() const noexcept { return provider_id_; }
    std::span<const CorpusDocument> documents() const noexcept { return documents_; }
    std::span<const EmbeddingVector> embeddings() const noexcept { return embeddings_; }
    std::size_t size() const noexcept { return documents_.size(); }
    bool empty() const noexcept { return documents_.empty(); }
    /// 0 when empty.
    std::size_t dimension() const noexcept;

    friend bool operator==(const RetrievalIndex&, const RetrievalIndex&) = default;

    static constexpr int kFormatVersion = 1;
    void save(const std::filesystem::path& path) const;
    /// Throws SchemaError on a malformed file, or when `expected_provider`
    /// is given and differs from the stored provider id.
    static RetrievalIndex load(const std::filesystem::path& path,
                               std::optional<std::string> expected_provider = std::nullopt);

private:
    std::string provider_id_;
    std::vector<CorpusDocument> documents_;
    std::vector<EmbeddingVector> embeddings_;
};

struct IngestOptions {
    std::size_t batch_size = 32;
    /// Batches in flight at once.
    std::size_t parallelism = 1;
    /// When set, finished batches are checkpointed here and a later call
    /// with the same path skips them.
    std::filesystem::path progress_path;
};

/// Embeds every document, batch by batch, in input order. Throws Error on a
/// duplicate doc_id or batch_size 0, and rethrows the provider's
/// ProviderError after checkpointing the batches that did finish.
RetrievalIndex ingest(std::span<const CorpusDocument> documents, EmbeddingProvider& provider,
                      const IngestOptions& options = {});
RetrievalIndex ingest(std::span<const CorpusDocument> documents, EmbeddingProvider& provider,
                      std::size_t batch_size);

inline constexpr std::size_t kDefaultTopK = 5;

struct RetrievedDocument {
    const CorpusDocument* document;
    double score;
};

/// The k best documents dated strictly before `cutoff`, by descending
/// cosine and then ascending doc_id. Throws Error for k == 0.
std::vector<RetrievedDocument> retrieve(const RetrievalIndex& index, EmbeddingProvider& provider,
                                        std::string_view query, Date cutoff,
                                        std::size_t k = kDefaultTopK);

/// Several queries for one claim; each document keeps its best score.
std::vector<RetrievedDocument> retrieve(const RetrievalIndex& index, EmbeddingProvider& provider,
                                        std::span<const std::string> queries, Date cutoff,
                                        std::size_t k = kDefaultTopK);

/// Ranking against already embedded queries.
std::vector<RetrievedDocument> retrieve_embedded(const RetrievalIndex& index,
                                                 std::span<const EmbeddingVector> queries, Date cutoff,
                                                 std::size_t k = kDefaultTopK);

} // namespace argmerge
