#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hardneg {

struct Document {
  std::string id;
  std::string source_path;  // empty when not file-backed
  std::string text;
  std::size_t word_count = 0;
  std::string service_tag;  // optional grouping label

  bool operator==(const Document&) const = default;
};

struct Query {
  std::string id;
  std::string text;
  std::size_t word_count = 0;

  bool operator==(const Query&) const = default;
};

struct QrelPair {
  std::string query_id;
  std::string positive_doc_id;

  bool operator==(const QrelPair&) const = default;
};

enum class InputFormat { html, text, jsonl };

InputFormat parse_input_format(std::string_view name);

/// Immutable after construction: documents, queries and qrels are sorted by id
/// and every qrel resolves. Safe for concurrent reads.
class Corpus {
 public:
  Corpus() = default;
  // Validates uniqueness and referential integrity; throws IngestError.
  Corpus(std::vector<Document> documents, std::vector<Query> queries,
         std::vector<QrelPair> qrels);

  const std::vector<Document>& documents() const noexcept { return documents_; }
  const std::vector<Query>& queries() const noexcept { return queries_; }
  const std::vector<QrelPair>& qrels() const noexcept { return qrels_; }

  const Document* find_document(std::string_view id) const;
  const Query* find_query(std::string_view id) const;
  // Positive document id for a query, if it has a qrel.
  std::optional<std::string> positive_for(std::string_view query_id) const;

  const Document& document(std::string_view id) const;  // throws if absent
  const Query& query(std::string_view id) const;

 private:
  std::vector<Document> documents_;
  std::vector<Query> queries_;
  std::vector<QrelPair> qrels_;
  std::unordered_map<std::string, std::size_t> doc_index_;
  std::unordered_map<std::string, std::size_t> query_index_;
  std::unordered_map<std::string, std::size_t> qrel_index_;
};

// Visible text of an HTML fragment: script/style removed, boilerplate
// (nav/header/footer/aside, or class/id mentioning sidebar/header/footer/nav)
// dropped, one line per block, whitespace collapsed. Never throws.
std::string html_to_text(std::string_view html);

// NFC without control characters, whitespace collapsed. Case kept.
std::string normalize_text(std::string_view text);

// Whitespace split with punctuation stripped from token edges.
std::vector<std::string> tokenize(std::string_view text);

// Unicode case folding, used for term matching (BM25, hashing embeddings).
std::string fold_case(std::string_view text);

// Tokenize then fold: the term sequence used for lexical matching.
std::vector<std::string> terms(std::string_view text);

// Html/text: a file or a directory walked recursively; ids are relative
// paths. A directory may also carry queries.jsonl and qrels.jsonl.
// Jsonl: a documents file, or a directory with documents.jsonl and optional
// queries.jsonl / qrels.jsonl.
Corpus ingest(const std::filesystem::path& input, InputFormat format);

// Writes documents.jsonl, queries.jsonl and qrels.jsonl into `dir`.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus read_corpus(const std::filesystem::path& dir);

std::string document_to_jsonl(const Document& doc);
std::string query_to_jsonl(const Query& query);
std::string qrel_to_jsonl(const QrelPair& qrel);

struct LengthStats {
  std::map<std::size_t, std::size_t> histogram;  // bucket lower bound -> count
  std::size_t short_count = 0;                   // word_count <= threshold
  std::size_t long_count = 0;
  std::size_t threshold = 2048;
  std::size_t bucket_width = 256;
};

LengthStats length_stats(const Corpus& corpus, std::size_t threshold = 2048,
                         std::size_t bucket_width = 256);
LengthStats length_stats(const std::vector<std::size_t>& word_counts,
                         std::size_t threshold = 2048, std::size_t bucket_width = 256);

}  // namespace hardneg
