#include "hardneg/corpus.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "hardneg/util.hpp"

namespace hardneg {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

InputFormat parse_input_format(std::string_view name) {
  if (name == "html") return InputFormat::html;
  if (name == "text") return InputFormat::text;
  if (name == "jsonl") return InputFormat::jsonl;
  throw ConfigError("unknown input format '" + std::string(name) + "' (expected html|text|jsonl)");
}

// ---------------------------------------------------------------- text

namespace {

template <typename Fn>
void for_each_code_point(std::string_view text, Fn&& fn) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  while (i < length) {
    const std::int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) c = 0xFFFD;
    fn(c, text.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
  }
}

void append_code_point(std::string& out, UChar32 c) {
  char buffer[U8_MAX_LENGTH];
  std::int32_t length = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<std::uint8_t*>(buffer), length, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buffer, static_cast<std::size_t>(length));
}

bool is_white(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

}  // namespace

std::string normalize_text(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const auto source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<std::int32_t>(text.size())));
  const icu::UnicodeString composed = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");

  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (std::int32_t i = 0; i < composed.length(); i = composed.moveIndex32(i, 1)) {
    const UChar32 c = composed.char32At(i);
    if (is_white(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (u_charType(c) == U_CONTROL_CHAR) continue;
    if (pending_space) out += ' ';
    pending_space = false;
    append_code_point(out, c);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  // Track code point boundaries in `current` to strip punctuation edges.
  std::vector<std::pair<std::size_t, bool>> marks;  // (byte offset, is punctuation)

  auto flush = [&] {
    if (current.empty()) return;
    std::size_t first = 0;
    while (first < marks.size() && marks[first].second) ++first;
    std::size_t last = marks.size();
    while (last > first && marks[last - 1].second) --last;
    if (first < last) {
      const std::size_t begin = marks[first].first;
      const std::size_t end = last < marks.size() ? marks[last].first : current.size();
      tokens.emplace_back(current.substr(begin, end - begin));
    }
    current.clear();
    marks.clear();
  };

  for_each_code_point(text, [&](UChar32 c, std::string_view bytes) {
    if (is_white(c)) {
      flush();
      return;
    }
    if (u_charType(c) == U_CONTROL_CHAR) return;
    marks.emplace_back(current.size(), u_ispunct(c) != 0);
    if (c == 0xFFFD && bytes != "\xEF\xBF\xBD") {
      append_code_point(current, c);
    } else {
      current.append(bytes);
    }
  });
  flush();
  return tokens;
}

std::string fold_case(std::string_view text) {
  auto s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<std::int32_t>(text.size())));
  s.foldCase();
  std::string out;
  s.toUTF8String(out);
  return out;
}

std::vector<std::string> terms(std::string_view text) {
  auto tokens = tokenize(text);
  for (auto& t : tokens) t = fold_case(t);
  return tokens;
}

// ---------------------------------------------------------------- Corpus

Corpus::Corpus(std::vector<Document> documents, std::vector<Query> queries,
               std::vector<QrelPair> qrels)
    : documents_(std::move(documents)), queries_(std::move(queries)), qrels_(std::move(qrels)) {
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(documents_.begin(), documents_.end(), by_id);
  std::sort(queries_.begin(), queries_.end(), by_id);
  std::sort(qrels_.begin(), qrels_.end(),
            [](const QrelPair& a, const QrelPair& b) { return a.query_id < b.query_id; });

  for (std::size_t i = 0; i < documents_.size(); ++i) {
    if (!doc_index_.emplace(documents_[i].id, i).second) {
      throw IngestError("duplicate document id '" + documents_[i].id + "'");
    }
  }
  for (std::size_t i = 0; i < queries_.size(); ++i) {
    if (!query_index_.emplace(queries_[i].id, i).second) {
      throw IngestError("duplicate query id '" + queries_[i].id + "'");
    }
  }
  for (std::size_t i = 0; i < qrels_.size(); ++i) {
    const auto& q = qrels_[i];
    if (!query_index_.contains(q.query_id)) {
      throw IngestError("qrel references unknown query '" + q.query_id + "'");
    }
    if (!doc_index_.contains(q.positive_doc_id)) {
      throw IngestError("qrel for query '" + q.query_id + "' references unknown document '" +
                        q.positive_doc_id + "'");
    }
    if (!qrel_index_.emplace(q.query_id, i).second) {
      throw IngestError("query '" + q.query_id + "' has more than one qrel");
    }
  }
}

const Document* Corpus::find_document(std::string_view id) const {
  auto it = doc_index_.find(std::string(id));
  return it == doc_index_.end() ? nullptr : &documents_[it->second];
}

const Query* Corpus::find_query(std::string_view id) const {
  auto it = query_index_.find(std::string(id));
  return it == query_index_.end() ? nullptr : &queries_[it->second];
}

std::optional<std::string> Corpus::positive_for(std::string_view query_id) const {
  auto it = qrel_index_.find(std::string(query_id));
  if (it == qrel_index_.end()) return std::nullopt;
  return qrels_[it->second].positive_doc_id;
}

const Document& Corpus::document(std::string_view id) const {
  const auto* doc = find_document(id);
  if (!doc) throw Error("unknown document '" + std::string(id) + "'");
  return *doc;
}

const Query& Corpus::query(std::string_view id) const {
  const auto* q = find_query(id);
  if (!q) throw Error("unknown query '" + std::string(id) + "'");
  return *q;
}

// ---------------------------------------------------------------- JSONL

namespace {

std::string dump_line(const ordered_json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

template <typename Fn>
void for_each_jsonl(const fs::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IngestError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      fn(record);
    } catch (const nlohmann::json::exception& e) {
      throw IngestError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string required_string(const nlohmann::json& record, const char* key) {
  if (!record.contains(key) || !record[key].is_string()) {
    throw IngestError(std::string("record missing string field '") + key + "'");
  }
  return record[key].get<std::string>();
}

Document make_document(std::string id, std::string text, std::string source_path = {},
                       std::string service_tag = {}) {
  Document doc;
  doc.id = std::move(id);
  doc.text = normalize_text(text);
  doc.word_count = tokenize(doc.text).size();
  doc.source_path = std::move(source_path);
  doc.service_tag = std::move(service_tag);
  return doc;
}

std::vector<Document> read_documents_jsonl(const fs::path& path) {
  std::vector<Document> docs;
  for_each_jsonl(path, [&](const nlohmann::json& r) {
    std::string tag = r.contains("service_tag") && r["service_tag"].is_string()
                          ? r["service_tag"].get<std::string>()
                          : std::string{};
    std::string source = r.contains("source_path") && r["source_path"].is_string()
                             ? r["source_path"].get<std::string>()
                             : std::string{};
    docs.push_back(make_document(required_string(r, "id"), required_string(r, "text"),
                                 std::move(source), std::move(tag)));
  });
  return docs;
}

std::vector<Query> read_queries_jsonl(const fs::path& path) {
  std::vector<Query> queries;
  for_each_jsonl(path, [&](const nlohmann::json& r) {
    Query q;
    q.id = required_string(r, "id");
    q.text = normalize_text(required_string(r, "text"));
    q.word_count = tokenize(q.text).size();
    queries.push_back(std::move(q));
  });
  return queries;
}

std::vector<QrelPair> read_qrels_jsonl(const fs::path& path) {
  std::vector<QrelPair> qrels;
  for_each_jsonl(path, [&](const nlohmann::json& r) {
    qrels.push_back({required_string(r, "query_id"), required_string(r, "positive_doc_id")});
  });
  return qrels;
}

bool matches_format(const fs::path& path, InputFormat format) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (format == InputFormat::html) return ext == ".html" || ext == ".htm";
  return ext == ".txt" || ext == ".text";
}

}  // namespace

std::string document_to_jsonl(const Document& doc) {
  ordered_json j;
  j["id"] = doc.id;
  j["text"] = doc.text;
  j["word_count"] = doc.word_count;
  if (!doc.service_tag.empty()) j["service_tag"] = doc.service_tag;
  if (!doc.source_path.empty()) j["source_path"] = doc.source_path;
  return dump_line(j);
}

std::string query_to_jsonl(const Query& query) {
  ordered_json j;
  j["id"] = query.id;
  j["text"] = query.text;
  j["word_count"] = query.word_count;
  return dump_line(j);
}

std::string qrel_to_jsonl(const QrelPair& qrel) {
  ordered_json j;
  j["query_id"] = qrel.query_id;
  j["positive_doc_id"] = qrel.positive_doc_id;
  return dump_line(j);
}

void write_corpus(const Corpus& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  std::string docs, queries, qrels;
  for (const auto& d : corpus.documents()) docs += document_to_jsonl(d);
  for (const auto& q : corpus.queries()) queries += query_to_jsonl(q);
  for (const auto& r : corpus.qrels()) qrels += qrel_to_jsonl(r);
  write_file_atomic(dir / "documents.jsonl", docs);
  write_file_atomic(dir / "queries.jsonl", queries);
  write_file_atomic(dir / "qrels.jsonl", qrels);
}

Corpus read_corpus(const fs::path& dir) { return ingest(dir, InputFormat::jsonl); }

Corpus ingest(const fs::path& input, InputFormat format) {
  if (!fs::exists(input)) throw IngestError("input path does not exist: " + input.string());

  std::vector<Document> docs;
  std::vector<Query> queries;
  std::vector<QrelPair> qrels;
  const bool is_dir = fs::is_directory(input);

  if (format == InputFormat::jsonl) {
    if (is_dir) {
      const auto doc_file = input / "documents.jsonl";
      if (!fs::exists(doc_file)) throw IngestError("missing " + doc_file.string());
      docs = read_documents_jsonl(doc_file);
    } else {
      docs = read_documents_jsonl(input);
    }
  } else {
    std::vector<fs::path> files;
    if (is_dir) {
      for (const auto& entry : fs::recursive_directory_iterator(input)) {
        if (entry.is_regular_file() && matches_format(entry.path(), format)) {
          files.push_back(entry.path());
        }
      }
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(input);
    }
    for (const auto& file : files) {
      const std::string raw = read_file(file);
      const std::string id =
          is_dir ? fs::relative(file, input).generic_string() : file.filename().generic_string();
      const std::string text = format == InputFormat::html ? html_to_text(raw) : raw;
      docs.push_back(make_document(id, text, fs::relative(file, is_dir ? input : input.parent_path())
                                                 .generic_string()));
    }
  }

  if (is_dir) {
    if (fs::exists(input / "queries.jsonl")) queries = read_queries_jsonl(input / "queries.jsonl");
    if (fs::exists(input / "qrels.jsonl")) qrels = read_qrels_jsonl(input / "qrels.jsonl");
  }
  return Corpus(std::move(docs), std::move(queries), std::move(qrels));
}

// ---------------------------------------------------------------- stats

LengthStats length_stats(const std::vector<std::size_t>& word_counts, std::size_t threshold,
                         std::size_t bucket_width) {
  if (bucket_width == 0) throw Error("length_stats: bucket width must be positive");
  LengthStats stats;
  stats.threshold = threshold;
  stats.bucket_width = bucket_width;
  for (std::size_t wc : word_counts) {
    ++stats.histogram[(wc / bucket_width) * bucket_width];
    if (wc <= threshold) {
      ++stats.short_count;
    } else {
      ++stats.long_count;
    }
  }
  return stats;
}

LengthStats length_stats(const Corpus& corpus, std::size_t threshold, std::size_t bucket_width) {
  std::vector<std::size_t> counts;
  counts.reserve(corpus.documents().size());
  for (const auto& d : corpus.documents()) counts.push_back(d.word_count);
  return length_stats(counts, threshold, bucket_width);
}

}  // namespace hardneg
