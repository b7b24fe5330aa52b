#include "hardneg/eval.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "hardneg/util.hpp"

namespace hardneg {

namespace {

const std::set<std::string>& relevant_for(const Relevance& relevance, const RankedList& list) {
  auto it = relevance.find(list.query_id);
  if (it == relevance.end()) {
    throw Error("no relevance judgment for query '" + list.query_id + "'");
  }
  return it->second;
}

void require_k(std::size_t k) {
  if (k < 1) throw Error("k must be >= 1");
}

double mean_reciprocal(std::span<const RankedList> lists, const Relevance& relevance,
                       std::size_t cutoff) {
  if (lists.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& list : lists) {
    const auto rank = first_relevant_rank(list, relevant_for(relevance, list));
    if (rank && *rank <= cutoff) sum += 1.0 / static_cast<double>(*rank);
  }
  return sum / static_cast<double>(lists.size());
}

constexpr const char* kMetricNames[] = {"mrr", "precision", "sim_avg"};

std::map<std::size_t, double>& metric_map(EvalReport& r, std::string_view metric) {
  if (metric == "mrr") return r.mrr_at;
  if (metric == "precision") return r.precision_at;
  if (metric == "sim_avg") return r.sim_avg_at;
  throw Error("unknown metric '" + std::string(metric) + "'");
}

const std::map<std::size_t, double>& metric_map(const EvalReport& r, std::string_view metric) {
  return metric_map(const_cast<EvalReport&>(r), metric);
}

}  // namespace

Relevance relevance_from_qrels(std::span<const QrelPair> qrels) {
  Relevance out;
  for (const auto& q : qrels) out[q.query_id].insert(q.positive_doc_id);
  return out;
}

std::optional<std::size_t> first_relevant_rank(const RankedList& list,
                                               const std::set<std::string>& relevant) {
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    if (relevant.count(list.entries[i].doc_id)) return i + 1;
  }
  return std::nullopt;
}

double mrr_at_k(std::span<const RankedList> lists, const Relevance& relevance, std::size_t k) {
  require_k(k);
  return mean_reciprocal(lists, relevance, k);
}

double mrr(std::span<const RankedList> lists, const Relevance& relevance) {
  return mean_reciprocal(lists, relevance, static_cast<std::size_t>(-1));
}

double precision_at_k(std::span<const RankedList> lists, const Relevance& relevance, std::size_t k) {
  require_k(k);
  if (lists.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& list : lists) {
    const auto& relevant = relevant_for(relevance, list);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < std::min(k, list.entries.size()); ++i) {
      if (relevant.count(list.entries[i].doc_id)) ++tp;
    }
    sum += static_cast<double>(tp) / static_cast<double>(k);
  }
  return sum / static_cast<double>(lists.size());
}

double sim_score_average_at_k(std::span<const RankedList> lists, std::size_t k) {
  require_k(k);
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& list : lists) {
    if (list.entries.empty()) {
      log::warn("ranked list for query '" + list.query_id + "' is empty; skipped in sim_avg");
      continue;
    }
    const std::size_t n = std::min(k, list.entries.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += list.entries[i].score;
    sum += s / static_cast<double>(n);
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

std::string_view to_string(Bucket bucket) {
  switch (bucket) {
    case Bucket::all: return "all";
    case Bucket::short_docs: return "short";
    case Bucket::long_docs: return "long";
  }
  return "unknown";
}

Bucket parse_bucket(std::string_view name) {
  if (name == "all") return Bucket::all;
  if (name == "short") return Bucket::short_docs;
  if (name == "long") return Bucket::long_docs;
  throw Error("unknown bucket '" + std::string(name) + "'");
}

std::vector<EvalReport> bucketed_report(std::span<const RankedList> lists,
                                        const Relevance& relevance,
                                        const std::map<std::string, std::size_t>& positive_words,
                                        std::span<const std::size_t> ks, std::size_t threshold) {
  std::vector<RankedList> short_lists, long_lists;
  for (const auto& list : lists) {
    auto it = positive_words.find(list.query_id);
    if (it == positive_words.end()) {
      throw Error("no positive document length for query '" + list.query_id + "'");
    }
    (it->second <= threshold ? short_lists : long_lists).push_back(list);
  }
  auto build = [&](Bucket bucket, std::span<const RankedList> subset) {
    EvalReport r;
    r.bucket = bucket;
    r.threshold_words = threshold;
    r.num_queries = subset.size();
    for (std::size_t k : ks) {
      r.mrr_at[k] = mrr_at_k(subset, relevance, k);
      r.precision_at[k] = precision_at_k(subset, relevance, k);
      r.sim_avg_at[k] = sim_score_average_at_k(subset, k);
    }
    return r;
  };
  return {build(Bucket::all, lists), build(Bucket::short_docs, short_lists),
          build(Bucket::long_docs, long_lists)};
}

std::vector<EvalReport> bucketed_report(std::span<const RankedList> lists, const Corpus& corpus,
                                        std::span<const std::size_t> ks, std::size_t threshold) {
  std::map<std::string, std::size_t> words;
  for (const auto& q : corpus.qrels()) {
    words[q.query_id] = corpus.document(q.positive_doc_id).word_count;
  }
  return bucketed_report(lists, relevance_from_qrels(corpus.qrels()), words, ks, threshold);
}

std::vector<ComparisonRow> compare_runs(std::span<const EvalReport> a,
                                        std::span<const EvalReport> b) {
  if (a.size() != b.size()) throw Error("compare_runs: reports cover different buckets");
  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].bucket != b[i].bucket) throw Error("compare_runs: reports cover different buckets");
    for (const char* metric : kMetricNames) {
      const auto& ma = metric_map(a[i], metric);
      const auto& mb = metric_map(b[i], metric);
      if (ma.size() != mb.size() ||
          !std::equal(ma.begin(), ma.end(), mb.begin(),
                      [](const auto& x, const auto& y) { return x.first == y.first; })) {
        throw Error(std::string("compare_runs: ks differ for metric '") + metric + "' in bucket '" +
                    std::string(to_string(a[i].bucket)) + "'");
      }
      for (const auto& [k, va] : ma) {
        const double vb = mb.at(k);
        rows.push_back({a[i].bucket, metric, k, va, vb, vb - va});
      }
    }
  }
  return rows;
}

void write_report_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "bucket,metric,k,value\n";
  for (const auto& r : reports) {
    const std::string bucket(to_string(r.bucket));
    out << bucket << ",num_queries,," << r.num_queries << '\n';
    out << bucket << ",threshold_words,," << r.threshold_words << '\n';
    for (const char* metric : kMetricNames) {
      for (const auto& [k, v] : metric_map(r, metric)) {
        out << bucket << ',' << metric << ',' << k << ',' << format_double(v) << '\n';
      }
    }
  }
}

std::vector<EvalReport> read_report_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("bucket,metric,k,value", 0) != 0) {
    throw Error(path.string() + ": not a report CSV");
  }
  std::vector<EvalReport> reports;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = parse_csv_line(line);
    if (fields.size() != 4) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected 4 fields");
    }
    try {
      const Bucket bucket = parse_bucket(fields[0]);
      if (reports.empty() || reports.back().bucket != bucket) {
        reports.push_back({});
        reports.back().bucket = bucket;
      }
      auto& r = reports.back();
      if (fields[1] == "num_queries") {
        r.num_queries = std::stoull(fields[3]);
      } else if (fields[1] == "threshold_words") {
        r.threshold_words = std::stoull(fields[3]);
      } else {
        metric_map(r, fields[1])[std::stoull(fields[2])] = std::stod(fields[3]);
      }
    } catch (const std::logic_error& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return reports;
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << "bucket,metric,k,run_a,run_b,delta\n";
  for (const auto& r : rows) {
    out << to_string(r.bucket) << ',' << r.metric << ',' << r.k << ',' << format_double(r.run_a)
        << ',' << format_double(r.run_b) << ',' << format_double(r.delta) << '\n';
  }
}

void write_ranked_jsonl(std::ostream& out, std::span<const RankedList> lists) {
  for (const auto& list : lists) {
    nlohmann::ordered_json j;
    j["query_id"] = list.query_id;
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : list.entries) {
      nlohmann::ordered_json entry;
      entry["doc_id"] = e.doc_id;
      entry["score"] = e.score;
      j["entries"].push_back(std::move(entry));
    }
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

std::vector<RankedList> read_ranked_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open ranked list file " + path.string());
  std::vector<RankedList> lists;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RankedList list;
      list.query_id = j.at("query_id").get<std::string>();
      std::set<std::string> seen;
      for (const auto& e : j.at("entries")) {
        RankedEntry entry{e.at("doc_id").get<std::string>(), e.at("score").get<double>()};
        if (!seen.insert(entry.doc_id).second) {
          throw Error("duplicate document '" + entry.doc_id + "'");
        }
        if (!list.entries.empty() && entry.score > list.entries.back().score) {
          throw Error("scores are not non-increasing");
        }
        list.entries.push_back(std::move(entry));
      }
      lists.push_back(std::move(list));
    } catch (const std::exception& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lists;
}

}  // namespace hardneg
