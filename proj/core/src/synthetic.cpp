#include "hardneg/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "hardneg/util.hpp"

namespace hardneg {

namespace {

constexpr const char* kFunctionWords[] = {
    "how", "do", "i", "the", "a", "to", "my", "with", "for", "on", "in", "of",
    "is", "can", "when", "what", "and", "this", "from", "after", "using", "why",
};

constexpr const char* kOnsets[] = {"b", "c", "d", "f", "g", "k", "l", "m", "n", "p",
                                   "r", "s", "t", "v", "z", "br", "tr", "pl", "st", "gr"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
constexpr const char* kCodas[] = {"", "", "", "n", "r", "l", "s", "x"};

template <std::size_t N>
const char* pick(Rng& rng, const char* const (&items)[N]) {
  return items[rng.index(N)];
}

std::string pseudo_word(Rng& rng) {
  std::string w;
  const std::size_t syllables = 2 + rng.index(2);
  for (std::size_t s = 0; s < syllables; ++s) {
    w += pick(rng, kOnsets);
    w += pick(rng, kVowels);
  }
  w += pick(rng, kCodas);
  return w;
}

std::string acronym(Rng& rng) {
  std::string w;
  const std::size_t letters = 3 + rng.index(2);
  for (std::size_t i = 0; i < letters; ++i) w += static_cast<char>('A' + rng.index(26));
  return w;
}

// `count` words from `make`, unique against everything already in `taken`
// (compared lower-cased, which is how the lexical models see them).
template <typename Make>
std::vector<std::string> vocabulary(Rng& rng, std::size_t count, std::set<std::string>& taken,
                                    Make make) {
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string w = make(rng);
    std::string lower = w;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (taken.insert(lower).second) out.push_back(std::move(w));
  }
  return out;
}

std::vector<std::string> draw_distinct(Rng& rng, const std::vector<std::string>& pool,
                                       std::size_t count) {
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    out.push_back(pool[idx[i]]);
  }
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

struct Vocab {
  std::vector<std::string> function_words;
  std::vector<std::string> entities;
  std::vector<std::string> topics;
  std::vector<std::string> fillers;
};

// The distinguishing content of a document, shuffled, then padded with
// function and filler words up to `length`. Content stays in the first few
// hundred words so truncation keeps it.
std::string compose(Rng& rng, const Vocab& v, std::vector<std::string> content, std::size_t length) {
  auto pad = [&] {
    return rng.uniform() < 0.03 ? v.function_words[rng.index(v.function_words.size())]
                                : v.fillers[rng.index(v.fillers.size())];
  };
  // Long documents restate their content through the first few hundred words.
  const std::size_t copies = length > 1000 ? 4 : 1;
  std::vector<std::string> lead;
  for (std::size_t c = 0; c < copies; ++c) lead.insert(lead.end(), content.begin(), content.end());
  const std::size_t lead_length = std::min(length, copies == 1 ? length : std::size_t{400});
  while (lead.size() < lead_length) lead.push_back(pad());
  rng.shuffle(lead);
  while (lead.size() < length) lead.push_back(pad());
  return join(lead);
}

std::vector<std::string> repeat(const std::vector<std::string>& words, std::size_t times) {
  std::vector<std::string> out;
  for (std::size_t t = 0; t < times; ++t) out.insert(out.end(), words.begin(), words.end());
  return out;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (n_queries < 1) throw ConfigError("synthetic benchmark needs n_queries >= 1");
  if (entities < confounders + 1) {
    throw ConfigError("synthetic benchmark needs more entities than confounders per query");
  }
  if (!(long_fraction >= 0.0 && long_fraction <= 1.0)) {
    throw ConfigError("long_fraction must lie in [0, 1]");
  }
}

Corpus make_synthetic_benchmark(const SyntheticConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, "synthetic"));

  Vocab v;
  std::set<std::string> taken;
  for (const char* w : kFunctionWords) {
    v.function_words.emplace_back(w);
    taken.insert(w);
  }
  v.entities = vocabulary(rng, config.entities, taken, acronym);
  v.topics = vocabulary(rng, 2000, taken, pseudo_word);
  v.fillers = vocabulary(rng, 1500, taken, pseudo_word);

  struct Draft {
    std::string text;
    std::string tag;
  };
  std::vector<Draft> docs;
  std::vector<std::pair<std::string, std::size_t>> queries;  // text, positive index into docs

  for (std::size_t g = 0; g < config.n_queries; ++g) {
    const auto group_entities = draw_distinct(rng, v.entities, config.confounders + 1);
    const auto& entity = group_entities.front();
    const auto words = draw_distinct(rng, v.topics, 8);
    const std::vector<std::string> asked(words.begin(), words.begin() + 3);
    const std::vector<std::string> context(words.begin() + 3, words.end());

    std::vector<std::string> query = asked;
    query.push_back(entity);
    rng.shuffle(query);
    const std::size_t lead = 1 + rng.index(3);
    for (std::size_t i = 0; i < lead; ++i) {
      query.insert(query.begin() + static_cast<std::ptrdiff_t>(rng.index(query.size() + 1)),
                   v.function_words[rng.index(v.function_words.size())]);
    }

    const bool is_long = rng.uniform() < config.long_fraction;
    const std::size_t positive_len = is_long ? 2100 + rng.index(1000) : 30 + rng.index(50);

    std::vector<std::string> positive{entity, entity};
    for (const auto& w : asked) positive.push_back(w);
    for (const auto& w : repeat(context, 2)) positive.push_back(w);
    queries.emplace_back(join(query), docs.size());
    docs.push_back({compose(rng, v, positive, positive_len), "positive"});

    // Confounders restate the asked words more often than the positive does, so
    // lexical similarity prefers them; only the entity token tells them apart.
    for (std::size_t c = 1; c <= config.confounders; ++c) {
      std::vector<std::string> content{group_entities[c], group_entities[c]};
      for (const auto& w : repeat(asked, 2)) content.push_back(w);
      for (const auto& w : repeat(context, 2)) content.push_back(w);
      const double ratio = 0.8 + 0.4 * rng.uniform();
      const auto length = static_cast<std::size_t>(static_cast<double>(positive_len) * ratio);
      docs.push_back({compose(rng, v, content, length), "confounder"});
    }
  }
  const std::size_t fillers = config.fillers == 0 ? config.n_queries : config.fillers;
  for (std::size_t f = 0; f < fillers; ++f) {
    docs.push_back({compose(rng, v, {}, 30 + rng.index(50)), "filler"});
  }

  // Neutral ids: numbered after a shuffle so ids carry no role information.
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<std::string> ids(docs.size());
  const int width = static_cast<int>(std::to_string(docs.size()).size());
  for (std::size_t slot = 0; slot < order.size(); ++slot) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "d%0*zu", width, slot);
    ids[order[slot]] = buffer;
  }

  std::vector<Document> documents;
  documents.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Document d;
    d.id = ids[i];
    d.text = std::move(docs[i].text);
    d.word_count = tokenize(d.text).size();
    d.service_tag = docs[i].tag;
    documents.push_back(std::move(d));
  }
  std::vector<Query> query_records;
  std::vector<QrelPair> qrels;
  const int qwidth = static_cast<int>(std::to_string(queries.size()).size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "q%0*zu", qwidth, q);
    Query query;
    query.id = buffer;
    query.text = queries[q].first;
    query.word_count = tokenize(query.text).size();
    qrels.push_back({query.id, ids[queries[q].second]});
    query_records.push_back(std::move(query));
  }
  return Corpus(std::move(documents), std::move(query_records), std::move(qrels));
}

Corpus make_synthetic_benchmark(std::size_t n_queries, std::size_t confounders, std::uint64_t seed) {
  SyntheticConfig config;
  config.n_queries = n_queries;
  config.confounders = confounders;
  config.seed = seed;
  return make_synthetic_benchmark(config);
}

}  // namespace hardneg
