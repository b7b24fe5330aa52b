#pragma once

#include <cstddef>
#include <cstdint>

#include "hardneg/corpus.hpp"

namespace hardneg {

/// Each query names an entity (an upper-case acronym) plus topic words. Its
/// positive mentions the entity; confounders share the topic vocabulary, lean
/// on the query's topic words even harder, but name a different entity.
/// Fillers share nothing but function words.
struct SyntheticConfig {
  std::size_t n_queries = 250;
  std::size_t confounders = 5;
  std::size_t fillers = 0;      // 0: one filler per query
  double long_fraction = 0.1;   // groups whose documents exceed 2048 words
  std::size_t entities = 40;
  std::uint64_t seed = 0;

  void validate() const;
};

Corpus make_synthetic_benchmark(const SyntheticConfig& config);
Corpus make_synthetic_benchmark(std::size_t n_queries, std::size_t confounders, std::uint64_t seed);

}  // namespace hardneg
