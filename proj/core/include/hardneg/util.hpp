#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hardneg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input files or broken id references.
class IngestError : public Error {
 public:
  using Error::Error;
};

/// An embedding provider failed (transport, malformed response, dim mismatch).
class ProviderError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Raised by the pipeline; carries the name of the stage that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

namespace log {

enum class Level { info, warning };
using Sink = std::function<void(Level, std::string_view)>;

// Installs a sink and returns the previous one. The default sink writes
// warnings to stderr and drops info messages unless verbose output is on.
Sink set_sink(Sink sink);
void set_verbose(bool verbose);
void info(std::string_view message);
void warn(std::string_view message);

}  // namespace log

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Seeded 64-bit string hash (FNV-1a folded through a splitmix64 finalizer).
std::uint64_t hash64(std::string_view bytes, std::uint64_t seed);

// Per-item RNG stream derived from a global seed, independent of scheduling.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key);

/// Portable deterministic RNG. Uses only the raw mt19937_64 stream so results
/// do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n); n must be positive.
  std::size_t index(std::size_t n);
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temp file and renames into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Shortest representation that round-trips a double exactly.
std::string format_double(double value);
// Fixed-point with `digits` decimals, used for human-facing CSV reports.
std::string format_fixed(double value, int digits);

std::vector<std::string> split(std::string_view text, char delimiter);

// RFC 4180 quoting: fields with comma, quote or newline are quoted.
std::string csv_escape(std::string_view field);
std::vector<std::string> parse_csv_line(std::string_view line);

}  // namespace hardneg
