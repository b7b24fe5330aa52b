#include <httplib.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "hardneg/embed.hpp"
#include "hardneg/util.hpp"

namespace hardneg {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint_url must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpProvider::HttpProvider(ProviderSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind != ProviderKind::http) throw ConfigError("HttpProvider needs kind=http");
  split_url(spec_.endpoint_url);
}

std::vector<std::vector<double>> HttpProvider::embed_batch(std::span<const std::string> texts) {
  const auto endpoint = split_url(spec_.endpoint_url);
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);

  std::vector<std::vector<double>> rows;
  rows.reserve(texts.size());
  std::size_t batch_index = 0;
  for (std::size_t start = 0; start < texts.size(); start += spec_.batch_size, ++batch_index) {
    const std::size_t end = std::min(texts.size(), start + spec_.batch_size);
    const std::string where = "provider '" + spec_.model_id + "' batch " +
                              std::to_string(batch_index) + " (texts " + std::to_string(start) +
                              ".." + std::to_string(end - 1) + ")";
    nlohmann::json body;
    body["model"] = spec_.model_id;
    body["texts"] = nlohmann::json::array();
    for (std::size_t i = start; i < end; ++i) body["texts"].push_back(texts[i]);

    auto response = client.Post(endpoint.path,
                                body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                                "application/json");
    if (!response) {
      throw ProviderError(where + ": transport failure (" + httplib::to_string(response.error()) +
                          ")");
    }
    if (response->status != 200) {
      throw ProviderError(where + ": HTTP status " + std::to_string(response->status));
    }
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(response->body);
    } catch (const nlohmann::json::exception& e) {
      throw ProviderError(where + ": malformed response: " + e.what());
    }
    if (!parsed.is_object() || !parsed.contains("vectors") || !parsed["vectors"].is_array()) {
      throw ProviderError(where + ": response lacks a 'vectors' array");
    }
    const auto& vectors = parsed["vectors"];
    if (vectors.size() != end - start) {
      throw ProviderError(where + ": expected " + std::to_string(end - start) + " vectors, got " +
                          std::to_string(vectors.size()));
    }
    for (const auto& row : vectors) {
      if (!row.is_array() || row.size() != spec_.dim) {
        throw ProviderError(where + ": vector dim mismatch (expected " +
                            std::to_string(spec_.dim) + ")");
      }
      std::vector<double> values;
      values.reserve(row.size());
      for (const auto& x : row) {
        if (!x.is_number()) throw ProviderError(where + ": non-numeric vector entry");
        const double v = x.get<double>();
        if (!std::isfinite(v)) throw ProviderError(where + ": non-finite vector entry");
        values.push_back(v);
      }
      rows.push_back(std::move(values));
    }
  }
  return rows;
}

}  // namespace hardneg
