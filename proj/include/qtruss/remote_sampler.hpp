#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "qtruss/samplers.hpp"

namespace qtruss {

/// Wire format of a sampling request: sparse upper-triangular triplets.
inline nlohmann::json qubo_request_json(const QuboProblem& problem, const SamplerConfig& config) {
  nlohmann::json triplets = nlohmann::json::array();
  for (const auto& [key, value] : problem.q) {
    triplets.push_back({key.first, key.second, value});
  }
  return nlohmann::json{{"n_bits", problem.n_bits},
                        {"qubo", std::move(triplets)},
                        {"num_reads", config.num_reads},
                        {"seed", config.seed}};
}

/// Inverse of qubo_request_json; used by anyone serving the protocol.
inline std::pair<QuboProblem, SamplerConfig> parse_qubo_request(const nlohmann::json& body) {
  QuboProblem problem;
  SamplerConfig config;
  problem.n_bits = body.at("n_bits").get<int>();
  for (const auto& entry : body.at("qubo")) {
    problem.add(entry.at(0).get<int>(), entry.at(1).get<int>(), entry.at(2).get<double>());
  }
  config.num_reads = body.at("num_reads").get<int>();
  config.seed = body.at("seed").get<std::uint64_t>();
  return {std::move(problem), config};
}

inline nlohmann::json samples_to_json(const std::vector<Sample>& samples) {
  nlohmann::json out = nlohmann::json::array();
  for (const Sample& s : samples) {
    nlohmann::json bits = nlohmann::json::array();
    for (std::uint8_t b : s.bits) bits.push_back(static_cast<int>(b));
    out.push_back({{"bits", std::move(bits)}, {"energy", s.energy}, {"occurrences", s.occurrences}});
  }
  return nlohmann::json{{"samples", std::move(out)}};
}

namespace detail {

struct EndpointParts {
  std::string host_port;  ///< scheme://host:port
  std::string base_path;  ///< leading path, possibly empty, no trailing slash
};

inline EndpointParts split_endpoint(const std::string& endpoint) {
  if (endpoint.empty()) throw ConfigError("remote sampler requires an endpoint");
  const auto scheme_end = endpoint.find("://");
  const std::size_t path_start =
      endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  EndpointParts parts;
  if (path_start == std::string::npos) {
    parts.host_port = endpoint;
  } else {
    parts.host_port = endpoint.substr(0, path_start);
    parts.base_path = endpoint.substr(path_start);
    while (!parts.base_path.empty() && parts.base_path.back() == '/') parts.base_path.pop_back();
  }
  return parts;
}

}  // namespace detail

/// POST the QUBO to {endpoint}/v1/sample and validate the reply: energies are
/// recomputed locally (mismatch beyond 1e-9 is a protocol violation) and the
/// list is re-sorted into the library's deterministic order.
inline std::vector<Sample> remote_sample(const QuboProblem& problem, const SamplerConfig& config,
                                         const std::string& endpoint) {
  if (problem.n_bits == 0) return detail::empty_problem_result();
  const detail::EndpointParts parts = detail::split_endpoint(endpoint);

  httplib::Client client(parts.host_port);
  const auto timeout = config.timeout;
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
  client.set_read_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
  client.set_write_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));

  const std::string body = qubo_request_json(problem, config).dump();
  httplib::Result result = client.Post(parts.base_path + "/v1/sample", body, "application/json");
  if (!result) {
    throw TransportError("remote sampler unreachable: " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw HttpError("remote sampler returned HTTP " + std::to_string(result->status));
  }

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("remote sampler sent invalid JSON: ") + e.what());
  }

  std::vector<Sample> samples;
  try {
    for (const auto& entry : reply.at("samples")) {
      Sample s;
      for (const auto& bit : entry.at("bits")) {
        const int v = bit.get<int>();
        if (v != 0 && v != 1) throw ProtocolError("remote sampler sent a non-binary bit");
        s.bits.push_back(static_cast<std::uint8_t>(v));
      }
      s.energy = entry.at("energy").get<double>();
      s.occurrences = entry.value("occurrences", 1);
      samples.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("remote sampler reply malformed: ") + e.what());
  }
  if (samples.empty()) throw ProtocolError("remote sampler returned no samples");

  for (Sample& s : samples) {
    if (static_cast<int>(s.bits.size()) != problem.n_bits) {
      throw ProtocolError("remote sampler returned a sample with wrong bit count");
    }
    const double local = problem.energy(s.bits);
    if (std::abs(local - s.energy) > 1e-9) {
      throw ProtocolError("remote sampler energy mismatch: reported " + std::to_string(s.energy) +
                          ", recomputed " + std::to_string(local));
    }
    s.energy = local;
    if (s.occurrences < 1) throw ProtocolError("remote sampler sent non-positive occurrences");
  }
  std::sort(samples.begin(), samples.end(), detail::sample_order);
  return samples;
}

/// Backend factory for the CLI: kind is "exhaustive", "sa" or "remote".
inline Sampler make_sampler(const std::string& kind, const std::string& endpoint = {}) {
  if (kind == "exhaustive") {
    return [](const QuboProblem& p, const SamplerConfig& c) { return exhaustive_sample(p, c); };
  }
  if (kind == "sa") {
    return [](const QuboProblem& p, const SamplerConfig& c) { return simulated_annealing_sample(p, c); };
  }
  if (kind == "remote") {
    if (endpoint.empty()) throw ConfigError("sampler 'remote' requires an endpoint");
    return [endpoint](const QuboProblem& p, const SamplerConfig& c) {
      return remote_sample(p, c, endpoint);
    };
  }
  throw ConfigError("unknown sampler '" + kind + "' (expected exhaustive, sa or remote)");
}

}  // namespace qtruss
