#pragma once

// QUBO exchange format and the HTTP solver adapter.
//
//   request:  {"n": N, "offset": c, "linear": [[i, v]..], "quadratic": [[i, j, v]..]}   (i < j)
//   response: {"bits": [0|1 ..], "energy": v}

#include <chrono>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "qato/error.hpp"
#include "qato/qubo.hpp"
#include "qato/solvers.hpp"

namespace qato {

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Streams the fully materialized QUBO (including the dense constraint pairs).
inline void write_qubo_exchange(const QuboProblem& q, std::ostream& out) {
  out << "{\"n\": " << q.size() << ", \"offset\": " << detail::fmt17(q.offset()) << ", \"linear\": [";
  bool first = true;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q.linear(i) == 0.0) continue;
    out << (first ? "" : ", ") << '[' << i << ", " << detail::fmt17(q.linear(i)) << ']';
    first = false;
  }
  out << "], \"quadratic\": [";
  first = true;
  q.for_each_pair([&](std::size_t i, std::size_t j, double v) {
    if (v == 0.0) return;
    out << (first ? "" : ", ") << '[' << i << ", " << j << ", " << detail::fmt17(v) << ']';
    first = false;
  });
  out << "]}\n";
}

inline std::string qubo_exchange_string(const QuboProblem& q) {
  std::ostringstream ss;
  write_qubo_exchange(q, ss);
  return ss.str();
}

/// Reads the exchange format into a QUBO with explicit pairs only.
inline QuboProblem read_qubo_exchange(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("qubo exchange: ") + e.what());
  }
  try {
    const auto n = j.at("n").get<std::size_t>();
    QuboProblem q(n);
    q.set_offset(j.at("offset").get<double>());
    for (const auto& t : j.at("linear")) {
      const auto i = t.at(0).get<std::size_t>();
      if (i >= n) throw ParseError("qubo exchange: linear index out of range");
      q.add_linear(i, t.at(1).get<double>());
    }
    for (const auto& t : j.at("quadratic")) {
      const auto i = t.at(0).get<std::size_t>(), k = t.at(1).get<std::size_t>();
      if (!(i < k) || k >= n) throw ParseError("qubo exchange: quadratic indices must satisfy i < j < n");
      q.add_quadratic(i, k, t.at(2).get<double>());
    }
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("qubo exchange: ") + e.what());
  }
}

struct RemoteEndpoint {
  std::string base;  // scheme://host:port
  std::string path = "/";
};

inline RemoteEndpoint parse_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw RemoteError("endpoint must look like http://host:port/path: '" + url + "'");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

/// Parses a solver response; the reported energy is replaced by local evaluation.
inline SolveOutcome parse_remote_response(const std::string& body, const QuboProblem& qubo) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw RemoteError(std::string("malformed response: ") + e.what());
  }
  if (!j.is_object() || !j.contains("bits") || !j["bits"].is_array())
    throw RemoteError("malformed response: missing 'bits' array");
  const auto& jb = j["bits"];
  if (jb.size() != qubo.size())
    throw RemoteError("malformed response: expected " + std::to_string(qubo.size()) + " bits, got " +
                      std::to_string(jb.size()));
  SolveOutcome out;
  out.bits = BitAssignment(qubo.size());
  for (std::size_t i = 0; i < jb.size(); ++i) {
    if (!jb[i].is_number_integer() || (jb[i].get<int>() != 0 && jb[i].get<int>() != 1))
      throw RemoteError("malformed response: bits must be 0 or 1");
    out.bits[i] = static_cast<std::uint8_t>(jb[i].get<int>());
  }
  if (j.contains("energy") && !j["energy"].is_number()) throw RemoteError("malformed response: 'energy' is not a number");
  out.energy = evaluate(qubo, out.bits);
  out.samples = 1;
  return out;
}

inline SolveOutcome solve_remote(const QuboProblem& qubo, const std::string& endpoint, double timeout_seconds = 60.0) {
  const auto ep = parse_endpoint(endpoint);
  httplib::Client client(ep.base);
  const auto sec = static_cast<time_t>(timeout_seconds);
  const auto usec = static_cast<time_t>((timeout_seconds - static_cast<double>(sec)) * 1e6);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  const auto body = qubo_exchange_string(qubo);
  const auto t0 = std::chrono::steady_clock::now();
  auto res = client.Post(ep.path, body, "application/json");
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!res) throw RemoteError("network error contacting " + endpoint + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw RemoteError("remote solver returned HTTP " + std::to_string(res->status));
  auto out = parse_remote_response(res->body, qubo);
  out.search_seconds = dt;
  return out;
}

inline QuboSolver make_remote_solver(std::string endpoint, double timeout_seconds = 60.0) {
  return [endpoint = std::move(endpoint), timeout_seconds](const QuboProblem& q) {
    return solve_remote(q, endpoint, timeout_seconds);
  };
}

}  // namespace qato
