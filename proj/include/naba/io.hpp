#pragma once

#include <naba/bae.hpp>
#include <naba/chain.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace naba {

using json = nlohmann::ordered_json;

inline json to_json(Cx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const ParamSet &xs) {
  json a = json::array();
  for (Cx x : xs)
    a.push_back(to_json(x));
  return a;
}

// Residuals may be infinite; JSON has no such number, so store null.
inline json residual_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline double residual_from(const json &j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

inline Cx cx_from(const json &j, const std::string &field) {
  if (j.is_number())
    return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("field '" + field + "': expected a complex number [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline ParamSet params_from(const json &j, const std::string &field) {
  if (!j.is_array())
    throw ConfigError("field '" + field + "': expected a list of complex numbers");
  ParamSet out;
  for (std::size_t k = 0; k < j.size(); ++k)
    out.push_back(cx_from(j[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

inline json to_json(const BetheParameters &t) {
  json a = json::array();
  for (const auto &l : t.levels)
    a.push_back(to_json(l));
  return a;
}

inline BetheParameters bethe_from(const json &j, const std::string &field) {
  if (!j.is_array())
    throw ConfigError("field '" + field + "': expected one list per level");
  BetheParameters t;
  for (std::size_t k = 0; k < j.size(); ++k)
    t.levels.push_back(params_from(j[k], field + "[" + std::to_string(k) + "]"));
  return t;
}

inline json to_json(const ChainSpec &s) {
  json j;
  j["n"] = s.n;
  j["c"] = to_json(s.c);
  j["inhomogeneities"] = to_json(s.inhom);
  j["twist"] = to_json(s.twist.kappa);
  return j;
}

inline ChainSpec chain_from(const json &j) {
  if (!j.is_object())
    throw ConfigError("field 'chain': expected an object");
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw ConfigError("field 'chain.n': required integer");
  ChainSpec s;
  s.n = j["n"].get<int>();
  if (s.n < 2)
    throw ConfigError("field 'chain.n': rank must be at least 2, got " + std::to_string(s.n));
  s.c = j.contains("c") ? cx_from(j["c"], "chain.c") : Cx(1.0);
  if (!j.contains("inhomogeneities"))
    throw ConfigError("field 'chain.inhomogeneities': required");
  s.inhom = params_from(j["inhomogeneities"], "chain.inhomogeneities");
  s.twist = j.contains("twist") ? TwistVector{params_from(j["twist"], "chain.twist")}
                                : TwistVector::identity(s.n);
  try {
    s.validate();
  } catch (const CapacityError &) {
    throw;
  } catch (const Error &e) {
    throw ConfigError(std::string("field 'chain': ") + e.what());
  }
  return s;
}

inline json to_json(const OnShellCertificate &c, const ChainSpec &chain) {
  json j;
  j["kind"] = "on-shell-certificate";
  j["chain_digest"] = c.chain_digest;
  j["chain"] = to_json(chain.with_twist(c.twist));
  j["params"] = to_json(c.params);
  j["twist"] = to_json(c.twist.kappa);
  j["max_bae_residual"] = residual_json(c.max_bae_residual);
  j["eigencheck_residual"] = residual_json(c.eigencheck_residual);
  return j;
}

struct LoadedCertificate {
  OnShellCertificate cert;
  ChainSpec chain; // with the certificate's twist
};

inline LoadedCertificate certificate_from(const json &j) {
  if (!j.is_object() || j.value("kind", "") != "on-shell-certificate")
    throw ConfigError("not an on-shell certificate");
  LoadedCertificate out;
  out.chain = chain_from(j.at("chain"));
  out.cert.chain_digest = j.at("chain_digest").get<std::string>();
  out.cert.params = bethe_from(j.at("params"), "params");
  out.cert.twist = TwistVector{params_from(j.at("twist"), "twist")};
  out.cert.max_bae_residual = residual_from(j.at("max_bae_residual"));
  out.cert.eigencheck_residual = residual_from(j.at("eigencheck_residual"));
  if (chain_digest(out.chain) != out.cert.chain_digest)
    throw DigestError("certificate digest " + out.cert.chain_digest +
                      " does not match its chain (" + chain_digest(out.chain) + ")");
  return out;
}

// Turns a parse error's byte offset into a line number.
inline json parse_json_text(const std::string &text, const std::string &what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    std::size_t line = 1;
    for (std::size_t k = 0; k < std::min<std::size_t>(e.byte, text.size()); ++k)
      line += text[k] == '\n';
    throw ConfigError(what + ": parse error at line " + std::to_string(line) + ": " + e.what());
  }
}

inline std::string read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write " + path);
  out << text;
}

inline void emit_certificate(const OnShellCertificate &c, const ChainSpec &chain,
                             const std::string &path) {
  write_file(path, to_json(c, chain).dump(2) + "\n");
}

inline LoadedCertificate load_certificate(const std::string &path) {
  const std::string text = read_file(path);
  try {
    return certificate_from(parse_json_text(text, path));
  } catch (const json::exception &e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Loads and checks that it belongs to `chain` (rank, coupling, inhomogeneities).
inline LoadedCertificate load_certificate(const std::string &path, const ChainSpec &chain) {
  LoadedCertificate c = load_certificate(path);
  if (c.cert.chain_digest != chain_digest(chain))
    throw DigestError(path + ": certificate digest " + c.cert.chain_digest +
                      " does not match chain " + chain_digest(chain));
  return c;
}

} // namespace naba
