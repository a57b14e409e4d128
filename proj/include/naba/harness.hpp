#pragma once

#include <naba/bae.hpp>
#include <naba/bethe.hpp>
#include <naba/chain.hpp>
#include <naba/form_factors.hpp>
#include <naba/io.hpp>
#include <naba/random.hpp>
#include <naba/scalar_products.hpp>

#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace naba {

inline constexpr const char *kToolkitVersion = "0.1.0";

inline const std::vector<std::string> &task_names() {
  static const std::vector<std::string> names = {
      "ybe", "rtt", "bv-equiv", "solve-bae", "norm", "sum-formula", "det-sp",
      "ff",  "universal-ff", "composite", "all"};
  return names;
}

inline std::map<std::string, double> default_tolerances() {
  return {{"ybe", 1e-12},          {"rtt", 1e-12},        {"transfer", 1e-12},
          {"bv_equiv", 1e-10},     {"bae", 1e-11},        {"eigen", 1e-9},
          {"sum_formula", 1e-10},  {"norm", 1e-9},        {"gaudin_fd", 1e-6},
          {"det_sp", 1e-8},        {"orthogonality", 1e-8}, {"zero_mode", 1e-8},
          {"finite_w", 1e-3},      {"uff_spread", 1e-8},  {"twist_uff", 1e-6},
          {"ff_twist", 1e-6},      {"composite", 1e-8},   {"telescoping", 1e-12},
          {"factorization", 1e-12}, {"selection", 1e-13}};
}

struct CheckRecord {
  std::string name;
  json inputs;
  json values = json::object();
  json residuals = json::object();
  double tolerance = 0;
  bool pass = false;
  std::string error;
  double seconds = 0;
};

struct Report {
  json body;   // deterministic part
  json timing; // wall times
  bool passed = false;
  json document() const {
    json d;
    d["report"] = body;
    d["timing"] = timing;
    return d;
  }
};

struct RunConfig {
  json raw;
  ChainSpec chain;
  std::string task;
  std::uint64_t rng_seed = 0;
  std::map<std::string, double> tolerances;
  json overrides = json::object();
  std::string output_path;
};

namespace detail {

inline std::string digest_text(const std::string &s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string padded(int k, int width = 3) {
  std::string s = std::to_string(k);
  return std::string(std::max(0, width - static_cast<int>(s.size())), '0') + s;
}

inline std::vector<int> card_from(const json &j, const std::string &field, int n) {
  if (!j.is_array())
    throw ConfigError("field '" + field + "': expected a list of integers");
  std::vector<int> out;
  for (const auto &x : j) {
    if (!x.is_number_integer() || x.get<int>() < 0)
      throw ConfigError("field '" + field + "': entries must be nonnegative integers");
    out.push_back(x.get<int>());
  }
  if (static_cast<int>(out.size()) != n - 1)
    throw ConfigError("field '" + field + "': expected " + std::to_string(n - 1) + " entries");
  return out;
}

// Fields each task needs beyond the chain.
inline std::vector<std::string> required_fields(const std::string &task) {
  if (task == "solve-bae" || task == "norm" || task == "det-sp")
    return {"cardinalities"};
  if (task == "ff" || task == "universal-ff" || task == "composite")
    return {"bra_cardinalities", "ket_cardinalities"};
  return {};
}

} // namespace detail

// Parses and validates; throws ConfigError naming the field.
inline RunConfig parse_config(const json &j) {
  if (!j.is_object())
    throw ConfigError("config: expected an object");
  RunConfig cfg;
  cfg.raw = j;
  if (!j.contains("chain"))
    throw ConfigError("field 'chain': required");
  cfg.chain = chain_from(j["chain"]);
  if (!j.contains("task") || !j["task"].is_string())
    throw ConfigError("field 'task': required string");
  cfg.task = j["task"].get<std::string>();
  const auto &names = task_names();
  if (std::find(names.begin(), names.end(), cfg.task) == names.end())
    throw ConfigError("field 'task': unknown task '" + cfg.task + "'");
  if (!j.contains("rng_seed") || !j["rng_seed"].is_number_integer())
    throw ConfigError("field 'rng_seed': required integer");
  cfg.rng_seed = j["rng_seed"].get<std::uint64_t>();
  cfg.tolerances = default_tolerances();
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object())
      throw ConfigError("field 'tolerances': expected an object");
    for (const auto &[k, v] : j["tolerances"].items()) {
      if (!cfg.tolerances.count(k))
        throw ConfigError("field 'tolerances." + k + "': unknown tolerance");
      if (!v.is_number() || v.get<double>() <= 0)
        throw ConfigError("field 'tolerances." + k + "': expected a positive number");
      cfg.tolerances[k] = v.get<double>();
      cfg.overrides[k] = v;
    }
  }
  if (j.contains("output_path")) {
    if (!j["output_path"].is_string())
      throw ConfigError("field 'output_path': expected a path string");
    cfg.output_path = j["output_path"].get<std::string>();
  }
  if (j.contains("draws") && (!j["draws"].is_number_integer() || j["draws"].get<int>() < 1))
    throw ConfigError("field 'draws': expected a positive integer");
  const int n = cfg.chain.n;
  for (const char *f : {"cardinalities", "bra_cardinalities", "ket_cardinalities"})
    if (j.contains(f))
      detail::card_from(j[f], f, n);
  if (cfg.task != "all")
    for (const auto &f : detail::required_fields(cfg.task))
      if (!j.contains(f))
        throw ConfigError("field '" + f + "': required for task " + cfg.task);
  if (j.contains("seeds")) {
    if (!j["seeds"].is_array())
      throw ConfigError("field 'seeds': expected a list of parameter sets");
    for (std::size_t k = 0; k < j["seeds"].size(); ++k)
      bethe_from(j["seeds"][k], "seeds[" + std::to_string(k) + "]");
  }
  if (j.contains("entry")) {
    const auto &e = j["entry"];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer() || e[0].get<int>() < 1 || e[0].get<int>() > n ||
        e[1].get<int>() < 1 || e[1].get<int>() > n)
      throw ConfigError("field 'entry': expected [i, j] with 1 <= i, j <= n");
  }
  if (j.contains("kappa")) {
    if (!j["kappa"].is_array())
      throw ConfigError("field 'kappa': expected a list of numbers");
    for (const auto &k : j["kappa"])
      if (cx_from(k, "kappa") == Cx(0.0))
        throw ConfigError("field 'kappa': entries must be nonzero");
  }
  return cfg;
}

class Harness {
public:
  explicit Harness(RunConfig cfg) : cfg_(std::move(cfg)), model_(cfg_.chain) {}

  Report run() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> tasks;
    std::vector<std::string> skipped;
    if (cfg_.task == "all") {
      for (const auto &t : task_names()) {
        if (t == "all")
          continue;
        bool ok = applicable(t);
        for (const auto &f : detail::required_fields(t))
          ok = ok && cfg_.raw.contains(f);
        (ok ? tasks : skipped).push_back(t);
      }
    } else {
      tasks.push_back(cfg_.task);
    }
    for (const auto &t : tasks)
      run_task(t);

    std::sort(records_.begin(), records_.end(),
              [](const CheckRecord &a, const CheckRecord &b) { return a.name < b.name; });
    Report rep;
    json checks = json::array();
    json times = json::object();
    int passed = 0;
    for (const auto &r : records_) {
      json c;
      c["name"] = r.name;
      c["inputs_digest"] = detail::digest_text(r.inputs.dump());
      c["inputs"] = r.inputs;
      c["values"] = r.values;
      c["residuals"] = r.residuals;
      c["tolerance"] = r.tolerance;
      c["pass"] = r.pass;
      if (!r.error.empty())
        c["error"] = r.error;
      checks.push_back(std::move(c));
      times[r.name] = r.seconds;
      passed += r.pass;
    }
    rep.body["toolkit_version"] = kToolkitVersion;
    rep.body["config_digest"] = detail::digest_text(cfg_.raw.dump());
    rep.body["task"] = cfg_.task;
    rep.body["chain"] = to_json(cfg_.chain);
    rep.body["chain_digest"] = chain_digest(cfg_.chain);
    rep.body["rng_seed"] = cfg_.rng_seed;
    rep.body["tolerance_overrides"] = cfg_.overrides;
    rep.body["skipped_tasks"] = skipped;
    rep.body["checks"] = std::move(checks);
    rep.body["summary"] = {{"total", static_cast<int>(records_.size())},
                           {"passed", passed},
                           {"failed", static_cast<int>(records_.size()) - passed}};
    rep.passed = !records_.empty() && passed == static_cast<int>(records_.size());
    rep.timing["checks"] = std::move(times);
    rep.timing["total_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  }

private:
  RunConfig cfg_;
  ChainModel model_;
  std::vector<CheckRecord> records_;

  double tol(const std::string &k) const { return cfg_.tolerances.at(k); }
  int draws(int dflt) const { return cfg_.raw.value("draws", dflt); }
  int n() const { return cfg_.chain.n; }

  bool applicable(const std::string &t) const {
    if (t == "bv-equiv" || t == "det-sp" || t == "ff" || t == "universal-ff" || t == "composite")
      return n() == 3;
    if (t == "sum-formula")
      return n() == 2;
    if (t == "ybe")
      return true;
    return n() <= 3 || t == "rtt" || t == "solve-bae";
  }

  // Each task draws from its own stream so "all" reproduces single-task runs.
  Rng rng_for(const std::string &task) const {
    return Rng(cfg_.rng_seed ^ std::hash<std::string>{}(task) * 0x9e3779b97f4a7c15ull);
  }
  std::uint64_t seed_for(const std::string &what) const {
    return cfg_.rng_seed ^ std::hash<std::string>{}(what);
  }

  // body fills values/residuals and returns pass
  void check(const std::string &name, json inputs, double tolerance,
             const std::function<bool(CheckRecord &)> &body) {
    CheckRecord r;
    r.name = name;
    r.inputs = std::move(inputs);
    r.tolerance = tolerance;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.pass = body(r);
    } catch (const std::exception &e) {
      r.pass = false;
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    records_.push_back(std::move(r));
  }

  void run_task(const std::string &t) {
    if (!applicable(t)) {
      check(t + "/applicability", json::object(), 0, [&](CheckRecord &r) -> bool {
        throw UnsupportedError("task " + t + " is not available for n = " + std::to_string(n()));
        return false;
      });
      return;
    }
    if (t == "ybe")
      task_ybe();
    else if (t == "rtt")
      task_rtt();
    else if (t == "bv-equiv")
      task_bv_equiv();
    else if (t == "solve-bae")
      task_solve();
    else if (t == "norm")
      task_norm();
    else if (t == "sum-formula")
      task_sum_formula();
    else if (t == "det-sp")
      task_det_sp();
    else if (t == "ff")
      task_ff();
    else if (t == "universal-ff")
      task_universal_ff();
    else if (t == "composite")
      task_composite();
  }

  std::vector<int> card(const char *field) const {
    return detail::card_from(cfg_.raw.at(field), field, n());
  }

  BetheParameters random_params(Rng &rng, const std::vector<int> &a) const {
    BetheParameters t;
    for (int k : a) {
      ParamSet l;
      for (int q = 0; q < k; ++q)
        l.push_back(rng.box(1.0) + Cx(0.0, 0.25));
      t.levels.push_back(l);
    }
    return t;
  }

  std::vector<OnShellCertificate> solve(const ChainModel &model, const std::vector<int> &a,
                                        const std::string &tag, bool with_seeds) {
    std::vector<BetheParameters> seeds;
    if (with_seeds && cfg_.raw.contains("seeds"))
      for (std::size_t k = 0; k < cfg_.raw["seeds"].size(); ++k)
        seeds.push_back(bethe_from(cfg_.raw["seeds"][k], "seeds"));
    SolveOptions opt;
    opt.auto_seeds = cfg_.raw.value("auto_seeds", 40);
    opt.rng_seed = seed_for(tag);
    opt.thresholds = {tol("bae"), tol("eigen")};
    return solve_newton(model, a, seeds, opt).certificates;
  }

  void task_ybe() {
    Rng rng = rng_for("ybe");
    const int N = draws(50);
    for (int k = 0; k < N; ++k) {
      Cx z1 = rng.box(2.0), z2 = rng.box(2.0), z3 = rng.box(2.0);
      json in = {{"n", n()}, {"z", to_json(ParamSet{z1, z2, z3})}, {"c", to_json(cfg_.chain.c)}};
      check("ybe/draw-" + detail::padded(k), in, tol("ybe"), [&](CheckRecord &r) {
        double res = check_ybe(n(), z1, z2, z3, cfg_.chain.c);
        r.residuals["ybe"] = res;
        return res <= r.tolerance;
      });
    }
  }

  void task_rtt() {
    Rng rng = rng_for("rtt");
    const int N = draws(50);
    for (int k = 0; k < N; ++k) {
      Cx z1 = rng.box(2.0) + Cx(0, 0.3), z2 = rng.box(2.0) - Cx(0, 0.3);
      json in = {{"z", to_json(ParamSet{z1, z2})}};
      check("rtt/draw-" + detail::padded(k), in, tol("rtt"), [&](CheckRecord &r) {
        double res = check_rtt(cfg_.chain, z1, z2);
        r.residuals["rtt"] = res;
        return res <= r.tolerance;
      });
      check("transfer/draw-" + detail::padded(k), in, tol("transfer"), [&](CheckRecord &r) {
        OperatorSlice a = model_.transfer(z1), b = model_.transfer(z2);
        TwistVector kap;
        for (int i = 0; i < n(); ++i)
          kap.kappa.push_back(Cx(0.5 + 0.3 * i, 0.1 * i));
        OperatorSlice ta = model_.twisted_transfer(z1, kap), tb = model_.twisted_transfer(z2, kap);
        const double s = std::max(1.0, max_abs(a) * max_abs(b));
        double plain = max_abs(a * b - b * a) / s;
        double twisted = max_abs(ta * tb - tb * ta) / std::max(1.0, max_abs(ta) * max_abs(tb));
        r.residuals["commutator"] = plain;
        r.residuals["twisted_commutator"] = twisted;
        return plain <= r.tolerance && twisted <= r.tolerance;
      });
    }
  }

  void task_bv_equiv() {
    Rng rng = rng_for("bv-equiv");
    const int N = draws(20);
    const int max_total = cfg_.raw.value("max_total", 3);
    for (int a = 0; a <= max_total; ++a)
      for (int b = 0; a + b <= max_total; ++b)
        for (int k = 0; k < N; ++k) {
          BetheParameters t = random_params(rng, {a, b});
          std::string name = "bv-equiv/a" + std::to_string(a) + "-b" + std::to_string(b) +
                             "/draw-" + detail::padded(k);
          check(name, {{"params", to_json(t)}}, tol("bv_equiv"), [&](CheckRecord &r) {
            StateVector e = bv_gl3_explicit(model_, t.level(1), t.level(2)).vec;
            StateVector tr = bv_gl3_trace(model_, t.level(1), t.level(2)).vec;
            StateVector rc = bv_gl3_recursion(model_, t.level(1), t.level(2)).vec;
            double d1 = relative_deviation(tr, e, 1.0), d2 = relative_deviation(rc, e, 1.0);
            r.values["norm_explicit"] = e.norm();
            r.residuals["trace_vs_explicit"] = d1;
            r.residuals["recursion_vs_explicit"] = d2;
            return d1 <= r.tolerance && d2 <= r.tolerance;
          });
        }
  }

  void record_certificates(const std::string &prefix, const ChainModel &model,
                           const std::vector<OnShellCertificate> &certs) {
    for (std::size_t k = 0; k < certs.size(); ++k) {
      const auto &c = certs[k];
      check(prefix + "/cert-" + detail::padded(static_cast<int>(k)), {{"params", to_json(c.params)}},
            tol("eigen"), [&](CheckRecord &r) {
              r.values["params"] = to_json(c.params);
              r.residuals["bae"] = residual_json(c.max_bae_residual);
              r.residuals["eigencheck"] = residual_json(c.eigencheck_residual);
              return c.valid({tol("bae"), tol("eigen")});
            });
    }
    if (cfg_.raw.contains("certificates_out") && model.n() <= 3) {
      const std::string dir = cfg_.raw["certificates_out"].get<std::string>();
      for (std::size_t k = 0; k < certs.size(); ++k)
        emit_certificate(certs[k], model.spec(),
                         dir + "/" + detail::digest_text(prefix) + "-" +
                             detail::padded(static_cast<int>(k)) + ".json");
    }
  }

  void task_solve() {
    const auto a = card("cardinalities");
    auto certs = solve(model_, a, "solve-bae", true);
    if (certs.empty())
      check("solve-bae/none", {{"cardinalities", a}}, 0, [&](CheckRecord &) -> bool {
        throw ConvergenceError("no on-shell solution found");
      });
    record_certificates("solve-bae", model_, certs);
    if (cfg_.raw.contains("expect")) {
      const auto &ex = cfg_.raw["expect"];
      for (std::size_t k = 0; k < ex.size(); ++k) {
        BetheParameters want = bethe_from(ex[k], "expect");
        check("solve-bae/expected-" + detail::padded(static_cast<int>(k)),
              {{"params", to_json(want)}}, 1e-8, [&](CheckRecord &r) {
                for (const auto &c : certs)
                  if (detail::same_roots(c.params, want, r.tolerance))
                    return true;
                return false;
              });
      }
    }
  }

  void task_norm() {
    const auto a = card("cardinalities");
    auto certs = solve(model_, a, "norm", true);
    if (certs.empty())
      check("norm/none", {{"cardinalities", a}}, 0, [&](CheckRecord &) -> bool {
        throw ConvergenceError("no on-shell solution found");
      });
    for (std::size_t k = 0; k < certs.size(); ++k) {
      const auto &c = certs[k];
      check("norm/cert-" + detail::padded(static_cast<int>(k)), {{"params", to_json(c.params)}},
            tol("norm"), [&](CheckRecord &r) {
              Cx nd = norm_det(model_, c);
              Cx bf = brute_inner(model_, c.params, c.params);
              r.values["norm_det"] = to_json(nd);
              r.values["brute_force"] = to_json(bf);
              double d = relative_deviation(nd, bf);
              r.residuals["relative"] = d;
              const double fd = gaudin_fd_deviation(c.params);
              r.residuals["gaudin_vs_fd"] = fd;
              return d <= r.tolerance && fd <= tol("gaudin_fd");
            });
    }
  }

  // max |G - FD| / max |G| with a central difference of -c log Φ.
  double gaudin_fd_deviation(const BetheParameters &t) const {
    Eigen::MatrixXcd G = gaudin_matrix(model_, t);
    std::vector<Cx> x = flatten(t);
    const auto a = t.cardinalities();
    const double h = 1e-6;
    Eigen::MatrixXcd FD(G.rows(), G.cols());
    for (std::size_t l = 0; l < x.size(); ++l) {
      auto xp = x, xm = x;
      xp[l] += h;
      xm[l] -= h;
      FD.col(l) = -model_.c() * (log_bae(model_, unflatten(xp, a)) -
                                 log_bae(model_, unflatten(xm, a))) / (2 * h);
    }
    return max_abs(G - FD) / std::max(1.0, max_abs(G));
  }

  void task_sum_formula() {
    Rng rng = rng_for("sum-formula");
    const int N = draws(20);
    const int max_a = cfg_.raw.value("max_a", 3);
    for (int a = 0; a <= max_a; ++a)
      for (int k = 0; k < N; ++k) {
        BetheParameters s = random_params(rng, {a}), t = random_params(rng, {a});
        check("sum-formula/a" + std::to_string(a) + "/draw-" + detail::padded(k),
              {{"s", to_json(s)}, {"t", to_json(t)}}, tol("sum_formula"), [&](CheckRecord &r) {
                auto sf = sum_formula(model_, s, t);
                Cx bf = brute_inner(model_, s, t);
                // For a > L both sides vanish; compare against the term magnitudes.
                double d = relative_deviation(sf.value, bf, sf.magnitude);
                r.values["sum_formula"] = to_json(sf.value);
                r.values["brute_force"] = to_json(bf);
                r.values["terms"] = sf.terms;
                r.values["expected_terms"] = sum_formula_term_count({a});
                r.residuals["relative"] = d;
                return d <= r.tolerance && sf.terms == sum_formula_term_count({a});
              });
      }
  }

  std::vector<Cx> kappas() const {
    std::vector<Cx> out;
    if (cfg_.raw.contains("kappa"))
      for (const auto &k : cfg_.raw["kappa"])
        out.push_back(cx_from(k, "kappa"));
    else
      out = {0.7, 1.3};
    return out;
  }

  void task_det_sp() {
    const auto a = card("cardinalities");
    auto kets = solve(model_, a, "det-sp/ket", true);
    if (kets.empty())
      check("det-sp/none", {{"cardinalities", a}}, 0, [&](CheckRecord &) -> bool {
        throw ConvergenceError("no untwisted on-shell solution found");
      });
    for (Cx kap : kappas()) {
      ChainModel tw(cfg_.chain.with_twist(cfg_.chain.twist * TwistVector::single(3, 2, kap)));
      auto bras = solve(tw, a, "det-sp/bra/" + shortest(kap.real()), false);
      const std::string tag = "det-sp/kappa-" + shortest(kap.real()) + "," + shortest(kap.imag());
      if (bras.empty())
        check(tag + "/none", {{"kappa", to_json(kap)}}, 0, [&](CheckRecord &) -> bool {
          throw ConvergenceError("no twisted on-shell solution found");
        });
      for (std::size_t p = 0; p < bras.size(); ++p)
        for (std::size_t q = 0; q < kets.size(); ++q)
          check(tag + "/pair-" + detail::padded(static_cast<int>(p)) + "-" +
                    detail::padded(static_cast<int>(q)),
                {{"bra", to_json(bras[p].params)}, {"ket", to_json(kets[q].params)}},
                tol("det_sp"), [&](CheckRecord &r) {
                  Cx d = twisted_det_sp_gl3(model_, bras[p], kap, kets[q]);
                  StateVector cv = dual_bv(tw, bras[p].params);
                  StateVector bv = bethe_vector(model_, kets[q].params).vec;
                  Cx bf = inner(cv, bv);
                  const double bound = cv.norm() * bv.norm();
                  r.values["determinant"] = to_json(d);
                  r.values["brute_force"] = to_json(bf);
                  r.values["bound"] = bound;
                  double dev = relative_deviation(d, bf, bound);
                  r.residuals["relative"] = dev;
                  return dev <= r.tolerance;
                });
    }
    for (std::size_t p = 0; p < kets.size(); ++p)
      for (std::size_t q = p + 1; q < kets.size(); ++q)
        check("orthogonality/pair-" + detail::padded(static_cast<int>(p)) + "-" +
                  detail::padded(static_cast<int>(q)),
              {{"a", to_json(kets[p].params)}, {"b", to_json(kets[q].params)}},
              tol("orthogonality"), [&](CheckRecord &r) {
                auto o = orthogonality_check(model_, kets[p], kets[q]);
                r.values["pairing"] = to_json(o.pairing);
                r.residuals["relative"] = o.residual;
                return o.residual <= r.tolerance;
              });
  }

  struct Pair {
    OnShellCertificate bra, ket;
  };

  std::vector<Pair> pairs(const std::string &tag) {
    auto ba = card("bra_cardinalities"), ka = card("ket_cardinalities");
    auto bras = solve(model_, ba, tag + "/bra", false);
    auto kets = ba == ka ? bras : solve(model_, ka, tag + "/ket", false);
    std::vector<Pair> out;
    for (const auto &b : bras)
      for (const auto &k : kets)
        if (ba != ka || !detail::same_roots(b.params, k.params, 1e-6))
          out.push_back({b, k});
    if (out.empty())
      check(tag + "/none", {{"bra", ba}, {"ket", ka}}, 0, [&](CheckRecord &) -> bool {
        throw ConvergenceError("no usable on-shell pair found");
      });
    return out;
  }

  std::pair<int, int> entry() const {
    if (cfg_.raw.contains("entry"))
      return {cfg_.raw["entry"][0].get<int>(), cfg_.raw["entry"][1].get<int>()};
    // the entry the cardinalities point to
    auto ba = card("bra_cardinalities"), ka = card("ket_cardinalities");
    for (int i = 1; i <= n(); ++i)
      for (int j = 1; j <= n(); ++j) {
        BetheParameters s, t;
        for (int x : ba)
          s.levels.push_back(ParamSet(x));
        for (int x : ka)
          t.levels.push_back(ParamSet(x));
        if (i != j && selection_allows(n(), i, j, s, t))
          return {i, j};
      }
    return {2, 2};
  }

  Cx z_probe() const {
    return cfg_.raw.contains("z") ? cx_from(cfg_.raw["z"], "z") : probe_points(cfg_.chain)[0];
  }

  void task_ff() {
    auto ps = pairs("ff");
    const Cx z = z_probe();
    for (std::size_t p = 0; p < ps.size(); ++p) {
      const auto &[bra, ket] = ps[p];
      const std::string tag = "ff/pair-" + detail::padded(static_cast<int>(p));
      json in = {{"bra", to_json(bra.params)}, {"ket", to_json(ket.params)}, {"z", to_json(z)}};
      // selection rule: forbidden entries vanish
      for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) {
          if (selection_allows(3, i, j, bra.params, ket.params))
            continue;
          check(tag + "/selection-" + std::to_string(i) + std::to_string(j), in, tol("selection"),
                [&](CheckRecord &r) {
                  Cx raw = ff_unchecked(model_, i, j, z, bra.params, ket.params);
                  r.residuals["abs"] = std::abs(raw);
                  return std::abs(raw) <= r.tolerance;
                });
        }
      for (auto rel : {ZeroModeRelation::KetDiagonal, ZeroModeRelation::BraDiagonal,
                       ZeroModeRelation::KetOffDiagonal, ZeroModeRelation::BraOffDiagonal,
                       ZeroModeRelation::BraDiagonalDifference})
        for (int j = 2; j <= 3; ++j) {
          try {
            zero_mode_relation_check(model_, rel, j, z, bra, ket, {});
          } catch (const PreconditionError &) {
            continue; // cardinalities do not fit this relation
          } catch (const ArgumentError &) {
            continue;
          }
          check(tag + "/" + relation_name(rel) + "-j" + std::to_string(j), in, tol("zero_mode"),
                [&](CheckRecord &r) {
                  auto zc = zero_mode_relation_check(model_, rel, j, z, bra, ket);
                  r.values["lhs"] = to_json(zc.lhs);
                  r.values["rhs"] = to_json(zc.rhs);
                  r.values["extrapolated"] = to_json(zc.extrapolated);
                  r.residuals["relative"] = zc.residual;
                  r.residuals["displayed_sign"] = zc.displayed_residual;
                  r.residuals["finite_w"] = zc.finite_w_residual;
                  return zc.residual <= r.tolerance && zc.finite_w_residual <= tol("finite_w");
                });
        }
      if (bra.params.cardinalities() == ket.params.cardinalities())
        for (int j = 1; j <= 3; ++j)
          check(tag + "/diagonal-twist-" + std::to_string(j), in, tol("ff_twist"),
                [&](CheckRecord &r) {
                  FFResult direct = ff_direct(model_, {j, j, z, bra, ket});
                  Cx twist = ff_diagonal_via_twist(model_, j, z, bra, ket);
                  r.values["direct"] = to_json(direct.value);
                  r.values["twist"] = to_json(twist);
                  r.values["bound"] = direct.bound;
                  double d = route_deviation(direct.value, twist, direct.bound);
                  r.residuals["relative"] = d;
                  return d <= r.tolerance;
                });
    }
  }

  void task_universal_ff() {
    auto ps = pairs("universal-ff");
    const auto [i, j] = entry();
    auto probes = probe_points(cfg_.chain, 5);
    for (std::size_t p = 0; p < ps.size(); ++p) {
      const auto &[bra, ket] = ps[p];
      const std::string tag = "universal-ff/pair-" + detail::padded(static_cast<int>(p));
      json in = {{"bra", to_json(bra.params)}, {"ket", to_json(ket.params)}, {"entry", {i, j}}};
      check(tag + "/z-spread", in, tol("uff_spread"), [&](CheckRecord &r) {
        auto u = universal_ff(model_, i, j, bra, ket, probes);
        r.values["value"] = to_json(u.value);
        r.values["probes"] = u.probes_used;
        r.values["bound"] = u.bound;
        double s = u.z_spread / residual_scale({std::abs(u.value)}, u.bound);
        r.residuals["relative_spread"] = s;
        return s <= r.tolerance && u.probes_used >= 3;
      });
      if (i == j && bra.params.cardinalities() == ket.params.cardinalities())
        check(tag + "/twist-route", in, tol("twist_uff"), [&](CheckRecord &r) {
          auto u = universal_ff(model_, i, j, bra, ket, probes);
          Cx twist = universal_ff_via_twist(model_, j, bra, ket);
          r.values["ratio"] = to_json(u.value);
          r.values["twist"] = to_json(twist);
          double d = route_deviation(u.value, twist, u.bound);
          r.residuals["relative"] = d;
          return d <= r.tolerance;
        });
    }
  }

  void task_composite() {
    auto ps = pairs("composite");
    const auto [i, j] = entry();
    auto probes = probe_points(cfg_.chain, 5);
    for (int m = 1; m < cfg_.chain.L(); ++m) {
      Cx z = probes[1];
      check("composite/factorization-m" + std::to_string(m), {{"z", to_json(z)}},
            tol("factorization"), [&](CheckRecord &r) {
              double res = check_composite_factorization(model_, m, z);
              r.residuals["max"] = res;
              return res <= r.tolerance;
            });
    }
    for (std::size_t p = 0; p < ps.size(); ++p) {
      const auto &[bra, ket] = ps[p];
      const std::string tag = "composite/pair-" + detail::padded(static_cast<int>(p));
      json in = {{"bra", to_json(bra.params)}, {"ket", to_json(ket.params)}, {"entry", {i, j}}};
      for (int m = 1; m < cfg_.chain.L(); ++m)
        check(tag + "/m" + std::to_string(m), in, tol("composite"), [&](CheckRecord &r) {
          auto cc = composite_ff_check(model_, m, i, j, bra, ket, probes);
          r.values["lhs"] = to_json(cc.lhs);
          r.values["rhs"] = to_json(cc.rhs);
          r.residuals["relative"] = cc.residual;
          r.residuals["telescoping"] = cc.telescoping_residual;
          return cc.residual <= r.tolerance && cc.telescoping_residual <= tol("telescoping");
        });
    }
  }
};

inline Report run(const RunConfig &cfg) { return Harness(cfg).run(); }

} // namespace naba
