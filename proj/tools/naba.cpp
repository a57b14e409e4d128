#include <naba/harness.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kPass = 0, kCheckFailure = 1, kUsageError = 2;

naba::RunConfig load_config(const std::string &path) {
  return naba::parse_config(naba::parse_json_text(naba::read_file(path), path));
}

int cmd_run(const std::string &path) {
  naba::RunConfig cfg = load_config(path);
  naba::Report rep = naba::run(cfg);
  const std::string text = rep.document().dump(2) + "\n";
  if (cfg.output_path.empty()) {
    std::cout << text;
  } else {
    naba::write_file(cfg.output_path, text);
    const auto &s = rep.body["summary"];
    std::cout << cfg.task << ": " << s["passed"].get<int>() << "/" << s["total"].get<int>()
              << " checks passed, report in " << cfg.output_path << "\n";
  }
  return rep.passed ? kPass : kCheckFailure;
}

int cmd_validate(const std::string &path) {
  naba::RunConfig cfg = load_config(path);
  std::cout << path << ": ok (task " << cfg.task << ", n = " << cfg.chain.n
            << ", L = " << cfg.chain.L() << ", dim = " << cfg.chain.dim() << ")\n";
  return kPass;
}

int cmd_cert_show(const std::string &path) {
  naba::LoadedCertificate lc = naba::load_certificate(path);
  naba::ChainModel model(lc.chain.with_twist(lc.cert.twist));
  naba::OnShellCertificate fresh = naba::certify(model, lc.cert.params);
  naba::json out;
  out["certificate"] = naba::to_json(lc.cert, lc.chain);
  out["recomputed"] = {{"max_bae_residual", naba::residual_json(fresh.max_bae_residual)},
                       {"eigencheck_residual", naba::residual_json(fresh.eigencheck_residual)},
                       {"on_shell", fresh.valid()}};
  std::cout << out.dump(2) << "\n";
  return fresh.valid() ? kPass : kCheckFailure;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Nested algebraic Bethe ansatz checks for gl(n) spin chains"};
  app.require_subcommand(1);
  std::string run_path, validate_path, cert_path;
  auto *run = app.add_subcommand("run", "run the task named in a config file");
  run->add_option("config", run_path, "JSON run config")->required();
  auto *val = app.add_subcommand("validate", "check a config file without running it");
  val->add_option("config", validate_path, "JSON run config")->required();
  auto *cert = app.add_subcommand("cert", "on-shell certificates");
  cert->require_subcommand(1);
  auto *show = cert->add_subcommand("show", "print a certificate and re-verify it");
  show->add_option("path", cert_path, "certificate file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? kPass : kUsageError;
  }
  try {
    if (*run)
      return cmd_run(run_path);
    if (*val)
      return cmd_validate(validate_path);
    if (*show)
      return cmd_cert_show(cert_path);
  } catch (const naba::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const naba::DigestError &e) {
    std::cerr << "digest error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}
