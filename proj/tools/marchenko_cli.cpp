// Command-line front end: marchenko --config run.json [--out DIR] [--format csv|json]
//                                   [--threads N] [--tol X]
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "marchenko/errors.hpp"
#include "marchenko/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Marchenko inverse scattering toolkit"};
  std::string config_path, out_dir, format;
  int threads = 0;
  double tol = 0;
  app.add_option("--config", config_path, "run configuration (JSON)")->required();
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--format", format, "csv or json (overrides the config)")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", threads, "worker threads; falls back to MARCHENKO_THREADS")->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "relative tolerance of the Jost ODE integration")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  marchenko::RunConfig cfg;
  try {
    cfg = marchenko::parse_config(config_path);
  } catch (const marchenko::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  if (!out_dir.empty()) cfg.out = out_dir;
  if (!format.empty()) cfg.format = format == "json" ? marchenko::OutputFormat::json : marchenko::OutputFormat::csv;
  if (threads > 0) cfg.threads = threads;
  if (tol > 0) cfg.tol = tol;

  const auto res = marchenko::run(cfg);
  (res.status == 0 ? std::cout : std::cerr) << res.message << "\n";
  for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
  return res.status;
}
