#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qkd/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qkdlab: high-dimensional QKD session simulation and analysis"};
  app.require_subcommand(1);

  qkd::cli::RunConfig run_cfg;
  CLI::App* run = app.add_subcommand("run", "run a seeded prepare-and-measure session");
  run->add_option("--protocol", run_cfg.protocol, "bb84 | mub | singapore | chau15")
      ->required();
  run->add_option("--dim", run_cfg.dim, "Hilbert-space dimension")->required();
  run->add_option("--noise", run_cfg.noise,
                  "none | depolarizing:p | rotation:theta | pauli:p00,...");
  run->add_option("--rounds", run_cfg.rounds, "number of rounds");
  run->add_option("--shots", run_cfg.shots,
                  "sample the detection matrix with this many shots (0 = analytic)");
  run->add_option("--seed", run_cfg.seed, "RNG seed");
  run->add_option("--out", run_cfg.out_dir, "output directory (default $QKDLAB_OUT or .)");
  run->add_option("--format", run_cfg.format, "text | csv | json");

  qkd::cli::RatesConfig rates_cfg;
  CLI::App* rates = app.add_subcommand("rates", "secret-key rates");
  rates->add_flag("--table1", rates_cfg.table1, "full summary table");
  rates->add_option("--protocol", rates_cfg.protocol, "bb84 | mub");
  rates->add_option("--dim", rates_cfg.dim, "dimension");
  rates->add_option("--eb", rates_cfg.e_b, "quantum bit error rate");
  rates->add_option("--delta", rates_cfg.delta, "multiphoton rate (bb84 d=2)");
  rates->add_option("--format", rates_cfg.format, "text | csv | json");

  std::string thr_format = "text";
  CLI::App* thresholds = app.add_subcommand("thresholds", "error thresholds for R = 0");
  thresholds->add_option("--format", thr_format, "text | csv | json");

  qkd::cli::TomographyConfig tomo_cfg;
  CLI::App* tomo = app.add_subcommand("tomography", "process tomography and MI analysis");
  tomo->add_option("--input", tomo_cfg.input, "detection-matrix CSV (or joint CSV with --mi)");
  tomo->add_option("--synthetic", tomo_cfg.synthetic, "noise spec for synthetic data");
  tomo->add_option("--dim", tomo_cfg.dim, "dimension");
  tomo->add_option("--method", tomo_cfg.method, "mub | sic");
  tomo->add_flag("--mi", tomo_cfg.mi, "mutual-information report for a joint matrix");
  tomo->add_flag("--non-trace-preserving", tomo_cfg.non_trace_preserving,
                 "drop the trace-preserving constraint");
  tomo->add_option("--shots", tomo_cfg.shots, "sampled shots (0 = analytic)");
  tomo->add_option("--seed", tomo_cfg.seed, "RNG seed");
  tomo->add_option("--out", tomo_cfg.out_dir, "output directory");
  tomo->add_option("--format", tomo_cfg.format, "text | csv | json");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return qkd::cli::cmd_run(run_cfg, std::cout, std::cerr);
  if (rates->parsed()) return qkd::cli::cmd_rates(rates_cfg, std::cout, std::cerr);
  if (thresholds->parsed()) return qkd::cli::cmd_thresholds(thr_format, std::cout, std::cerr);
  if (tomo->parsed()) return qkd::cli::cmd_tomography(tomo_cfg, std::cout, std::cerr);
  return 1;
}
