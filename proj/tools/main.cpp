#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cualign/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "cualign - package upgrade solver and encoder for source-alignment criteria over CUDF "
      "universes"};

  cualign::RunOptions options;
  std::uint32_t seed = 0;
  bool have_seed = false;

  app.add_option("--input", options.input, "CUDF instance file");
  app.add_option("--seed", seed, "generate a random instance instead of reading --input")
      ->each([&](const std::string&) { have_seed = true; });
  app.add_option("--criteria", options.criteria,
                 "lexicographic criteria stack, e.g. \"-removed,-unaligned(packages)\"")
      ->capture_default_str();
  app.add_option("--mode", options.mode, "solve | emit")
      ->check(CLI::IsMember({"solve", "emit"}))
      ->capture_default_str();
  app.add_option("--emit", options.emit_formats, "formats to write in emit mode: lp, opb, wcnf")
      ->delimiter(',');
  app.add_option("--out-dir", options.out_dir, "directory for emitted files")
      ->capture_default_str();
  app.add_option("--budget-nodes", options.budget_nodes, "search node budget per objective level")
      ->capture_default_str();
  app.add_option("--budget-seconds", options.budget_seconds, "time budget per objective level")
      ->capture_default_str();
  app.add_flag("--report", options.report, "print a run report table after the solution");
  app.add_flag("--merge-objectives", options.merge_objectives,
               "emit a single weighted lexicographic objective instead of the first level");

  CLI11_PARSE(app, argc, argv);
  if (have_seed) options.seed = seed;

  return cualign::run(options, std::cout, std::cerr);
}
