#include <array>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lsv/cli_io.hpp"

namespace {

struct SubArgs {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
};

int run_from_args(const std::string& experiment, const SubArgs& args) {
  std::ifstream in(args.config_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read config file '" << args.config_path << "'\n";
    return 2;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  lsv::RunConfig config = lsv::RunConfig::parse(buf.str());
  if (config.experiment() != experiment) {
    std::cerr << "error: config declares experiment '" << config.experiment()
              << "' but subcommand is '" << experiment << "'\n";
    return 2;
  }
  if (args.seed_set) config.override_seed(args.seed_override);
  if (!args.out_override.empty()) config.override_output(args.out_override);
  return lsv::run(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical experiments for intermittent interval maps"};
  app.require_subcommand(1);

  const char* names[] = {"partition",  "density",        "memory-loss",   "moments", "tails",
                         "deviations", "counterexample", "renewal-tails", "qv-check"};
  const char* blurbs[] = {
      "first-entry and first-return partition points",
      "invariant density by transfer-operator iteration",
      "total variation decay between two evolved densities",
      "moment growth of running-maximum Birkhoff sums",
      "tail of the running maximum at fixed time",
      "large deviation probabilities of Birkhoff averages",
      "periodic Markov chain with non-decaying Birkhoff sums",
      "tail bounds for the geometric renewal sum",
      "quadratic variation moment bounds over random block structures"};

  std::array<SubArgs, 9> args;
  for (int i = 0; i < 9; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("config", args[i].config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", args[i].seed_override, "override the config seed")
        ->each([&args, i](const std::string&) { args[i].seed_set = true; });
    sub->add_option("--out", args[i].out_override, "override the output CSV path");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (int i = 0; i < 9; ++i)
      if (app.got_subcommand(names[i])) return run_from_args(names[i], args[i]);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
