#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace gbpf::cli {

struct Io {
  std::ostream& out;
  std::ostream& err;
};

// Each returns the process exit code. Errors are mapped by run_guarded.
int cmd_check(const RunConfig& config, const Io& io);
int cmd_simulate_gbp(const RunConfig& config, const Io& io);
int cmd_simulate_process(const RunConfig& config, const Io& io);
int cmd_simulate_field(const RunConfig& config, const Io& io);
// `inputs` adds to the analyze block's input list.
int cmd_analyze(const RunConfig& config, const std::vector<std::filesystem::path>& inputs, const Io& io);

// Seed of replicate r: the master seed for r = 0, a derived sub-stream seed after.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r);

// Parses argv and runs one command.
int run_cli(int argc, const char* const* argv, const Io& io);

}  // namespace gbpf::cli
