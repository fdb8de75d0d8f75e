#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  const gbpf::cli::Io io{std::cout, std::cerr};
  return gbpf::cli::run_cli(argc, argv, io);
}
