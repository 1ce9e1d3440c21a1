#include <csignal>
#include <iostream>

#include "scarecrow/cli.hpp"

namespace {

extern "C" void on_sigint(int) { scarecrow::interrupt_flag().store(true); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_sigint);
  std::signal(SIGTERM, on_sigint);
  std::vector<std::string> args(argv + 1, argv + argc);
  return scarecrow::run_command(args, std::cout, std::cerr);
}
