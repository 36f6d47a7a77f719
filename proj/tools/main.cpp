#include <atomic>
#include <csignal>
#include <iostream>

#include "cli.hpp"

namespace {

std::atomic<bool> g_interrupt{false};

extern "C" void on_sigint(int) { g_interrupt.store(true); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_sigint);
  std::signal(SIGTERM, on_sigint);
  std::vector<std::string> args(argv + 1, argv + argc);
  return socnav::run_cli(args, std::cout, std::cerr, &g_interrupt);
}
