#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "t4p/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::error_code ec;
  auto cwd = std::filesystem::current_path(ec);
  if (ec) {
    std::cerr << "error: cannot determine working directory: " << ec.message() << "\n";
    return t4p::kExitEnvironment;
  }
  return t4p::run_cli(args, cwd, std::cout, std::cerr);
}
