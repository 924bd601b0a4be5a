#include <string>
#include <vector>

#include "foreclassnet/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fcn::cli::run(std::move(args));
}
