#include <string>
#include <vector>

#include "nvmag/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nvmag::app::run_cli(args);
}
