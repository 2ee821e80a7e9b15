#include "mkmr/cli.hpp"

int main(int argc, char** argv) {
  return mkmr::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
