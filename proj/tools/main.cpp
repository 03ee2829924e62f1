#include "hclm/cli.hpp"

int main(int argc, char** argv) {
  return hclm::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
