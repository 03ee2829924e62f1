#pragma once

#include <string>
#include <vector>

namespace hclm {

/// Runs the command-line interface on argv[1..]. Returns 0 on success,
/// 1 on usage errors, 2 on runtime failures.
int run_cli(const std::vector<std::string>& args);

}  // namespace hclm
