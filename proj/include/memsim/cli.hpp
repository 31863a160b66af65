// Batch CLI: evolve | sar | sar-compare | steady | sweep | stability |
// bound-check | selfcheck. Exit 0 on success, 1 on model-level termination,
// 2 on usage/config errors.
#pragma once

#include <string>
#include <vector>

namespace memsim::cli {

int run(const std::vector<std::string>& args);

}  // namespace memsim::cli
