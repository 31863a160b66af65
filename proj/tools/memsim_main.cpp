#include <string>
#include <vector>

#include "memsim/cli.hpp"

int main(int argc, char** argv) {
    return memsim::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
