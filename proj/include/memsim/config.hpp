// Flat key=value run configuration for the CLI.
#pragma once

#include <filesystem>
#include <string>

#include "memsim/membrane.hpp"
#include "memsim/params.hpp"

namespace memsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class InitKind { flat, parabolic, file };

struct SimConfig {
    Params params;
    int nx = 65;
    int nz = 65;
    InitKind init = InitKind::flat;
    double init_a = 0.0;        // parabolic amplitude, 0 <= a < 1/2
    std::string init_path;      // for init=file:
    std::string output_dir = "out";

    MembranePair build_initial(GridPtr g) const;
};

// Parses the documented keys (eps, lambda, mu, kappa, q, nx, nz, dt, t_end,
// gap_tol, init, output_dir, sample_every); '#' starts a comment. Unknown
// keys and range violations raise ConfigError naming the key. An empty file
// yields all defaults.
SimConfig parse_config(const std::filesystem::path& path);
SimConfig parse_config_text(const std::string& text);

void apply_key(SimConfig& cfg, const std::string& key, const std::string& value);

}  // namespace memsim
