#include "memsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "memsim/io.hpp"

namespace memsim {

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size() || !std::isfinite(v)) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + value + "'");
    }
}

void check(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

void apply_key(SimConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "eps") {
        cfg.params.eps = parse_double(key, value);
        check(cfg.params.eps > 0.0 && cfg.params.eps <= 1.0, key, "must be in (0,1]");
    } else if (key == "lambda") {
        cfg.params.lambda = parse_double(key, value);
        check(cfg.params.lambda >= 0.0, key, "must be >= 0");
    } else if (key == "mu") {
        cfg.params.mu = parse_double(key, value);
        check(cfg.params.mu >= 0.0, key, "must be >= 0");
    } else if (key == "kappa") {
        cfg.params.kappa = parse_double(key, value);
        check(cfg.params.kappa > 0.0 && cfg.params.kappa < 0.5, key, "must be in (0,1/2)");
    } else if (key == "q") {
        cfg.params.q = parse_double(key, value);
        check(cfg.params.q >= 2.0, key, "must be in [2,inf)");
    } else if (key == "nx") {
        cfg.nx = parse_int(key, value);
        check(cfg.nx >= 9 && cfg.nx % 2 == 1, key, "must be odd >= 9");
    } else if (key == "nz") {
        cfg.nz = parse_int(key, value);
        check(cfg.nz >= 9 && cfg.nz % 2 == 1, key, "must be odd >= 9");
    } else if (key == "dt") {
        cfg.params.dt = parse_double(key, value);
        check(cfg.params.dt >= 0.0, key, "must be >= 0 (0 selects the default)");
    } else if (key == "t_end") {
        cfg.params.t_end = parse_double(key, value);
        check(cfg.params.t_end > 0.0, key, "must be > 0");
    } else if (key == "gap_tol") {
        cfg.params.gap_tol = parse_double(key, value);
        check(cfg.params.gap_tol > 0.0 && cfg.params.gap_tol < 1.0, key, "must be in (0,1)");
    } else if (key == "sample_every") {
        cfg.params.sample_every = parse_int(key, value);
        check(cfg.params.sample_every >= 1, key, "must be >= 1");
    } else if (key == "output_dir") {
        check(!value.empty(), key, "must not be empty");
        cfg.output_dir = value;
    } else if (key == "init") {
        if (value == "flat") {
            cfg.init = InitKind::flat;
        } else if (value.rfind("parabolic:", 0) == 0) {
            cfg.init = InitKind::parabolic;
            cfg.init_a = parse_double(key, value.substr(10));
            check(cfg.init_a >= 0.0 && cfg.init_a < 0.5, key,
                  "parabolic amplitude must be in [0,1/2) (the gap closes at a=1/2)");
        } else if (value.rfind("file:", 0) == 0) {
            cfg.init = InitKind::file;
            cfg.init_path = value.substr(5);
            check(!cfg.init_path.empty(), key, "file path must not be empty");
        } else {
            throw ConfigError(key + ": expected flat | parabolic:a | file:path, got '" +
                              value + "'");
        }
    } else {
        throw ConfigError("unknown key: " + key);
    }
}

SimConfig parse_config_text(const std::string& text) {
    SimConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        }
        apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

SimConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config file not found: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

MembranePair SimConfig::build_initial(GridPtr g) const {
    switch (init) {
        case InitKind::flat:
            return MembranePair::flat(std::move(g));
        case InitKind::parabolic:
            return MembranePair::parabolic(std::move(g), init_a);
        case InitKind::file: {
            std::ifstream in(init_path);
            if (!in) throw ConfigError("init: state file not found: " + init_path);
            std::string header;
            std::getline(in, header);
            if (trim(header) != "x,u,v") {
                throw ConfigError("init: state file must start with header x,u,v");
            }
            MembranePair m;
            m.u = GridFunction1D(g, 0.0);
            m.v = GridFunction1D(g, -1.0);
            std::string line;
            int i = 0;
            while (std::getline(in, line)) {
                line = trim(line);
                if (line.empty()) continue;
                if (i >= g->nx) throw ConfigError("init: state file has too many rows");
                std::istringstream row(line);
                std::string xs, us, vs;
                if (!std::getline(row, xs, ',') || !std::getline(row, us, ',') ||
                    !std::getline(row, vs)) {
                    throw ConfigError("init: malformed state row: '" + line + "'");
                }
                const double x = parse_double("init", xs);
                if (std::abs(x - g->x[static_cast<size_t>(i)]) > 1e-12) {
                    throw ConfigError("init: state file x nodes do not match the grid");
                }
                m.u[i] = parse_double("init", us);
                m.v[i] = parse_double("init", vs);
                ++i;
            }
            if (i != g->nx) throw ConfigError("init: state file has too few rows");
            if (std::abs(m.u[0]) > 1e-12 || std::abs(m.u[g->nx - 1]) > 1e-12 ||
                std::abs(m.v[0] + 1.0) > 1e-12 || std::abs(m.v[g->nx - 1] + 1.0) > 1e-12) {
                throw ConfigError("init: state file violates (u,v)(+-1)=(0,-1)");
            }
            m.u[0] = m.u[g->nx - 1] = 0.0;
            m.v[0] = m.v[g->nx - 1] = -1.0;
            return m;
        }
    }
    throw ConfigError("init: unreachable");
}

}  // namespace memsim
