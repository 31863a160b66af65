#include "memsim/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace memsim {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t,min_gap,E_t,energy,norm_u,norm_v,g1_max,g2_max\n";
    for (const auto& row : traj.diagnostics) {
        os << format_double(row.t) << ',' << format_double(row.min_gap) << ','
           << format_double(row.gap_E) << ',' << format_double(row.energy) << ','
           << format_double(row.norm_u) << ',' << format_double(row.norm_v) << ','
           << format_double(row.g1_max) << ',' << format_double(row.g2_max) << '\n';
    }
    return os.str();
}

std::string state_csv(const MembranePair& state) {
    std::ostringstream os;
    os << "x,u,v\n";
    const auto& g = *state.grid();
    for (int i = 0; i < g.nx; ++i) {
        os << format_double(g.x[static_cast<size_t>(i)]) << ','
           << format_double(state.u[i]) << ',' << format_double(state.v[i]) << '\n';
    }
    return os.str();
}

std::string convergence_csv(const ConvergenceTable& table) {
    std::ostringstream os;
    os << "eps,d_state,d_potential\n";
    for (const auto& row : table.rows) {
        os << format_double(row.eps) << ',' << format_double(row.d_state) << ','
           << format_double(row.d_potential) << '\n';
    }
    return os.str();
}

std::string continuation_csv(const ContinuationResult& result) {
    std::ostringstream os;
    os << "lambda,residual,min_gap,newton_iters\n";
    for (const auto& step : result.steps) {
        os << format_double(step.lambda) << ',' << format_double(step.residual) << ','
           << format_double(step.min_gap) << ',' << step.newton_iters << '\n';
    }
    return os.str();
}

std::string phi_csv(const Field2D& field) {
    std::ostringstream os;
    os << "x,z,value\n";
    const auto& g = *field.grid;
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.nz; ++j) {
            os << format_double(g.x[static_cast<size_t>(i)]) << ','
               << format_double(g.zp[static_cast<size_t>(j)]) << ','
               << format_double(field.at(i, j)) << '\n';
        }
    }
    return os.str();
}

void write_trajectory_outputs(const std::filesystem::path& dir, const Trajectory& traj) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "trajectory.csv", trajectory_csv(traj));
    for (size_t k = 0; k < traj.states.size(); ++k) {
        std::ostringstream name;
        name << "state_";
        std::string idx = std::to_string(k);
        name << std::string(6 - std::min<size_t>(6, idx.size()), '0') << idx << ".csv";
        write_text_file(dir / name.str(), state_csv(traj.states[k]));
    }
}

}  // namespace memsim
