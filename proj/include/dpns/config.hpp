#pragma once

#include "dpns/auxiliary.hpp"
#include "dpns/manufactured.hpp"
#include "dpns/solver.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace dpns {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CaseType { Trig, Poly, Zero, Expr };

struct RunConfig {
    // [mesh]
    int nx = 4, ny = 4;
    int level = 1;  // effective subdivisions: nx << (level-1)
    int levels = 4; // converge / infsup series
    RectStack geometry;

    PhysicalParams params;
    AuxiliaryConfig aux;

    // [case]
    CaseType case_type = CaseType::Trig;
    double scale = 1.0;
    std::string fs_x, fs_y, fd; // expression strings for CaseType::Expr

    // [solver]
    SolverOptions solver;
    bool use_newton = false;

    // [probe]
    int n_starts = 5;
    int samples = 200;

    // [run]
    std::uint64_t seed = 7;
    std::string out_dir = "out";

    int effective_nx() const { return nx << (level - 1); }
    int effective_ny() const { return ny << (level - 1); }
};

/// Parses the sectioned key-value format; any unknown section or key, or a
/// malformed value, fails with the line number.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Forcing and boundary data for the configured case.
SourceSpec make_sources(const RunConfig& cfg);

/// The manufactured case behind `trig` and `poly` configurations; nullopt
/// for `zero` and `expr`.
std::optional<ManufacturedCase> make_manufactured(const RunConfig& cfg);

} // namespace dpns
