#include "dpns/config.hpp"

#include "dpns/expression.hpp"

#include <fstream>
#include <sstream>

namespace dpns {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double to_double(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size())
            fail(line, "malformed number '" + v + "'");
        return d;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(line, "malformed number '" + v + "'");
    }
}

int to_int(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const int i = std::stoi(v, &used);
        if (used != v.size())
            fail(line, "malformed integer '" + v + "'");
        return i;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(line, "malformed integer '" + v + "'");
    }
}

} // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty())
            continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                fail(line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "mesh" && section != "params" && section != "aux" &&
                section != "case" && section != "solver" && section != "probe" &&
                section != "run")
                fail(line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            fail(line, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (section.empty())
            fail(line, "key '" + key + "' outside any section");

        if (section == "mesh") {
            if (key == "nx") cfg.nx = to_int(val, line);
            else if (key == "ny") cfg.ny = to_int(val, line);
            else if (key == "level") cfg.level = to_int(val, line);
            else if (key == "levels") cfg.levels = to_int(val, line);
            else if (key == "x0") cfg.geometry.x0 = to_double(val, line);
            else if (key == "x1") cfg.geometry.x1 = to_double(val, line);
            else if (key == "y_bottom") cfg.geometry.y_bottom = to_double(val, line);
            else if (key == "y_interface") cfg.geometry.y_interface = to_double(val, line);
            else if (key == "y_top") cfg.geometry.y_top = to_double(val, line);
            else fail(line, "unknown mesh key '" + key + "'");
        } else if (section == "params") {
            if (key == "rho") cfg.params.rho = to_double(val, line);
            else if (key == "nu") cfg.params.nu = to_double(val, line);
            else if (key == "mu") cfg.params.mu = to_double(val, line);
            else if (key == "k_m") cfg.params.k_m = to_double(val, line);
            else if (key == "k_f") cfg.params.k_f = to_double(val, line);
            else if (key == "sigma") cfg.params.sigma = to_double(val, line);
            else if (key == "alpha") cfg.params.alpha = to_double(val, line);
            else fail(line, "unknown params key '" + key + "'");
        } else if (section == "aux") {
            if (key == "c_kappa") cfg.aux.c_kappa = to_double(val, line);
            else if (key == "c_xi") cfg.aux.c_xi = to_double(val, line);
            else fail(line, "unknown aux key '" + key + "'");
        } else if (section == "case") {
            if (key == "type") {
                if (val == "trig") cfg.case_type = CaseType::Trig;
                else if (val == "poly") cfg.case_type = CaseType::Poly;
                else if (val == "zero") cfg.case_type = CaseType::Zero;
                else if (val == "expr") cfg.case_type = CaseType::Expr;
                else fail(line, "unknown case type '" + val + "'");
            } else if (key == "scale") cfg.scale = to_double(val, line);
            else if (key == "fs_x") cfg.fs_x = val;
            else if (key == "fs_y") cfg.fs_y = val;
            else if (key == "fd") cfg.fd = val;
            else fail(line, "unknown case key '" + key + "'");
        } else if (section == "solver") {
            if (key == "tol") cfg.solver.tol = to_double(val, line);
            else if (key == "max_iter") cfg.solver.max_iter = to_int(val, line);
            else if (key == "method") {
                if (val == "picard") cfg.use_newton = false;
                else if (val == "newton") cfg.use_newton = true;
                else fail(line, "unknown solver method '" + val + "'");
            } else fail(line, "unknown solver key '" + key + "'");
        } else if (section == "probe") {
            if (key == "n_starts") cfg.n_starts = to_int(val, line);
            else if (key == "samples") cfg.samples = to_int(val, line);
            else fail(line, "unknown probe key '" + key + "'");
        } else if (section == "run") {
            if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(val, line));
            else if (key == "out") cfg.out_dir = val;
            else fail(line, "unknown run key '" + key + "'");
        }
    }
    if (cfg.nx < 1 || cfg.ny < 1)
        throw ConfigError("config: nx, ny must be >= 1");
    if (cfg.level < 1 || cfg.levels < 1)
        throw ConfigError("config: level(s) must be >= 1");
    cfg.params.validate();
    if (cfg.case_type == CaseType::Expr) {
        // parse now so errors surface at load time
        try {
            if (!cfg.fs_x.empty()) Expression::parse(cfg.fs_x);
            if (!cfg.fs_y.empty()) Expression::parse(cfg.fs_y);
            if (!cfg.fd.empty()) Expression::parse(cfg.fd);
        } catch (const ExpressionError& e) {
            throw ConfigError(std::string("config [case] expression error: ") + e.what());
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::optional<ManufacturedCase> make_manufactured(const RunConfig& cfg) {
    switch (cfg.case_type) {
    case CaseType::Trig: return trig_case(cfg.params);
    case CaseType::Poly: return poly_case(cfg.params);
    default: return std::nullopt;
    }
}

SourceSpec make_sources(const RunConfig& cfg) {
    if (auto mc = make_manufactured(cfg))
        return mc->sources(cfg.scale);
    SourceSpec src;
    if (cfg.case_type == CaseType::Zero)
        return src;
    const double scale = cfg.scale;
    if (!cfg.fs_x.empty() || !cfg.fs_y.empty()) {
        const auto ex = Expression::parse(cfg.fs_x.empty() ? "0" : cfg.fs_x);
        const auto ey = Expression::parse(cfg.fs_y.empty() ? "0" : cfg.fs_y);
        src.f_s = [ex, ey, scale](Vec2 p) {
            return Vec2{scale * ex.eval(p.x, p.y), scale * ey.eval(p.x, p.y)};
        };
    }
    if (!cfg.fd.empty()) {
        const auto ed = Expression::parse(cfg.fd);
        src.f_d = [ed, scale](Vec2 p) { return scale * ed.eval(p.x, p.y); };
    }
    return src;
}

} // namespace dpns
