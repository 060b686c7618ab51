#include "oinfo/systems.hpp"

#include "oinfo/errors.hpp"

#include <cmath>
#include <sstream>

namespace oinfo {

SystemSpec SystemSpec::redundant(std::size_t n_vars, std::size_t dim, double sigma) {
    return {SystemKind::Redundant, n_vars, dim, sigma, TransformKind::None, {}};
}

SystemSpec SystemSpec::synergistic(std::size_t n_vars, std::size_t dim, double sigma) {
    return {SystemKind::Synergistic, n_vars, dim, sigma, TransformKind::None, {}};
}

SystemSpec SystemSpec::independent(std::size_t n_vars, std::size_t dim) {
    return {SystemKind::Independent, n_vars, dim, 0.0, TransformKind::None, {}};
}

SystemSpec SystemSpec::mixed(std::vector<SystemSpec> blocks) {
    SystemSpec s;
    s.kind = SystemKind::Mixed;
    s.blocks = std::move(blocks);
    s.n_vars = s.total_vars();
    s.dim = 0;
    s.sigma = 0.0;
    return s;
}

std::size_t SystemSpec::total_vars() const {
    if (kind != SystemKind::Mixed) return n_vars;
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.total_vars();
    return n;
}

std::string to_string(TransformKind kind) {
    switch (kind) {
        case TransformKind::None: return "none";
        case TransformKind::HalfCube: return "half_cube";
        case TransformKind::Cdf: return "cdf";
    }
    return "none";
}

TransformKind parse_transform(const std::string& text) {
    if (text == "none" || text.empty()) return TransformKind::None;
    if (text == "half_cube" || text == "halfcube") return TransformKind::HalfCube;
    if (text == "cdf") return TransformKind::Cdf;
    throw ConfigError("unknown transform '" + text + "' (expected none|half_cube|cdf)");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_top_level(const std::string& s, char sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

double parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("system spec: bad value for '" + key + "': '" + value + "'");
    }
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    const double v = parse_number(key, value);
    if (v < 1 || v != std::floor(v)) throw ConfigError("system spec: '" + key + "' must be a positive integer");
    return static_cast<std::size_t>(v);
}

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

SystemSpec parse_system_spec(const std::string& raw) {
    const std::string text = trim(raw);
    if (text.rfind("mixed", 0) == 0) {
        const auto open = text.find('(');
        const auto close = text.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open)
            throw ConfigError("system spec: mixed systems are written mixed(<block>;<block>...)");
        std::vector<SystemSpec> blocks;
        for (const auto& part : split_top_level(text.substr(open + 1, close - open - 1), ';'))
            blocks.push_back(parse_system_spec(part));
        if (blocks.empty()) throw ConfigError("system spec: mixed system needs at least one block");
        SystemSpec spec = SystemSpec::mixed(std::move(blocks));
        const std::string tail = trim(text.substr(close + 1));
        if (!tail.empty()) {
            if (tail.rfind(",transform=", 0) != 0) throw ConfigError("system spec: unexpected text after mixed(...)");
            spec.transform = parse_transform(tail.substr(11));
        }
        return spec;
    }

    const auto colon = text.find(':');
    const std::string kind = trim(text.substr(0, colon));
    SystemSpec spec;
    if (kind == "redundant") {
        spec.kind = SystemKind::Redundant;
    } else if (kind == "synergistic" || kind == "synergy") {
        spec.kind = SystemKind::Synergistic;
    } else if (kind == "independent") {
        spec.kind = SystemKind::Independent;
        spec.sigma = 0.0;
    } else {
        throw ConfigError("system spec: unknown kind '" + kind +
                          "' (expected redundant|synergistic|independent|mixed)");
    }
    if (colon == std::string::npos) return spec;
    for (const auto& kv : split_top_level(text.substr(colon + 1), ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("system spec: expected key=value, got '" + kv + "'");
        const std::string key = trim(kv.substr(0, eq));
        const std::string value = trim(kv.substr(eq + 1));
        if (key == "n" || key == "n_vars") {
            spec.n_vars = parse_count(key, value);
        } else if (key == "dim") {
            spec.dim = parse_count(key, value);
        } else if (key == "sigma") {
            spec.sigma = parse_number(key, value);
        } else if (key == "transform") {
            spec.transform = parse_transform(value);
        } else {
            throw ConfigError("system spec: unknown key '" + key + "'");
        }
    }
    return spec;
}

std::string to_string(const SystemSpec& spec) {
    std::string out;
    if (spec.kind == SystemKind::Mixed) {
        out = "mixed(";
        for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
            if (i) out += ";";
            out += to_string(spec.blocks[i]);
        }
        out += ")";
        if (spec.transform != TransformKind::None) out += ",transform=" + to_string(spec.transform);
        return out;
    }
    if (spec.kind == SystemKind::Independent) {
        out = "independent:n=" + std::to_string(spec.n_vars) + ",dim=" + std::to_string(spec.dim);
    } else {
        out = spec.kind == SystemKind::Redundant ? "redundant" : "synergistic";
        out += ":n=" + std::to_string(spec.n_vars) + ",dim=" + std::to_string(spec.dim) +
               ",sigma=" + format_number(spec.sigma);
    }
    if (spec.transform != TransformKind::None) out += ",transform=" + to_string(spec.transform);
    return out;
}

nlohmann::json to_json(const SystemSpec& spec) {
    nlohmann::json j;
    switch (spec.kind) {
        case SystemKind::Redundant: j["kind"] = "redundant"; break;
        case SystemKind::Synergistic: j["kind"] = "synergistic"; break;
        case SystemKind::Mixed: j["kind"] = "mixed"; break;
        case SystemKind::Independent: j["kind"] = "independent"; break;
    }
    if (spec.kind == SystemKind::Mixed) {
        j["blocks"] = nlohmann::json::array();
        for (const auto& b : spec.blocks) j["blocks"].push_back(to_json(b));
    } else {
        j["n_vars"] = spec.n_vars;
        j["dim"] = spec.dim;
        j["sigma"] = spec.sigma;
    }
    j["transform"] = to_string(spec.transform);
    return j;
}

SynergyCouplings synergistic_couplings(std::size_t n_vars, double sigma) {
    if (n_vars < 3) throw ConfigError("synergistic system needs at least 3 variables");
    if (sigma < 0.0) throw ConfigError("sigma must be non-negative");
    const double inv = 1.0 / std::sqrt(static_cast<double>(n_vars - 1));
    const double rho = 1.0 / std::sqrt(1.0 + sigma * sigma);
    return {inv, rho * inv};
}

void verify_covariance(const Matrix& cov) {
    if (!is_symmetric(cov, 1e-12)) throw NumericError("covariance is not symmetric");
    const double lo = min_eigenvalue(cov);
    if (!(lo > 1e-10)) {
        std::ostringstream msg;
        msg << "covariance is not positive definite (smallest eigenvalue " << std::scientific << lo << ")";
        throw NumericError(msg.str());
    }
}

namespace {

/// Kronecker product of an N x N variable-level correlation matrix with I_dim.
Matrix expand_blocks(const Matrix& corr, std::size_t dim) {
    const auto n = corr.rows();
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix out = Matrix::Zero(n * d, n * d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < d; ++k) out(i * d + k, j * d + k) = corr(i, j);
    return out;
}

}  // namespace

CovarianceMatrix build_redundant_cov(std::size_t n_vars, std::size_t dim, double sigma) {
    if (n_vars < 2) throw ConfigError("redundant system needs at least 2 variables");
    if (dim < 1) throw ConfigError("variable dimension must be at least 1");
    if (!(sigma > 0.0)) throw NumericError("redundant system is singular for sigma <= 0");
    const double rho = 1.0 / (1.0 + sigma * sigma);
    const auto n = static_cast<Eigen::Index>(n_vars);
    Matrix corr = Matrix::Constant(n, n, rho);
    corr.diagonal().setOnes();
    CovarianceMatrix out{expand_blocks(corr, dim), VariablePartition::uniform(n_vars, dim)};
    verify_covariance(out.cov);
    return out;
}

CovarianceMatrix build_synergistic_cov(std::size_t n_vars, std::size_t dim, double sigma) {
    if (dim < 1) throw ConfigError("variable dimension must be at least 1");
    const auto c = synergistic_couplings(n_vars, sigma);
    const auto n = static_cast<Eigen::Index>(n_vars);
    Matrix corr = Matrix::Identity(n, n);
    corr(0, 1) = corr(1, 0) = c.first_second;
    for (Eigen::Index i = 2; i < n; ++i) corr(1, i) = corr(i, 1) = c.second_others;
    CovarianceMatrix out{expand_blocks(corr, dim), VariablePartition::uniform(n_vars, dim)};
    verify_covariance(out.cov);
    return out;
}

CovarianceMatrix build_mixed_cov(const std::vector<SystemSpec>& blocks) {
    if (blocks.empty()) throw ConfigError("mixed system needs at least one block");
    std::vector<CovarianceMatrix> parts;
    Eigen::Index total = 0;
    for (const auto& b : blocks) {
        parts.push_back(build_cov(b));
        total += parts.back().cov.rows();
    }
    CovarianceMatrix out{Matrix::Zero(total, total), VariablePartition{}};
    Eigen::Index at = 0;
    for (const auto& p : parts) {
        const auto d = p.cov.rows();
        out.cov.block(at, at, d, d) = p.cov;
        out.partition = out.partition.concat(p.partition);
        at += d;
    }
    return out;
}

CovarianceMatrix build_cov(const SystemSpec& spec) {
    switch (spec.kind) {
        case SystemKind::Redundant: return build_redundant_cov(spec.n_vars, spec.dim, spec.sigma);
        case SystemKind::Synergistic: return build_synergistic_cov(spec.n_vars, spec.dim, spec.sigma);
        case SystemKind::Mixed: return build_mixed_cov(spec.blocks);
        case SystemKind::Independent: {
            if (spec.n_vars < 1) throw ConfigError("independent system needs at least 1 variable");
            const VariablePartition part = VariablePartition::uniform(spec.n_vars, spec.dim);
            const auto d = static_cast<Eigen::Index>(part.total_dim());
            return {Matrix::Identity(d, d), part};
        }
    }
    throw ConfigError("unknown system kind");
}

Dataset sample(const CovarianceMatrix& cov, std::size_t n_samples, RngStream& rng) {
    const Matrix l = cholesky(cov.cov);
    Matrix z(cov.cov.rows(), static_cast<Eigen::Index>(n_samples));
    rng.fill_normal(z);
    Dataset out;
    out.samples = (l * z).transpose();
    out.partition = cov.partition;
    return out;
}

double half_cube(double x) { return x * std::sqrt(std::abs(x)); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Dataset apply_transform(Dataset data, TransformKind kind) {
    switch (kind) {
        case TransformKind::None: break;
        case TransformKind::HalfCube: data.samples = data.samples.unaryExpr([](double x) { return half_cube(x); }); break;
        case TransformKind::Cdf: data.samples = data.samples.unaryExpr([](double x) { return normal_cdf(x); }); break;
    }
    return data;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (points == 0) return {};
    if (points == 1) return {lo};
    std::vector<double> out;
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < points; ++i)
        out.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1)));
    out.front() = lo;
    out.back() = hi;
    return out;
}

}  // namespace oinfo
