#include "driftlab/scenario.hpp"

#include "driftlab/errors.hpp"
#include "driftlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace driftlab {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s)
{
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double parse_plain(const std::string& s)
{
    if (s == "pi") return std::numbers::pi;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigurationError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw ConfigurationError("not a number: '" + s + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw ConfigurationError(key + ": expected a boolean, got '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v)
{
    const double d = parse_real(v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigurationError(key + ": expected an integer, got '" + v + "'");
    return static_cast<int>(d);
}

std::vector<double> parse_list(const std::string& v)
{
    std::vector<double> out;
    for (const auto& tok : split_ws(v)) out.push_back(parse_real(tok));
    return out;
}

AnalyticFamily parse_factor(const std::string& tok, double t0)
{
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw ConfigurationError("factor '" + tok + "' must look like kind:parameter");
    const std::string kind = tok.substr(0, colon);
    std::string rest = tok.substr(colon + 1);
    if (kind == "gaussian") {
        int n = 1;
        const auto c2 = rest.find(':');
        if (c2 != std::string::npos) {
            n = parse_int("factors", rest.substr(c2 + 1));
            rest = rest.substr(0, c2);
        }
        return scaled_gaussian_family(parse_real(rest), n, t0);
    }
    if (kind == "circle") return round_circle_family(parse_real(rest), t0);
    throw ConfigurationError("unknown factor kind '" + kind + "' (expected gaussian or circle)");
}

const std::vector<std::string> kKeys = {
    "name", "family", "u0", "n", "a0", "f0", "t0", "factors",
    "metric_cos", "metric_sin", "weight_cos", "weight_sin",
    "backend", "horizon", "output_interval", "dt", "max_dt", "mode_cutoff", "circle_nodes", "hermite_order",
    "eigen_count", "solver_tolerance", "error_tolerance", "stability_threshold", "scalars",
    "verify.bochner", "verify.commutator", "verify.functionals", "verify.bounds", "verify.splitting",
    "tol.bound", "tol.identity", "tol.energy_monotone", "tol.volume", "tol.mean", "tol.bochner",
    "tol.commutator", "tol.forward_slack",
    "splitting.t0", "splitting.t1", "splitting.profile", "splitting.eigenvalue", "splitting.hessian",
    "splitting.gradient", "splitting.decomposition", "splitting.factor_equation",
    "out", "seed",
};

}  // namespace

const std::vector<std::string>& known_keys()
{
    return kKeys;
}

double parse_real(const std::string& raw)
{
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigurationError("empty number");
    for (const char* fn : {"log", "sqrt", "exp"}) {
        const std::string prefix = std::string(fn) + "(";
        if (s.rfind(prefix, 0) == 0 && s.back() == ')') {
            const double x = parse_real(s.substr(prefix.size(), s.size() - prefix.size() - 1));
            if (prefix == "log(") return std::log(x);
            if (prefix == "sqrt(") return std::sqrt(x);
            return std::exp(x);
        }
    }
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
        const double den = parse_plain(trim(s.substr(slash + 1)));
        if (den == 0.0) throw ConfigurationError("division by zero in '" + s + "'");
        return parse_plain(trim(s.substr(0, slash))) / den;
    }
    return parse_plain(s);
}

ConfigDocument parse_document(const std::string& text, const std::string& origin)
{
    ConfigDocument doc;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw ConfigurationError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ConfigurationError(where + ": empty key or value");
        if (key.rfind("sweep.", 0) == 0) {
            const std::string target = key.substr(6);
            if (std::find(kKeys.begin(), kKeys.end(), target) == kKeys.end() || target == "name" || target == "out") {
                throw ConfigurationError(where + ": cannot sweep key '" + target + "'");
            }
            for (const auto& [k, v] : doc.sweeps) {
                if (k == target) throw ConfigurationError(where + ": duplicate sweep axis '" + target + "'");
            }
            doc.sweeps.emplace_back(target, split_ws(value));
            continue;
        }
        if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
            throw ConfigurationError(where + ": unknown key '" + key + "'");
        }
        if (!doc.entries.emplace(key, value).second) throw ConfigurationError(where + ": duplicate key '" + key + "'");
    }
    return doc;
}

ConfigDocument load_document(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_document(ss.str(), path);
}

namespace {

ScenarioConfig build_checked(const std::map<std::string, std::string>& entries)
{
    ScenarioConfig cfg;
    cfg.entries = entries;
    auto get = [&](const std::string& k) -> std::optional<std::string> {
        auto it = entries.find(k);
        if (it == entries.end()) return std::nullopt;
        return it->second;
    };
    auto real = [&](const std::string& k, double def) {
        const auto v = get(k);
        if (!v) return def;
        try {
            return parse_real(*v);
        } catch (const ConfigurationError& e) {
            throw ConfigurationError(k + ": " + e.what());
        }
    };
    auto integer = [&](const std::string& k, int def) {
        const auto v = get(k);
        return v ? parse_int(k, *v) : def;
    };
    auto boolean = [&](const std::string& k, bool def) {
        const auto v = get(k);
        return v ? parse_bool(k, *v) : def;
    };

    cfg.name = get("name").value_or("scenario");
    for (char c : cfg.name) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
            throw ConfigurationError("name may only contain letters, digits, '_', '-' and '.'");
        }
    }
    ScenarioSpec& spec = cfg.spec;
    spec.name = cfg.name;
    spec.t0 = real("t0", 0.0);

    const std::string family = get("family").value_or("");
    if (family == "scaled_gaussian") {
        spec.family = scaled_gaussian_family(real("u0", 1.0), integer("n", 1), spec.t0);
    } else if (family == "round_circle") {
        spec.family = round_circle_family(real("a0", 1.0), spec.t0, real("f0", 0.0));
    } else if (family == "product") {
        const auto f = get("factors");
        if (!f) throw ConfigurationError("family = product needs 'factors'");
        std::vector<AnalyticFamily> parts;
        for (const auto& tok : split_ws(*f)) parts.push_back(parse_factor(tok, spec.t0));
        spec.family = product_family(std::move(parts));
    } else if (family == "circle_state") {
        auto coeffs = [&](const std::string& k, std::vector<double> def) {
            const auto v = get(k);
            return v ? parse_list(*v) : def;
        };
        std::vector<double> mc = coeffs("metric_cos", {1.0});
        std::vector<double> ms = coeffs("metric_sin", {});
        std::vector<double> wc = coeffs("weight_cos", {0.0});
        std::vector<double> ws = coeffs("weight_sin", {});
        // Sine lists start at k = 1 in the file; index 0 is ignored internally.
        ms.insert(ms.begin(), 0.0);
        ws.insert(ws.begin(), 0.0);
        ContinuumState st;
        st.factors.emplace_back(CircleFactor{TrigPolynomial::from_coefficients(mc, ms),
                                             TrigPolynomial::from_coefficients(wc, ws)});
        st.time = spec.t0;
        try {
            st.validate();
        } catch (const DomainError& e) {
            throw ConfigurationError(std::string("circle_state: ") + e.what());
        }
        spec.initial_state = st;
    } else if (family.empty()) {
        throw ConfigurationError("missing required key 'family'");
    } else {
        throw ConfigurationError("unknown family '" + family +
                                 "' (expected scaled_gaussian, round_circle, product or circle_state)");
    }

    const std::string backend = get("backend").value_or(spec.family ? "analytic" : "galerkin");
    if (backend == "analytic") {
        if (!spec.family) throw ConfigurationError("backend = analytic needs a closed-form family");
        spec.flow.backend = FlowBackend::Analytic;
    } else if (backend == "galerkin") {
        spec.flow.backend = FlowBackend::Galerkin;
    } else {
        throw ConfigurationError("backend must be analytic or galerkin, got '" + backend + "'");
    }

    spec.horizon = real("horizon", 0.0);
    spec.output_interval = real("output_interval", 0.0);
    spec.flow.dt = real("dt", 1e-3);
    spec.flow.max_dt = real("max_dt", 0.05);
    spec.flow.mode_cutoff = integer("mode_cutoff", 32);
    spec.flow.resolution.circle_nodes = integer("circle_nodes", 64);
    spec.flow.resolution.hermite_order = integer("hermite_order", 16);
    spec.flow.eigen_count = integer("eigen_count", 3);
    spec.flow.solver_tolerance = real("solver_tolerance", kDefaultSolverTolerance);
    spec.flow.error_tolerance = real("error_tolerance", 1e-9);
    spec.flow.stability_threshold = real("stability_threshold", 1e8);

    if (!(spec.horizon >= 0.0 && spec.horizon <= 50.0)) throw ConfigurationError("horizon must lie in [0, 50]");
    if (!(spec.flow.dt > 0.0 && spec.flow.dt <= spec.flow.max_dt)) throw ConfigurationError("dt must lie in (0, max_dt]");
    if (spec.flow.resolution.circle_nodes < kMinCircleNodes || spec.flow.resolution.circle_nodes > 4096) {
        throw ConfigurationError("circle_nodes must lie in [" + std::to_string(kMinCircleNodes) + ", 4096]");
    }
    if (spec.flow.resolution.hermite_order < kMinHermiteOrder || spec.flow.resolution.hermite_order > 150) {
        throw ConfigurationError("hermite_order must lie in [" + std::to_string(kMinHermiteOrder) + ", 150]");
    }
    if (spec.flow.mode_cutoff < 1 || spec.flow.mode_cutoff > 256) throw ConfigurationError("mode_cutoff must lie in [1, 256]");
    if (spec.flow.eigen_count < 1 || spec.flow.eigen_count > 64) throw ConfigurationError("eigen_count must lie in [1, 64]");
    if (!(spec.flow.solver_tolerance > 0.0)) throw ConfigurationError("solver_tolerance must be positive");
    if (!(spec.flow.error_tolerance > 0.0)) throw ConfigurationError("error_tolerance must be positive");
    if (!(spec.output_interval >= 0.0)) throw ConfigurationError("output_interval must be >= 0");

    if (const auto s = get("scalars")) {
        for (const auto& tok : split_ws(*s)) {
            std::vector<int> idx;
            std::stringstream ts(tok);
            std::string part;
            while (std::getline(ts, part, '+')) {
                const int i = parse_int("scalars", part);
                if (i < 0 || i > 64) throw ConfigurationError("scalars: eigen index out of range in '" + tok + "'");
                idx.push_back(i);
            }
            spec.scalars.push_back(eigen_scalar(idx));
        }
    }

    cfg.verify.bochner = boolean("verify.bochner", true);
    cfg.verify.commutator = boolean("verify.commutator", true);
    cfg.verify.functionals = boolean("verify.functionals", true);
    cfg.verify.bounds = boolean("verify.bounds", true);
    cfg.verify.splitting = boolean("verify.splitting", false);

    auto& t = cfg.tolerances;
    t.bound = real("tol.bound", t.bound);
    t.identity = real("tol.identity", t.identity);
    t.energy_monotone = real("tol.energy_monotone", t.energy_monotone);
    t.volume = real("tol.volume", t.volume);
    t.mean = real("tol.mean", t.mean);
    t.bochner = real("tol.bochner", t.bochner);
    t.commutator = real("tol.commutator", t.commutator);
    t.forward_slack = real("tol.forward_slack", t.forward_slack);
    for (double v : {t.bound, t.identity, t.energy_monotone, t.volume, t.mean, t.bochner, t.commutator,
                     t.forward_slack}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigurationError("tol.* values must be finite and >= 0");
    }

    const std::string profile =
        get("splitting.profile").value_or(spec.flow.backend == FlowBackend::Analytic ? "analytic" : "galerkin");
    if (profile == "analytic") {
        cfg.splitting_tolerances = SplittingTolerances{};
    } else if (profile == "galerkin") {
        cfg.splitting_tolerances = SplittingTolerances::galerkin();
    } else {
        throw ConfigurationError("splitting.profile must be analytic or galerkin");
    }
    auto& st = cfg.splitting_tolerances;
    st.eigenvalue = real("splitting.eigenvalue", st.eigenvalue);
    st.hessian = real("splitting.hessian", st.hessian);
    st.gradient = real("splitting.gradient", st.gradient);
    st.decomposition = real("splitting.decomposition", st.decomposition);
    st.factor_equation = real("splitting.factor_equation", st.factor_equation);
    for (double v : {st.eigenvalue, st.hessian, st.gradient, st.decomposition, st.factor_equation}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigurationError("splitting tolerances must be finite and >= 0");
    }
    if (get("splitting.t0")) cfg.splitting_t0 = real("splitting.t0", 0.0);
    if (get("splitting.t1")) cfg.splitting_t1 = real("splitting.t1", 0.0);

    cfg.output_dir = get("out").value_or("");
    const int seed = integer("seed", 0);
    if (seed < 0) throw ConfigurationError("seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);
    return cfg;
}

}  // namespace

ScenarioConfig build_scenario(const std::map<std::string, std::string>& entries)
{
    try {
        return build_checked(entries);
    } catch (const DomainError& e) {
        throw ConfigurationError(e.what());
    }
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin)
{
    const ConfigDocument doc = parse_document(text, origin);
    if (!doc.sweeps.empty()) throw ConfigurationError(origin + ": sweep axes are only accepted by the sweep command");
    return build_scenario(doc.entries);
}

ScenarioConfig load_scenario(const std::string& path)
{
    const ConfigDocument doc = load_document(path);
    if (!doc.sweeps.empty()) throw ConfigurationError(path + ": sweep axes are only accepted by the sweep command");
    return build_scenario(doc.entries);
}

std::vector<ScenarioConfig> expand_sweep(const ConfigDocument& doc)
{
    std::vector<std::map<std::string, std::string>> runs{doc.entries};
    for (const auto& [key, values] : doc.sweeps) {
        if (values.empty()) throw ConfigurationError("sweep axis '" + key + "' has no values");
        std::vector<std::map<std::string, std::string>> next;
        for (const auto& r : runs) {
            for (const auto& v : values) {
                auto m = r;
                m[key] = v;
                next.push_back(std::move(m));
            }
        }
        runs = std::move(next);
    }
    std::vector<ScenarioConfig> out;
    const std::string base = doc.entries.count("name") ? doc.entries.at("name") : "scenario";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        auto m = runs[i];
        char suffix[24];
        std::snprintf(suffix, sizeof suffix, "_%03zu", i);
        m["name"] = base + suffix;
        out.push_back(build_scenario(m));
    }
    return out;
}

std::string ScenarioConfig::canonical_text() const
{
    std::string s;
    for (const auto& [k, v] : entries) {
        if (k == "out") continue;
        s += k + " = " + v + "\n";
    }
    return s;
}

std::string ScenarioConfig::hash() const
{
    return fnv1a_hex(canonical_text());
}

}  // namespace driftlab
