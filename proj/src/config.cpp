#include "contdyn/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace contdyn {

using nlohmann::json;

std::string_view to_string(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::ClassicalDet: return "classical_det";
    case ScenarioKind::QuantumDetU: return "quantum_det_u";
    case ScenarioKind::ContinuitySweep: return "continuity_sweep";
    case ScenarioKind::CrossingReport: return "crossing_report";
    }
    return "unknown";
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------
// FunctionSpec / MatrixSpec evaluation

double FunctionSpec::operator()(double t) const {
    switch (kind) {
    case Kind::Constant: return value;
    case Kind::Linear: return offset + slope * t;
    case Kind::Cos: return offset + amplitude * std::cos(omega * t + phase);
    case Kind::Sin: return offset + amplitude * std::sin(omega * t + phase);
    }
    return 0.0;
}

ScalarFunction FunctionSpec::as_function() const {
    return [spec = *this](double t) { return spec(t); };
}

namespace {

double function_derivative(const FunctionSpec& f, double t) {
    using Kind = FunctionSpec::Kind;
    switch (f.kind) {
    case Kind::Constant: return 0.0;
    case Kind::Linear: return f.slope;
    case Kind::Cos: return -f.amplitude * f.omega * std::sin(f.omega * t + f.phase);
    case Kind::Sin: return f.amplitude * f.omega * std::cos(f.omega * t + f.phase);
    }
    return 0.0;
}

RealMatrix random_matrix(std::size_t n, double scale, double shift, std::uint64_t seed) {
    // mt19937_64 output is fully specified by the standard; the mapping to
    // [-1, 1) is done by hand so the values do not depend on the library's
    // distribution implementation.
    std::mt19937_64 rng(seed);
    RealMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            m(i, j) = scale * (2.0 * u - 1.0) + (i == j ? shift : 0.0);
        }
    return m;
}

} // namespace

bool MatrixSpec::is_real() const {
    for (const Complex& c : entries)
        if (c.imag() != 0.0)
            return false;
    return true;
}

RealGenerator MatrixSpec::real_generator(std::uint64_t seed) const {
    if (!is_real())
        throw ParameterError("matrix has complex entries; a real generator was requested");
    switch (preset) {
    case MatrixPreset::Zero:
        return RealGenerator::zero(dim);
    case MatrixPreset::IdentityScaled:
        return RealGenerator::constant(RealMatrix::identity(dim) * scale);
    case MatrixPreset::ConstantInline: {
        std::vector<Real> re;
        re.reserve(entries.size());
        for (const Complex& c : entries)
            re.push_back(c.real());
        return RealGenerator::constant(RealMatrix(dim, std::move(re)));
    }
    case MatrixPreset::Random:
        return RealGenerator::constant(random_matrix(dim, scale, shift, seed ^ salt));
    case MatrixPreset::DiagonalFn: {
        RealGenerator g;
        g.dim = dim;
        g.eval = [fns = diagonal](double t) {
            RealMatrix m(fns.size());
            for (std::size_t i = 0; i < fns.size(); ++i)
                m(i, i) = fns[i](t);
            return m;
        };
        g.eval_derivative = [fns = diagonal](double t) {
            RealMatrix m(fns.size());
            for (std::size_t i = 0; i < fns.size(); ++i)
                m(i, i) = function_derivative(fns[i], t);
            return m;
        };
        return g;
    }
    case MatrixPreset::TwoLevel: {
        RealGenerator g;
        g.dim = 2;
        g.eval = [e1 = e1, e2 = e2, d = coupling](double t) {
            return RealMatrix{{e1(t), d}, {d, e2(t)}};
        };
        g.eval_derivative = [e1 = e1, e2 = e2](double t) {
            return RealMatrix{{function_derivative(e1, t), 0.0}, {0.0, function_derivative(e2, t)}};
        };
        return g;
    }
    case MatrixPreset::DrivenTwoLevel: {
        RealGenerator g;
        g.dim = 2;
        g.eval = [eps = epsilon, del = delta](double t) {
            const double e = eps(t);
            const double d = del(t);
            return RealMatrix{{e, d}, {d, -e}};
        };
        g.eval_derivative = [eps = epsilon, del = delta](double t) {
            const double e = function_derivative(eps, t);
            const double d = function_derivative(del, t);
            return RealMatrix{{e, d}, {d, -e}};
        };
        return g;
    }
    }
    throw ParameterError("unknown matrix preset");
}

ComplexGenerator MatrixSpec::complex_generator(std::uint64_t seed) const {
    if (preset == MatrixPreset::ConstantInline && !is_real())
        return ComplexGenerator::constant(ComplexMatrix(dim, entries));
    RealGenerator r = real_generator(seed);
    ComplexGenerator c;
    c.dim = r.dim;
    c.eval = [r](double t) { return to_complex(r(t)); };
    if (r.has_derivative())
        c.eval_derivative = [r](double t) { return to_complex(r.derivative(t)); };
    return c;
}

// ---------------------------------------------------------------------------
// ScenarioConfig

std::uint64_t ScenarioConfig::hash() const {
    return fnv1a64(source.dump());
}

Feedback ScenarioConfig::feedback_kind() const {
    Feedback f{feedback, gamma, feedback == FeedbackVariant::Regularized ? epsilon : 0.0};
    f.validate();
    return f;
}

void ScenarioConfig::set_parameter(std::string_view name, double value) {
    if (name == "alpha")
        alpha = value;
    else if (name == "gamma")
        gamma = value;
    else if (name == "epsilon")
        epsilon = value;
    else if (name == "hbar")
        hbar = value;
    else
        throw ConfigError("unknown sweep parameter '" + std::string(name) + "'", "sweep.parameter");
    source[std::string(name)] = value;
}

void ScenarioConfig::set_seed(std::uint64_t value) {
    seed = value;
    source["seed"] = value;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
    throw ConfigError("invalid config field '" + field + "': " + why, field);
}

/// Walks one JSON object, remembering which keys were read so leftovers can be rejected.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object())
            invalid(path_.empty() ? "<root>" : path_, "expected an object");
    }

    [[nodiscard]] std::string field(const std::string& key) const { return join_path(path_, key); }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    const json& require(const std::string& key) {
        const json* v = find(key);
        if (v == nullptr)
            throw ConfigError("missing required config field '" + field(key) + "'", field(key));
        return *v;
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const json* v = fallback ? find(key) : &require(key);
        if (v == nullptr)
            return *fallback;
        return as_number(*v, field(key));
    }

    std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
        const json* v = fallback ? find(key) : &require(key);
        if (v == nullptr)
            return *fallback;
        if (!v->is_number_integer() || v->get<long long>() < 0)
            invalid(field(key), "expected a non-negative integer");
        return v->get<std::size_t>();
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        const json* v = fallback ? find(key) : &require(key);
        if (v == nullptr)
            return *fallback;
        if (!v->is_string())
            invalid(field(key), "expected a string");
        return v->get<std::string>();
    }

    bool boolean(const std::string& key, bool fallback) {
        const json* v = find(key);
        if (v == nullptr)
            return fallback;
        if (!v->is_boolean())
            invalid(field(key), "expected true or false");
        return v->get<bool>();
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.contains(it.key()))
                throw ConfigError("unknown config key '" + field(it.key()) + "'", field(it.key()));
    }

    static double as_number(const json& v, const std::string& field) {
        if (!v.is_number())
            invalid(field, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d))
            invalid(field, "must be finite");
        return d;
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

FunctionSpec parse_function(const json& v, const std::string& field) {
    FunctionSpec f;
    if (v.is_number()) {
        f.value = ObjectReader::as_number(v, field);
        return f;
    }
    ObjectReader r(v, field);
    const std::string type = r.string("type");
    if (type == "constant") {
        f.kind = FunctionSpec::Kind::Constant;
        f.value = r.number("value");
    } else if (type == "linear") {
        f.kind = FunctionSpec::Kind::Linear;
        f.offset = r.number("offset", 0.0);
        f.slope = r.number("slope");
    } else if (type == "cos" || type == "sin") {
        f.kind = type == "cos" ? FunctionSpec::Kind::Cos : FunctionSpec::Kind::Sin;
        f.offset = r.number("offset", 0.0);
        f.amplitude = r.number("amplitude", 1.0);
        f.omega = r.number("omega", 1.0);
        f.phase = r.number("phase", 0.0);
    } else {
        invalid(r.field("type"), "expected constant, linear, cos or sin");
    }
    r.finish();
    return f;
}

Complex parse_entry(const json& v, const std::string& field) {
    if (v.is_number())
        return {ObjectReader::as_number(v, field), 0.0};
    if (v.is_array() && v.size() == 2)
        return {ObjectReader::as_number(v[0], field), ObjectReader::as_number(v[1], field)};
    invalid(field, "expected a number or a [re, im] pair");
}

std::size_t positive_dim(ObjectReader& r) {
    const std::size_t n = r.count("dim");
    if (n == 0)
        invalid(r.field("dim"), "must be at least 1");
    return n;
}

MatrixSpec parse_matrix(const json& v, const std::string& path) {
    ObjectReader r(v, path);
    MatrixSpec m;
    m.salt = fnv1a64(path);
    const std::string preset = r.string("preset");
    if (preset == "zero") {
        m.preset = MatrixPreset::Zero;
        m.dim = positive_dim(r);
    } else if (preset == "identity_scaled") {
        m.preset = MatrixPreset::IdentityScaled;
        m.dim = positive_dim(r);
        m.scale = r.number("scale", 1.0);
    } else if (preset == "constant_inline") {
        m.preset = MatrixPreset::ConstantInline;
        const json& entries = r.require("entries");
        if (!entries.is_array() || entries.empty())
            invalid(r.field("entries"), "expected a non-empty array (row-major)");
        for (std::size_t k = 0; k < entries.size(); ++k)
            m.entries.push_back(parse_entry(entries[k], r.field("entries")));
        const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m.entries.size()))));
        if (side * side != m.entries.size())
            invalid(r.field("entries"), "entry count is not a perfect square");
        m.dim = r.count("dim", side);
        if (m.dim != side)
            invalid(r.field("dim"), "does not match the number of entries");
    } else if (preset == "diagonal_fn") {
        m.preset = MatrixPreset::DiagonalFn;
        const json& diag = r.require("diagonal");
        if (!diag.is_array() || diag.empty())
            invalid(r.field("diagonal"), "expected a non-empty array of functions");
        for (std::size_t k = 0; k < diag.size(); ++k)
            m.diagonal.push_back(parse_function(diag[k], r.field("diagonal")));
        m.dim = m.diagonal.size();
    } else if (preset == "two_level") {
        m.preset = MatrixPreset::TwoLevel;
        m.dim = 2;
        m.e1 = parse_function(r.require("E1"), r.field("E1"));
        m.e2 = parse_function(r.require("E2"), r.field("E2"));
        m.coupling = r.number("delta");
    } else if (preset == "driven_two_level") {
        m.preset = MatrixPreset::DrivenTwoLevel;
        m.dim = 2;
        m.epsilon = parse_function(r.require("epsilon"), r.field("epsilon"));
        m.delta = parse_function(r.require("delta"), r.field("delta"));
    } else if (preset == "random") {
        m.preset = MatrixPreset::Random;
        m.dim = positive_dim(r);
        m.scale = r.number("scale", 1.0);
        m.shift = r.number("shift", 0.0);
    } else {
        invalid(r.field("preset"),
                "expected zero, identity_scaled, constant_inline, diagonal_fn, two_level, "
                "driven_two_level or random");
    }
    r.finish();
    return m;
}

ScenarioKind parse_scenario(const std::string& s, const std::string& field) {
    if (s == "classical_det") return ScenarioKind::ClassicalDet;
    if (s == "quantum_det_u") return ScenarioKind::QuantumDetU;
    if (s == "continuity_sweep") return ScenarioKind::ContinuitySweep;
    if (s == "crossing_report") return ScenarioKind::CrossingReport;
    invalid(field, "expected classical_det, quantum_det_u, continuity_sweep or crossing_report");
}

FeedbackVariant parse_feedback(const std::string& s, const std::string& field) {
    for (auto v : {FeedbackVariant::None, FeedbackVariant::InverseScaled,
                   FeedbackVariant::IdentityScaled, FeedbackVariant::StateScaled,
                   FeedbackVariant::Regularized})
        if (to_string(v) == s)
            return v;
    invalid(field, "expected none, inverse_scaled, identity_scaled, state_scaled or regularized");
}

void check_parameter_range(const std::string& name, double v, const std::string& field) {
    if (name == "alpha" && v < 0.0)
        invalid(field, "alpha must be >= 0");
    if ((name == "epsilon" || name == "hbar") && !(v > 0.0))
        invalid(field, name + " must be > 0");
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace

ScenarioConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                              std::to_string(col),
                          line, col);
    }

    ScenarioConfig c;
    ObjectReader r(doc, "");
    c.scenario = parse_scenario(r.string("scenario"), "scenario");
    c.t0 = r.number("t0", 0.0);
    c.tf = r.number("tf");
    c.n_steps = r.count("n_steps");
    if (c.n_steps < 2)
        invalid("n_steps", "must be at least 2");
    if (!(c.tf > c.t0))
        invalid("tf", "must exceed t0");

    c.alpha = r.number("alpha", 1.0);
    check_parameter_range("alpha", c.alpha, "alpha");
    c.gamma = r.number("gamma", 0.0);
    c.epsilon = r.number("epsilon", 1e-6);
    check_parameter_range("epsilon", c.epsilon, "epsilon");
    c.hbar = r.number("hbar", 1.0);
    check_parameter_range("hbar", c.hbar, "hbar");
    c.near_singular_threshold = r.number("near_singular_threshold", 1e-8);
    if (!(c.near_singular_threshold > 0.0))
        invalid("near_singular_threshold", "must be > 0");
    c.feedback = parse_feedback(r.string("feedback", "none"), "feedback");
    c.output_path = r.string("output_path", std::string(to_string(c.scenario)) + ".csv");
    if (c.output_path.empty())
        invalid("output_path", "must not be empty");
    c.gnuplot = r.boolean("gnuplot", false);

    if (const json* s = r.find("seed")) {
        if (!s->is_number_unsigned())
            invalid("seed", "expected a non-negative integer");
        c.seed = s->get<std::uint64_t>();
    }

    const std::string mode = r.string("derivative_mode", "analytic_jacobi");
    if (mode == "analytic_jacobi")
        c.derivative_mode = DerivativeMode::AnalyticJacobi;
    else if (mode == "finite_difference")
        c.derivative_mode = DerivativeMode::FiniteDifference;
    else
        invalid("derivative_mode", "expected analytic_jacobi or finite_difference");

    if (const json* v = r.find("A")) c.A = parse_matrix(*v, "A");
    if (const json* v = r.find("B")) c.B = parse_matrix(*v, "B");
    if (const json* v = r.find("M0")) c.M0 = parse_matrix(*v, "M0");
    if (const json* v = r.find("hamiltonian")) c.hamiltonian = parse_matrix(*v, "hamiltonian");

    if (const json* v = r.find("sweep")) {
        ObjectReader sr(*v, "sweep");
        SweepSpec sweep;
        sweep.parameter = sr.string("parameter");
        if (sweep.parameter != "alpha" && sweep.parameter != "gamma" &&
            sweep.parameter != "epsilon" && sweep.parameter != "hbar")
            invalid("sweep.parameter", "expected alpha, gamma, epsilon or hbar");
        const json& values = sr.require("values");
        if (!values.is_array() || values.empty())
            invalid("sweep.values", "expected a non-empty array of numbers");
        for (const json& x : values) {
            const double d = ObjectReader::as_number(x, "sweep.values");
            check_parameter_range(sweep.parameter, d, "sweep.values");
            sweep.values.push_back(d);
        }
        sr.finish();
        c.sweep = std::move(sweep);
    }
    r.finish();

    const bool classical = c.scenario == ScenarioKind::ClassicalDet ||
                           c.scenario == ScenarioKind::ContinuitySweep;
    if (classical) {
        if (!c.A)
            throw ConfigError("missing required config field 'A'", "A");
        if (c.hamiltonian)
            invalid("hamiltonian", "not used by this scenario; give A (and optionally B, M0)");
        const std::size_t n = c.A->dim;
        for (const auto* spec : {&c.A, &c.B, &c.M0}) {
            if (!*spec)
                continue;
            const std::string name = spec == &c.A ? "A" : spec == &c.B ? "B" : "M0";
            if (!(*spec)->is_real())
                invalid(name, "classical scenarios take real matrices only");
            if ((*spec)->dim != n)
                invalid(name, "dimension does not match A");
        }
        const RealMatrix m0 = c.M0 ? c.M0->real_generator(c.seed)(c.t0) : RealMatrix::identity(n);
        if (det(m0) == 0.0)
            invalid("M0", "initial matrix is singular");
        if (c.feedback == FeedbackVariant::Regularized && !(c.epsilon > 0.0))
            invalid("epsilon", "regularized feedback requires epsilon > 0");
    } else {
        if (!c.hamiltonian)
            throw ConfigError("missing required config field 'hamiltonian'", "hamiltonian");
        for (const char* key : {"A", "B", "M0"})
            if (doc.contains(key))
                invalid(key, "not used by this scenario; give hamiltonian");
        if (c.feedback != FeedbackVariant::None)
            invalid("feedback", "quantum scenarios run without feedback");
    }

    c.source = std::move(doc);
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace contdyn
