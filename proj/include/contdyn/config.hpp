#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "contdyn/diagnostics.hpp"
#include "contdyn/dynamics.hpp"
#include "contdyn/quantum.hpp"

namespace contdyn {

enum class ScenarioKind { ClassicalDet, QuantumDetU, ContinuitySweep, CrossingReport };

[[nodiscard]] std::string_view to_string(ScenarioKind k);

/// Scalar function of time as written in a config: a number, or
/// {"type": constant|linear|cos|sin, ...}.
///   constant: value
///   linear:   offset + slope * t
///   cos/sin:  offset + amplitude * cos|sin(omega * t + phase)
struct FunctionSpec {
    enum class Kind { Constant, Linear, Cos, Sin };
    Kind kind = Kind::Constant;
    double value = 0.0;
    double offset = 0.0;
    double slope = 0.0;
    double amplitude = 1.0;
    double omega = 1.0;
    double phase = 0.0;

    [[nodiscard]] double operator()(double t) const;
    [[nodiscard]] ScalarFunction as_function() const;
};

enum class MatrixPreset {
    Zero,
    IdentityScaled,
    ConstantInline,
    DiagonalFn,
    TwoLevel,
    DrivenTwoLevel,
    Random,
};

/// One matrix-valued entry of the config (a generator or the initial matrix).
struct MatrixSpec {
    MatrixPreset preset = MatrixPreset::Zero;
    std::size_t dim = 0;
    double scale = 1.0;                 // identity_scaled, random
    double shift = 0.0;                 // random: shift * I + scale * R
    std::vector<Complex> entries;       // constant_inline, row-major
    std::vector<FunctionSpec> diagonal; // diagonal_fn
    FunctionSpec e1, e2;                // two_level
    double coupling = 0.0;              // two_level delta
    FunctionSpec epsilon, delta;        // driven_two_level
    std::uint64_t salt = 0;             // random: derived from the key name

    [[nodiscard]] bool is_real() const;
    [[nodiscard]] RealGenerator real_generator(std::uint64_t seed) const;
    [[nodiscard]] ComplexGenerator complex_generator(std::uint64_t seed) const;
};

struct SweepSpec {
    std::string parameter; // alpha | gamma | epsilon | hbar
    std::vector<double> values;
};

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::ClassicalDet;
    std::optional<MatrixSpec> A;
    std::optional<MatrixSpec> B;
    std::optional<MatrixSpec> M0;
    std::optional<MatrixSpec> hamiltonian;
    FeedbackVariant feedback = FeedbackVariant::None;
    double alpha = 1.0;
    double gamma = 0.0;
    double epsilon = 1e-6;
    double hbar = 1.0;
    double t0 = 0.0;
    double tf = 1.0;
    std::size_t n_steps = 1000;
    std::string output_path;
    std::optional<SweepSpec> sweep;
    std::uint64_t seed = 0;
    double near_singular_threshold = 1e-8;
    DerivativeMode derivative_mode = DerivativeMode::AnalyticJacobi;
    bool gnuplot = false;

    /// The validated source document; sweeps and overrides edit it so the hash follows.
    nlohmann::json source;

    [[nodiscard]] std::uint64_t hash() const;
    [[nodiscard]] Feedback feedback_kind() const;
    /// Assigns one of the sweepable parameters (and mirrors it into `source`).
    void set_parameter(std::string_view name, double value);
    void set_seed(std::uint64_t value);
};

/// Parses and validates a JSON scenario document.
///
/// Syntax errors carry line and column; validation errors name the field
/// (dotted path for nested keys). Unknown keys are rejected.
[[nodiscard]] ScenarioConfig parse_config(std::string_view text);

[[nodiscard]] ScenarioConfig load_config(const std::string& path);

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes);

} // namespace contdyn
