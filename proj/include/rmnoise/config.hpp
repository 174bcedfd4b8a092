#ifndef RMNOISE_CONFIG_HPP
#define RMNOISE_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "rmnoise/sim.hpp"

namespace rmnoise {

enum class Command {
    Equilibria,
    Regime,
    Jacobian,
    Covariance,
    Lyapunov,
    Psd,
    Ellipse,
    Precursor,
    Simulate,
    CompareClosures,
    SweepK,
};

const char* command_name(Command command);

enum class OutputFormat { Json, Csv };

struct PsdGridSpec {
    std::optional<double> omega_max;  // default 4 * spectral_scale(J)
    int count = 2001;
};

struct SweepSpec {
    std::optional<double> k_min;  // default 0.6 * k_H
    std::optional<double> k_max;  // default 1.05 * k_H
    int count = 20;
};

// Fully resolved run description. parse_config applies defaults and rejects
// unknown keys; the resolved form is echoed into every output's metadata.
struct RunConfig {
    ModelParams model;
    ClosureKind closure = ClosureKind::BernoulliCoupled;
    Command command = Command::Regime;
    double p = 0.95;
    std::optional<double> d_sep;
    std::optional<State2> state;  // evaluation point for jacobian/covariance
    PsdGridSpec psd;
    SweepSpec sweep;
    SimConfig sim;  // meaningful when command == Simulate
    bool has_sim = false;
    std::uint64_t seed = 1;
    std::string out_path;  // empty = stdout
    OutputFormat format = OutputFormat::Json;
    std::optional<std::string> trajectory_path;  // replicate-0 CSV dump
};

// Strict-schema parse of a UTF-8 JSON document. SchemaError / ValueError
// carry the JSON-pointer path of the offending key.
RunConfig parse_config(const std::string& text);

// The resolved config (all defaults filled) as a JSON document.
nlohmann::ordered_json resolved_config_json(const RunConfig& config);

struct RunOutput {
    std::string main;                       // the primary output document
    std::optional<std::string> trajectory;  // replicate-0 t,N,P CSV when requested
};

// Renders the complete output for the run (JSON or CSV text).
RunOutput render_output(const RunConfig& config, ExecMode mode = ExecMode::Parallel);

// Dispatches the command, writes output to config.out_path or stdout.
// Returns 0 on success, 2 on config errors, 3 on domain errors.
int run(const RunConfig& config, ExecMode mode = ExecMode::Parallel);

}  // namespace rmnoise

#endif
