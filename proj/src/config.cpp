#include "rmnoise/config.hpp"

#include <cinttypes>
#include <fstream>
#include <iostream>
#include <set>

#include "rmnoise/jsonio.hpp"

namespace rmnoise {

using njson = nlohmann::json;
using ojson = nlohmann::ordered_json;

const char* command_name(Command command) {
    switch (command) {
        case Command::Equilibria: return "equilibria";
        case Command::Regime: return "regime";
        case Command::Jacobian: return "jacobian";
        case Command::Covariance: return "covariance";
        case Command::Lyapunov: return "lyapunov";
        case Command::Psd: return "psd";
        case Command::Ellipse: return "ellipse";
        case Command::Precursor: return "precursor";
        case Command::Simulate: return "simulate";
        case Command::CompareClosures: return "compare-closures";
        case Command::SweepK: return "sweep-k";
    }
    return "?";
}

namespace {

Command command_from_name(const std::string& name, const std::string& path) {
    static const std::pair<const char*, Command> table[] = {
        {"equilibria", Command::Equilibria}, {"regime", Command::Regime},
        {"jacobian", Command::Jacobian},     {"covariance", Command::Covariance},
        {"lyapunov", Command::Lyapunov},     {"psd", Command::Psd},
        {"ellipse", Command::Ellipse},       {"precursor", Command::Precursor},
        {"simulate", Command::Simulate},     {"compare-closures", Command::CompareClosures},
        {"sweep-k", Command::SweepK},
    };
    for (const auto& [n, cmd] : table)
        if (name == n) return cmd;
    throw ValueError(path, "unknown command \"" + name + "\"");
}

void require_object(const njson& node, const std::string& path) {
    if (!node.is_object()) throw SchemaError(path, "expected an object");
}

void check_keys(const njson& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known) throw SchemaError(path + "/" + it.key(), "unknown key");
    }
}

double get_number(const njson& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(path + "/" + key, "missing required key");
    if (!it->is_number()) throw SchemaError(path + "/" + key, "expected a number");
    return it->get<double>();
}

double get_number_or(const njson& obj, const std::string& path, const char* key,
                     double fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) throw SchemaError(path + "/" + key, "expected a number");
    return it->get<double>();
}

long long get_integer_or(const njson& obj, const std::string& path, const char* key,
                         long long fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer() && !it->is_number_unsigned())
        throw SchemaError(path + "/" + key, "expected an integer");
    return it->get<long long>();
}

std::string get_string(const njson& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(path + "/" + key, "missing required key");
    if (!it->is_string()) throw SchemaError(path + "/" + key, "expected a string");
    return it->get<std::string>();
}

ModelParams parse_model(const njson& obj, const std::string& path) {
    require_object(obj, path);
    check_keys(obj, path, {"m", "c", "k", "omega", "e"});
    const double m = get_number(obj, path, "m");
    const double c = get_number(obj, path, "c");
    const double k = get_number(obj, path, "k");
    const double omega = get_number(obj, path, "omega");
    const double e = get_number_or(obj, path, "e", 1.0);
    if (!(m > 0.0)) throw ValueError(path + "/m", "must be > 0");
    if (!(c > 0.0)) throw ValueError(path + "/c", "must be > 0");
    if (!(k > 0.0)) throw ValueError(path + "/k", "must be > 0");
    if (!(omega > 0.0)) throw ValueError(path + "/omega", "must be > 0");
    if (!(e > 0.0 && e <= 1.0)) throw ValueError(path + "/e", "must be in (0,1]");
    return {m, c, k, omega, e};
}

State2 parse_state(const njson& obj, const std::string& path) {
    require_object(obj, path);
    check_keys(obj, path, {"n", "p"});
    const double n = get_number(obj, path, "n");
    const double p = get_number(obj, path, "p");
    if (!(n >= 0.0)) throw ValueError(path + "/n", "must be >= 0");
    if (!(p >= 0.0)) throw ValueError(path + "/p", "must be >= 0");
    return {n, p};
}

void parse_sim(const njson& obj, const std::string& path, RunConfig& config) {
    require_object(obj, path);
    check_keys(obj, path,
               {"scheme", "viewpoint", "t_end", "dt", "burn_in", "sample_stride",
                "n_replicates", "initial_state", "welch"});
    SimConfig& sim = config.sim;

    const std::string scheme = get_string(obj, path, "scheme");
    if (scheme == "ssa") sim.scheme = Scheme::SSA;
    else if (scheme == "em") sim.scheme = Scheme::DiffusionEM;
    else if (scheme == "ou") sim.scheme = Scheme::LnaOU;
    else throw ValueError(path + "/scheme", "expected \"ssa\", \"em\" or \"ou\"");

    if (obj.contains("viewpoint")) {
        const std::string vp = get_string(obj, path, "viewpoint");
        if (vp == "open") sim.viewpoint = Viewpoint::OpenDomain;
        else if (vp == "absorbed") sim.viewpoint = Viewpoint::Absorbed;
        else throw ValueError(path + "/viewpoint", "expected \"open\" or \"absorbed\"");
    }

    sim.t_end = get_number(obj, path, "t_end");
    if (!(sim.t_end > 0.0)) throw ValueError(path + "/t_end", "must be > 0");
    sim.dt = get_number_or(obj, path, "dt", 1e-3);
    if (!(sim.dt > 0.0)) throw ValueError(path + "/dt", "must be > 0");
    sim.burn_in = get_number_or(obj, path, "burn_in", 0.0);
    if (!(sim.burn_in >= 0.0 && sim.burn_in < sim.t_end))
        throw ValueError(path + "/burn_in", "must satisfy 0 <= burn_in < t_end");
    sim.sample_stride = get_number_or(obj, path, "sample_stride", 0.5);
    if (!(sim.sample_stride > 0.0))
        throw ValueError(path + "/sample_stride", "must be > 0");
    const long long reps = get_integer_or(obj, path, "n_replicates", 1);
    if (reps < 1) throw ValueError(path + "/n_replicates", "must be >= 1");
    sim.n_replicates = static_cast<int>(reps);

    if (obj.contains("initial_state")) {
        const njson& init = obj.at("initial_state");
        if (init.is_string()) {
            if (init.get<std::string>() != "k3")
                throw ValueError(path + "/initial_state", "expected \"k3\" or {n,p}");
            sim.initial_state.at_k3 = true;
        } else {
            sim.initial_state.at_k3 = false;
            sim.initial_state.state = parse_state(init, path + "/initial_state");
        }
    }

    if (obj.contains("welch")) {
        const njson& welch = obj.at("welch");
        require_object(welch, path + "/welch");
        check_keys(welch, path + "/welch", {"segment_length", "overlap"});
        WelchParams wp;
        const long long seg =
            get_integer_or(welch, path + "/welch", "segment_length", 1024);
        if (seg < 4 || (seg & (seg - 1)) != 0)
            throw ValueError(path + "/welch/segment_length",
                             "must be a power of two >= 4");
        wp.segment_length = static_cast<int>(seg);
        wp.overlap = get_number_or(welch, path + "/welch", "overlap", 0.5);
        if (!(wp.overlap >= 0.0 && wp.overlap < 1.0))
            throw ValueError(path + "/welch/overlap", "must be in [0,1)");
        sim.welch = wp;
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    njson doc;
    try {
        doc = njson::parse(text);
    } catch (const njson::parse_error& err) {
        throw SchemaError("", std::string("invalid JSON: ") + err.what());
    }
    require_object(doc, "");
    check_keys(doc, "",
               {"model", "closure", "command", "p", "d_sep", "state", "psd", "sweep",
                "sim", "seed", "output", "trajectory_path"});

    RunConfig config;
    if (!doc.contains("model")) throw SchemaError("/model", "missing required key");
    config.model = parse_model(doc.at("model"), "/model");

    if (doc.contains("closure")) {
        const std::string name = get_string(doc, "", "closure");
        try {
            config.closure = closure_from_name(name);
        } catch (const DomainError&) {
            throw ValueError("/closure", "expected \"bernoulli\", \"effective\" or \"split\"");
        }
    }

    if (!doc.contains("command")) throw SchemaError("/command", "missing required key");
    config.command = command_from_name(get_string(doc, "", "command"), "/command");

    config.p = get_number_or(doc, "", "p", 0.95);
    if (!(config.p > 0.0 && config.p < 1.0))
        throw ValueError("/p", "must be in (0,1)");

    if (doc.contains("d_sep")) {
        const double d = get_number(doc, "", "d_sep");
        if (!(d > 0.0)) throw ValueError("/d_sep", "must be > 0");
        config.d_sep = d;
    }
    if (doc.contains("state")) config.state = parse_state(doc.at("state"), "/state");

    if (doc.contains("psd")) {
        const njson& psd = doc.at("psd");
        require_object(psd, "/psd");
        check_keys(psd, "/psd", {"omega_max", "count"});
        if (psd.contains("omega_max")) {
            const double om = get_number(psd, "/psd", "omega_max");
            if (!(om > 0.0)) throw ValueError("/psd/omega_max", "must be > 0");
            config.psd.omega_max = om;
        }
        const long long count = get_integer_or(psd, "/psd", "count", 2001);
        if (count < 2) throw ValueError("/psd/count", "must be >= 2");
        config.psd.count = static_cast<int>(count);
    }

    if (doc.contains("sweep")) {
        const njson& sweep = doc.at("sweep");
        require_object(sweep, "/sweep");
        check_keys(sweep, "/sweep", {"k_min", "k_max", "count"});
        if (sweep.contains("k_min")) {
            const double v = get_number(sweep, "/sweep", "k_min");
            if (!(v > 0.0)) throw ValueError("/sweep/k_min", "must be > 0");
            config.sweep.k_min = v;
        }
        if (sweep.contains("k_max")) {
            const double v = get_number(sweep, "/sweep", "k_max");
            if (!(v > 0.0)) throw ValueError("/sweep/k_max", "must be > 0");
            config.sweep.k_max = v;
        }
        if (config.sweep.k_min && config.sweep.k_max &&
            !(*config.sweep.k_min < *config.sweep.k_max))
            throw ValueError("/sweep/k_max", "must be > k_min");
        const long long count = get_integer_or(sweep, "/sweep", "count", 20);
        if (count < 1) throw ValueError("/sweep/count", "must be >= 1");
        config.sweep.count = static_cast<int>(count);
    }

    if (doc.contains("seed")) {
        const njson& seed = doc.at("seed");
        if (!seed.is_number_unsigned() && !seed.is_number_integer())
            throw SchemaError("/seed", "expected an unsigned integer");
        if (seed.is_number_integer() && seed.get<long long>() < 0)
            throw ValueError("/seed", "must be >= 0");
        config.seed = seed.get<std::uint64_t>();
    }

    if (doc.contains("output")) {
        const njson& output = doc.at("output");
        require_object(output, "/output");
        check_keys(output, "/output", {"path", "format"});
        if (output.contains("path"))
            config.out_path = get_string(output, "/output", "path");
        if (output.contains("format")) {
            const std::string fmt = get_string(output, "/output", "format");
            if (fmt == "json") config.format = OutputFormat::Json;
            else if (fmt == "csv") config.format = OutputFormat::Csv;
            else throw ValueError("/output/format", "expected \"json\" or \"csv\"");
        }
    }

    if (doc.contains("trajectory_path"))
        config.trajectory_path = get_string(doc, "", "trajectory_path");

    if (doc.contains("sim")) {
        parse_sim(doc.at("sim"), "/sim", config);
        config.has_sim = true;
    } else if (config.command == Command::Simulate) {
        throw SchemaError("/sim", "missing required key for command \"simulate\"");
    }

    // the sim block shares the model, closure and seed of the run
    config.sim.params = config.model;
    config.sim.closure = config.closure;
    config.sim.seed = config.seed;
    if (config.has_sim) config.sim.validate();
    return config;
}

nlohmann::ordered_json resolved_config_json(const RunConfig& config) {
    ojson doc;
    doc["model"] = {{"m", config.model.m},
                    {"c", config.model.c},
                    {"k", config.model.k},
                    {"omega", config.model.omega},
                    {"e", config.model.e}};
    doc["closure"] = closure_name(config.closure);
    doc["command"] = command_name(config.command);
    doc["p"] = config.p;
    if (config.d_sep) doc["d_sep"] = *config.d_sep;
    if (config.state) doc["state"] = {{"n", config.state->n}, {"p", config.state->p}};
    ojson psd;
    if (config.psd.omega_max) psd["omega_max"] = *config.psd.omega_max;
    psd["count"] = config.psd.count;
    doc["psd"] = psd;
    ojson sweep;
    if (config.sweep.k_min) sweep["k_min"] = *config.sweep.k_min;
    if (config.sweep.k_max) sweep["k_max"] = *config.sweep.k_max;
    sweep["count"] = config.sweep.count;
    doc["sweep"] = sweep;
    if (config.has_sim) {
        const SimConfig& sim = config.sim;
        ojson s;
        s["scheme"] = scheme_name(sim.scheme);
        s["viewpoint"] = viewpoint_name(sim.viewpoint);
        s["t_end"] = sim.t_end;
        s["dt"] = sim.dt;
        s["burn_in"] = sim.burn_in;
        s["sample_stride"] = sim.sample_stride;
        s["n_replicates"] = sim.n_replicates;
        if (sim.initial_state.at_k3)
            s["initial_state"] = "k3";
        else
            s["initial_state"] = {{"n", sim.initial_state.state.n},
                                  {"p", sim.initial_state.state.p}};
        if (sim.welch)
            s["welch"] = {{"segment_length", sim.welch->segment_length},
                          {"overlap", sim.welch->overlap}};
        doc["sim"] = s;
    }
    doc["seed"] = config.seed;
    doc["output"] = {{"path", config.out_path},
                     {"format", config.format == OutputFormat::Json ? "json" : "csv"}};
    if (config.trajectory_path) doc["trajectory_path"] = *config.trajectory_path;
    return doc;
}

namespace {

ojson meta_json(const RunConfig& config) {
    ojson meta;
    meta["resolved_config"] = resolved_config_json(config);
    meta["seed"] = config.seed;
    meta["version"] = kVersion;
    meta["rng_name"] = kRngName;
    return meta;
}

ojson sym_json(const SymMatrix2& a, const char* k11, const char* k12, const char* k22) {
    return {{k11, a.q11}, {k12, a.q12}, {k22, a.q22}};
}

ojson jac_json(const Jacobian2& j) {
    return {{"a11", j.a11}, {"a12", j.a12}, {"a21", j.a21}, {"a22", j.a22},
            {"trace", j.trace()}, {"det", j.det()}};
}

ojson regime_json(const Regime& regime) {
    ojson out;
    switch (regime.label) {
        case RegimeLabel::Lambda2_Stable: out["label"] = "Lambda2_Stable"; break;
        case RegimeLabel::Lambda1_PostHopf: out["label"] = "Lambda1_PostHopf"; break;
        case RegimeLabel::OnThreshold: out["label"] = "OnThreshold"; break;
        case RegimeLabel::Infeasible: out["label"] = "Infeasible"; break;
    }
    out["hopf_k"] = regime.hopf_k ? ojson(*regime.hopf_k) : ojson(nullptr);
    out["margin"] = regime.margin ? ojson(*regime.margin) : ojson(nullptr);
    return out;
}

ojson ellipse_json(const EllipseGeometry& g) {
    return {{"lambda_plus", g.lambda_plus}, {"lambda_minus", g.lambda_minus},
            {"ell_plus", g.ell_plus},       {"ell_minus", g.ell_minus},
            {"theta", g.theta},             {"p", g.p}};
}

ojson stats_json(const EnsembleStats& stats) {
    ojson out;
    out["n_samples"] = stats.n_samples;
    out["sample_mean"] = {{"n", stats.sample_mean.x}, {"p", stats.sample_mean.y}};
    out["sample_cov"] = sym_json(stats.sample_cov, "w11", "w12", "w22");
    out["survival_fraction"] = stats.survival_fraction;
    out["mean_absorption_time"] =
        stats.mean_absorption_time ? ojson(*stats.mean_absorption_time) : ojson(nullptr);
    out["median_absorption_time"] =
        stats.median_absorption_time ? ojson(*stats.median_absorption_time) : ojson(nullptr);
    out["absorbed_prey_axis"] = stats.absorbed_prey_axis;
    out["absorbed_predator_axis"] = stats.absorbed_predator_axis;
    out["absorbed_origin"] = stats.absorbed_origin;
    out["clamp_count"] = stats.clamp_count;
    out["n_replicates"] = stats.n_replicates;
    return out;
}

State2 eval_state(const RunConfig& config) {
    if (config.state) return *config.state;
    const auto k3 = coexistence_equilibrium(config.model);
    if (!k3)
        throw InfeasibleEquilibrium(
            "no coexistence equilibrium; supply an explicit \"state\"");
    return k3->state;
}

const char* equilibrium_kind_name(EquilibriumKind kind) {
    switch (kind) {
        case EquilibriumKind::Origin: return "origin";
        case EquilibriumKind::PreyOnly: return "prey_only";
        case EquilibriumKind::Coexistence: return "coexistence";
    }
    return "?";
}

std::vector<double> psd_grid_for(const RunConfig& config, const Jacobian2& j) {
    const double omega_max =
        config.psd.omega_max ? *config.psd.omega_max : 4.0 * spectral_scale(j);
    const int count = config.psd.count;
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i)
        grid[i] = omega_max * static_cast<double>(i) / (count - 1);
    return grid;
}

// ---- per-command results -------------------------------------------------

struct CommandOutput {
    ojson result;
    // csv table (empty header means: flatten the result into a one-row table)
    std::vector<std::string> csv_header;
    std::vector<std::vector<CsvWriter::Cell>> csv_rows;
    std::vector<std::string> csv_comments;  // extra '#' lines after meta
};

CommandOutput cmd_equilibria(const RunConfig& config) {
    CommandOutput out;
    const auto eqs = equilibria(config.model);
    out.result["feasible"] = coexistence_equilibrium(config.model).has_value();
    ojson list = ojson::array();
    out.csv_header = {"kind", "n", "p"};
    for (const Equilibrium& eq : eqs) {
        list.push_back({{"kind", equilibrium_kind_name(eq.kind)},
                        {"n", eq.state.n},
                        {"p", eq.state.p}});
        out.csv_rows.push_back({equilibrium_kind_name(eq.kind), eq.state.n, eq.state.p});
    }
    out.result["equilibria"] = list;
    return out;
}

CommandOutput cmd_regime(const RunConfig& config) {
    CommandOutput out;
    const Regime regime = classify_regime(config.model);
    out.result = regime_json(regime);
    out.csv_header = {"label", "hopf_k", "margin"};
    std::vector<CsvWriter::Cell> row{out.result["label"].get<std::string>()};
    row.push_back(regime.hopf_k ? CsvWriter::Cell(*regime.hopf_k) : CsvWriter::Cell());
    row.push_back(regime.margin ? CsvWriter::Cell(*regime.margin) : CsvWriter::Cell());
    out.csv_rows.push_back(row);
    return out;
}

CommandOutput cmd_jacobian(const RunConfig& config) {
    CommandOutput out;
    Jacobian2 j;
    State2 x;
    if (config.state) {
        x = *config.state;
        j = jacobian(config.model, x);
        out.result["at_k3"] = false;
    } else {
        x = eval_state(config);
        j = jacobian_at_k3(config.model);
        out.result["at_k3"] = true;
    }
    out.result["state"] = {{"n", x.n}, {"p", x.p}};
    for (auto& [key, value] : jac_json(j).items()) out.result[key] = value;
    out.csv_header = {"n", "p", "a11", "a12", "a21", "a22", "trace", "det"};
    out.csv_rows.push_back({x.n, x.p, j.a11, j.a12, j.a21, j.a22, j.trace(), j.det()});
    return out;
}

CommandOutput cmd_covariance(const RunConfig& config) {
    CommandOutput out;
    const State2 x = eval_state(config);
    const SymMatrix2 base = base_covariance(config.model, x);
    const SymMatrix2 pred = predation_covariance(config.model, x, config.closure);
    const SymMatrix2 full = full_covariance(config.model, x, config.closure);
    out.result["state"] = {{"n", x.n}, {"p", x.p}};
    out.result["closure"] = closure_name(config.closure);
    out.result["f_pred"] = predation_intensity(config.model, x);
    out.result["base"] = sym_json(base, "q11", "q12", "q22");
    out.result["predation"] = sym_json(pred, "q11", "q12", "q22");
    out.result["full"] = sym_json(full, "q11", "q12", "q22");
    out.csv_header = {"matrix", "q11", "q12", "q22"};
    out.csv_rows.push_back({"base", base.q11, base.q12, base.q22});
    out.csv_rows.push_back({"predation", pred.q11, pred.q12, pred.q22});
    out.csv_rows.push_back({"full", full.q11, full.q12, full.q22});
    return out;
}

CommandOutput cmd_lyapunov(const RunConfig& config) {
    CommandOutput out;
    const State2 k3 = eval_state(config);
    const Jacobian2 j = jacobian_at_k3(config.model);
    const SymMatrix2 d = full_covariance(config.model, k3, config.closure);
    const LyapunovSolution sol = solve_lyapunov(j, d);
    out.result["closure"] = closure_name(config.closure);
    out.result["jacobian"] = jac_json(j);
    out.result["d_star"] = sym_json(d, "q11", "q12", "q22");
    out.result["w"] = sym_json(sol.w, "w11", "w12", "w22");
    out.result["residual_norm"] = sol.residual_norm;
    out.csv_header = {"w11", "w12", "w22", "residual_norm"};
    out.csv_rows.push_back({sol.w.q11, sol.w.q12, sol.w.q22, sol.residual_norm});
    return out;
}

CommandOutput cmd_psd(const RunConfig& config, ExecMode mode) {
    CommandOutput out;
    const State2 k3 = eval_state(config);
    const Jacobian2 j = jacobian_at_k3(config.model);
    const SymMatrix2 d = full_covariance(config.model, k3, config.closure);
    const std::vector<double> grid = psd_grid_for(config, j);
    const PsdSweep sweep = psd_sweep(j, d, grid, mode);

    out.result["closure"] = closure_name(config.closure);
    out.result["omega_max"] = grid.back();
    out.result["count"] = static_cast<long long>(grid.size());
    out.result["peak_nn"] = {{"omega", sweep.peak_nn.omega},
                             {"height", sweep.peak_nn.height}};
    out.result["peak_pp"] = {{"omega", sweep.peak_pp.omega},
                             {"height", sweep.peak_pp.height}};
    ojson samples = ojson::array();
    out.csv_header = {"omega", "s_nn", "s_pp", "s_np_re", "s_np_im"};
    for (const PsdSample& s : sweep.samples) {
        samples.push_back({{"omega", s.omega},
                           {"s_nn", s.s11.real()},
                           {"s_pp", s.s22.real()},
                           {"s_np_re", s.s12.real()},
                           {"s_np_im", s.s12.imag()}});
        out.csv_rows.push_back(
            {s.omega, s.s11.real(), s.s22.real(), s.s12.real(), s.s12.imag()});
    }
    out.result["samples"] = samples;
    out.csv_comments.push_back(
        "peaks s_nn: omega=" + format_double17(sweep.peak_nn.omega) +
        " height=" + format_double17(sweep.peak_nn.height) +
        "; s_pp: omega=" + format_double17(sweep.peak_pp.omega) +
        " height=" + format_double17(sweep.peak_pp.height));
    return out;
}

void fill_pipeline_json(CommandOutput& out, const SsfReport& rep, bool with_precursor) {
    out.result["regime"] = regime_json(rep.regime);
    out.result["k3"] = {{"n", rep.k3.state.n}, {"p", rep.k3.state.p}};
    out.result["jacobian"] = jac_json(rep.j);
    out.result["d_star"] = sym_json(rep.d_star, "q11", "q12", "q22");
    out.result["defined"] = rep.defined;
    if (!rep.defined) {
        out.result["note"] = rep.note;
        return;
    }
    out.result["w"] = sym_json(rep.lyapunov->w, "w11", "w12", "w22");
    out.result["residual_norm"] = rep.lyapunov->residual_norm;
    out.result["ellipse"] = ellipse_json(*rep.ellipse);
    if (with_precursor) {
        const PrecursorReport& pre = *rep.precursor;
        out.result["precursor"] = {
            {"pi_p", pre.pi_p},
            {"d_sep", pre.d_sep},
            {"d_sep_source", pre.d_sep_source == DsepSource::UserSupplied
                                 ? "user_supplied"
                                 : "default_min_equilibrium_coordinate"}};
    }
}

CommandOutput cmd_ellipse(const RunConfig& config, bool with_precursor) {
    CommandOutput out;
    const SsfReport rep =
        ssf_pipeline(config.model, config.closure, config.p, config.d_sep);
    fill_pipeline_json(out, rep, with_precursor);

    out.csv_header = {"defined", "w11",       "w12",   "w22",  "lambda_plus",
                      "lambda_minus", "ell_plus", "ell_minus", "theta", "pi_p", "d_sep"};
    std::vector<CsvWriter::Cell> row;
    row.push_back(rep.defined ? "true" : "false");
    if (rep.defined) {
        row.push_back(rep.lyapunov->w.q11);
        row.push_back(rep.lyapunov->w.q12);
        row.push_back(rep.lyapunov->w.q22);
        row.push_back(rep.ellipse->lambda_plus);
        row.push_back(rep.ellipse->lambda_minus);
        row.push_back(rep.ellipse->ell_plus);
        row.push_back(rep.ellipse->ell_minus);
        row.push_back(rep.ellipse->theta);
        if (with_precursor) {
            row.push_back(rep.precursor->pi_p);
            row.push_back(rep.precursor->d_sep);
        } else {
            row.push_back(CsvWriter::Cell());
            row.push_back(CsvWriter::Cell());
        }
    } else {
        for (int i = 0; i < 10; ++i) row.push_back(CsvWriter::Cell());
    }
    out.csv_rows.push_back(row);
    return out;
}

CommandOutput cmd_simulate(const RunConfig& config, ExecMode mode) {
    CommandOutput out;
    const EnsembleResult res = ensemble_run(config.sim, mode);
    out.result["scheme"] = scheme_name(config.sim.scheme);
    out.result["viewpoint"] = viewpoint_name(config.sim.viewpoint);
    out.result["closure"] = closure_name(config.sim.closure);
    out.result["stats"] = stats_json(res.stats);
    ojson reps = ojson::array();
    for (const EnsembleStats& r : res.per_replicate) reps.push_back(stats_json(r));
    out.result["per_replicate"] = reps;
    if (res.psd) {
        ojson psd;
        psd["segment_count"] = res.psd->segment_count;
        ojson rows = ojson::array();
        for (size_t i = 0; i < res.psd->omega.size(); ++i)
            rows.push_back({{"omega", res.psd->omega[i]},
                            {"s_nn", res.psd->s_nn[i]},
                            {"s_pp", res.psd->s_pp[i]},
                            {"s_np_re", res.psd->s_np[i].real()},
                            {"s_np_im", res.psd->s_np[i].imag()}});
        psd["samples"] = rows;
        out.result["psd"] = psd;
    }

    out.csv_header = {"replicate",  "n_samples",  "mean_n",  "mean_p",
                      "cov_nn",     "cov_np",     "cov_pp",  "survival_fraction",
                      "mean_absorption_time", "clamp_count"};
    auto stats_row = [](const CsvWriter::Cell& tag, const EnsembleStats& s) {
        std::vector<CsvWriter::Cell> row{tag};
        row.push_back(s.n_samples);
        row.push_back(s.sample_mean.x);
        row.push_back(s.sample_mean.y);
        row.push_back(s.sample_cov.q11);
        row.push_back(s.sample_cov.q12);
        row.push_back(s.sample_cov.q22);
        row.push_back(s.survival_fraction);
        row.push_back(s.mean_absorption_time ? CsvWriter::Cell(*s.mean_absorption_time)
                                             : CsvWriter::Cell());
        row.push_back(s.clamp_count);
        return row;
    };
    out.csv_rows.push_back(stats_row("pooled", res.stats));
    for (size_t i = 0; i < res.per_replicate.size(); ++i)
        out.csv_rows.push_back(
            stats_row(static_cast<long long>(i), res.per_replicate[i]));
    return out;
}

CommandOutput cmd_compare_closures(const RunConfig& config) {
    CommandOutput out;
    const ClosureKind coupled = config.closure == ClosureKind::SplitDiagonal
                                    ? ClosureKind::BernoulliCoupled
                                    : config.closure;
    const SsfReport a = ssf_pipeline(config.model, coupled, config.p, config.d_sep);
    const SsfReport b =
        ssf_pipeline(config.model, ClosureKind::SplitDiagonal, config.p, config.d_sep);

    out.result["closure_a"] = closure_name(coupled);
    out.result["closure_b"] = closure_name(ClosureKind::SplitDiagonal);
    out.result["defined"] = a.defined;
    out.csv_header = {"closure", "w11", "w12", "w22", "theta", "ell_plus", "pi_p"};
    if (!a.defined) {
        out.result["note"] = a.note;
        return out;
    }
    auto side = [](const SsfReport& rep) {
        return ojson{{"w", sym_json(rep.lyapunov->w, "w11", "w12", "w22")},
                     {"ellipse", ellipse_json(*rep.ellipse)},
                     {"pi_p", rep.precursor->pi_p},
                     {"d_sep", rep.precursor->d_sep}};
    };
    out.result["a"] = side(a);
    out.result["b"] = side(b);
    const SymMatrix2& wa = a.lyapunov->w;
    const SymMatrix2& wb = b.lyapunov->w;
    out.result["delta"] = {{"w11", wb.q11 - wa.q11},
                           {"w12", wb.q12 - wa.q12},
                           {"w22", wb.q22 - wa.q22},
                           {"theta", b.ellipse->theta - a.ellipse->theta},
                           {"ell_plus", b.ellipse->ell_plus - a.ellipse->ell_plus},
                           {"pi_p", b.precursor->pi_p - a.precursor->pi_p}};

    auto row = [](const char* tag, const SymMatrix2& w, double theta, double ell,
                  double pi) {
        return std::vector<CsvWriter::Cell>{tag, w.q11, w.q12, w.q22, theta, ell, pi};
    };
    out.csv_rows.push_back(row(closure_name(coupled), wa, a.ellipse->theta,
                               a.ellipse->ell_plus, a.precursor->pi_p));
    out.csv_rows.push_back(row("split", wb, b.ellipse->theta, b.ellipse->ell_plus,
                               b.precursor->pi_p));
    out.csv_rows.push_back(row("delta", {wb.q11 - wa.q11, wb.q12 - wa.q12, wb.q22 - wa.q22},
                               b.ellipse->theta - a.ellipse->theta,
                               b.ellipse->ell_plus - a.ellipse->ell_plus,
                               b.precursor->pi_p - a.precursor->pi_p));
    return out;
}

CommandOutput cmd_sweep_k(const RunConfig& config, ExecMode mode) {
    CommandOutput out;
    double k_min, k_max;
    if (config.sweep.k_min && config.sweep.k_max) {
        k_min = *config.sweep.k_min;
        k_max = *config.sweep.k_max;
    } else {
        // default grid brackets the Hopf threshold from below
        ModelParams probe = config.model;
        const double k_h = hopf_threshold(probe);
        k_min = config.sweep.k_min.value_or(0.6 * k_h);
        k_max = config.sweep.k_max.value_or(1.05 * k_h);
    }
    const int count = config.sweep.count;

    ojson rows = ojson::array();
    out.csv_header = {"k",   "status", "trace", "det",  "w11",  "w12",
                      "w22", "snn_peak_omega", "snn_peak_height", "ell_plus",
                      "ell_minus", "theta", "pi_p"};
    for (int i = 0; i < count; ++i) {
        const double k = count == 1
                             ? k_min
                             : k_min + (k_max - k_min) * static_cast<double>(i) / (count - 1);
        ModelParams params(config.model.m, config.model.c, k, config.model.omega,
                           config.model.e);
        ojson row;
        row["k"] = k;
        std::vector<CsvWriter::Cell> cells{k};
        const auto k3 = coexistence_equilibrium(params);
        if (!k3) {
            row["status"] = "infeasible";
            rows.push_back(row);
            cells.push_back("infeasible");
            for (int f = 0; f < 11; ++f) cells.push_back(CsvWriter::Cell());
            out.csv_rows.push_back(cells);
            continue;
        }
        const Jacobian2 j = jacobian_at_k3(params);
        row["trace"] = j.trace();
        row["det"] = j.det();
        if (!j.hurwitz()) {
            row["status"] = "not_defined";
            rows.push_back(row);
            cells.push_back("not_defined");
            cells.push_back(j.trace());
            cells.push_back(j.det());
            for (int f = 0; f < 9; ++f) cells.push_back(CsvWriter::Cell());
            out.csv_rows.push_back(cells);
            continue;
        }
        const SymMatrix2 d = full_covariance(params, k3->state, config.closure);
        const LyapunovSolution sol = solve_lyapunov(j, d);
        const EllipseGeometry geom = ellipse_geometry(sol.w, config.p);
        const PrecursorReport pre = precursor_indicator(geom, config.d_sep, params);
        const std::vector<double> grid = psd_grid_for(config, j);
        const PsdSweep sweep = psd_sweep(j, d, grid, mode);

        row["status"] = "ok";
        row["w11"] = sol.w.q11;
        row["w12"] = sol.w.q12;
        row["w22"] = sol.w.q22;
        row["snn_peak_omega"] = sweep.peak_nn.omega;
        row["snn_peak_height"] = sweep.peak_nn.height;
        row["ell_plus"] = geom.ell_plus;
        row["ell_minus"] = geom.ell_minus;
        row["theta"] = geom.theta;
        row["pi_p"] = pre.pi_p;
        rows.push_back(row);

        cells.push_back("ok");
        cells.push_back(j.trace());
        cells.push_back(j.det());
        cells.push_back(sol.w.q11);
        cells.push_back(sol.w.q12);
        cells.push_back(sol.w.q22);
        cells.push_back(sweep.peak_nn.omega);
        cells.push_back(sweep.peak_nn.height);
        cells.push_back(geom.ell_plus);
        cells.push_back(geom.ell_minus);
        cells.push_back(geom.theta);
        cells.push_back(pre.pi_p);
        out.csv_rows.push_back(cells);
    }
    out.result["rows"] = rows;
    return out;
}

std::string trajectory_csv(const RunConfig& config) {
    const Trajectory traj = simulate_replicate(config.sim, 0);
    CsvWriter csv;
    csv.comment("meta " + dump_json17(meta_json(config), /*compact=*/true));
    if (traj.absorbed_at)
        csv.comment(std::string("absorbed_at t=") +
                    format_double17(traj.absorbed_at->time) + " boundary=" +
                    boundary_name(traj.absorbed_at->boundary));
    csv.header({"t", "N", "P"});
    for (size_t i = 0; i < traj.times.size(); ++i)
        csv.row({traj.times[i], traj.states[i].x, traj.states[i].y});
    return csv.str();
}

}  // namespace

RunOutput render_output(const RunConfig& config, ExecMode mode) {
    CommandOutput cmd;
    switch (config.command) {
        case Command::Equilibria: cmd = cmd_equilibria(config); break;
        case Command::Regime: cmd = cmd_regime(config); break;
        case Command::Jacobian: cmd = cmd_jacobian(config); break;
        case Command::Covariance: cmd = cmd_covariance(config); break;
        case Command::Lyapunov: cmd = cmd_lyapunov(config); break;
        case Command::Psd: cmd = cmd_psd(config, mode); break;
        case Command::Ellipse: cmd = cmd_ellipse(config, false); break;
        case Command::Precursor: cmd = cmd_ellipse(config, true); break;
        case Command::Simulate: cmd = cmd_simulate(config, mode); break;
        case Command::CompareClosures: cmd = cmd_compare_closures(config); break;
        case Command::SweepK: cmd = cmd_sweep_k(config, mode); break;
    }

    RunOutput out;
    if (config.format == OutputFormat::Json) {
        ojson doc;
        doc["meta"] = meta_json(config);
        doc["result"] = cmd.result;
        out.main = dump_json17(doc);
    } else {
        CsvWriter csv;
        csv.comment("meta " + dump_json17(meta_json(config), /*compact=*/true));
        for (const std::string& line : cmd.csv_comments) csv.comment(line);
        csv.header(cmd.csv_header);
        for (const auto& row : cmd.csv_rows) csv.row(row);
        out.main = csv.str();
    }
    if (config.command == Command::Simulate && config.trajectory_path)
        out.trajectory = trajectory_csv(config);
    return out;
}

int run(const RunConfig& config, ExecMode mode) {
    try {
        const RunOutput out = render_output(config, mode);
        if (config.out_path.empty()) {
            std::cout << out.main;
        } else {
            std::ofstream file(config.out_path, std::ios::binary);
            if (!file) {
                std::cerr << "error: cannot open output file " << config.out_path << "\n";
                return 1;
            }
            file << out.main;
        }
        if (out.trajectory) {
            std::ofstream file(*config.trajectory_path, std::ios::binary);
            if (!file) {
                std::cerr << "error: cannot open trajectory file "
                          << *config.trajectory_path << "\n";
                return 1;
            }
            file << *out.trajectory;
        }
        return 0;
    } catch (const SchemaError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const ValueError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const DomainError& err) {
        std::cerr << "domain error: " << err.what() << "\n";
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}

}  // namespace rmnoise
