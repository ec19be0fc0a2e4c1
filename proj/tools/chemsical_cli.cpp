// chemsical: batch front end over the C API.
//
//   chemsical pmf     --config cfg --out pmf.csv
//   chemsical ode     (--network f.crn | --chemsical --input N [--rrc set5]) --out traj.csv
//   chemsical ssa     (...same...) --seed S --out traj.csv
//   chemsical curve   --config cfg --out pd.csv
//   chemsical sweep   --config cfg --axis thresholds|kappa_AM2|<param> --out pe_sweep.csv
//   chemsical profile --config cfg --out ode_profile.csv
//   chemsical check   (--network f.crn | --chemsical ...)
//
// Exit codes: 0 ok, 2 configuration error, 3 runtime failure.

#include <CLI11.hpp>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chemsical/chemsical.h"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Failure {
    int code;
    std::string message;
};

[[noreturn]] void config_error(const std::string& msg) { throw Failure{kConfigError, msg}; }
[[noreturn]] void runtime_error(const std::string& msg) { throw Failure{kRuntimeError, msg}; }

void check(cs_status st, const char* what) {
    if (st == CS_OK) return;
    const std::string msg = std::string(what) + ": " + cs_last_error();
    if (st == CS_ERR_INVALID_ARGUMENT || st == CS_ERR_PARSE || st == CS_ERR_CONTRACT) config_error(msg);
    runtime_error(msg);
}

// Owning wrapper for strings returned by the library.
struct CsString {
    char* p = nullptr;
    ~CsString() { cs_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// ---- configuration: `key = value` lines, '#' comments ----

class Config {
public:
    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) config_error("cannot open config '" + path + "'");
        Config c;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                config_error(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
            const auto key = trim(line.substr(0, eq));
            const auto value = trim(line.substr(eq + 1));
            if (key.empty() || value.empty())
                config_error(path + ":" + std::to_string(lineno) + ": empty key or value");
            if (!c.values_.emplace(key, value).second)
                config_error(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        return c;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    const std::string& raw(const std::string& key) const {
        used_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) config_error("missing required key '" + key + "'");
        return it->second;
    }

    // number with an optional unit suffix; `units` maps suffix to factor
    double number(const std::string& key, const std::map<std::string, double>& units = {}) const {
        const auto& text = raw(key);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(text, &used);
        } catch (const std::exception&) {
            config_error("key '" + key + "': '" + text + "' is not a number");
        }
        const auto unit = trim(text.substr(used));
        if (unit.empty()) return v;
        auto it = units.find(unit);
        if (it == units.end()) config_error("key '" + key + "': unit '" + unit + "' not accepted");
        return v * it->second;
    }

    std::uint64_t count(const std::string& key) const {
        const double v = number(key);
        if (!(v >= 0) || v != static_cast<double>(static_cast<std::uint64_t>(v)))
            config_error("key '" + key + "' must be a non-negative integer");
        return static_cast<std::uint64_t>(v);
    }

    std::vector<std::string> unused() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

    // canonical provenance string
    std::string provenance() const {
        std::string out;
        for (const auto& [k, v] : values_) {
            if (!out.empty()) out += " ";
            out += k + "=" + v;
        }
        return out;
    }

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

const std::map<std::string, double> kDistanceUnits = {{"m", 1.0}, {"um", 1e-6}};
const std::map<std::string, double> kDiffusionUnits = {{"m2/s", 1.0}, {"um2/s", 1e-12}};

const char* kKappaNames[7] = {"kappa_D1", "kappa_T1", "kappa_AM1", "kappa_WA1",
                              "kappa_D2", "kappa_T2", "kappa_AM2"};

void apply_rrc(const std::string& text, double kappa[7]) {
    if (text.rfind("set", 0) == 0 && text.size() == 4) {
        check(cs_rrc_preset(text[3] - '0', kappa), "rrc");
        return;
    }
    std::stringstream ss(text);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ',')) {
        if (i >= 7) config_error("rrc: expected seven comma-separated values");
        try {
            kappa[i++] = std::stod(trim(item));
        } catch (const std::exception&) {
            config_error("rrc: '" + item + "' is not a number");
        }
    }
    if (i != 7) config_error("rrc: expected 'set1'..'set5' or seven comma-separated values");
}

void read_channel(const Config& c, cs_channel_params& ch) {
    ch.d1 = c.number("d1", kDistanceUnits);
    ch.d2 = c.number("d2", kDistanceUnits);
    ch.radius = c.number("radius", kDistanceUnits);
    ch.diffusion = c.number("diffusion", kDiffusionUnits);
    ch.n_tx = c.number("n_tx");
    if (c.has("t_sample")) ch.t_sample = c.number("t_sample", {{"s", 1.0}, {"ms", 1e-3}});
}

void read_receiver(const Config& c, cs_chemsical_params& p) {
    p.tau1 = c.count("tau1");
    p.tau2_0 = c.count("tau2_0");
    p.tau2_1 = c.count("tau2_1");
    apply_rrc(c.raw("rrc"), p.kappa);
    for (int i = 0; i < 7; ++i)
        if (c.has(kKappaNames[i])) p.kappa[i] = c.number(kKappaNames[i]);
    p.stage2_pool = c.count("stage2_pool");
    if (c.has("adaptation")) {
        const auto& a = c.raw("adaptation");
        if (a == "catalytic") p.adaptation = CS_ADAPT_CATALYTIC;
        else if (a == "consuming") p.adaptation = CS_ADAPT_CONSUMING;
        else config_error("adaptation must be 'catalytic' or 'consuming'");
    }
    if (c.has("translation")) {
        const auto& t = c.raw("translation");
        if (t == "copy") p.translation = CS_TRANSLATE_COPY;
        else if (t == "transfer") p.translation = CS_TRANSLATE_TRANSFER;
        else config_error("translation must be 'copy' or 'transfer'");
    }
}

struct Common {
    std::string config_path;
    std::string out;
    unsigned workers = 1;
    bool no_timestamp = false;
};

struct Loaded {
    Config config;
    cs_scenario scenario{};
    std::string provenance;
};

// pmf needs the channel only; the experiments need the whole scenario.
Loaded load_scenario(const Common& opts, bool full) {
    Loaded l{Config::load(opts.config_path), {}, {}};
    auto& s = l.scenario;
    cs_scenario_default(&s);
    read_channel(l.config, s.channel);
    s.chem.n_max = l.config.count("n_max");
    if (full) {
        read_receiver(l.config, s.chem);
        s.t_end = l.config.number("t_end");
        s.n_traj = l.config.count("n_traj");
        s.base_seed = l.config.count("base_seed");
        s.stride = l.config.count("stride");
    }
    for (const auto& k : l.config.unused()) std::cerr << "warning: config key '" << k << "' is not used\n";
    s.workers = opts.workers;
    s.timestamp = opts.no_timestamp ? 0 : 1;
    l.provenance = l.config.provenance();
    s.provenance = l.provenance.c_str();
    return l;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) runtime_error("write to '" + path + "' failed");
}

void add_common(CLI::App* sub, Common& c, bool needs_config) {
    auto* cfg = sub->add_option("--config", c.config_path, "scenario file (key = value)");
    if (needs_config) cfg->required()->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output path")->required();
    sub->add_option("--workers", c.workers, "parallel workers (0 = all cores)");
    sub->add_flag("--no-timestamp", c.no_timestamp, "omit the '# generated:' line");
}

// ---- network selection for ode / ssa / check ----

struct NetworkArgs {
    std::string network;
    bool chemsical = false;
    std::uint64_t input = 0;
    std::string rrc;
    std::string config_path;
};

void add_network_args(CLI::App* sub, NetworkArgs& n) {
    auto* file = sub->add_option("--network", n.network, ".crn file")->check(CLI::ExistingFile);
    auto* chem = sub->add_flag("--chemsical", n.chemsical, "use the generated receiver network");
    file->excludes(chem);
    sub->add_option("--input", n.input, "received molecule count N(Y_on)")->needs(chem);
    sub->add_option("--rrc", n.rrc, "set1..set5 or seven comma-separated rate constants")->needs(chem);
    sub->add_option("--scenario", n.config_path, "scenario file for receiver parameters")
        ->needs(chem)
        ->check(CLI::ExistingFile);
}

cs_document* load_network(const NetworkArgs& n) {
    cs_document* doc = nullptr;
    if (!n.network.empty()) {
        const auto st = cs_document_read_file(n.network.c_str(), &doc);
        if (st == CS_ERR_IO) runtime_error(cs_last_error());
        check(st, n.network.c_str());
        return doc;
    }
    if (!n.chemsical) config_error("one of --network or --chemsical is required");
    cs_chemsical_params p;
    cs_chemsical_params_default(&p);
    if (!n.config_path.empty()) {
        const auto c = Config::load(n.config_path);
        read_receiver(c, p);
        p.n_max = c.count("n_max");
    }
    if (!n.rrc.empty()) apply_rrc(n.rrc, p.kappa);
    p.input_count = n.input;
    check(cs_chemsical_build(&p, &doc), "build");
    return doc;
}

struct DocGuard {
    cs_document* d;
    ~DocGuard() { cs_document_free(d); }
};
struct TrajGuard {
    cs_trajectory* t = nullptr;
    ~TrajGuard() { cs_trajectory_free(t); }
};

void report_decision(const cs_trajectory* t, bool chemsical) {
    if (!chemsical) return;
    int s1 = 0, s2 = 0;
    check(cs_trajectory_decision(t, &s1, &s2), "decision");
    std::cout << "decision: " << s1 << s2 << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chemical reaction network receiver for two-user molecular NOMA"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cs_version()));

    Common pmf_opts, curve_opts, sweep_opts, profile_opts;
    auto* pmf = app.add_subcommand("pmf", "input PMF of the received sample (n,p)");
    add_common(pmf, pmf_opts, true);

    auto* curve = app.add_subcommand("curve", "SSA detection probability over the input grid (n,p_d,stderr)");
    add_common(curve, curve_opts, true);
    double max_truncated = 0.01;
    curve->add_option("--max-truncated", max_truncated, "tolerated fraction of truncated trajectories");

    auto* sweep = app.add_subcommand("sweep", "input-weighted error over a parameter grid (param,p_e)");
    add_common(sweep, sweep_opts, true);
    std::string axis;
    std::vector<double> values;
    sweep->add_option("--axis", axis, "thresholds, kappa_AM2 or a parameter name")->required();
    sweep->add_option("--values", values, "grid values (default: axis grid)")->delimiter(',');

    auto* profile = app.add_subcommand("profile", "ODE correct-detection profile (n,c,contribution)");
    add_common(profile, profile_opts, true);

    NetworkArgs ode_net, ssa_net, check_net;
    std::string ode_out, ssa_out;
    double ode_t_end = 100, ssa_t_end = 100;
    std::size_t ode_samples = 101, ssa_samples = 101;
    auto* ode = app.add_subcommand("ode", "deterministic trajectory (t,<species>)");
    add_network_args(ode, ode_net);
    ode->add_option("--out", ode_out, "output CSV")->required();
    ode->add_option("--t-end", ode_t_end, "integration horizon");
    ode->add_option("--samples", ode_samples, "output grid size");
    bool ode_no_stop = false;
    ode->add_flag("--no-steady-stop", ode_no_stop, "integrate to t_end even at steady state");

    auto* ssa = app.add_subcommand("ssa", "stochastic trajectory or ensemble");
    add_network_args(ssa, ssa_net);
    ssa->add_option("--out", ssa_out, "output CSV (JSON with --ensemble)")->required();
    ssa->add_option("--t-end", ssa_t_end, "simulation horizon");
    ssa->add_option("--samples", ssa_samples, "grid size for --record grid");
    std::uint64_t seed = 1, stream = 0;
    std::size_t ensemble = 0;
    unsigned ssa_workers = 1;
    std::string record = "grid";
    ssa->add_option("--seed", seed, "base seed");
    ssa->add_option("--stream", stream, "stream index of a single trajectory");
    ssa->add_option("--record", record, "final, grid or events")
        ->check(CLI::IsMember({"final", "grid", "events"}));
    ssa->add_option("--ensemble", ensemble, "run N trajectories and write a JSON summary");
    ssa->add_option("--workers", ssa_workers, "parallel workers for --ensemble");
    bool plain = false;
    ssa->add_flag("--no-aggregate", plain, "plain direct method without pool lumping");

    auto* chk = app.add_subcommand("check", "validate a network and list conservation laws");
    add_network_args(chk, check_net);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*pmf) {
            auto l = load_scenario(pmf_opts, false);
            CsString csv;
            check(cs_pmf_csv(&l.scenario, &csv.p), "pmf");
            write_file(pmf_opts.out, csv.str());
        } else if (*curve) {
            auto l = load_scenario(curve_opts, true);
            CsString csv;
            double p_e = 0;
            std::size_t truncated = 0;
            check(cs_curve_csv(&l.scenario, &csv.p, &p_e, &truncated), "curve");
            write_file(curve_opts.out, csv.str());
            std::cout << "p_e: " << p_e << "\n";
            const std::uint64_t points = (l.scenario.chem.n_max + l.scenario.stride - 1) / l.scenario.stride;
            const double total = static_cast<double>(points * l.scenario.n_traj);
            if (truncated > 0) {
                std::cerr << "warning: " << truncated << " trajectories hit max_events (counted as errors)\n";
                if (static_cast<double>(truncated) / total > max_truncated)
                    runtime_error("truncated fraction exceeds --max-truncated");
            }
        } else if (*sweep) {
            auto l = load_scenario(sweep_opts, true);
            int ax = CS_SWEEP_PARAMETER;
            if (axis == "thresholds") ax = CS_SWEEP_THRESHOLDS;
            else if (axis == "kappa_AM2") ax = CS_SWEEP_KAPPA_AM2;
            else if (values.empty()) config_error("--values is required for parameter '" + axis + "'");
            CsString csv;
            check(cs_sweep_csv(&l.scenario, ax, axis.c_str(), values.empty() ? nullptr : values.data(),
                               values.size(), &csv.p),
                  "sweep");
            write_file(sweep_opts.out, csv.str());
            if (csv.str().find(",nan") != std::string::npos) runtime_error("some sweep points failed");
        } else if (*profile) {
            auto l = load_scenario(profile_opts, true);
            CsString csv;
            double err = 0;
            check(cs_profile_csv(&l.scenario, &csv.p, &err), "profile");
            write_file(profile_opts.out, csv.str());
            std::cout << "weighted ODE error: " << err << "\n";
        } else if (*ode) {
            DocGuard doc{load_network(ode_net)};
            cs_ode_options o;
            cs_ode_options_default(&o);
            o.t_end = ode_t_end;
            o.sample_count = ode_samples;
            if (ode_no_stop) o.steady_state_epsilon = 0;
            TrajGuard t;
            check(cs_simulate_ode(doc.d, &o, &t.t), "ode");
            CsString csv;
            check(cs_trajectory_csv(t.t, &csv.p), "csv");
            write_file(ode_out, csv.str());
            std::cout << "stop: " << cs_trajectory_stop_reason(t.t) << "\n";
            report_decision(t.t, ode_net.chemsical);
        } else if (*ssa) {
            DocGuard doc{load_network(ssa_net)};
            cs_ssa_options o;
            cs_ssa_options_default(&o);
            o.t_end = ssa_t_end;
            o.sample_count = ssa_samples;
            o.aggregate_pools = plain ? 0 : 1;
            o.record_mode = record == "final" ? CS_RECORD_FINAL : record == "events" ? CS_RECORD_EVENTS : CS_RECORD_GRID;
            if (ensemble > 0) {
                CsString json;
                check(cs_ensemble_json(doc.d, ensemble, seed, &o, ssa_workers, &json.p), "ensemble");
                write_file(ssa_out, json.str());
            } else {
                TrajGuard t;
                check(cs_simulate_ssa(doc.d, &o, seed, stream, &t.t), "ssa");
                CsString csv;
                check(cs_trajectory_csv(t.t, &csv.p), "csv");
                write_file(ssa_out, csv.str());
                std::cout << "stop: " << cs_trajectory_stop_reason(t.t) << "\n";
                report_decision(t.t, ssa_net.chemsical);
            }
        } else if (*chk) {
            DocGuard doc{load_network(check_net)};
            int valid = 0;
            CsString report;
            check(cs_document_check(doc.d, &valid, &report.p), "check");
            std::cout << report.str();
            if (!valid) return kConfigError;
        }
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    }
    return 0;
}
