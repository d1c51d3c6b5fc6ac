// Command-line front end for the experiment harness.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "ccr/experiment.hpp"
#include "ccr/oracle.hpp"
#include "ccr/zeroforcing.hpp"

namespace fs = std::filesystem;
using namespace ccr;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> realizations;
    std::string out;
    std::string solvers;
    std::string fading;
    bool serial = false;
    std::vector<std::string> settings;
    std::optional<std::uint64_t> index;
    std::string input;
};

ExperimentConfig resolve(const Globals& g) {
    ExperimentConfig cfg;
    if (!g.config.empty()) cfg = load_config(g.config, cfg);
    for (const auto& kv : g.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::Parse, "--set expects key=value, got '" + kv + "'");
        apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (g.seed) cfg.sys.seed = *g.seed;
    if (g.realizations) cfg.realizations = *g.realizations;
    if (!g.out.empty()) cfg.out = g.out;
    if (!g.solvers.empty()) cfg.solvers = parse_solver_list(g.solvers);
    if (!g.fading.empty()) cfg.sys.fading = parse_fading_mode(g.fading);
    if (g.serial) cfg.policy = ExecPolicy::serial;
    cfg.validate();
    return cfg;
}

std::ofstream open_out(const ExperimentConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out);
    const fs::path path = fs::path(cfg.out) / name;
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::Parse, "cannot write " + path.string());
    std::cerr << "wrote " << path.string() << '\n';
    return f;
}

ChannelSet load_channels(const Globals& g, const ExperimentConfig& cfg) {
    if (g.input.empty()) return generate_instance(cfg.sys, g.index.value_or(cfg.start_index));
    std::ifstream in(g.input);
    if (!in) throw Error(ErrorKind::Parse, "cannot open " + g.input);
    return read_channel_set(in);
}

void summary_file(const ExperimentConfig& cfg, const std::string& cmd, const std::string& text) {
    auto f = open_out(cfg, cmd + "_summary.txt");
    f << text;
    std::cout << text;
}

std::string summary_text(const RunSummary& s, const std::string& label) {
    std::ostringstream os;
    write_summary(os, s, label);
    return os.str();
}

int run_gen(const Globals& g) {
    const ExperimentConfig cfg = resolve(g);
    const ChannelSet ch = generate_instance(cfg.sys, g.index.value_or(cfg.start_index));
    auto f = open_out(cfg, "channels.txt");
    write_channel_set(f, ch);
    return 0;
}

int run_solve(const Globals& g) {
    const ExperimentConfig cfg = resolve(g);
    const ChannelSet ch = load_channels(g, cfg);
    const Targets t = experiment_targets(cfg, cfg.sys, ch);
    const InstanceOutcome o = solve_channels(cfg, ch, t, g.index.value_or(cfg.start_index));
    {
        auto f = open_out(cfg, "solve.csv");
        write_solve_csv(f, cfg, ch, o);
    }
    if (o.cls != InstanceClass::mode_ii) {
        try {
            const StackedProblem sp = build_stacked(ch, t);
            const Alg2Result r = alg2_solve(sp);
            const DownlinkSolution sol = recover_downlink(r.lambda, r.beams, sp);
            auto f = open_out(cfg, "kkt.csv");
            write_kkt_csv(f, kkt_verify(sol, r.lambda, sp, &ch));
        } catch (const Error& e) {
            std::cerr << "kkt report skipped: " << e.what() << '\n';
        }
    }
    if (ch.M == 1) {
        try {
            const Theorem3Report rep = theorem3_powers(ch, t);
            auto f = open_out(cfg, "theorem3.csv");
            f << "P_czf,P_pzf,difference,rho,winner\n";
            char buf[200];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,", rep.P_czf, rep.P_pzf, rep.difference, rep.rho);
            f << buf << rep.winner << '\n';
        } catch (const Error& e) {
            std::cerr << "theorem 3 report skipped: " << e.what() << '\n';
        }
    }
    std::cout << "class=" << to_string(o.cls) << '\n';
    for (const auto& r : o.results)
        std::cout << to_string(r.solver) << ": "
                  << (r.ok ? std::to_string(to_db(r.power)) + " dB" : std::string(to_string(*r.error))) << '\n';
    return 0;
}

int run_convergence(const Globals& g) {
    const ExperimentConfig cfg = resolve(g);
    std::optional<ChannelSet> input;
    if (!g.input.empty()) input = load_channels(g, cfg);
    ExperimentConfig c = cfg;
    if (g.index) c.start_index = *g.index;
    const ConvergenceResult r = cmd_convergence(c, input);
    auto f = open_out(cfg, "convergence.csv");
    write_convergence_csv(f, c, r);
    std::ostringstream os;
    os << "realization=" << r.index << " skipped=" << r.skipped << " rows=" << r.rows.size() << '\n';
    summary_file(cfg, "convergence", os.str());
    return 0;
}

template <class Cmd, class Writer>
int run_grid(const Globals& g, const std::string& name, Cmd cmd, Writer writer) {
    const ExperimentConfig cfg = resolve(g);
    const GridResult r = cmd(cfg);
    auto f = open_out(cfg, name + ".csv");
    writer(f, cfg, r);
    std::string text;
    for (std::size_t k = 0; k < r.axis.size(); ++k)
        text += summary_text(summarize(r.outcomes[k], r.solvers), r.axis_name + "=" + std::to_string(r.axis[k]));
    summary_file(cfg, name, text);
    return 0;
}

int run_outage(const Globals& g) {
    const ExperimentConfig cfg = resolve(g);
    const OutageResult r = cmd_outage(cfg);
    auto f = open_out(cfg, "outage.csv");
    write_outage_csv(f, cfg, r);
    summary_file(cfg, "outage", summary_text(r.summary, std::string(to_string(r.solver))));
    return 0;
}

int run_robustness(const Globals& g) {
    const ExperimentConfig cfg = resolve(g);
    const RobustnessResult r = cmd_robustness(cfg);
    auto f = open_out(cfg, "robustness.csv");
    write_robustness_csv(f, cfg, r);
    summary_file(cfg, "robustness", summary_text(r.summary, "design"));
    return 0;
}

int run_eta(const Globals& g) {
    const ExperimentConfig cfg = resolve(g);
    const EtaResult r = cmd_eta(cfg);
    auto f = open_out(cfg, "eta.csv");
    write_eta_csv(f, cfg, r);
    summary_file(cfg, "eta", summary_text(r.summary, "alg1-distributed"));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative cognitive relay beamforming: solvers and Monte Carlo experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "flat key = value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "ensemble seed");
    app.add_option("--realizations", g.realizations, "number of channel realizations");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--solvers", g.solvers, "comma list of alg1, alg2, alg1-distributed, czf, pzf");
    app.add_option("--fading", g.fading, "phase-only or rayleigh");
    app.add_flag("--serial", g.serial, "disable the parallel realization runner");
    app.add_option("--set", g.settings, "override a config key (key=value), repeatable");
    app.add_option("--index", g.index, "realization index for gen, solve and convergence");
    app.add_option("--input", g.input, "channel set file for solve and convergence")->check(CLI::ExistingFile);

    int rc = 0;
    app.add_subcommand("gen", "write one channel realization")->callback([&] { rc = run_gen(g); });
    app.add_subcommand("solve", "solve one instance with every selected solver")->callback([&] { rc = run_solve(g); });
    app.add_subcommand("convergence", "per-iteration power change of both optimal algorithms")
        ->callback([&] { rc = run_convergence(g); });
    app.add_subcommand("sweep-pbs", "mean CBS power versus PBS transmit SNR")->callback([&] {
        rc = run_grid(g, "sweep-pbs", cmd_sweep_pbs, write_sweep_csv);
    });
    app.add_subcommand("cdf", "CBS power distribution per CU rate")->callback([&] {
        rc = run_grid(g, "cdf", cmd_cdf, write_cdf_csv);
    });
    app.add_subcommand("outage", "PU outage versus CBS power budget")->callback([&] { rc = run_outage(g); });
    app.add_subcommand("robustness", "achieved PU rate under relay CSI errors")->callback([&] { rc = run_robustness(g); });
    app.add_subcommand("eta", "signaling overhead of the distributed algorithm")->callback([&] { rc = run_eta(g); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return rc;
}
