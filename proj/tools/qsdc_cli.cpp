// Command-line front end for the UA-DI-QSDC simulator: seeded campaigns,
// attack triage, noise calibration, and the channel-length sweep.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsdc/config_json.hpp"
#include "qsdc/xlab.hpp"

namespace {

using namespace qsdc;

struct CommonOpts {
    std::uint64_t seed = 1;
    int trials = 100;
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--trials", o.trials, "Number of trials");
    cmd->add_option("--config", o.config_path, "JSON run configuration file");
    cmd->add_option("--out", o.out_path, "Output file path (default: stdout)");
    cmd->add_option("--format", o.format, "Output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--workers", o.workers, "Worker threads for trials");
}

// Flags beat config-file values only when given explicitly on the command line.
RunConfig load_run_config(const CommonOpts& o, const CLI::App* cmd) {
    RunConfig rc;
    if (!o.config_path.empty()) {
        std::ifstream is(o.config_path);
        if (!is) throw ConfigError("cannot read config file: " + o.config_path);
        std::stringstream ss;
        ss << is.rdbuf();
        const json j = parse_json_or_throw(ss.str());
        if (j.contains("protocol")) j.at("protocol").get_to(rc.protocol);
        if (j.contains("attack")) j.at("attack").get_to(rc.attack);
        if (j.contains("trials")) j.at("trials").get_to(rc.trials);
    } else {
        rc.protocol.seed = o.seed;
        rc.trials = o.trials;
    }
    if (cmd->count("--seed")) rc.protocol.seed = o.seed;
    if (cmd->count("--trials")) rc.trials = o.trials;
    rc.workers = o.workers;
    rc.format = parse_format(o.format);
    rc.output_path = o.out_path;
    return rc;
}

void emit(const Table& t, const CommonOpts& o) {
    if (o.out_path.empty())
        std::cout << t.render(parse_format(o.format));
    else
        t.write(o.out_path, parse_format(o.format));
}

void print_campaign(const RunConfig& rc, const CampaignResult& r, const CommonOpts& o) {
    Table t = campaign_table(rc, r);
    emit(t, o);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"UA-DI-QSDC protocol simulator"};
    app.require_subcommand(1);

    CommonOpts run_o;
    auto* run = app.add_subcommand("run", "Run a seeded protocol campaign");
    add_common(run, run_o);
    std::string run_attack = "none";
    run->add_option("--attack", run_attack, "Attack strategy name");
    int run_eta = -1;
    double run_p_gate = -1.0;
    run->add_option("--eta", run_eta, "Channel length (identity gates)");
    run->add_option("--p-gate", run_p_gate, "Per-gate error probability");

    CommonOpts atk_o;
    auto* atk = app.add_subcommand("attack", "Run a campaign under a named attack");
    add_common(atk, atk_o);
    std::string atk_name;
    double atk_theta = 0.0, atk_phi = 0.0;
    atk->add_option("--name", atk_name, "Attack strategy name")->required();
    atk->add_option("--theta", atk_theta, "Intercept basis polar angle");
    atk->add_option("--phi", atk_phi, "Intercept basis azimuthal angle");

    CommonOpts sweep_o;
    auto* sweep = app.add_subcommand("sweep-eta", "Accuracy versus channel length");
    add_common(sweep, sweep_o);
    int eta_min = 10, eta_max = 700, eta_step = 10, protocol_runs = 10;
    double sweep_p_gate = kCalibratedGateError;
    sweep->add_option("--eta-min", eta_min);
    sweep->add_option("--eta-max", eta_max);
    sweep->add_option("--eta-step", eta_step);
    sweep->add_option("--p-gate", sweep_p_gate);
    sweep->add_option("--protocol-runs", protocol_runs,
                      "Full protocol runs per point for abort/CHSH columns");

    CommonOpts hist_o;
    auto* hist = app.add_subcommand("histogram", "Single-pair message histogram");
    add_common(hist, hist_o);
    std::string hist_message = "00";
    int hist_eta = 10, hist_shots = 1024;
    double hist_p_gate = kCalibratedGateError;
    hist->add_option("--message", hist_message, "Two-bit message: 00|01|10|11");
    hist->add_option("--eta", hist_eta);
    hist->add_option("--shots", hist_shots);
    hist->add_option("--p-gate", hist_p_gate);

    CommonOpts det_o;
    auto* det = app.add_subcommand("detect", "Impersonation detection curve");
    add_common(det, det_o);
    std::vector<int> l_values = {1, 2, 4, 8};
    det->add_option("--l-values", l_values, "Identity half-lengths to test");

    CommonOpts chsh_o;
    auto* chsh = app.add_subcommand("chsh", "Standalone CHSH estimation");
    add_common(chsh, chsh_o);
    int chsh_d = 4000, chsh_eta = 0;
    double chsh_p_gate = 0.0, chsh_theta = 0.0, chsh_phi = 0.0;
    std::string chsh_attack = "none";
    chsh->add_option("--d", chsh_d, "Pairs to measure");
    chsh->add_option("--attack", chsh_attack);
    chsh->add_option("--theta", chsh_theta);
    chsh->add_option("--phi", chsh_phi);
    chsh->add_option("--eta", chsh_eta);
    chsh->add_option("--p-gate", chsh_p_gate);

    CommonOpts cal_o;
    auto* cal = app.add_subcommand("calibrate", "Fit p_gate to accuracy anchors");
    add_common(cal, cal_o);
    std::vector<std::string> anchor_specs = {"10:0.95", "700:0.58"};
    int cal_shots = 20000;
    cal->add_option("--anchors", anchor_specs, "Anchors as eta:accuracy");
    cal->add_option("--shots", cal_shots, "Simulated shots per anchor evaluation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (run->parsed()) {
        RunConfig rc = load_run_config(run_o, run);
        if (run_attack != "none" || rc.attack.kind == AttackStrategy::Kind::None)
            rc.attack = AttackStrategy::parse(run_attack);
        if (run_eta >= 0) rc.protocol.noise.eta = run_eta;
        if (run_p_gate >= 0.0) rc.protocol.noise.p_gate = run_p_gate;
        print_campaign(rc, run_trials(rc), run_o);
    } else if (atk->parsed()) {
        RunConfig rc = load_run_config(atk_o, atk);
        rc.attack = AttackStrategy::parse(atk_name);
        rc.attack.theta = atk_theta;
        rc.attack.phi = atk_phi;
        print_campaign(rc, run_trials(rc), atk_o);
    } else if (sweep->parsed()) {
        RunConfig rc = load_run_config(sweep_o, sweep);
        NoiseModel noise = rc.protocol.noise;
        noise.p_gate = sweep_p_gate;
        const SweepResult res = sweep_eta(eta_min, eta_max, eta_step, noise, sweep_o.trials,
                                          rc.protocol, protocol_runs, sweep_o.seed);
        for (const auto& row : res.rows)
            std::fprintf(stderr, "eta=%d wall_time_ms=%.1f\n", row.eta, row.wall_time_ms);
        emit(sweep_table(res, noise, sweep_o.seed), sweep_o);
    } else if (hist->parsed()) {
        const Bits mb = bits_from_string(hist_message);
        if (mb.size() != 2) throw ConfigError("--message must be two bits");
        const int msg = mb[0] * 2 + mb[1];
        NoiseModel noise;
        noise.p_gate = hist_p_gate;
        noise.eta = hist_eta;
        const auto counts = histogram_message(msg, noise, hist_shots, hist_o.seed);
        emit(histogram_table(msg, noise, hist_shots, hist_o.seed, counts), hist_o);
    } else if (det->parsed()) {
        const auto rows = detection_curve(l_values, det_o.trials, det_o.seed);
        emit(detection_table(rows, det_o.seed), det_o);
    } else if (chsh->parsed()) {
        NoiseModel noise;
        noise.p_gate = chsh_p_gate;
        noise.eta = chsh_eta;
        AttackStrategy attack = AttackStrategy::parse(chsh_attack);
        attack.theta = chsh_theta;
        attack.phi = chsh_phi;
        const ChshReport rep = chsh_report(chsh_d, noise, attack, chsh_o.seed);
        emit(chsh_table(rep, attack, noise, chsh_o.seed), chsh_o);
    } else if (cal->parsed()) {
        std::vector<std::pair<int, double>> anchors;
        for (const auto& spec : anchor_specs) {
            const auto colon = spec.find(':');
            if (colon == std::string::npos)
                throw ConfigError("anchor must look like eta:accuracy");
            anchors.emplace_back(std::stoi(spec.substr(0, colon)),
                                 std::stod(spec.substr(colon + 1)));
        }
        const CalibrationResult res = calibrate_noise(anchors, cal_shots, cal_o.seed);
        Table t;
        t.prov("seed", std::to_string(cal_o.seed));
        t.prov("shots", std::to_string(cal_shots));
        t.columns = {"p_gate", "degenerate", "anchor_eta", "anchor_target", "residual"};
        for (std::size_t i = 0; i < anchors.size(); ++i)
            t.rows.push_back({fmt(res.p_gate, 9), res.degenerate ? "true" : "false",
                              std::to_string(anchors[i].first), fmt(anchors[i].second),
                              fmt(res.residuals[i])});
        emit(t, cal_o);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const qsdc::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const qsdc::EstimationError& e) {
        std::cerr << "estimation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
