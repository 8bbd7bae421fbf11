// qkdsim: seeded BB84 weak-coherent-pulse experiments, eavesdropping-strategy
// tables and security-curve data, with reproducible CSV outputs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qkd/io.hpp"
#include "qkd/protocol.hpp"
#include "qkd/security.hpp"

namespace fs = std::filesystem;
using namespace qkd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitEavesdropper = 3;
constexpr int kExitInconclusive = 4;

std::vector<double> parse_mu_list(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        values.push_back(std::stod(item));
    }
    if (values.empty()) throw CLI::ValidationError("--mu", "empty intensity list");
    return values;
}

AttackKind parse_attack(const std::string& name) {
    if (name == "none") return AttackKind::none;
    if (name == "pns") return AttackKind::pns;
    if (name == "pnsr") return AttackKind::pnsr;
    if (name == "si") return AttackKind::si;
    if (name == "cmp") return AttackKind::cmp;
    throw CLI::ValidationError("--attack", "must be one of none|pns|pnsr|si|cmp");
}

SubstituteModel parse_substitute(const std::string& name) {
    if (name == "intercept-resend") return SubstituteModel::intercept_resend;
    if (name == "random-state") return SubstituteModel::random_state;
    throw CLI::ValidationError("--substitute-model", "must be intercept-resend|random-state");
}

struct SimulateArgs {
    double mu = 0.1;
    double mu_prime = 0.5;
    double eta = 0.1;
    std::uint64_t pulses = 1'000'000;
    unsigned ports = 16;
    double e_dark = 1e-5;
    std::string attack = "none";
    std::string substitute_model = "intercept-resend";
    double si_error = 0.0;
    std::uint64_t seed = 1;
    std::string out = "qkdsim_out";
};

int cmd_simulate(const SimulateArgs& args) {
    SessionConfig config;
    config.source.mu = args.mu;
    config.source.mu_prime = args.mu_prime;
    config.channel.eta = args.eta;
    config.channel.attack = parse_attack(args.attack);
    config.channel.params.substitute_model = parse_substitute(args.substitute_model);
    config.channel.params.si_error_rate = args.si_error;
    config.detector.n_ports = args.ports;
    config.detector.e_dark = args.e_dark;
    config.n_pulses = args.pulses;
    config.master_seed = args.seed;
    config.validate();

    SessionLog log = run_session(config);
    std::vector<SiftedRecord> sifted = sift(log);
    VerificationReport report = verify(sifted, log, config);

    fs::create_directories(args.out);
    auto path = [&](const char* name) { return (fs::path(args.out) / name).string(); };
    write_pulses_csv(path("pulses.csv"), log);
    write_outcomes_csv(path("outcomes.csv"), log);
    write_detections_csv(path("detections.csv"), log);
    write_sifted_csv(path("sifted.csv"), sifted);
    write_report_csv(path("report.csv"), report);

    std::string text = render_report_text(report, config);
    SecuritySummary summary =
        make_security_summary(report.qber_sifted, args.mu, args.eta, args.mu_prime);
    std::ostringstream sec;
    sec << "security summary\n";
    sec << "  i_ab              " << format_double(summary.i_ab) << "\n";
    sec << "  h_si              " << format_double(summary.h_si) << "\n";
    sec << "  i_ae              " << format_double(summary.i_ae) << "\n";
    sec << "  delta bound       " << format_double(summary.delta_bound) << "\n";
    sec << "  delta decoy bound " << format_double(summary.delta_decoy_bound) << "\n";
    sec << "  gllp rate         " << format_double(summary.gllp_rate) << "\n";
    sec << "  threshold qber    " << format_double(summary.threshold_qber) << "\n";
    sec << "  secure (i_ab>i_ae) " << (summary.secure ? "yes" : "no") << "\n";
    text += sec.str();
    write_text_file(path("report.txt"), text);

    ManifestEntries manifest = {
        {"command", "simulate"},
        {"artifact_version", kArtifactVersion},
        {"mu", format_double(args.mu)},
        {"mu_prime", format_double(args.mu_prime)},
        {"eta", format_double(args.eta)},
        {"pulses", std::to_string(args.pulses)},
        {"ports", std::to_string(args.ports)},
        {"e_dark", format_double(args.e_dark)},
        {"attack", args.attack},
        {"substitute_model", args.substitute_model},
        {"si_error", format_double(args.si_error)},
        {"seed", std::to_string(args.seed)},
        {"out", args.out},
        {"outputs",
         "pulses.csv outcomes.csv detections.csv sifted.csv report.csv report.txt"},
    };
    write_manifest(path("manifest.txt"), manifest);

    std::cout << text;
    std::cout << "outputs written to " << args.out << "\n";

    switch (report.verdict) {
        case Verdict::secure: return kExitOk;
        case Verdict::eavesdropper_detected: return kExitEavesdropper;
        case Verdict::inconclusive: return kExitInconclusive;
    }
    return kExitOk;
}

void write_with_manifest(const std::string& out, const std::string& body,
                         ManifestEntries manifest) {
    write_text_file(out, body);
    manifest.emplace_back("out", out);
    write_manifest(out + ".manifest", manifest);
}

int cmd_threshold(const std::string& mu_csv, double tol, const std::string& out) {
    std::vector<double> mus = parse_mu_list(mu_csv);
    std::ostringstream body;
    body << "mu,threshold_qber\n";
    for (double mu : mus) {
        ThresholdResult t = security_threshold(mu, tol);
        body << format_double(mu) << ',' << format_double(t.threshold) << '\n';
    }
    std::cout << body.str();
    if (!out.empty()) {
        write_with_manifest(out, body.str(),
                            {{"command", "threshold"},
                             {"artifact_version", kArtifactVersion},
                             {"mu", mu_csv},
                             {"tol", format_double(tol)}});
    }
    return kExitOk;
}

int cmd_fig2(const std::string& mu_csv, const std::string& out, const std::string& sweep_out) {
    std::vector<double> mus = parse_mu_list(mu_csv);
    constexpr double kStep = 0.001;
    constexpr int kSteps = 250;  // e grid [0, 0.25]

    std::ostringstream body;
    body << "e,i_ab";
    for (double mu : mus) body << ",i_ae_mu" << format_double(mu);
    body << '\n';
    for (int i = 0; i <= kSteps; ++i) {
        double e = i * kStep;
        body << format_double(e) << ',' << format_double(info_ab(e));
        for (double mu : mus) body << ',' << format_double(info_ae(e, mu));
        body << '\n';
    }
    std::cout << body.str();

    ManifestEntries manifest = {{"command", "fig2"},
                                {"artifact_version", kArtifactVersion},
                                {"mu", mu_csv}};
    if (!out.empty()) write_with_manifest(out, body.str(), manifest);

    if (!sweep_out.empty()) {
        // Long format with the key rate at the eta->0 tagged-fraction bound.
        std::ostringstream sweep;
        sweep << "mu,e,i_ab,i_ae,gllp_rate\n";
        for (double mu : mus) {
            for (int i = 0; i <= kSteps; ++i) {
                double e = i * kStep;
                sweep << format_double(mu) << ',' << format_double(e) << ','
                      << format_double(info_ab(e)) << ',' << format_double(info_ae(e, mu))
                      << ',' << format_double(gllp_rate(e, mu)) << '\n';
            }
        }
        manifest[0].second = "fig2-sweep";
        write_with_manifest(sweep_out, sweep.str(), manifest);
    }
    return kExitOk;
}

int cmd_solver(double mu, double mu_prime, double eta, unsigned n_max, const std::string& out) {
    EveStrategySolution solution = solve_blocking_distribution(mu, mu_prime, eta, n_max);
    std::cout << render_solution_text(solution);
    if (!out.empty()) {
        write_solution_csv(out, solution);
        write_manifest(out + ".manifest", {{"command", "solver"},
                                           {"artifact_version", kArtifactVersion},
                                           {"mu", format_double(mu)},
                                           {"mu_prime", format_double(mu_prime)},
                                           {"eta", format_double(eta)},
                                           {"n_max", std::to_string(n_max)},
                                           {"out", out}});
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BB84 weak-coherent-pulse QKD simulator and security analyzer"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "run a seeded session end to end");
    simulate->add_option("--mu", sim.mu, "signal mean photon number");
    simulate->add_option("--mu-prime", sim.mu_prime, "decoy mean photon number");
    simulate->add_option("--eta", sim.eta, "end-to-end transmittance");
    simulate->add_option("--pulses", sim.pulses, "number of pulses");
    simulate->add_option("--ports", sim.ports, "detector leaf ports (power of two)");
    simulate->add_option("--e-dark", sim.e_dark, "dark-click probability per SPD per slot");
    simulate->add_option("--attack", sim.attack, "none|pns|pnsr|si|cmp");
    simulate->add_option("--substitute-model", sim.substitute_model,
                         "intercept-resend|random-state");
    simulate->add_option("--si-error", sim.si_error, "per-photon error rate for si/cmp");
    simulate->add_option("--seed", sim.seed, "master seed");
    simulate->add_option("--out", sim.out, "output directory");

    std::string mu_list;
    double tol = 1e-6;
    std::string out_file;
    CLI::App* threshold = app.add_subcommand("threshold", "security-threshold QBER per mu");
    threshold->add_option("--mu", mu_list, "comma-separated mu list")->required();
    threshold->add_option("--tol", tol, "bisection tolerance");
    threshold->add_option("--out", out_file, "CSV output path");

    std::string fig2_mu = "0.1,0.2,0.3";
    std::string fig2_out, fig2_sweep;
    CLI::App* fig2 = app.add_subcommand("fig2", "information-vs-QBER curve data");
    fig2->add_option("--mu", fig2_mu, "comma-separated mu list");
    fig2->add_option("--out", fig2_out, "CSV output path");
    fig2->add_option("--sweep-out", fig2_sweep, "long-format (mu,e,i_ab,i_ae,gllp_rate) path");

    double so_mu = 0.1, so_mu_prime = 0.5, so_eta = 0.1;
    unsigned so_n_max = 10;
    std::string so_out;
    CLI::App* solver = app.add_subcommand("solver", "channel-loss eavesdropping strategy table");
    solver->add_option("--mu", so_mu, "signal mean photon number");
    solver->add_option("--mu-prime", so_mu_prime, "decoy mean photon number");
    solver->add_option("--eta", so_eta, "end-to-end transmittance");
    solver->add_option("--n-max", so_n_max, "photon-number truncation");
    solver->add_option("--out", so_out, "CSV output path");

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return cmd_simulate(sim);
        if (threshold->parsed()) return cmd_threshold(mu_list, tol, out_file);
        if (fig2->parsed()) return cmd_fig2(fig2_mu, fig2_out, fig2_sweep);
        if (solver->parsed()) return cmd_solver(so_mu, so_mu_prime, so_eta, so_n_max, so_out);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
