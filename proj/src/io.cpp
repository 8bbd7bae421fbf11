#include "qkd/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qkd {

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

const char* to_string(PulseClass c) { return c == PulseClass::signal ? "signal" : "decoy"; }

const char* to_string(Basis b) { return b == Basis::rectilinear ? "rectilinear" : "diagonal"; }

const char* to_string(MeasuredBit m) {
    switch (m) {
        case MeasuredBit::zero: return "0";
        case MeasuredBit::one: return "1";
        case MeasuredBit::ambiguous: return "ambiguous";
    }
    return "?";
}

const char* to_string(AttackKind a) {
    switch (a) {
        case AttackKind::none: return "none";
        case AttackKind::pns: return "pns";
        case AttackKind::pnsr: return "pnsr";
        case AttackKind::si: return "si";
        case AttackKind::cmp: return "cmp";
    }
    return "?";
}

const char* to_string(SubstituteModel m) {
    return m == SubstituteModel::intercept_resend ? "intercept_resend" : "random_state";
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // '\n' endings everywhere
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
    auto out = open_out(path);
    out << content;
}

void write_pulses_csv(const std::string& path, const SessionLog& log) {
    auto out = open_out(path);
    out << "id,class,basis,bit,photon_count\n";
    for (const PulseRecord& p : log.pulses) {
        out << p.id << ',' << to_string(p.pulse_class) << ',' << to_string(p.basis) << ','
            << static_cast<int>(p.bit) << ',' << p.photon_count << '\n';
    }
}

void write_outcomes_csv(const std::string& path, const SessionLog& log) {
    auto out = open_out(path);
    out << "pulse_id,forwarded_count,eve_captured,substituted,tagged\n";
    for (const ChannelOutcome& o : log.outcomes) {
        out << o.pulse_id << ',' << o.forwarded.size() << ',' << o.eve_captured << ','
            << (o.substituted ? 1 : 0) << ',' << (o.tagged ? 1 : 0) << '\n';
    }
}

void write_detections_csv(const std::string& path, const SessionLog& log) {
    auto out = open_out(path);
    out << "pulse_id,resolved_count,bob_basis,measured_bit,dark_clicks\n";
    for (const DetectionEvent& d : log.detections) {
        out << d.pulse_id << ',' << d.resolved_count << ',' << to_string(d.bob_basis) << ','
            << to_string(d.measured_bit) << ',' << d.dark_clicks << '\n';
    }
}

void write_sifted_csv(const std::string& path, const std::vector<SiftedRecord>& sifted) {
    auto out = open_out(path);
    out << "pulse_id,class,alice_bit,bob_bit,photon_class,error\n";
    for (const SiftedRecord& r : sifted) {
        out << r.pulse_id << ',' << to_string(r.pulse_class) << ','
            << static_cast<int>(r.alice_bit) << ',' << static_cast<int>(r.bob_bit) << ','
            << r.photon_class << ',' << (r.error ? 1 : 0) << '\n';
    }
}

namespace {

void report_class_rows(std::ostream& out, const char* name, const ClassVerification& cls) {
    out << name << "_gof_statistic," << format_double(cls.gof.statistic) << '\n';
    out << name << "_gof_p_value," << format_double(cls.gof.p_value) << '\n';
    out << name << "_gof_pass," << (cls.gof.pass ? 1 : 0) << '\n';
    out << name << "_detected," << cls.detected << '\n';
    out << name << "_sifted," << cls.sifted << '\n';
    out << name << "_tagged_detected," << cls.tagged_detected << '\n';
    out << name << "_delta_empirical," << format_double(cls.delta_empirical) << '\n';
    for (const auto& [n, e] : cls.qber_per_n) {
        out << name << "_qber_" << n << ',' << format_double(e) << '\n';
        out << name << "_qber_events_" << n << ',' << cls.events_per_n.at(n) << '\n';
    }
}

}  // namespace

void write_report_csv(const std::string& path, const VerificationReport& report) {
    auto out = open_out(path);
    out << "key,value\n";
    out << "verdict," << to_string(report.verdict) << '\n';
    out << "gof_pass," << (report.gof_pass ? 1 : 0) << '\n';
    out << "qber_consistency_pass," << (report.qber_consistency_pass ? 1 : 0) << '\n';
    out << "qber_sifted," << format_double(report.qber_sifted) << '\n';
    out << "delta_empirical," << format_double(report.delta_empirical) << '\n';
    out << "delta_bound_analytic," << format_double(report.delta_bound_analytic) << '\n';
    for (const auto& [n, e] : report.qber_per_n_pooled) {
        out << "qber_pooled_" << n << ',' << format_double(e) << '\n';
        out << "qber_pooled_events_" << n << ',' << report.events_per_n_pooled.at(n) << '\n';
    }
    report_class_rows(out, "signal", report.signal);
    report_class_rows(out, "decoy", report.decoy);
}

std::string render_report_text(const VerificationReport& report, const SessionConfig& config) {
    std::ostringstream out;
    out << "verification report\n";
    out << "  pulses            " << config.n_pulses << "\n";
    out << "  attack            " << to_string(config.channel.attack) << "\n";
    out << "  mu / mu' / eta    " << format_double(config.source.mu) << " / "
        << format_double(config.source.mu_prime) << " / " << format_double(config.channel.eta)
        << "\n";
    out << "  verdict           " << to_string(report.verdict) << "\n";
    auto class_block = [&](const char* name, const ClassVerification& cls) {
        out << "  [" << name << "]\n";
        out << "    detected        " << cls.detected << "\n";
        out << "    sifted          " << cls.sifted << "\n";
        out << "    gof             chi2=" << format_double(cls.gof.statistic)
            << " p=" << format_double(cls.gof.p_value) << (cls.gof.pass ? " pass" : " FAIL")
            << "\n";
        for (const auto& [n, e] : cls.qber_per_n) {
            out << "    e_" << n << "             " << format_double(e) << "  (events "
                << cls.events_per_n.at(n) << ")\n";
        }
        out << "    delta empirical " << format_double(cls.delta_empirical) << "\n";
    };
    class_block("signal", report.signal);
    class_block("decoy", report.decoy);
    out << "  qber (sifted key) " << format_double(report.qber_sifted) << "\n";
    out << "  delta empirical   " << format_double(report.delta_empirical) << "\n";
    out << "  delta bound       " << format_double(report.delta_bound_analytic) << "\n";
    for (const std::string& note : report.notes) out << "  note: " << note << "\n";
    return out.str();
}

void write_solution_csv(const std::string& path, const EveStrategySolution& solution) {
    auto out = open_out(path);
    out << "n,p_eve";
    for (unsigned i = 0; i <= solution.n_max; ++i) out << ",f" << i;
    out << ",residual_signal,residual_decoy\n";
    for (unsigned n = 0; n <= solution.n_max; ++n) {
        out << n << ',' << format_double(solution.p_eve[n]);
        for (unsigned i = 0; i <= solution.n_max; ++i) {
            out << ',';
            if (i < solution.forward_dist[n].size())
                out << format_double(solution.forward_dist[n][i]);
        }
        out << ',' << format_double(solution.residual_signal[n]) << ','
            << format_double(solution.residual_decoy[n]) << '\n';
    }
}

std::string render_solution_text(const EveStrategySolution& solution) {
    std::ostringstream out;
    out << "per-photon capture solution (mu=" << format_double(solution.mu)
        << ", mu'=" << format_double(solution.mu_prime)
        << ", eta=" << format_double(solution.eta) << ")\n";
    out << "  P_Eve(1) exact        " << format_double(solution.p_eve1_exact) << "\n";
    out << "  P_Eve(1) first order  " << format_double(solution.p_eve1_first_order) << "\n";
    out << "  P_Eve(2) exact        " << format_double(solution.p_eve2_exact) << "\n";
    out << "  P_Eve(2) first order  " << format_double(solution.p_eve2_first_order) << "\n";
    out << "  per-photon solution residuals < 1e-9: "
        << (solution.per_photon_solution_valid ? "yes" : "NO") << "\n";
    auto eq11 = check_blocking_infeasibility(solution.mu, solution.eta);
    out << "  pure blocking: two-photon excess " << format_double(eq11.lhs) << " vs "
        << format_double(eq11.rhs) << " -> "
        << (eq11.infeasible ? "infeasible (detected)" : "feasible") << "\n";
    out << "  f(n,i): per-photon forwarding probabilities\n";
    for (unsigned n = 0; n <= solution.n_max; ++n) {
        out << "    n=" << n << ":";
        for (double f : solution.forward_dist[n]) out << ' ' << format_double(f);
        out << "\n";
    }
    return out.str();
}

void write_manifest(const std::string& path, const ManifestEntries& entries) {
    auto out = open_out(path);
    for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
}

}  // namespace qkd
