#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/protocol.hpp"

namespace qkd {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Floating-point formatting used in every CSV and manifest: 9 significant
/// digits, C locale, so identical runs produce byte-identical files.
std::string format_double(double value);

const char* to_string(PulseClass c);
const char* to_string(Basis b);
const char* to_string(MeasuredBit m);
const char* to_string(AttackKind a);
const char* to_string(SubstituteModel m);

// Column orders are fixed; a single header row leads each file.
void write_pulses_csv(const std::string& path, const SessionLog& log);
void write_outcomes_csv(const std::string& path, const SessionLog& log);
void write_detections_csv(const std::string& path, const SessionLog& log);
void write_sifted_csv(const std::string& path, const std::vector<SiftedRecord>& sifted);

/// key,value rows covering verdicts, GOF results, per-n QBERs and the
/// tagged-fraction numbers.
void write_report_csv(const std::string& path, const VerificationReport& report);

std::string render_report_text(const VerificationReport& report, const SessionConfig& config);

void write_solution_csv(const std::string& path, const EveStrategySolution& solution);
std::string render_solution_text(const EveStrategySolution& solution);

/// Manifest of "key = value" lines recording command, parameters, seed,
/// artifact version and output paths; written alongside every output set.
using ManifestEntries = std::vector<std::pair<std::string, std::string>>;
void write_manifest(const std::string& path, const ManifestEntries& entries);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace qkd
