#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lift5/packets.hpp"
#include "lift5/paraproduct.hpp"

namespace lift5 {

inline constexpr int kSchemaVersion = 1;
const char* tool_version();

// Deterministic id from the command name and its canonical inputs.
std::string make_run_id(const std::string& command, const std::string& inputs_json);

// Shared report schema:
//   {tool, version, schema_version, run_id, command, inputs, checks:[{name, value, bound, pass}], data}
struct Envelope {
  std::string command;
  std::string run_id;  // empty: derived from command and inputs
  std::string inputs = "{}";
  std::string checks = "[]";
  std::string data = "{}";
};
std::string envelope_json(const Envelope& e);
// Throws Error(Schema) on a foreign tool, a different schema version or a missing key.
void validate_report(const std::string& json);

std::string paraproduct_json(const ParaproductReport& r);
std::string paraproduct_checks_json(const ParaproductReport& r);
// k, D_k, I_LH, I_HL, I_HH
std::string paraproduct_csv(const ParaproductReport& r);

std::string scan_json(const ScoreScan& s);
// lambda, z0, Q per scanned ball
std::string scan_csv(const ScoreScan& s);

struct LabeledPacket {
  Packet packet;
  BranchLabel label = BranchLabel::ResidualNonconcentration;
};
std::string packets_json(const std::vector<LabeledPacket>& packets, const WindowCover* cover);

struct Bundle {
  std::string json;
  std::vector<std::pair<std::string, std::string>> csv;  // file name, contents
};

// Merges this tool's JSON outputs.  CSVs: Q_* vs t from run logs, D_k spectra
// from paraproduct reports, and Psi / |N_loc| / D_crit against delta ordered by
// decreasing delta.
Bundle merge_reports(const std::vector<std::string>& documents);

// Writes through a temporary file in the same directory and renames.
void write_atomic(const std::string& path, const std::string& contents);

}  // namespace lift5
