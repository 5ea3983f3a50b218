// Canonical conic-program interchange (JSON): variables, cones, and sparse
// triplet coefficients per constraint block. Certificates (solved
// assignments plus oracle margins) travel in the same container.
#pragma once

#include <json.hpp>

#include "ancert/lmi.hpp"
#include "ancert/sdp.hpp"

namespace ancert {

using nlohmann::json;

std::string var_kind_name(VarKind k);
VarKind var_kind_from_name(const std::string& s);

// Program container: {"variables": [...], "constraints": [...],
// "objective": {...}} with one sparse triplet list per constraint block and
// per decision entry.
json program_to_json(const std::vector<VarSpec>& vars,
                     const std::vector<AffineLmi>& lmis,
                     const SdpObjective& objective);

struct ConicProgram {
  std::vector<VarSpec> vars;
  std::vector<AffineLmi> lmis;
  SdpObjective objective;
};
ConicProgram program_from_json(const json& doc);

// Certificate container: solved assignment (dense, row-major) plus the
// feasibility_oracle margins and solver status string.
json certificate_to_json(const std::vector<VarSpec>& vars,
                         const Assignment& assignment,
                         const std::vector<LmiReport>& margins,
                         const std::string& status, double objective);

struct Certificate {
  Assignment assignment;
  std::vector<LmiReport> margins;
  std::string status;
  double objective = 0.0;
};
Certificate certificate_from_json(const json& doc);

void write_json_file(const std::string& path, const json& doc);
json read_json_file(const std::string& path);

}  // namespace ancert
