#include "ancert/interchange.hpp"

#include <fstream>
#include <stdexcept>

namespace ancert {

std::string var_kind_name(VarKind k) {
  switch (k) {
    case VarKind::SymPsd: return "sym_psd";
    case VarKind::Free: return "free";
    case VarKind::NonnegVector: return "nonneg_vector";
    case VarKind::NonnegScalar: return "nonneg_scalar";
  }
  throw std::logic_error("var_kind_name: bad kind");
}

VarKind var_kind_from_name(const std::string& s) {
  if (s == "sym_psd") return VarKind::SymPsd;
  if (s == "free") return VarKind::Free;
  if (s == "nonneg_vector") return VarKind::NonnegVector;
  if (s == "nonneg_scalar") return VarKind::NonnegScalar;
  throw std::invalid_argument("unknown variable kind: " + s);
}

namespace {

json mat_to_json(const Mat& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  const int r = static_cast<int>(j.size());
  const int c = r > 0 ? static_cast<int>(j.at(0).size()) : 0;
  Mat M(r, c);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < c; ++k) M(i, k) = j.at(i).at(k).get<double>();
  return M;
}

json triplets_of(const Mat& M) {
  json t = json::array();
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0.0) t.push_back({i, j, M(i, j)});
  return t;
}

Mat mat_from_triplets(const json& t, int size) {
  Mat M = Mat::Zero(size, size);
  for (const auto& e : t)
    M(e.at(0).get<int>(), e.at(1).get<int>()) = e.at(2).get<double>();
  return M;
}

}  // namespace

json program_to_json(const std::vector<VarSpec>& vars,
                     const std::vector<AffineLmi>& lmis,
                     const SdpObjective& objective) {
  json doc;
  doc["format"] = "ancert-conic-v1";
  json jv = json::array();
  for (const auto& v : vars) {
    jv.push_back({{"name", v.name},
                  {"rows", v.rows},
                  {"cols", v.cols},
                  {"kind", var_kind_name(v.kind)},
                  {"entries", v.entries()}});
  }
  doc["variables"] = std::move(jv);
  json jc = json::array();
  for (const auto& lmi : lmis) {
    json blk;
    blk["name"] = lmi.name;
    blk["size"] = lmi.size;
    blk["cone"] = lmi.sense == Sense::NegDef ? "neg_def" : "psd";
    blk["constant"] = triplets_of(lmi.constant);
    json terms;
    for (const auto& [var, slabs] : lmi.terms) {
      json per_entry = json::array();
      for (const auto& M : slabs) per_entry.push_back(triplets_of(M));
      terms[var] = std::move(per_entry);
    }
    blk["terms"] = std::move(terms);
    jc.push_back(std::move(blk));
  }
  doc["constraints"] = std::move(jc);
  json jo;
  for (const auto& [var, C] : objective.coeffs) jo[var] = mat_to_json(C);
  doc["objective"] = std::move(jo);
  return doc;
}

ConicProgram program_from_json(const json& doc) {
  if (doc.value("format", "") != "ancert-conic-v1")
    throw std::invalid_argument("not an ancert conic program document");
  ConicProgram p;
  for (const auto& jv : doc.at("variables")) {
    VarSpec v;
    v.name = jv.at("name").get<std::string>();
    v.rows = jv.at("rows").get<int>();
    v.cols = jv.at("cols").get<int>();
    v.kind = var_kind_from_name(jv.at("kind").get<std::string>());
    if (jv.contains("entries") && jv.at("entries").get<int>() != v.entries())
      throw std::invalid_argument("entry count mismatch for " + v.name);
    p.vars.push_back(std::move(v));
  }
  for (const auto& jc : doc.at("constraints")) {
    AffineLmi lmi;
    lmi.name = jc.at("name").get<std::string>();
    lmi.size = jc.at("size").get<int>();
    const std::string cone = jc.at("cone").get<std::string>();
    if (cone == "neg_def") lmi.sense = Sense::NegDef;
    else if (cone == "psd") lmi.sense = Sense::Psd;
    else throw std::invalid_argument("unknown cone: " + cone);
    lmi.constant = mat_from_triplets(jc.at("constant"), lmi.size);
    for (const auto& [var, per_entry] : jc.at("terms").items()) {
      std::vector<Mat> slabs;
      slabs.reserve(per_entry.size());
      for (const auto& t : per_entry)
        slabs.push_back(mat_from_triplets(t, lmi.size));
      lmi.terms[var] = std::move(slabs);
    }
    p.lmis.push_back(std::move(lmi));
  }
  for (const auto& [var, C] : doc.at("objective").items())
    p.objective.coeffs[var] = mat_from_json(C);
  return p;
}

json certificate_to_json(const std::vector<VarSpec>& vars,
                         const Assignment& assignment,
                         const std::vector<LmiReport>& margins,
                         const std::string& status, double objective) {
  json doc;
  doc["format"] = "ancert-certificate-v1";
  doc["status"] = status;
  doc["objective"] = objective;
  json ja;
  for (const auto& v : vars) {
    auto it = assignment.find(v.name);
    if (it == assignment.end()) continue;
    ja[v.name] = mat_to_json(it->second);
  }
  doc["assignment"] = std::move(ja);
  json jm = json::array();
  for (const auto& r : margins) {
    jm.push_back({{"name", r.name},
                  {"min_eig", r.min_eig},
                  {"max_eig", r.max_eig},
                  {"ok", r.ok}});
  }
  doc["margins"] = std::move(jm);
  return doc;
}

Certificate certificate_from_json(const json& doc) {
  if (doc.value("format", "") != "ancert-certificate-v1")
    throw std::invalid_argument("not an ancert certificate document");
  Certificate c;
  c.status = doc.at("status").get<std::string>();
  c.objective = doc.at("objective").get<double>();
  for (const auto& [name, jm] : doc.at("assignment").items())
    c.assignment[name] = mat_from_json(jm);
  for (const auto& jr : doc.at("margins")) {
    LmiReport r;
    r.name = jr.at("name").get<std::string>();
    r.min_eig = jr.at("min_eig").get<double>();
    r.max_eig = jr.at("max_eig").get<double>();
    r.ok = jr.at("ok").get<bool>();
    c.margins.push_back(std::move(r));
  }
  return c;
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << doc.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return json::parse(in);
}

}  // namespace ancert
