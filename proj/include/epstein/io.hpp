#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "epstein/decomposition.hpp"
#include "epstein/lattice.hpp"
#include "epstein/stability.hpp"
#include "epstein/summation.hpp"
#include "epstein/verify.hpp"

namespace epstein {

using json = nlohmann::json;

namespace detail {

inline double json_number(const json& cell) {
  if (cell.is_number()) return cell.get<double>();
  if (cell.is_string()) {
    const std::string s = cell.get<std::string>();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw Error(ErrorKind::parse, "bad number '" + s + "'");
    }
    if (used != s.size()) throw Error(ErrorKind::parse, "bad number '" + s + "'");
    return v;
  }
  throw Error(ErrorKind::parse, "matrix cells must be numbers or strings");
}

}  // namespace detail

inline MatrixXd matrix_from_json(const json& rows, Index n_rows, Index n_cols) {
  if (!rows.is_array() || static_cast<Index>(rows.size()) != n_rows) throw Error(ErrorKind::parse, "wrong row count");
  MatrixXd m(n_rows, n_cols);
  for (Index i = 0; i < n_rows; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || static_cast<Index>(row.size()) != n_cols) throw Error(ErrorKind::parse, "wrong column count");
    for (Index j = 0; j < n_cols; ++j) m(i, j) = detail::json_number(row[j]);
  }
  return m;
}

inline json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// {"ambient_dim": n, "rank": d, "basis": n rows of d entries}
inline LatticeBasis lattice_from_json(const json& j) {
  if (!j.is_object() || !j.contains("ambient_dim") || !j.contains("rank") || !j.contains("basis"))
    throw Error(ErrorKind::parse, "lattice needs ambient_dim, rank and basis");
  const auto n = j.at("ambient_dim").get<Index>();
  const auto d = j.at("rank").get<Index>();
  if (n < 0 || d < 0 || d > n) throw Error(ErrorKind::parse, "inconsistent dimensions");
  if (d == 0) return LatticeBasis::trivial(n);
  return LatticeBasis(matrix_from_json(j.at("basis"), n, d));
}

inline json lattice_to_json(const LatticeBasis& b) {
  json j;
  j["ambient_dim"] = b.ambient_dim();
  j["rank"] = b.rank();
  j["basis"] = matrix_to_json(b.matrix());
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, path + ": " + e.what());
  }
}

inline LatticeBasis read_lattice(const std::string& path) { return lattice_from_json(read_json_file(path)); }

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::parse, "cannot write " + path);
  out << j.dump(2) << '\n';
}

inline json to_json(const SummationResult& r) {
  return {{"value", r.value}, {"tail_bound", r.tail_bound}, {"terms_used", r.terms_used}};
}

inline json to_json(const StabilityCertificate& c) {
  json j;
  j["verdict"] = to_string(c.verdict);
  j["explanation"] = c.explanation;
  j["witness"] = c.witness ? lattice_to_json(*c.witness) : json(nullptr);
  json mins = json::array();
  for (const SublatticeMinimum& m : c.min_dets) {
    mins.push_back({{"rank", m.rank},
                    {"det", m.det},
                    {"radius", m.radius},
                    {"required_radius", m.required_radius},
                    {"complete", m.complete},
                    {"sublattice", lattice_to_json(m.sublattice)}});
  }
  j["min_dets"] = std::move(mins);
  return j;
}

inline json to_json(const Decomposition& d, bool is_zn) {
  json j;
  json summands = json::array();
  for (const LatticeBasis& c : d.coords) summands.push_back(lattice_to_json(c));
  j["summands"] = std::move(summands);
  j["ranks"] = d.ranks;
  j["dets"] = d.dets;
  j["assembly"] = matrix_to_json(d.assembly);
  j["certified"] = d.certified;
  j["is_Zn"] = is_zn;
  return j;
}

inline json to_json(const VerificationReport& r) {
  json j;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["s"] = r.s;
  j["q"] = r.q;
  j["q_bound"] = r.q_bound;
  j["exploratory"] = r.exploratory;
  j["reference_zeta_prime"] = r.reference;
  j["reference_tail_bound"] = r.reference_tail;
  json rows = json::array();
  for (const LatticeOutcome& o : r.per_lattice) {
    json row = {{"lattice_id", o.lattice_id},
                {"zeta_prime", o.zeta_prime},
                {"margin", o.margin},
                {"tail_bound", o.tail_bound},
                {"is_Zn", o.is_Zn},
                {"violation", o.violation},
                {"equality_mismatch", o.equality_mismatch}};
    if (!o.error.empty()) row["error"] = o.error;
    rows.push_back(std::move(row));
  }
  j["per_lattice"] = std::move(rows);
  j["violations"] = r.violations;
  j["equality_mismatches"] = r.equality_mismatches;
  j["errors"] = r.errors;
  return j;
}

inline std::string to_csv(const VerificationReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "id,n,s,q,zeta_prime,margin,is_zn,tail_bound\n";
  for (const LatticeOutcome& o : r.per_lattice) {
    out << o.lattice_id << ',' << r.n << ',' << r.s << ',' << r.q << ',' << o.zeta_prime << ',' << o.margin << ','
        << (o.is_Zn ? "true" : "false") << ',' << o.tail_bound << '\n';
  }
  return out.str();
}

}  // namespace epstein
