#pragma once

// JSON documents, reports and CSV traces.
//
// Sum document:
//   {
//     "atoms": [{"name": "a", "value": 1.0}, {"name": "b"}],
//     "frequencies": [[1, 0], ["1/2", "3"]],
//     "coefficients": [{"modulus": 1.0, "phase_turns": "1/3"}, {"modulus": 0.5, "phase_turns": 0.125}],
//     "tail_energy": 0.0
//   }
// Phase strings "p/q" (or integers) are exact; decimal strings and JSON
// floats are approximate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "aptk/besic.hpp"
#include "aptk/error.hpp"
#include "aptk/exact.hpp"
#include "aptk/fejer.hpp"
#include "aptk/freq.hpp"
#include "aptk/search.hpp"
#include "aptk/sums.hpp"

namespace aptk {

using Json = nlohmann::ordered_json;

struct SumDocument {
  AtomTable atoms;
  ExponentialSum sum;
};

namespace detail {

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, "field " + path + ": " + what);
}

inline const Json& require(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_fail(path + "/" + key, "missing");
  return *it;
}

inline bool looks_rational(const std::string& s) {
  if (s.empty()) return false;
  return s.find_first_of(".eE") == std::string::npos;
}

inline Rational rational_field(const Json& v, const std::string& path) {
  try {
    if (v.is_number_integer()) return Rational(Integer(v.dump()));
    if (v.is_string() && looks_rational(v.get<std::string>())) return parse_rational(v.get<std::string>());
  } catch (const Error&) {
  } catch (const std::invalid_argument&) {
  }
  schema_fail(path, "expected an exact rational (integer or \"p/q\" string)");
}

inline double real_field(const Json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      const std::string s = v.get<std::string>();
      if (looks_rational(s)) return parse_rational(s).get_d();
      std::size_t used = 0;
      const double d = std::stod(s, &used);
      if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
  }
  schema_fail(path, "expected a number");
}

inline PhaseTurns phase_field(const Json& v, const std::string& path) {
  if (v.is_number_integer() || (v.is_string() && looks_rational(v.get<std::string>())))
    return PhaseTurns::from_rational(rational_field(v, path));
  return PhaseTurns::from_double(real_field(v, path));
}

inline Json rational_json(const Rational& q) {
  if (q.get_den() == 1 && q.get_num().fits_slong_p()) return Json(q.get_num().get_si());
  return Json(to_string(q));
}

}  // namespace detail

inline SumDocument sum_from_json(const Json& doc) {
  using detail::require;
  using detail::schema_fail;
  if (!doc.is_object()) schema_fail("/", "document must be an object");
  SumDocument out;
  const Json& atoms = require(doc, "atoms", "");
  if (!atoms.is_array()) schema_fail("/atoms", "expected an array");
  bool any_value = false;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string p = "/atoms/" + std::to_string(i);
    const Json& name = require(atoms[i], "name", p);
    if (!name.is_string()) schema_fail(p + "/name", "expected a string");
    out.atoms.names.push_back(name.get<std::string>());
    if (atoms[i].contains("value") && !atoms[i]["value"].is_null()) {
      out.atoms.values.push_back(detail::real_field(atoms[i]["value"], p + "/value"));
      any_value = true;
    } else {
      out.atoms.values.push_back(std::nullopt);
    }
  }
  if (!any_value) out.atoms.values.clear();
  try {
    out.atoms.validate();
  } catch (const Error& e) {
    schema_fail("/atoms", e.what());
  }
  const std::size_t dim = out.atoms.size();
  const Json& freqs = require(doc, "frequencies", "");
  if (!freqs.is_array()) schema_fail("/frequencies", "expected an array");
  std::vector<Frequency> fv;
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    const std::string p = "/frequencies/" + std::to_string(j);
    if (!freqs[j].is_array()) schema_fail(p, "expected an array of coordinates");
    if (freqs[j].size() != dim) schema_fail(p, "expected " + std::to_string(dim) + " coordinates");
    std::vector<Rational> c;
    for (std::size_t k = 0; k < dim; ++k) c.push_back(detail::rational_field(freqs[j][k], p + "/" + std::to_string(k)));
    fv.emplace_back(std::move(c));
  }
  const Json& coeffs = require(doc, "coefficients", "");
  if (!coeffs.is_array()) schema_fail("/coefficients", "expected an array");
  if (coeffs.size() != fv.size()) schema_fail("/coefficients", "length differs from /frequencies");
  std::vector<Coefficient> cv;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    const std::string p = "/coefficients/" + std::to_string(j);
    const double mod = detail::real_field(require(coeffs[j], "modulus", p), p + "/modulus");
    const PhaseTurns ph = detail::phase_field(require(coeffs[j], "phase_turns", p), p + "/phase_turns");
    if (!std::isfinite(mod)) schema_fail(p + "/modulus", "must be finite");
    if (mod < 0.0) throw Error(ErrorCode::NegativeModulus, "field " + p + "/modulus: negative modulus");
    cv.emplace_back(mod, ph);
  }
  double tail = 0.0;
  if (doc.contains("tail_energy") && !doc["tail_energy"].is_null()) {
    tail = detail::real_field(doc["tail_energy"], "/tail_energy");
    if (!(tail >= 0.0) || !std::isfinite(tail)) schema_fail("/tail_energy", "must be finite and nonnegative");
  }
  FrequencySet set(dim, std::move(fv));
  out.sum = ExponentialSum(std::move(set), std::move(cv), tail);
  return out;
}

inline SumDocument parse_sum(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError,
                "line " + std::to_string(detail::line_of(text, e.byte ? e.byte - 1 : 0)) + ": malformed JSON");
  }
  return sum_from_json(doc);
}

inline Json sum_to_json(const ExponentialSum& f, const AtomTable& atoms) {
  Json doc;
  Json at = Json::array();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    Json a;
    a["name"] = atoms.names[i];
    if (i < atoms.values.size() && atoms.values[i]) a["value"] = *atoms.values[i];
    at.push_back(a);
  }
  doc["atoms"] = at;
  Json fr = Json::array();
  for (const auto& f_j : f.spectrum) {
    Json row = Json::array();
    for (const auto& c : f_j.coords) row.push_back(detail::rational_json(c));
    fr.push_back(row);
  }
  doc["frequencies"] = fr;
  Json co = Json::array();
  for (const auto& c : f.coeffs) {
    Json e;
    e["modulus"] = c.modulus;
    if (c.phase.exact)
      e["phase_turns"] = to_string(*c.phase.exact);
    else
      e["phase_turns"] = c.phase.approx;
    co.push_back(e);
  }
  doc["coefficients"] = co;
  doc["tail_energy"] = f.tail_energy;
  return doc;
}

inline std::string serialize_sum(const ExponentialSum& f, const AtomTable& atoms) {
  return sum_to_json(f, atoms).dump(2) + "\n";
}

inline SumDocument load_sum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SchemaError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_sum(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + std::string(e.what()).substr(to_string(e.code()).size() + 2));
  }
}

// ---- reports ----

inline Json to_json(const std::vector<Rational>& v) {
  Json a = Json::array();
  for (const auto& q : v) a.push_back(to_string(q));
  return a;
}

inline Json to_json(const std::vector<Integer>& v) {
  Json a = Json::array();
  for (const auto& z : v) a.push_back(detail::rational_json(Rational(z)));
  return a;
}

inline Json to_json(const Frequency& f) {
  Json a = Json::array();
  for (const auto& c : f.coords) a.push_back(detail::rational_json(c));
  return a;
}

inline Json to_json(const BasisInfo& b) {
  Json j;
  Json basis = Json::array();
  for (const auto& g : b.basis) basis.push_back(to_json(g));
  j["basis"] = basis;
  j["rank"] = b.rank();
  Json rows = Json::array();
  for (std::size_t r = 0; r < b.frequency_count(); ++r) {
    Json row = Json::array();
    for (const auto& c : b.coord_matrix.row(r)) row.push_back(detail::rational_json(c));
    rows.push_back(row);
  }
  j["coordinates"] = rows;
  j["is_integral"] = b.is_integral;
  j["lcm_denominator"] = to_string(Rational(b.lcm_q));
  j["column_scales"] = to_json(b.column_scales);
  Json members = Json::array();
  for (auto m : b.member_rows) members.push_back(m);
  j["member_rows"] = members;
  return j;
}

inline Json to_json(const Verdict& v) {
  Json j;
  j["verdict"] = std::string(to_string(v.kind));
  j["reason"] = v.reason;
  j["residual"] = v.residual;
  Json ws = Json::array();
  for (const auto& w : v.witnesses) {
    Json e;
    e["prefix_n"] = w.prefix_n;
    e["x_turns"] = to_json(w.x);
    Json approx = Json::array();
    for (double d : w.approx()) approx.push_back(d);
    e["x_approx"] = approx;
    ws.push_back(e);
  }
  j["witnesses"] = ws;
  if (v.obstruction) {
    const auto& o = *v.obstruction;
    Json e;
    e["kind"] = o.kind == Obstruction::Kind::Modulus ? "modulus" : "relation";
    e["index"] = o.index;
    e["relation"] = to_json(o.relation);
    e["value"] = to_string(o.value);
    e["distance"] = o.distance;
    j["obstruction"] = e;
  } else {
    j["obstruction"] = nullptr;
  }
  j["basis"] = to_json(v.basis);
  return j;
}

inline Json to_json(const TauCertificate& c) {
  Json j;
  j["success"] = c.success;
  j["tau"] = c.tau;
  j["deviation"] = c.deviation;
  j["target_eps"] = c.target_eps;
  j["lower_bound_d"] = c.lower_bound_d;
  j["evaluations"] = c.evaluations;
  j["strategy"] = std::string(to_string(c.strategy));
  j["scan_step"] = c.scan_step;
  j["horizon"] = c.horizon;
  j["prefix_n"] = c.prefix_n;
  return j;
}

inline Json to_json(const DensityReport& d) {
  Json j;
  j["interval_length_l"] = std::isfinite(d.interval_length_l) ? Json(d.interval_length_l) : Json(nullptr);
  j["window_count"] = d.window_count;
  j["taus_per_window"] = d.taus_per_window;
  j["max_gap"] = std::isfinite(d.max_gap) ? Json(d.max_gap) : Json(nullptr);
  return j;
}

inline Json to_json(const FejerScheme& s) {
  Json j;
  j["orders"] = s.orders;
  Json f = Json::array();
  for (const auto& p : s.factors) f.push_back(to_string(p));
  j["factors"] = f;
  j["nonzero_count"] = s.nonzero_count();
  return j;
}

inline Json to_json(const MeanEstimate& m) {
  Json j;
  j["re"] = m.value.real();
  j["im"] = m.value.imag();
  j["half_lengths"] = m.half_lengths;
  Json est = Json::array();
  for (const auto& z : m.estimates) est.push_back(Json::array({z.real(), z.imag()}));
  j["estimates"] = est;
  j["residuals"] = m.residuals;
  return j;
}

// ---- output ----

/// Writes through a sibling temp file and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  const auto tmp = dir / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw Error(ErrorCode::InvalidArgument, "CSV row width mismatch");
    rows_.push_back(std::move(row));
  }

  void add_row(const std::vector<double>& row) {
    std::vector<std::string> r;
    for (double v : row) r.push_back(format_real(v));
    add_row(std::move(r));
  }

  std::size_t size() const noexcept { return rows_.size(); }

  std::string str() const {
    std::string out;
    emit(out, header_);
    for (const auto& r : rows_) emit(out, r);
    return out;
  }

 private:
  static void emit(std::string& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      const auto& f = row[i];
      if (f.find_first_of(",\"\r\n") == std::string::npos) {
        out += f;
        continue;
      }
      out += '"';
      for (char c : f) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    }
    out += "\r\n";
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace aptk
