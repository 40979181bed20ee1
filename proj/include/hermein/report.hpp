#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hermein/errors.hpp"

namespace hermein {

/// One measured quantity: the computed value, the tolerance the acceptance
/// check applied, and whether it passed.
struct ReportRow {
  int n = 0;
  std::string quantity;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

/// Shortest decimal string that round-trips the double bit-exactly.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Sign and normalization conventions in force, attached to JSON reports so
/// numbers stay comparable across implementations.
inline nlohmann::ordered_json convention_ledger() {
  nlohmann::ordered_json l;
  l["volume_form"] = "round form normalized to unit mass: dA / (pi (1+|z|^2)^2)";
  l["curvature_sign"] =
      "F = -dzbar(H^{-1} dz H); round weight of degree k gives F = k (1+|z|^2)^{-2}";
  l["degree_integral"] = "deg = (1/pi) int tr F dA";
  l["central_curvature"] = "K = pi (1+|z|^2)^2 F; constant pi*deg/r at constant-curvature metrics";
  l["kn_sign"] = "KN = 1/2 ln det - (chi/2r) int ln det(k0^{-1} induced) dmu";
  l["reference_metric"] =
      "split round product; unit determinant relative to the determinant-line weight";
  l["donaldson_constants"] =
      "dM/du = (1/2pi) int tr(v F) dA - (mu/2) int tr(v) dmu; fixed by M(h,ah)=0 "
      "and slope 1 on the split example path";
  l["bergman_normalization"] = "B = H A m^{-1} A^*; int tr B dmu = dim of the section space";
  l["recovered_scale"] = "c matches int ln det of the reference field (not a literal n/pi)";
  return l;
}

/// CSV: header then one row per record. JSON: records array plus the
/// convention ledger.
inline void emit_report(const std::vector<ReportRow>& rows, const std::string& format,
                        const std::string& path) {
  if (format != "csv" && format != "json")
    throw std::invalid_argument("emit_report: format must be csv or json");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("emit_report: cannot open '" + path + "' for writing");

  if (format == "csv") {
    out << "n,quantity,value,tolerance,pass\n";
    for (const auto& r : rows)
      out << r.n << ',' << r.quantity << ',' << format_double(r.value) << ','
          << format_double(r.tolerance) << ',' << (r.pass ? "true" : "false")
          << '\n';
  } else {
    nlohmann::ordered_json doc;
    doc["records"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json rec;
      rec["n"] = r.n;
      rec["quantity"] = r.quantity;
      rec["value"] = r.value;
      rec["tolerance"] = r.tolerance;
      rec["pass"] = r.pass;
      doc["records"].push_back(rec);
    }
    doc["convention_ledger"] = convention_ledger();
    out << doc.dump(2) << '\n';
  }
  if (!out) throw io_error("emit_report: write failed for '" + path + "'");
}

} // namespace hermein
