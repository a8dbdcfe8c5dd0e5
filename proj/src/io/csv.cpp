#include "glab/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace glab::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_diagnostics_csv(std::ostream& out, const flow::FlowDiagnostics& diagnostics) {
  out << "t,sup_u,min_c_over_r,iso_defect,psi_ss,residual_raw,residual_rescaled\n";
  for (const auto& s : diagnostics.samples)
    out << format_double(s.t) << ',' << format_double(s.sup_u) << ',' << format_double(s.min_c_over_r) << ','
        << format_double(s.iso_defect) << ',' << format_double(s.psi_ss) << ',' << format_double(s.residual_raw)
        << ',' << format_double(s.residual_rescaled) << '\n';
}

std::string diagnostics_csv(const flow::FlowDiagnostics& diagnostics) {
  std::ostringstream s;
  write_diagnostics_csv(s, diagnostics);
  return s.str();
}

}  // namespace glab::io
