#pragma once

#include <ostream>
#include <string>

#include "glab/flow/kr_flow.hpp"

namespace glab::io {

/// Shortest round-trip decimal form; "nan" for NaN.
std::string format_double(double v);

/// Diagnostics table, one row per sample:
/// t,sup_u,min_c_over_r,iso_defect,psi_ss,residual_raw,residual_rescaled
void write_diagnostics_csv(std::ostream& out, const flow::FlowDiagnostics& diagnostics);
std::string diagnostics_csv(const flow::FlowDiagnostics& diagnostics);

}  // namespace glab::io
