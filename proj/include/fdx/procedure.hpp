#pragma once

#include <span>
#include <vector>

#include "fdx/stepdown.hpp"
#include "fdx/transforms.hpp"

namespace fdx {

/// Runs a procedure end to end on raw p-values: weighted kinds first map the
/// p-values to their AM/GM weighted versions, then the step-down rejection
/// is taken through the adjusted p-values.
struct ProcedureRun {
  std::vector<double> tested;  // the p-values the step-down acted on
  RejectionResult result;
};

ProcedureRun run_procedure(const ProcedureSpec& spec, std::span<const double> raw_p);

/// As run_procedure, but only the rejection set is computed.
ProcedureRun run_procedure_fast(const ProcedureSpec& spec, std::span<const double> raw_p);

}  // namespace fdx
