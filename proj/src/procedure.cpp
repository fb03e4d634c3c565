#include "fdx/procedure.hpp"

#include "fdx/weighting.hpp"

namespace fdx {

namespace {

template <typename Reject>
ProcedureRun run_with(const ProcedureSpec& spec, std::span<const double> raw_p, Reject&& rejector) {
  ProcedureRun run;
  run.tested = prepare_pvalues(spec.kind, raw_p, spec.weights ? &*spec.weights : nullptr);
  const auto xi = make_transform(spec, raw_p.size());
  run.result = rejector(run.tested, xi, spec.zeta);
  return run;
}

}  // namespace

ProcedureRun run_procedure(const ProcedureSpec& spec, std::span<const double> raw_p) {
  return run_with(spec, raw_p, [](std::span<const double> p, const TransformFamily& xi, double zeta) {
    return reject(p, xi, zeta);
  });
}

ProcedureRun run_procedure_fast(const ProcedureSpec& spec, std::span<const double> raw_p) {
  return run_with(spec, raw_p, [](std::span<const double> p, const TransformFamily& xi, double zeta) {
    return reject_fast(p, xi, zeta);
  });
}

}  // namespace fdx
