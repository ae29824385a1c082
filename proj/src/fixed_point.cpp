#include "aaadmm/fixed_point.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "text_util.hpp"

namespace aaadmm {

namespace {

bool blown_up(double e) { return !std::isfinite(e) || e > kBlowUpCeiling; }

std::optional<std::pair<double, double>> eval_hooks(const FixedPointMap& map, const Vector& before,
                                                    const Vector& after) {
  if (!map.residual_hooks) return std::nullopt;
  return map.residual_hooks(before, after);
}

}  // namespace

IterationTrace iterate(const FixedPointMap& map, const Vector& x0, int max_iter, double tol,
                       const std::optional<Vector>& reference) {
  if (x0.size() != map.dimension)
    throw std::invalid_argument("iterate: x0 dimension does not match map");
  if (reference && reference->size() != map.dimension)
    throw std::invalid_argument("iterate: reference dimension does not match map");
  if (max_iter < 1) throw std::invalid_argument("iterate: max_iter must be positive");
  if (!(tol > 0)) throw std::invalid_argument("iterate: tol must be positive");

  IterationTrace trace;
  Vector x = x0;

  if (reference) {
    const Vector& ref = *reference;
    double e0 = (x - ref).norm();
    if (blown_up(e0)) {
      trace.terminal_status = TerminalStatus::diverged;
      trace.final_iterate = x;
      return trace;
    }
    trace.records.push_back({0, e0, std::nullopt, std::nullopt});
    if (e0 <= tol) {
      trace.terminal_status = TerminalStatus::converged;
      trace.final_iterate = x;
      return trace;
    }
    trace.terminal_status = TerminalStatus::max_iterations;
    for (int k = 1; k <= max_iter; ++k) {
      Vector xn = map.evaluate(x);
      double e = (xn - ref).norm();
      if (blown_up(e)) {
        trace.terminal_status = TerminalStatus::diverged;
        trace.final_iterate = x;
        return trace;
      }
      auto res = eval_hooks(map, x, xn);
      TraceRecord rec{k, e, std::nullopt, std::nullopt};
      if (res) {
        rec.primal_residual = res->first;
        rec.dual_residual = res->second;
      }
      trace.records.push_back(rec);
      x = std::move(xn);
      if (e <= tol) {
        trace.terminal_status = TerminalStatus::converged;
        break;
      }
    }
    trace.final_iterate = x;
    return trace;
  }

  trace.terminal_status = TerminalStatus::max_iterations;
  for (int k = 0; k < max_iter; ++k) {
    Vector xn = map.evaluate(x);
    double e = (xn - x).norm();
    if (blown_up(e)) {
      trace.terminal_status = TerminalStatus::diverged;
      trace.final_iterate = x;
      return trace;
    }
    auto res = eval_hooks(map, x, xn);
    TraceRecord rec{k, e, std::nullopt, std::nullopt};
    if (res) {
      rec.primal_residual = res->first;
      rec.dual_residual = res->second;
    }
    trace.records.push_back(rec);
    x = std::move(xn);
    if (e <= tol) {
      trace.terminal_status = TerminalStatus::converged;
      break;
    }
  }
  trace.final_iterate = x;
  return trace;
}

Vector reference_solution(const FixedPointMap& map, const Vector& x0, double floor_tol,
                          int max_iter) {
  if (!(floor_tol > 0)) throw std::invalid_argument("reference_solution: floor_tol must be > 0");
  if (x0.size() != map.dimension)
    throw std::invalid_argument("reference_solution: x0 dimension does not match map");

  constexpr int kStagnationSpan = 50;
  const double eps = std::numeric_limits<double>::epsilon();

  Vector x = x0;
  double best_step = std::numeric_limits<double>::infinity();
  int since_improvement = 0;
  double last_finite_step = std::numeric_limits<double>::quiet_NaN();

  for (int k = 0; k < max_iter; ++k) {
    Vector xn = map.evaluate(x);
    double step = (xn - x).norm();
    if (blown_up(step)) {
      throw std::runtime_error("reference_solution: diverged, last finite step norm " +
                               detail::fmt_double(last_finite_step));
    }
    last_finite_step = step;
    x = std::move(xn);
    double stop = std::max(floor_tol, 50.0 * eps * x.norm());
    if (step <= stop) return x;
    if (step < best_step) {
      best_step = step;
      since_improvement = 0;
    } else if (++since_improvement >= kStagnationSpan) {
      return x;  // rounding plateau
    }
  }
  return x;
}

ConvergenceEstimate estimate_convergence_factor(const IterationTrace& trace, int window,
                                                double accuracy_floor) {
  if (window < 2) throw std::invalid_argument("estimate_convergence_factor: window must be >= 2");

  ConvergenceEstimate est;
  est.window = window;

  const double floor = 100.0 * accuracy_floor;
  auto usable = [&](const TraceRecord& r) {
    return std::isfinite(r.error_norm) && r.error_norm > floor && r.error_norm > 0.0;
  };

  // Ratios between consecutive-index usable records, most recent last.
  std::vector<double> ratios;
  const auto& recs = trace.records;
  for (size_t i = 1; i < recs.size(); ++i) {
    if (recs[i].k == recs[i - 1].k + 1 && usable(recs[i - 1]) && usable(recs[i]))
      ratios.push_back(recs[i].error_norm / recs[i - 1].error_norm);
  }
  if (ratios.empty()) {
    est.reliable = false;
    return est;
  }
  size_t use = std::min<size_t>(window, ratios.size());
  double log_sum = 0.0;
  for (size_t i = ratios.size() - use; i < ratios.size(); ++i) log_sum += std::log(ratios[i]);
  est.factor = std::exp(log_sum / static_cast<double>(use));
  est.reliable = use == static_cast<size_t>(window);
  return est;
}

std::string trace_to_csv(const IterationTrace& trace) {
  std::ostringstream out;
  out << "k,error_norm,primal_residual,dual_residual\n";
  for (const auto& r : trace.records) {
    out << r.k << ',' << detail::fmt_double(r.error_norm) << ',';
    if (r.primal_residual) out << detail::fmt_double(*r.primal_residual);
    out << ',';
    if (r.dual_residual) out << detail::fmt_double(*r.dual_residual);
    out << '\n';
  }
  return out.str();
}

IterationTrace trace_from_csv(const std::string& text) {
  IterationTrace trace;
  auto lines = detail::split(text, '\n');
  if (lines.empty() || detail::strip(lines[0]) != "k,error_norm,primal_residual,dual_residual")
    throw std::runtime_error("trace_from_csv: missing or malformed header");
  for (size_t i = 1; i < lines.size(); ++i) {
    std::string line = detail::strip(lines[i]);
    if (line.empty()) continue;
    auto cells = detail::split(line, ',');
    if (cells.size() != 4) throw std::runtime_error("trace_from_csv: expected 4 cells per row");
    TraceRecord rec;
    rec.k = static_cast<int>(detail::parse_double(cells[0]));
    rec.error_norm = detail::parse_double(cells[1]);
    if (!detail::strip(cells[2]).empty()) rec.primal_residual = detail::parse_double(cells[2]);
    if (!detail::strip(cells[3]).empty()) rec.dual_residual = detail::parse_double(cells[3]);
    trace.records.push_back(rec);
  }
  return trace;
}

void write_trace_csv(const IterationTrace& trace, const std::string& path) {
  detail::write_file(path, trace_to_csv(trace));
}

IterationTrace read_trace_csv(const std::string& path) {
  return trace_from_csv(detail::read_file(path));
}

}  // namespace aaadmm
