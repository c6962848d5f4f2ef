#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>

#include "wavectrl/analysis.hpp"
#include "wavectrl/error.hpp"

namespace wavectrl {

std::shared_ptr<const Mesh> make_study_mesh(double final_time, int nx, MeshPattern pattern, double jitter,
                                            std::uint64_t seed) {
  const int nt = std::max(2, static_cast<int>(std::lround(nx * final_time)));
  return std::make_shared<const Mesh>(build_rect_mesh(final_time, nx, nt, pattern, jitter, seed));
}

namespace {

std::string default_metric(ProblemKind kind) {
  return kind == ProblemKind::Boundary ? "err_v_control" : "err_phi_chi";
}

}  // namespace

StudyResult convergence_study(const StudyOptions& options) {
  WAVECTRL_REQUIRE(options.nx_list.size() >= 3, "convergence_study: need at least 3 mesh sizes");
  WAVECTRL_REQUIRE(options.threads >= 1, "convergence_study: threads must be positive");
  const ControlProblem& pb = options.problem;
  pb.validate();

  StudyResult result;
  result.metric = options.metric.empty() ? default_metric(pb.kind) : options.metric;
  (void)ErrorReport{}.metric(result.metric);

  ReferenceSolution reference;
  std::shared_ptr<SolveResult> fine;
  if (options.reference_solution) {
    reference = *options.reference_solution;
  } else if (options.reference == ReferenceMode::Exact) {
    WAVECTRL_REQUIRE(exact_reference_applies(pb),
                     "convergence_study: no closed-form reference for this configuration");
    reference = exact_reference(pb.data.tag);
  } else {
    const int finest = *std::max_element(options.nx_list.begin(), options.nx_list.end());
    WAVECTRL_REQUIRE(options.reference_nx > finest, "convergence_study: reference mesh must be finer than the sweep");
    ControlProblem ref_pb = pb;
    ref_pb.p = options.reference_p;
    ref_pb.q = options.reference_q;
    // structured reference mesh
    fine = std::make_shared<SolveResult>(
        solve(ref_pb, make_study_mesh(pb.final_time, options.reference_nx, options.pattern, 0.0, options.seed)));
    reference = discrete_reference(ref_pb, *fine);
  }

  const std::size_t n = options.nx_list.size();
  std::vector<std::optional<ErrorReport>> reports(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const int nx = options.nx_list[i];
      try {
        const auto mesh = make_study_mesh(pb.final_time, nx, options.pattern, options.jitter, options.seed);
        const SolveResult run = solve(pb, mesh);
        ErrorReport r = evaluate_errors(pb, run, reference);
        r.nx = nx;
        reports[i] = r;
      } catch (const std::exception& ex) {
        errors[i] = "nx=" + std::to_string(nx) + ": " + ex.what();
      }
    }
  };
  const int threads = std::min<int>(options.threads, static_cast<int>(n));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < n; ++i) {
    if (reports[i]) {
      result.reports.push_back(*reports[i]);
    } else {
      result.failures.push_back(errors[i]);
    }
  }
  std::sort(result.reports.begin(), result.reports.end(),
            [](const ErrorReport& a, const ErrorReport& b) { return a.h > b.h; });

  std::vector<double> hs;
  std::vector<double> es;
  for (const auto& r : result.reports) {
    if (const auto e = r.metric(result.metric)) {
      hs.push_back(r.h);
      es.push_back(*e);
    }
  }
  try {
    result.fit = fit_rate(hs, es);
  } catch (const InvalidArgument& ex) {
    result.failures.push_back(std::string("rate fit: ") + ex.what());
  }
  return result;
}

void write_study_csv(std::ostream& out, const StudyResult& result) {
  out << "h,err_phi_chi,err_phi,err_dxphi,err_u,err_v_trace,err_v_control,tnorm,rate_global,rate_last\n";
  const auto put = [&out](const std::optional<double>& v) {
    if (v) out << *v;
    out << ',';
  };
  out << std::setprecision(10);
  for (const auto& r : result.reports) {
    out << r.h << ',';
    put(r.err_phi_chi);
    put(r.err_phi);
    put(r.err_dxphi);
    put(r.err_u);
    put(r.err_v_trace);
    put(r.err_v_control);
    out << r.tnorm << ',';
    if (result.fit) {
      out << result.fit->slope << ',' << result.fit->last_slope;
    } else {
      out << ',';
    }
    out << '\n';
  }
}

}  // namespace wavectrl
