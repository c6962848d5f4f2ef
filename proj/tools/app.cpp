#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wavectrl/error.hpp"

namespace wavectrl::app {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  WAVECTRL_REQUIRE(obj.is_object(), where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    WAVECTRL_REQUIRE(allowed.count(key) != 0, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string("wrong type for '") + key + "'");
  }
}

CutoffMode parse_chi_mode(const std::string& s) {
  if (s == "smooth") return CutoffMode::Smooth;
  if (s == "indicator") return CutoffMode::Indicator;
  if (s == "one") return CutoffMode::One;
  throw InvalidArgument("chi_mode must be smooth, indicator or one");
}

MeshPattern parse_pattern(const std::string& s) {
  if (s == "alternating") return MeshPattern::Alternating;
  if (s == "crisscross") return MeshPattern::Crisscross;
  throw InvalidArgument("pattern must be alternating or crisscross");
}

ReferenceMode parse_reference(const std::string& s) {
  if (s == "exact") return ReferenceMode::Exact;
  if (s == "finest") return ReferenceMode::FinestRun;
  throw InvalidArgument("reference must be exact or finest");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  WAVECTRL_REQUIRE(f.good(), "cannot write " + path.string());
  f << text;
}

std::string series_tag(int p, int q, std::optional<double> v) {
  std::string s = "p" + std::to_string(p) + "q" + std::to_string(q);
  if (v) s += "_V" + fmt(*v);
  return s;
}

}  // namespace

ControlProblem RunConfig::problem(int p_, int q_, double potential_) const {
  ControlProblem pb;
  pb.kind = kind;
  pb.final_time = final_time;
  pb.p = p_;
  pb.q = q_;
  pb.kappa = kappa;
  pb.gamma = gamma;
  switch (chi_mode) {
    case CutoffMode::Smooth: pb.cutoff = Cutoff::smooth(final_time, a, b); break;
    case CutoffMode::Indicator: pb.cutoff = Cutoff::indicator(a, b); break;
    case CutoffMode::One: pb.cutoff = Cutoff::one(); break;
  }
  pb.data = example == DataTag::Ex2b ? make_ex2b_data() : make_initial_data(example);
  if (potential_ != 0.0) {
    pb.potential = [potential_](const Point&) { return potential_; };
    pb.potential_value = potential_;
  }
  pb.validate();
  return pb;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw InvalidArgument(std::string("malformed JSON: ") + ex.what());
  }
  check_keys(doc,
             {"kind", "example", "T", "a", "b", "chi_mode", "p", "q", "kappa", "gamma", "V", "V_list", "pq",
              "mesh", "reference", "reference_nx", "reference_p", "reference_q", "metric", "output"},
             "config");
  RunConfig c;
  std::string s;
  if (doc.contains("kind")) {
    read(doc, "kind", s);
    c.kind = parse_problem_kind(s);
  }
  if (doc.contains("example")) {
    read(doc, "example", s);
    c.example = parse_data_tag(s);
  }
  read(doc, "T", c.final_time);
  read(doc, "a", c.a);
  read(doc, "b", c.b);
  if (doc.contains("chi_mode")) {
    read(doc, "chi_mode", s);
    c.chi_mode = parse_chi_mode(s);
  }
  read(doc, "p", c.p);
  read(doc, "q", c.q);
  read(doc, "kappa", c.kappa);
  read(doc, "gamma", c.gamma);
  read(doc, "V", c.potential);
  read(doc, "V_list", c.potential_list);
  if (doc.contains("pq")) {
    std::vector<std::vector<int>> pq;
    read(doc, "pq", pq);
    for (const auto& e : pq) {
      WAVECTRL_REQUIRE(e.size() == 2, "pq entries must be [p, q] pairs");
      c.pq_series.emplace_back(e[0], e[1]);
    }
  }
  if (doc.contains("mesh")) {
    const json& m = doc.at("mesh");
    check_keys(m, {"nx", "nx_list", "h_list", "pattern", "jitter", "seed"}, "mesh");
    WAVECTRL_REQUIRE(!(m.contains("nx_list") && m.contains("h_list")), "give nx_list or h_list, not both");
    if (m.contains("nx")) {
      int nx = 0;
      read(m, "nx", nx);
      c.nx_list = {nx};
    }
    read(m, "nx_list", c.nx_list);
    if (m.contains("h_list")) {
      // h is the spatial cell width 1/nx
      std::vector<double> hs;
      read(m, "h_list", hs);
      c.nx_list.clear();
      for (double h : hs) {
        WAVECTRL_REQUIRE(h > 0.0 && h <= 1.0, "h_list entries must lie in (0, 1]");
        c.nx_list.push_back(static_cast<int>(std::lround(1.0 / h)));
      }
    }
    if (m.contains("pattern")) {
      read(m, "pattern", s);
      c.pattern = parse_pattern(s);
    }
    read(m, "jitter", c.jitter);
    read(m, "seed", c.seed);
  }
  for (int nx : c.nx_list) WAVECTRL_REQUIRE(nx >= 1, "mesh sizes must be positive");
  if (doc.contains("reference")) {
    read(doc, "reference", s);
    c.reference = parse_reference(s);
  }
  read(doc, "reference_nx", c.reference_nx);
  read(doc, "reference_p", c.reference_p);
  read(doc, "reference_q", c.reference_q);
  read(doc, "metric", c.metric);
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    check_keys(o, {"csv", "svg", "solution"}, "output");
    read(o, "csv", c.csv_name);
    read(o, "svg", c.svg_name);
    read(o, "solution", c.solution_name);
  }
  if (!c.metric.empty()) (void)ErrorReport{}.metric(c.metric);
  (void)c.problem();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  WAVECTRL_REQUIRE(f.good(), "cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void apply_environment(RunConfig& config) {
  const char* env = std::getenv("WAVECTRL_SEED");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  WAVECTRL_REQUIRE(end != nullptr && *end == '\0', "WAVECTRL_SEED must be an unsigned integer");
  config.seed = v;
}

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title, const std::string& y_label) {
  constexpr double kW = 640.0, kH = 480.0, kLeft = 80.0, kRight = 170.0, kTop = 40.0, kBottom = 60.0;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  double hmin = INFINITY, hmax = -INFINITY, emin = INFINITY, emax = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.h.size(); ++i) {
      if (!(s.h[i] > 0.0) || !(s.e[i] > 0.0)) continue;
      hmin = std::min(hmin, s.h[i]);
      hmax = std::max(hmax, s.h[i]);
      emin = std::min(emin, s.e[i]);
      emax = std::max(emax, s.e[i]);
    }
  }
  if (!(hmin < INFINITY)) {
    hmin = 0.01, hmax = 1.0, emin = 1e-3, emax = 1.0;
  }
  const double x0 = std::floor(std::log10(hmin)), x1 = std::max(x0 + 1, std::ceil(std::log10(hmax)));
  const double y0 = std::floor(std::log10(emin)), y1 = std::max(y0 + 1, std::ceil(std::log10(emax)));
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  const auto px = [&](double h) { return kLeft + (std::log10(h) - x0) / (x1 - x0) * pw; };
  const auto py = [&](double e) { return kTop + (y1 - std::log10(e)) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
     << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = static_cast<int>(x0); k <= static_cast<int>(x1); ++k) {
    const double x = px(std::pow(10.0, k));
    os << "<line x1=\"" << x << "\" y1=\"" << kTop << "\" x2=\"" << x << "\" y2=\"" << kTop + ph
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">1e" << k << "</text>\n";
  }
  for (int k = static_cast<int>(y0); k <= static_cast<int>(y1); ++k) {
    const double y = py(std::pow(10.0, k));
    os << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kLeft + pw << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << k << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 15 << "\" text-anchor=\"middle\">h</text>\n";
  os << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << kTop + ph / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const PlotSeries& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    os << "<g class=\"series\" data-label=\"" << s.label << "\">\n";
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.h.size(); ++i) {
      if (s.h[i] > 0.0 && s.e[i] > 0.0) os << px(s.h[i]) << ',' << py(s.e[i]) << ' ';
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.h.size(); ++i) {
      if (s.h[i] > 0.0 && s.e[i] > 0.0) {
        os << "<circle cx=\"" << px(s.h[i]) << "\" cy=\"" << py(s.e[i]) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
    if (s.slope && s.h.size() >= 2) {
      // triangle below the two smallest mesh sizes
      const auto [lo, hi] = std::minmax_element(s.h.begin(), s.h.end());
      const double ha = *lo, hb = std::sqrt(*lo * *hi);
      const std::size_t ia = static_cast<std::size_t>(lo - s.h.begin());
      const double ea = s.e[ia] / 2.0, eb = ea * std::pow(hb / ha, *s.slope);
      os << "<polygon fill=\"none\" stroke=\"" << color << "\" stroke-dasharray=\"4 2\" points=\"" << px(ha) << ','
         << py(ea) << ' ' << px(hb) << ',' << py(ea) << ' ' << px(hb) << ',' << py(eb) << "\"/>\n";
      os << "<text x=\"" << px(hb) + 4 << "\" y=\"" << (py(ea) + py(eb)) / 2 << "\" fill=\"" << color << "\">"
         << std::setprecision(2) << *s.slope << "</text>\n";
    }
    const double ly = kTop + 16 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << kW - kRight + 12 << "\" y1=\"" << ly << "\" x2=\"" << kW - kRight + 36 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kW - kRight + 42 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string error_json(const std::string& kind, const std::string& message) {
  return json{{"error", kind}, {"message", message}}.dump();
}

int cmd_solve(const Options& options, std::ostream& out) {
  RunConfig config = load_config(options.config);
  apply_environment(config);
  WAVECTRL_REQUIRE(config.nx_list.size() == 1, "solve needs exactly one mesh size");
  const ControlProblem pb = config.problem();
  const int nx = config.nx_list.front();
  const SolveResult run = solve(pb, make_study_mesh(pb.final_time, nx, config.pattern, config.jitter, config.seed));

  std::filesystem::create_directories(options.out_dir);
  {
    std::ofstream f(options.out_dir / config.solution_name);
    WAVECTRL_REQUIRE(f.good(), "cannot write solution file");
    write_solution(f, run.solution);
  }

  ErrorReport report;
  if (exact_reference_applies(pb)) {
    report = evaluate_errors(pb, run, exact_reference(pb.data.tag));
  } else {
    report.h = run.solution.h;
    report.num_dofs = static_cast<int>(run.solution.u.size() + run.solution.phi.size());
    const AssembledForms forms = assemble_forms(pb, run.setup, run.solution.h);
    report.tnorm = residual_norm(pb, forms, run.solution.u, run.solution.phi);
  }
  report.nx = nx;
  StudyResult single;
  single.reports.push_back(report);
  std::ostringstream csv;
  write_study_csv(csv, single);
  write_text(options.out_dir / config.csv_name, csv.str());

  const double norm = std::sqrt(run.solution.u.squaredNorm() + run.solution.phi.squaredNorm());
  out << "h=" << fmt(report.h) << " nx=" << nx << " dofs=" << report.num_dofs << " tnorm=" << fmt(report.tnorm)
      << " solution_norm=" << fmt(norm);
  for (const char* name : {"err_phi", "err_dxphi", "err_u", "err_v_trace", "err_v_control"}) {
    if (const auto e = report.metric(name)) out << ' ' << name << '=' << fmt(*e);
  }
  out << " solver=" << run.solution.diagnostics.method
      << " residual=" << fmt(run.solution.diagnostics.relative_residual) << '\n';
  return kOk;
}

int cmd_study(const Options& options, std::ostream& out) {
  RunConfig config = load_config(options.config);
  apply_environment(config);
  WAVECTRL_REQUIRE(config.nx_list.size() >= 3, "study needs at least 3 mesh sizes");
  std::vector<std::pair<int, int>> pqs = config.pq_series;
  if (pqs.empty()) pqs.emplace_back(config.p, config.q);
  std::vector<std::optional<double>> potentials;
  for (double v : config.potential_list) potentials.emplace_back(v);
  if (potentials.empty()) potentials.emplace_back(std::nullopt);
  const bool many = pqs.size() * potentials.size() > 1;

  // validate every combination before running anything
  for (const auto& [p, q] : pqs) {
    for (const auto& v : potentials) (void)config.problem(p, q, v.value_or(config.potential));
  }

  std::filesystem::create_directories(options.out_dir);
  std::vector<PlotSeries> plot;
  std::string metric;
  bool partial = false;
  for (const auto& v : potentials) {
    for (const auto& [p, q] : pqs) {
      StudyOptions so;
      so.problem = config.problem(p, q, v.value_or(config.potential));
      so.nx_list = config.nx_list;
      so.pattern = config.pattern;
      so.jitter = config.jitter;
      so.seed = config.seed;
      so.reference = config.reference;
      so.reference_nx = config.reference_nx;
      so.reference_p = config.reference_p;
      so.reference_q = config.reference_q;
      so.metric = config.metric;
      so.threads = options.threads;
      const StudyResult result = convergence_study(so);
      metric = result.metric;

      std::ostringstream csv;
      write_study_csv(csv, result);
      for (const auto& f : result.failures) csv << "# failed " << f << '\n';
      std::filesystem::path name = config.csv_name;
      if (many) name = name.stem().string() + "_" + series_tag(p, q, v) + name.extension().string();
      write_text(options.out_dir / name, csv.str());

      PlotSeries s;
      s.label = "(p,q)=(" + std::to_string(p) + "," + std::to_string(q) + ")";
      if (v) s.label += " V=" + fmt(*v);
      for (const auto& r : result.reports) {
        if (const auto e = r.metric(result.metric)) {
          s.h.push_back(r.h);
          s.e.push_back(*e);
        }
      }
      if (result.fit) s.slope = result.fit->slope;
      plot.push_back(s);
      partial = partial || result.partial();

      out << s.label << ' ' << result.metric << " rate=" << (result.fit ? fmt(result.fit->slope) : "n/a")
          << " last=" << (result.fit ? fmt(result.fit->last_slope) : "n/a") << " file=" << name.string();
      if (result.partial()) out << " partial";
      out << '\n';
    }
  }
  const std::string title = std::string(to_string(config.kind)) + " " + std::string(to_string(config.example));
  write_text(options.out_dir / config.svg_name, render_svg(plot, title, metric));
  return partial ? kSolverError : kOk;
}

int cmd_validate_exact(std::ostream& out) {
  struct Row {
    const char* name;
    double computed;
    double expected;
    bool checked;
  };
  const double pi = std::acos(-1.0);
  const ExactNorms ex1 = exact_norms(DataTag::Ex1);
  const ExactNorms ex3 = exact_norms(DataTag::Ex3);
  const std::vector<Row> rows = {
      {"Ex1 |v|_L2(0,T)", ex1.v, 0.5, true},
      {"Ex1 |phi|_L2(M)", ex1.phi, 1.0 / (2.0 * std::sqrt(2.0) * pi), true},
      {"Ex1 |dx phi|_L2(M)", ex1.dx_phi, 1.0 / (2.0 * std::sqrt(2.0)), true},
      {"Ex1 |u|_L2(M)", ex1.u, 0.5, true},
      {"Ex3 |v|_L2(0,T)", ex3.v, 1.0 / std::sqrt(3.0), true},
      {"Ex3 |u|_L2(M)", ex3.u, 1.0 / std::sqrt(3.0), true},
      {"Ex3 |phi|_L2(M)", ex3.phi, 9.86e2, false},
  };
  bool ok = true;
  out << std::left << std::setw(22) << "quantity" << std::setw(18) << "computed" << std::setw(18) << "expected"
      << "status\n";
  for (const Row& r : rows) {
    const bool pass = std::abs(r.computed - r.expected) <= 1e-6;
    const char* status = !r.checked ? "info" : pass ? "ok" : "MISMATCH";
    ok = ok && (!r.checked || pass);
    out << std::left << std::setw(22) << r.name << std::setw(18) << fmt(r.computed) << std::setw(18)
        << fmt(r.expected) << status << '\n';
  }
  return ok ? kOk : kFailure;
}

}  // namespace wavectrl::app
