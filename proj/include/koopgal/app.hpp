#ifndef KOOPGAL_APP_HPP
#define KOOPGAL_APP_HPP

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "basis.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "koopman.hpp"
#include "polynomial.hpp"
#include "reference.hpp"

namespace koopgal {

enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitConfig = 2,
  kExitNearDefective = 3,
  kExitNumeric = 4,
  kExitValidateFailed = 5,
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// nt points from 0 to t_final inclusive.
inline std::vector<double> linspace(double t0, double t1, int nt) {
  std::vector<double> t(static_cast<std::size_t>(nt));
  for (int k = 0; k < nt; ++k)
    t[k] = (k == nt - 1) ? t1 : t0 + (t1 - t0) * k / (nt - 1);
  return t;
}

struct ObservableError {
  std::string name;
  double max = 0.0;
  double rms = 0.0;
};

struct StageTimings {
  double assembly = 0.0;
  double eigendecomposition = 0.0;
  double propagation = 0.0;
  double reference = 0.0;
  double total = 0.0;
};

struct RunSummary {
  std::string name;
  int m = 0;
  int c = 0;
  int n = 0;
  std::vector<std::complex<double>> eigenvalues;
  double eigenresidual = 0.0;
  double eigencondition = 0.0;
  double skewness = 0.0;
  double max_imag = 0.0;
  std::vector<ObservableError> errors;
  std::optional<double> first_exit_time;
  StageTimings timings;
};

inline nlohmann::json summary_to_json(const RunSummary &s) {
  using nlohmann::json;
  json doc;
  doc["name"] = s.name;
  doc["m"] = s.m;
  doc["c"] = s.c;
  doc["n"] = s.n;
  json ev = json::array();
  for (const auto &l : s.eigenvalues)
    ev.push_back({l.real(), l.imag()});
  doc["eigenvalues"] = ev;
  doc["eigenresidual"] = s.eigenresidual;
  doc["eigencondition"] = s.eigencondition;
  doc["skewness"] = s.skewness;
  doc["max_imag"] = s.max_imag;
  json errs = json::object();
  for (const auto &e : s.errors)
    errs[e.name] = {{"max", e.max}, {"rms", e.rms}};
  doc["errors"] = errs;
  doc["first_exit_time"] = s.first_exit_time ? json(*s.first_exit_time) : json(nullptr);
  doc["timings"] = {{"assembly_s", s.timings.assembly},
                    {"eigendecomposition_s", s.timings.eigendecomposition},
                    {"propagation_s", s.timings.propagation},
                    {"reference_s", s.timings.reference},
                    {"total_s", s.timings.total}};
  return doc;
}

/// Roundoff allowance before a unit-box coordinate counts as outside.
inline constexpr double kBoxExitSlack = 1e-9;

struct SolveOptions {
  bool reference = false;
  double rk_step = 1e-4;
  std::filesystem::path out_dir = "out";
};

struct SolveResult {
  Trajectory trajectory;                      // user observables, original coordinates
  std::optional<Eigen::MatrixXd> ref_values;  // observables along the RK4 solution
  RunSummary summary;
};

/// Observables evaluated along an RK4 trajectory of the unscaled system.
inline Eigen::MatrixXd reference_observables(const SystemSpec &spec,
                                             const ReferenceTrajectory &ref) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(spec.observables.size()), ref.states.cols());
  for (Eigen::Index k = 0; k < ref.states.cols(); ++k) {
    const Eigen::VectorXd x = ref.states.col(k);
    for (std::size_t i = 0; i < spec.observables.size(); ++i)
      out(static_cast<Eigen::Index>(i), k) =
          evaluate(spec.observables[i].poly, std::span<const double>(x.data(), x.size()));
  }
  return out;
}

inline ReferenceTrajectory reference_solution(const SystemSpec &spec, double rk_step) {
  const auto times = linspace(0.0, spec.t_final, spec.num_steps);
  return rk4_integrate(spec.vf, spec.initial_state, times, rk_step);
}

/// Full Koopman pipeline for one spec. `reference` supplies RK4 ground truth
/// for the error columns; it is computed here when requested and not given.
inline SolveResult solve_system(const SystemSpec &spec, const SolveOptions &opts,
                                const ReferenceTrajectory *reference = nullptr) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };
  const auto t_start = clock::now();
  const int m = spec.dimension();
  const auto times = linspace(0.0, spec.t_final, spec.num_steps);

  // Work in y = (x - center) ./ half_width on [-1,1]^m.
  const VectorField vf_unit =
      rescale_to_unit_box(spec.vf, spec.domain_center, spec.domain_half_width);
  ObservableSet obs_unit;
  for (const auto &g : spec.observables)
    obs_unit.push_back(
        {g.name, affine_substitute(g.poly, spec.domain_center, spec.domain_half_width)});
  // Internal unit-box coordinates, used to detect when the solution leaves the box.
  const bool track_box = spec.order >= 1;
  if (track_box)
    for (int j = 0; j < m; ++j)
      obs_unit.push_back({"__y" + std::to_string(j), Polynomial::variable(m, j)});

  BasisSet basis = make_basis(spec.order, m);
  Eigen::MatrixXd K = assemble_koopman(basis, vf_unit);
  Eigen::MatrixXd H = observable_matrix(basis, obs_unit);
  const auto t_assembled = clock::now();

  Eigendecomposition eig = eigendecompose(K);
  Eigen::MatrixXcd modes = H.cast<std::complex<double>>() * eig.vectors;
  const double skew = skewness_diagnostic(K);
  KoopmanModel model{std::move(basis), std::move(K), std::move(H), std::move(eig),
                     std::move(modes), skew};
  const auto t_decomposed = clock::now();

  std::vector<double> y0(m);
  for (int j = 0; j < m; ++j)
    y0[j] = (spec.initial_state[j] - spec.domain_center[j]) / spec.domain_half_width[j];
  const Eigen::VectorXd h0 = evaluate_basis(model.basis, y0);
  const Eigen::VectorXcd phi0 = initial_eigenfunctions(model.eig.inverse, h0);
  Trajectory full = propagate(model, phi0, times);
  const auto t_propagated = clock::now();

  const auto g = static_cast<Eigen::Index>(spec.observables.size());
  SolveResult result;
  result.trajectory.times = full.times;
  result.trajectory.values = full.values.topRows(g);
  result.trajectory.max_imag = full.max_imag;

  RunSummary &s = result.summary;
  s.name = spec.name;
  s.m = m;
  s.c = spec.order;
  s.n = model.basis.size();
  s.eigenvalues.assign(model.eig.values.data(), model.eig.values.data() + model.eig.values.size());
  s.eigenresidual = model.eig.residual;
  s.eigencondition = model.eig.condition;
  s.skewness = model.skewness;
  s.max_imag = full.max_imag;
  if (track_box) {
    for (std::size_t k = 0; k < times.size() && !s.first_exit_time; ++k)
      for (int j = 0; j < m; ++j)
        if (std::abs(full.values(g + j, static_cast<Eigen::Index>(k))) > 1.0 + kBoxExitSlack) {
          s.first_exit_time = times[k];
          break;
        }
  }

  auto t_ref_done = t_propagated;
  if (opts.reference || reference) {
    std::optional<ReferenceTrajectory> own;
    if (!reference) {
      own = reference_solution(spec, opts.rk_step);
      reference = &*own;
    }
    result.ref_values = reference_observables(spec, *reference);
    t_ref_done = clock::now();
    const Eigen::MatrixXd err = (result.trajectory.values - *result.ref_values).cwiseAbs();
    for (Eigen::Index i = 0; i < g; ++i) {
      ObservableError e;
      e.name = spec.observables[static_cast<std::size_t>(i)].name;
      e.max = err.row(i).maxCoeff();
      e.rms = std::sqrt(err.row(i).squaredNorm() / static_cast<double>(err.cols()));
      s.errors.push_back(e);
    }
  }

  s.timings.assembly = seconds(t_start, t_assembled);
  s.timings.eigendecomposition = seconds(t_assembled, t_decomposed);
  s.timings.propagation = seconds(t_decomposed, t_propagated);
  s.timings.reference = seconds(t_propagated, t_ref_done);
  s.timings.total = seconds(t_start, clock::now());
  return result;
}

/// Header: t,<obs...>[,<obs>_ref...,<obs>_err...]
inline void write_trajectory_csv(std::ostream &os, const SystemSpec &spec,
                                 const SolveResult &r) {
  os << "t";
  for (const auto &g : spec.observables)
    os << ',' << g.name;
  if (r.ref_values) {
    for (const auto &g : spec.observables)
      os << ',' << g.name << "_ref";
    for (const auto &g : spec.observables)
      os << ',' << g.name << "_err";
  }
  os << '\n';
  const auto &vals = r.trajectory.values;
  for (Eigen::Index k = 0; k < vals.cols(); ++k) {
    os << format_double(r.trajectory.times[static_cast<std::size_t>(k)]);
    for (Eigen::Index i = 0; i < vals.rows(); ++i)
      os << ',' << format_double(vals(i, k));
    if (r.ref_values) {
      for (Eigen::Index i = 0; i < vals.rows(); ++i)
        os << ',' << format_double((*r.ref_values)(i, k));
      for (Eigen::Index i = 0; i < vals.rows(); ++i)
        os << ',' << format_double(std::abs(vals(i, k) - (*r.ref_values)(i, k)));
    }
    os << '\n';
  }
}

inline std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path &path, const std::string &text) {
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out)
    throw IoError("write failed for '" + path.string() + "'");
}

inline std::filesystem::path trajectory_path(const SolveOptions &o, const std::string &name) {
  return o.out_dir / (name + "_trajectory.csv");
}
inline std::filesystem::path summary_path(const SolveOptions &o, const std::string &name) {
  return o.out_dir / (name + "_summary.json");
}
inline std::filesystem::path sweep_path(const SolveOptions &o, const std::string &name) {
  return o.out_dir / (name + "_sweep.csv");
}

/// Maps the library's exception types onto CLI exit codes, writing the
/// message to `err`.
template <typename Fn>
int run_guarded(std::ostream &err, Fn &&fn) {
  try {
    return fn();
  } catch (const SchemaError &e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError &e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError &e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NearDefectiveError &e) {
    err << "near-defective Koopman matrix: " << e.what() << '\n';
    return kExitNearDefective;
  } catch (const NonFiniteError &e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const OverflowError &e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError &e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
}

inline void print_summary(std::ostream &out, const RunSummary &s,
                          const std::filesystem::path &csv) {
  out << s.name << ": m=" << s.m << " c=" << s.c << " n=" << s.n << '\n';
  out << "  eigenresidual  " << s.eigenresidual << '\n';
  out << "  eigencondition " << s.eigencondition << '\n';
  out << "  skewness       " << s.skewness << '\n';
  out << "  max_imag       " << s.max_imag << '\n';
  for (const auto &e : s.errors)
    out << "  " << e.name << " error: max " << e.max << ", rms " << e.rms << '\n';
  out << "  trajectory     " << csv.string() << '\n';
}

inline int run_solve(const std::filesystem::path &config_path, const SolveOptions &opts,
                     std::ostream &out, std::ostream &err) {
  return run_guarded(err, [&] {
    const SystemSpec spec = parse_system_config(read_text_file(config_path));
    if (!(opts.rk_step > 0.0))
      throw ValidationError("--rk-step must be positive");
    const SolveResult r = solve_system(spec, opts);
    if (r.summary.first_exit_time)
      err << "warning: solution leaves the domain box at t = " << *r.summary.first_exit_time
          << "; the projection is only optimal inside the box\n";
    std::ostringstream csv;
    write_trajectory_csv(csv, spec, r);
    write_text_file(trajectory_path(opts, spec.name), csv.str());
    write_text_file(summary_path(opts, spec.name), summary_to_json(r.summary).dump(2) + "\n");
    print_summary(out, r.summary, trajectory_path(opts, spec.name));
    return static_cast<int>(kExitOk);
  });
}

/// "1..7" or "1,3,5".
inline std::vector<int> parse_orders(const std::string &text) {
  auto to_int = [&](std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ValidationError("--orders: cannot parse '" + std::string(s) + "'");
    return v;
  };
  std::vector<int> orders;
  if (auto pos = text.find(".."); pos != std::string::npos) {
    const int a = to_int(std::string_view(text).substr(0, pos));
    const int b = to_int(std::string_view(text).substr(pos + 2));
    if (a > b)
      throw ValidationError("--orders: empty range '" + text + "'");
    for (int c = a; c <= b; ++c)
      orders.push_back(c);
  } else {
    std::string_view rest(text);
    while (true) {
      const auto comma = rest.find(',');
      orders.push_back(to_int(rest.substr(0, comma)));
      if (comma == std::string_view::npos)
        break;
      rest.remove_prefix(comma + 1);
    }
  }
  if (orders.empty())
    throw ValidationError("--orders: no orders given");
  return orders;
}

struct SweepRow {
  int order = 0;
  long n = 0;
  bool ok = false;
  std::string failure;
  std::vector<double> max_err;
  double eigenresidual = 0.0;
  double wall_time = 0.0;
};

/// One solve per order against a single RK4 reference. A failing order is
/// recorded and the sweep continues.
inline std::vector<SweepRow> sweep_orders(const SystemSpec &spec, const std::vector<int> &orders,
                                          const SolveOptions &opts) {
  const ReferenceTrajectory ref = reference_solution(spec, opts.rk_step);
  std::vector<SweepRow> rows;
  for (int c : orders) {
    SweepRow row;
    row.order = c;
    row.n = basis_size(std::max(c, 0), spec.dimension());
    const auto t0 = std::chrono::steady_clock::now();
    try {
      SystemSpec s = spec;
      s.order = c;
      check_basis_range(c, s.dimension());
      validate_observables(s.observables, s.dimension(), c);
      const SolveResult r = solve_system(s, opts, &ref);
      for (const auto &e : r.summary.errors)
        row.max_err.push_back(e.max);
      row.eigenresidual = r.summary.eigenresidual;
      row.ok = true;
    } catch (const std::exception &e) {
      row.failure = e.what();
    }
    row.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_sweep_csv(std::ostream &os, const SystemSpec &spec,
                            const std::vector<SweepRow> &rows) {
  os << "order,n,status";
  for (const auto &g : spec.observables)
    os << ",max_err_" << g.name;
  os << ",eigenresidual,wall_time_s\n";
  for (const auto &r : rows) {
    os << r.order << ',' << r.n << ',' << (r.ok ? "ok" : "failed");
    for (std::size_t i = 0; i < spec.observables.size(); ++i)
      os << ',' << (r.ok ? format_double(r.max_err[i]) : std::string());
    os << ',' << (r.ok ? format_double(r.eigenresidual) : std::string()) << ','
       << format_double(r.wall_time) << '\n';
  }
}

inline void print_sweep_table(std::ostream &os, const SystemSpec &spec,
                              const std::vector<SweepRow> &rows) {
  os << std::setw(6) << "order" << std::setw(8) << "n";
  for (const auto &g : spec.observables)
    os << std::setw(16) << ("max_err_" + g.name);
  os << std::setw(16) << "eigenresidual" << std::setw(12) << "time[s]" << '\n';
  for (const auto &r : rows) {
    os << std::setw(6) << r.order << std::setw(8) << r.n;
    if (!r.ok) {
      os << "  failed: " << r.failure << '\n';
      continue;
    }
    os << std::scientific << std::setprecision(4);
    for (double e : r.max_err)
      os << std::setw(16) << e;
    os << std::setw(16) << r.eigenresidual << std::setw(12) << r.wall_time << '\n';
    os << std::defaultfloat << std::setprecision(6);
  }
}

inline int run_sweep(const std::filesystem::path &config_path, const std::vector<int> &orders,
                     const SolveOptions &opts, std::ostream &out, std::ostream &err) {
  return run_guarded(err, [&] {
    const SystemSpec spec = parse_system_config(read_text_file(config_path));
    if (orders.empty())
      throw ValidationError("--orders: no orders given");
    if (!(opts.rk_step > 0.0))
      throw ValidationError("--rk-step must be positive");
    const auto rows = sweep_orders(spec, orders, opts);
    std::ostringstream csv;
    write_sweep_csv(csv, spec, rows);
    write_text_file(sweep_path(opts, spec.name), csv.str());
    print_sweep_table(out, spec, rows);
    const bool any_ok = std::any_of(rows.begin(), rows.end(), [](const auto &r) { return r.ok; });
    if (!any_ok) {
      err << "every order failed\n";
      return static_cast<int>(kExitNumeric);
    }
    return static_cast<int>(kExitOk);
  });
}

} // namespace koopgal

#endif // KOOPGAL_APP_HPP
