// SPDX-License-Identifier: Apache-2.0
//
// Batch front-end: subcommands geometry, spectrum1d, transverse, disc, fem,
// trial and verify. Each writes CSV files into the output directory and a
// short summary to the given stream; verify also writes summary.txt.
// Requires CLI11.hpp on the include path.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "robin/asymptotics.hpp"
#include "robin/comparison_1d.hpp"
#include "robin/disc_oracle.hpp"
#include "robin/geometry.hpp"
#include "robin/io.hpp"
#include "robin/robin_fem.hpp"
#include "robin/transverse.hpp"

namespace robin::cli {

struct RunConfig {
  std::string command = "verify";
  std::string curve = "ellipse:1.5,1";
  std::vector<double> beta_list;
  int n_modes = 4;
  // fem settings
  int order = 2;
  double target_h = 0.05;
  double first_layer = 0.2;  // first layer thickness times beta
  double ratio = 1.4;
  int layers = 0;
  bool mesh_dump = false;
  // verification toggles
  bool sandwich = true, two_term = true, trial = true, transverse = true, disc = true;
  std::string output_dir = "robin_out";
  int jobs = 1;
  int samples = 512;  // arc-length samples of the curve
  // subcommand-specific
  double radius_R = 1.0;
  double beta = 40.0;
  int levels = 5;
  int grid = 256;
  std::vector<double> a_list;
  double gamma_lowstar = 0.0, gamma_star = 0.0, gamma_plus = 0.0;  // transverse without a curve
  int windows = 1;
};

/// "circle:R", "ellipse:a,b" or "fourier:XC;XS;YC;YS" with comma-separated
/// coefficient lists (constant term first; sine lists start at k = 0 too).
inline geometry::ParametricCurve parse_curve(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("curve spec must look like kind:params");
  const std::string kind = spec.substr(0, colon);
  auto numbers = [](const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw UsageError("bad number '" + item + "' in curve spec");
      }
    }
    return out;
  };
  const std::string rest = spec.substr(colon + 1);
  if (kind == "circle") {
    const auto p = numbers(rest);
    if (p.size() != 1) throw UsageError("circle takes one radius");
    return geometry::ParametricCurve::circle(p[0]);
  }
  if (kind == "ellipse") {
    const auto p = numbers(rest);
    if (p.size() != 2) throw UsageError("ellipse takes two semi-axes");
    return geometry::ParametricCurve::ellipse(p[0], p[1]);
  }
  if (kind == "fourier") {
    std::vector<std::vector<double>> parts;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ';')) parts.push_back(numbers(item));
    if (parts.size() != 4) throw UsageError("fourier takes XC;XS;YC;YS");
    return geometry::ParametricCurve::fourier({parts[0], parts[1]}, {parts[2], parts[3]});
  }
  throw UsageError("unknown curve kind '" + kind + "'");
}

inline void validate(const RunConfig& c) {
  static const std::vector<std::string> commands{"geometry", "spectrum1d", "transverse", "disc",
                                                 "fem",      "trial",      "verify"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end())
    throw UsageError("unknown command '" + c.command + "'");
  const bool needs_betas = c.command == "verify" || c.command == "fem" || c.command == "trial" ||
                           c.command == "transverse";
  if (needs_betas && c.beta_list.empty()) throw UsageError("beta list is empty");
  for (std::size_t i = 0; i < c.beta_list.size(); ++i) {
    if (!(c.beta_list[i] > 0.0)) throw UsageError("beta values must be positive");
    if (i > 0 && !(c.beta_list[i] > c.beta_list[i - 1])) throw UsageError("beta values must be ascending");
  }
  if (c.n_modes < 1 || c.n_modes > 12) throw UsageError("n_modes must lie in [1, 12]");
  if (c.order != 1 && c.order != 2) throw UsageError("order must be 1 or 2");
  if (!(c.target_h > 0.0) || !(c.first_layer > 0.0) || !(c.ratio >= 1.0) || c.layers < 0)
    throw UsageError("invalid fem settings");
  if (c.jobs < 1) throw UsageError("jobs must be positive");
  if (c.samples < 64) throw UsageError("samples must be at least 64");
  if (c.grid < 64 || c.grid > comparison_1d::kMaxGridSize) throw UsageError("grid must lie in [64, 4096]");
  if (c.command == "verify" && c.two_term && c.beta_list.size() < 3)
    throw UsageError("the two-term fit needs at least three beta values");
  if (c.command != "disc" && !c.curve.empty()) {
    try {
      (void)parse_curve(c.curve);
    } catch (const DegenerateParametrizationError& e) {
      throw UsageError(e.what());
    }
  }
}

namespace detail {

struct Domain {
  geometry::ArcLengthCurve alc;
  geometry::CurvatureProfile cp;
  double a1;
};

inline Domain load_domain(const RunConfig& c) {
  auto alc = geometry::reparametrize_arclength(parse_curve(c.curve), static_cast<std::size_t>(c.samples));
  auto cp = geometry::signed_curvature(alc);
  const double a1 = geometry::tubular_halfwidth(alc, cp);
  return {std::move(alc), std::move(cp), a1};
}

inline fem::FemOptions fem_options(const RunConfig& c, double a1) {
  fem::FemOptions o;
  o.order = c.order;
  o.mesh.target_h = c.target_h;
  o.mesh.first_layer_factor = c.first_layer;
  o.mesh.ratio = c.ratio;
  o.mesh.layers = c.layers;
  o.mesh.a1 = a1;
  return o;
}

/// Collects checked statements for the human-readable summary.
struct Summary {
  struct Check {
    std::string name, status, detail;
  };
  std::vector<Check> checks;
  void add(std::string name, std::string status, std::string detail) {
    checks.push_back({std::move(name), std::move(status), std::move(detail)});
  }
  void add(std::string name, bool ok, std::string detail) {
    add(std::move(name), std::string(ok ? "PASS" : "FAIL"), std::move(detail));
  }
  [[nodiscard]] bool failed() const {
    return std::any_of(checks.begin(), checks.end(), [](const Check& k) { return k.status == "FAIL"; });
  }
  void print(std::ostream& out) const {
    for (const auto& k : checks) out << k.status << "  " << k.name << "  " << k.detail << "\n";
  }
  void write(const std::filesystem::path& path, const RunConfig& c) const {
    std::ofstream f(path);
    f << "{\n  \"curve\": \"" << c.curve << "\",\n  \"betas\": [";
    for (std::size_t i = 0; i < c.beta_list.size(); ++i) f << (i ? ", " : "") << io::format_number(c.beta_list[i]);
    f << "],\n  \"n_modes\": " << c.n_modes << ",\n  \"checks\": [\n";
    for (std::size_t i = 0; i < checks.size(); ++i)
      f << "    {\"name\": \"" << checks[i].name << "\", \"status\": \"" << checks[i].status
        << "\", \"detail\": \"" << checks[i].detail << "\"}" << (i + 1 < checks.size() ? "," : "") << "\n";
    f << "  ]\n}\n";
  }
};

inline std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

inline void run_geometry(const RunConfig& c, const Domain& d, const std::filesystem::path& dir, Summary& sum) {
  io::CsvWriter csv(dir / "geometry.csv", {"s", "x", "y", "gamma", "gamma_d1", "gamma_d2"});
  double total = 0.0, speed_dev = 0.0;
  const std::size_t n = d.alc.size();
  for (std::size_t i = 0; i < n; ++i) {
    csv.row({d.cp.s_grid[i], d.alc.gamma_pos[i].x(), d.alc.gamma_pos[i].y(), d.cp.gamma[i], d.cp.gamma_d1[i],
             d.cp.gamma_d2[i]});
    total += d.cp.gamma[i] * d.alc.length_L / static_cast<double>(n);
    speed_dev = std::max(speed_dev, std::abs(d.alc.gamma_d1[i].norm() - 1.0));
  }
  sum.add("total curvature = 2 pi", std::abs(total - 2.0 * std::numbers::pi) <= 1e-6,
          "integral=" + num(total) + " L=" + num(d.alc.length_L) + " gamma*=" + num(d.cp.gamma_star) +
              " gamma_*=" + num(d.cp.gamma_lowstar) + " a1=" + num(d.a1));
  sum.add("unit speed", speed_dev <= 1e-8, "max |Gamma'|-1 = " + num(speed_dev));
  (void)c;
}

inline comparison_1d::Spectrum1D run_spectrum1d(const RunConfig& c, const Domain& d,
                                                const std::filesystem::path& dir, Summary& sum) {
  const int modes = std::max(c.n_modes, 6);
  // peaked curvature needs more plane waves; double until resolved
  int grid = c.grid;
  comparison_1d::Spectrum1D spec;
  for (;;) {
    try {
      spec = comparison_1d::solve_periodic_spectrum(comparison_1d::build_comparison_operator(d.cp), modes, grid);
      break;
    } catch (const ResolutionError&) {
      if (2 * grid > comparison_1d::kMaxGridSize) throw;
      grid *= 2;
    }
  }
  io::CsvWriter csv(dir / "spectrum1d.csv", {"j", "mu"});
  for (int j = 0; j < modes; ++j) csv.row({static_cast<long>(j + 1), spec.eigenvalues[static_cast<std::size_t>(j)]});

  std::vector<double> a_list = c.a_list;
  if (a_list.empty()) a_list = {0.02, 0.01, 0.005};
  const double cap = 0.5 / d.cp.gamma_plus;
  a_list.erase(std::remove_if(a_list.begin(), a_list.end(), [&](double a) { return !(a < cap); }), a_list.end());
  if (a_list.size() >= 2) {
    const auto t = comparison_1d::verify_mu_convergence(d.cp, modes, a_list, grid);
    io::CsvWriter mc(dir / "mu_convergence.csv", {"j", "a", "err_D", "err_N"});
    for (const auto& r : t.rows) mc.row({static_cast<long>(r.j), r.a, r.err_D, r.err_N});
    // errors are linear in a: each ratio should match a_{k+1}/a_k within 20%
    double lo = 1e300, hi = 0.0;
    for (const auto* ratios : {&t.ratio_D, &t.ratio_N})
      for (std::size_t k = 0; k < ratios->size(); ++k)
        for (double r : (*ratios)[k]) {
          const double rel = r / (a_list[k + 1] / a_list[k]);
          lo = std::min(lo, rel), hi = std::max(hi, rel);
        }
    sum.add("|mu_j(a) - mu_j| <= C a j^2, linear in a", lo >= 0.8 && hi <= 1.2,
            "C=" + num(t.fitted_constant) + " ratios in [" + num(lo) + ", " + num(hi) + "]");
  }
  return spec;
}

inline void run_transverse(const RunConfig& c, const std::optional<Domain>& d, const std::filesystem::path& dir,
                           Summary& sum) {
  const double gl = d ? d->cp.gamma_lowstar : c.gamma_lowstar;
  const double gs = d ? d->cp.gamma_star : c.gamma_star;
  const double gp = d ? d->cp.gamma_plus : c.gamma_plus;
  std::vector<double> a_list = c.a_list;
  if (a_list.empty()) a_list = {0.1, 0.2, 0.3};
  io::CsvWriter csv(dir / "transverse.csv", {"a", "beta", "kind", "zeta", "lower", "upper", "admissible"});
  bool ok = true;
  int checked = 0;
  for (double a : a_list)
    for (double beta : c.beta_list) {
      for (auto kind : {transverse::Kind::dirichlet, transverse::Kind::neumann}) {
        const bool dir_kind = kind == transverse::Kind::dirichlet;
        const transverse::TransverseParams p{a, beta, dir_kind ? gl : gs, gp};
        const bool adm = dir_kind ? transverse::dirichlet_admissible(p) : transverse::neumann_admissible(p);
        if (!adm) {
          csv.row({a, beta, std::string(dir_kind ? "D" : "N"), 0.0, 0.0, 0.0, 0L});
          continue;
        }
        const auto m = dir_kind ? transverse::solve_dirichlet_mode(p) : transverse::solve_neumann_mode(p);
        const double slack = 1e-12 * std::abs(m.zeta);
        ok = ok && m.zeta >= m.lower - slack && m.zeta <= m.upper + slack;
        ++checked;
        csv.row({a, beta, std::string(dir_kind ? "D" : "N"), m.zeta, m.lower, m.upper, 1L});
      }
    }
  sum.add("transverse sandwiches", checked == 0 ? std::string("INCONCLUSIVE") : std::string(ok ? "PASS" : "FAIL"),
          std::to_string(checked) + " admissible (a, beta, kind) cases");
}

inline void run_disc(const RunConfig& c, double R, const std::vector<double>& betas, const std::filesystem::path& dir,
                     Summary& sum) {
  io::CsvWriter csv(dir / "disc.csv", {"beta", "m", "X", "lambda", "lambda_asymptotic_2term", "defect"});
  std::vector<double> worst;
  for (double beta : betas) {
    double w = 0.0;
    for (const auto& r : disc_oracle::disc_table({R, beta, c.levels})) {
      csv.row({beta, static_cast<long>(r.m), r.X, r.lambda, r.lambda_asymptotic_2term, r.defect});
      w = std::max(w, std::abs(r.defect) * beta);
    }
    worst.push_back(w);
  }
  if (betas.size() >= 2) {
    bool stable = true;
    for (std::size_t k = 0; k + 1 < worst.size(); ++k)
      stable = stable && worst[k + 1] <= 2.0 * worst[k] && worst[k + 1] >= 0.5 * worst[k];
    sum.add("disc defect <= c/beta, c stable", stable, "c=" + num(worst.back()));
  }
}

inline std::vector<EigenResult> run_fem(const RunConfig& c, const Domain& d, const std::filesystem::path& dir,
                                        Summary& sum) {
  const auto opt = fem_options(c, d.a1);
  if (c.mesh_dump) {
    const auto mesh = fem::mesh_domain(d.alc, c.beta_list.front(), opt.mesh);
    io::CsvWriter nodes(dir / "mesh_nodes.csv", {"id", "x", "y"});
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
      nodes.row({static_cast<long>(i), mesh.nodes[i].x(), mesh.nodes[i].y()});
    io::CsvWriter tris(dir / "mesh_triangles.csv", {"id", "a", "b", "c"});
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i)
      tris.row({static_cast<long>(i), static_cast<long>(mesh.triangles[i][0]), static_cast<long>(mesh.triangles[i][1]),
                static_cast<long>(mesh.triangles[i][2])});
  }
  const auto results = asymptotics::fem_sweep(d.alc, d.cp.gamma_star, c.beta_list, c.n_modes, opt, c.jobs);
  io::CsvWriter csv(dir / "fem_spectrum.csv", {"beta", "n", "lambda_n", "err_est"});
  bool corridor = true;
  for (const auto& r : results) {
    for (std::size_t j = 0; j < r.eigenvalues.size(); ++j)
      csv.row({r.beta, static_cast<long>(j + 1), r.eigenvalues[j], r.error_estimate[j]});
    corridor = corridor && r.eigenvalues[0] >= -std::pow(r.beta + 0.5 * d.cp.gamma_star, 2) - 1.0;
  }
  sum.add("lambda_1 >= -(beta + gamma*/2)^2 - 1", corridor, results.empty() ? "" : results.back().mesh_id);
  return results;
}

inline std::vector<double> run_trial(const RunConfig& c, const Domain& d, const std::filesystem::path& dir,
                                     Summary& sum, const std::vector<EigenResult>* fem_results) {
  io::CsvWriter csv(dir / "trial.csv", {"beta", "j", "epsilon", "a", "quotient", "two_term_upper", "C"});
  std::vector<double> first, C;
  bool above = true;
  for (std::size_t b = 0; b < c.beta_list.size(); ++b) {
    const double beta = c.beta_list[b];
    const auto t = asymptotics::default_trial_setup(d.cp, d.a1, beta);
    const auto fam = asymptotics::trial_orthogonal_family(d.cp, t, c.windows);
    for (std::size_t j = 0; j < fam.quotients.size(); ++j) {
      const double q = fam.quotients[j].quotient;
      const double cj = (q + t.alpha * t.alpha) / std::pow(beta, 2.0 / 3.0);
      csv.row({beta, static_cast<long>(j + 1), t.epsilon, t.a, q, asymptotics::two_term_upper(beta, d.cp.gamma_star), cj});
      if (j == 0) {
        first.push_back(q);
        C.push_back(cj);
      }
    }
    if (fem_results) {
      const auto& r = (*fem_results)[b];
      above = above && first.back() >= r.eigenvalues[0] - r.error_estimate[0];
    }
  }
  const double cmax = *std::max_element(C.begin(), C.end()), cmin = *std::min_element(C.begin(), C.end());
  sum.add("trial quotient <= -(beta+gamma*/2)^2 + C beta^{2/3}, C stable", cmin > 0.0 && cmax <= 2.0 * cmin,
          "C in [" + num(cmin) + ", " + num(cmax) + "]");
  if (fem_results) sum.add("trial quotient >= FEM lambda_1", above, "");
  return first;
}

}  // namespace detail

/// Runs one validated configuration. Returns 0 when every check passed
/// (INCONCLUSIVE does not fail), 1 when some check failed, 3 on a module error.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  validate(c);
  const std::filesystem::path dir = c.output_dir;
  std::filesystem::create_directories(dir);
  detail::Summary sum;
  try {
    if (c.command == "disc") {
      std::vector<double> betas = c.beta_list.empty() ? std::vector<double>{c.beta} : c.beta_list;
      detail::run_disc(c, c.radius_R, betas, dir, sum);
      for (const auto& r : disc_oracle::disc_table({c.radius_R, betas.back(), c.levels}))
        out << "m=" << r.m << " lambda=" << io::format_number(r.lambda) << " defect=" << io::format_number(r.defect)
            << "\n";
    } else if (c.command == "transverse" && c.curve.empty()) {
      detail::run_transverse(c, std::nullopt, dir, sum);
    } else {
      const auto d = detail::load_domain(c);
      if (c.command == "geometry") {
        detail::run_geometry(c, d, dir, sum);
      } else if (c.command == "spectrum1d") {
        detail::run_spectrum1d(c, d, dir, sum);
      } else if (c.command == "transverse") {
        detail::run_transverse(c, d, dir, sum);
      } else if (c.command == "fem") {
        detail::run_fem(c, d, dir, sum);
      } else if (c.command == "trial") {
        detail::run_trial(c, d, dir, sum, nullptr);
      } else {  // verify
        detail::run_geometry(c, d, dir, sum);
        const auto spec = detail::run_spectrum1d(c, d, dir, sum);
        if (c.transverse) detail::run_transverse(c, d, dir, sum);
        const bool is_disc = std::abs(d.cp.gamma_star - d.cp.gamma_lowstar) < 1e-9 * d.cp.gamma_star;
        if (c.disc && is_disc) detail::run_disc(c, 1.0 / d.cp.gamma_star, c.beta_list, dir, sum);
        const auto results = detail::run_fem(c, d, dir, sum);
        std::vector<double> trial;
        if (c.trial) trial = detail::run_trial(c, d, dir, sum, &results);
        const auto rep = asymptotics::verify_sandwich(results, c.n_modes, d.cp, spec);
        {
          io::CsvWriter csv(dir / "report.csv", {"n", "beta", "lambda", "err_est", "lower", "upper", "two_term",
                                                 "trial", "residual_lower", "residual_upper"});
          for (const auto& row : rep.rows) {
            const auto b = static_cast<std::size_t>(
                std::find(c.beta_list.begin(), c.beta_list.end(), row.beta) - c.beta_list.begin());
            const io::Cell tq = row.n == 1 && b < trial.size() ? io::Cell{trial[b]} : io::Cell{std::string()};
            csv.row({static_cast<long>(row.n), row.beta, row.lambda, row.err_est, row.lower, row.upper, row.two_term,
                     tq, row.residual_lower, row.residual_upper});
          }
        }
        if (c.sandwich) {
          const std::string detail_str = "C_lower=" + detail::num(rep.fit_lower) + " C_upper=" +
                                         detail::num(rep.fit_upper) +
                                         (rep.counts_ok ? "" : " (missing negative eigenvalues)");
          sum.add("three-term sandwich", rep.pass() ? (rep.inconclusive ? "INCONCLUSIVE" : "PASS") : "FAIL", detail_str);
        }
        if (c.two_term) {
          std::vector<double> l1;
          for (const auto& r : results) l1.push_back(r.eigenvalues[0]);
          const auto fit = asymptotics::two_term_fit(c.beta_list, l1);
          sum.add("two-term coefficient c = gamma*", std::abs(fit.c_estimate / d.cp.gamma_star - 1.0) <= 0.05,
                  "c=" + detail::num(fit.c_estimate) + " gamma*=" + detail::num(d.cp.gamma_star) +
                      " drift=" + detail::num(fit.drift));
        }
      }
    }
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    err << "error [" << e.module() << "]: " << e.what() << "\n";
    sum.print(out);
    if (c.command == "verify") sum.write(dir / "summary.txt", c);
    return 3;
  }
  sum.print(out);
  if (c.command == "verify") sum.write(dir / "summary.txt", c);
  return sum.failed() ? 1 : 0;
}

/// Command-line entry point. A positional argument names an INI-style
/// configuration file (`[verify]` section with key=value lines).
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Negative Robin Laplacian eigenvalues: computation and large-beta checks"};
  app.set_config("config", "", "key=value run configuration");
  RunConfig c;
  app.add_option("--jobs", c.jobs, "parallel beta solves")->envname("ROBIN_ASYM_JOBS");
  app.add_option("--out", c.output_dir, "output directory");
  app.require_subcommand(1);

  auto betas = [](CLI::App* s, RunConfig& rc) { s->add_option("--betas", rc.beta_list, "ascending beta list")->delimiter(','); };
  auto curve = [](CLI::App* s, RunConfig& rc) {
    s->add_option("--curve", rc.curve, "circle:R | ellipse:a,b | fourier:XC;XS;YC;YS");
    s->add_option("--samples", rc.samples, "arc-length samples");
  };
  auto femopts = [](CLI::App* s, RunConfig& rc) {
    s->add_option("--n", rc.n_modes, "eigenvalues per beta");
    s->add_option("--order", rc.order, "element order (1 or 2)");
    s->add_option("--target-h", rc.target_h, "mesh width");
    s->add_option("--first-layer", rc.first_layer, "first layer thickness times beta");
    s->add_option("--ratio", rc.ratio, "layer growth ratio");
    s->add_option("--layers", rc.layers, "graded layers inside the boundary layer (0: from ratio)");
  };

  auto* geo = app.add_subcommand("geometry", "arc length, curvature and tubular width");
  curve(geo, c);
  auto* s1d = app.add_subcommand("spectrum1d", "comparison operator and bracketing pair");
  curve(s1d, c);
  s1d->add_option("--n", c.n_modes, "eigenvalues");
  s1d->add_option("--grid", c.grid, "plane waves");
  s1d->add_option("--a", c.a_list, "strip widths")->delimiter(',');
  auto* tr = app.add_subcommand("transverse", "transverse modes and their sandwiches");
  curve(tr, c);
  betas(tr, c);
  tr->add_option("--a", c.a_list, "strip widths")->delimiter(',');
  tr->add_option("--gamma-low", c.gamma_lowstar, "gamma_* when no curve is given");
  tr->add_option("--gamma-high", c.gamma_star, "gamma^* when no curve is given");
  tr->add_option("--gamma-plus", c.gamma_plus, "gamma_+ when no curve is given");
  auto* dsc = app.add_subcommand("disc", "Bessel oracle for the disc");
  dsc->add_option("--R", c.radius_R, "radius");
  dsc->add_option("--beta", c.beta, "beta");
  betas(dsc, c);
  dsc->add_option("--levels", c.levels, "eigenvalues");
  auto* fm = app.add_subcommand("fem", "finite-element spectra");
  curve(fm, c);
  betas(fm, c);
  femopts(fm, c);
  fm->add_flag("--mesh-dump", c.mesh_dump, "write the mesh for the first beta");
  auto* tri = app.add_subcommand("trial", "trial-function Rayleigh quotients");
  curve(tri, c);
  betas(tri, c);
  tri->add_option("--windows", c.windows, "shifted windows");
  auto* ver = app.add_subcommand("verify", "full pipeline and report");
  curve(ver, c);
  betas(ver, c);
  femopts(ver, c);
  ver->add_flag("!--no-sandwich", c.sandwich, "skip the three-term check");
  ver->add_flag("!--no-two-term", c.two_term, "skip the two-term fit");
  ver->add_flag("!--no-trial", c.trial, "skip trial functions");
  ver->add_flag("!--no-transverse", c.transverse, "skip transverse modes");
  ver->add_flag("!--no-disc", c.disc, "skip the disc oracle");
  for (auto* s : {geo, s1d, tr, dsc, fm, tri, ver}) s->configurable();

  bool curve_given = false;
  try {
    app.parse(argc, argv);
    for (auto* s : {geo, s1d, tr, fm, tri, ver})
      if (s->parsed()) {
        c.command = s->get_name();
        curve_given = s->count("--curve") > 0;
      }
    if (dsc->parsed()) c.command = "disc";
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (c.command == "transverse" && !curve_given && (c.gamma_star > 0.0 || c.gamma_plus > 0.0)) c.curve.clear();
  try {
    return run(c, out, err);
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return 2;
  }
}

}  // namespace robin::cli
