#ifndef LATLAB_LAB_HPP
#define LATLAB_LAB_HPP

// Experiment configs, runners, CSV/JSON reports and report merging for the
// latlab command-line tool.

#include "latlab/extrapolation.hpp"
#include "latlab/sobolev_grid.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace latlab::lab {

using json = nlohmann::json;

/// Invalid configuration or command line; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed report file; names the file and line.
class MergeError : public Error {
 public:
  MergeError(const std::string& file, long line, const std::string& why)
      : Error(file + ":" + std::to_string(line) + ": " + why), file(file), line(line) {}
  std::string file;
  long line;
};

enum class Experiment {
  sup_construct,
  sup_construct_dual,
  normality_scan,
  mollifier_rate,
  boundary_chart_audit,
  pushin_audit,
  prop35_demo,
  extrapolation_demo,
  renorm_audit,
};

inline const std::vector<std::pair<Experiment, std::string>>& experiment_names() {
  static const std::vector<std::pair<Experiment, std::string>> names{
      {Experiment::sup_construct, "sup-construct"},
      {Experiment::sup_construct_dual, "sup-construct-dual"},
      {Experiment::normality_scan, "normality-scan"},
      {Experiment::mollifier_rate, "mollifier-rate"},
      {Experiment::boundary_chart_audit, "boundary-chart-audit"},
      {Experiment::pushin_audit, "pushin-audit"},
      {Experiment::prop35_demo, "prop35-demo"},
      {Experiment::extrapolation_demo, "extrapolation-demo"},
      {Experiment::renorm_audit, "renorm-audit"},
  };
  return names;
}

inline const std::string& to_string(Experiment e) {
  for (const auto& [k, name] : experiment_names())
    if (k == e) return name;
  throw Error("unknown experiment");
}

inline Experiment experiment_from_string(const std::string& s) {
  for (const auto& [k, name] : experiment_names())
    if (name == s) return k;
  throw UsageError("unknown experiment '" + s + "'");
}

struct GeneratorConfig {
  std::string kind = "neumann_laplacian";  // or "multiplication"
  int n = 16;
  double h = 1.0 / 15.0;
  Vector m;
  std::optional<double> lambda;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::sup_construct;
  DomainKind domain_kind = DomainKind::interval;
  int n = 64;
  int k = 1;
  double p = 2.0;
  double tol = 1e-6;
  std::string family = "mollifier";  // scheme family: mollifier | resolvent
  long n_min = 2;
  std::optional<long> n_max;  // family default when unset
  int samples = 10;
  std::uint64_t seed = 0;
  std::vector<double> eps{0.25, 0.125, 0.0625};
  int points_per_eps = 20;
  std::vector<double> deltas{0.04, 0.02, 0.01};
  std::vector<long> indices{2, 4, 8};
  long audit_samples = 10000;
  bool with_boundary = false;
  GeneratorConfig generator;
  json source;  // validated input, used for the run id

  GridDomain domain() const {
    switch (domain_kind) {
      case DomainKind::interval: return GridDomain::interval(n);
      case DomainKind::torus: return GridDomain::torus(n);
      case DomainKind::rectangle: return GridDomain::rectangle(n);
    }
    throw Error("unknown domain kind");
  }
};

namespace detail {

inline const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys{"experiment", "seed", "domain", "k", "p", "tol", "samples"};
  return keys;
}

inline std::set<std::string> allowed_keys(Experiment e) {
  std::set<std::string> keys = common_keys();
  switch (e) {
    case Experiment::sup_construct:
    case Experiment::sup_construct_dual: keys.insert("scheme"); break;
    case Experiment::normality_scan: keys.insert({"eps", "points_per_eps"}); break;
    case Experiment::mollifier_rate: keys.insert("deltas"); break;
    case Experiment::boundary_chart_audit: keys.insert("audit_samples"); break;
    case Experiment::pushin_audit: keys.insert({"indices", "with_boundary"}); break;
    case Experiment::prop35_demo: break;
    case Experiment::extrapolation_demo: keys.insert({"generator", "scheme"}); break;
    case Experiment::renorm_audit: break;
  }
  return keys;
}

template <class T>
T field(const json& j, const char* key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("config field '" + path + key + "': wrong type");
  }
}

inline void check(bool ok, const std::string& field_name, const std::string& why) {
  if (!ok) throw UsageError("config field '" + field_name + "': " + why);
}

}  // namespace detail

/// Validates a parsed JSON config. `cli_experiment` must agree with the
/// config's "experiment" field when both are given; `seed_override` replaces
/// the config seed.
inline ExperimentConfig parse_config(const json& j, std::optional<std::string> cli_experiment = std::nullopt,
                                     std::optional<std::uint64_t> seed_override = std::nullopt) {
  using detail::check;
  using detail::field;
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  ExperimentConfig c;
  std::string name;
  if (j.contains("experiment")) {
    name = field<std::string>(j, "experiment", "", "");
    if (cli_experiment && *cli_experiment != name)
      throw UsageError("config field 'experiment': '" + name + "' does not match command '" + *cli_experiment + "'");
  } else if (cli_experiment) {
    name = *cli_experiment;
  } else {
    throw UsageError("no experiment given");
  }
  c.experiment = experiment_from_string(name);
  const auto allowed = detail::allowed_keys(c.experiment);
  for (const auto& [key, value] : j.items())
    check(allowed.count(key) > 0, key, "not a field of experiment " + name);

  if (j.contains("seed")) {
    check(j["seed"].is_number_unsigned() || (j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0),
          "seed", "must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (seed_override) c.seed = *seed_override;

  if (j.contains("domain")) {
    const json& d = j["domain"];
    check(d.is_object(), "domain", "must be an object");
    for (const auto& [key, value] : d.items())
      check(key == "kind" || key == "n", "domain." + key, "unknown field");
    try {
      c.domain_kind = domain_kind_from_string(field<std::string>(d, "kind", "domain.", "interval"));
    } catch (const PreconditionError& e) {
      throw UsageError(std::string("config field 'domain.kind': ") + e.what());
    }
    c.n = field<int>(d, "n", "domain.", c.n);
  }
  check(c.n >= 4, "domain.n", "must be >= 4");
  c.k = field<int>(j, "k", "", c.k);
  check(c.k >= 0, "k", "must be >= 0");
  c.p = field<double>(j, "p", "", c.p);
  check(c.p > 1.0 && std::isfinite(c.p), "p", "must lie in (1, inf)");
  c.tol = field<double>(j, "tol", "", c.tol);
  check(c.tol >= 1e-12 && c.tol <= 1e-2, "tol", "must lie in [1e-12, 1e-2]");
  c.samples = field<int>(j, "samples", "", c.samples);
  check(c.samples >= 1 && c.samples <= 100000, "samples", "must lie in [1, 100000]");

  if (j.contains("scheme")) {
    const json& s = j["scheme"];
    check(s.is_object(), "scheme", "must be an object");
    for (const auto& [key, value] : s.items())
      check(key == "family" || key == "n_min" || key == "n_max", "scheme." + key, "unknown field");
    c.family = field<std::string>(s, "family", "scheme.", c.family);
    check(c.family == "mollifier" || c.family == "resolvent", "scheme.family", "must be mollifier or resolvent");
    c.n_min = field<long>(s, "n_min", "scheme.", c.n_min);
    if (s.contains("n_max")) c.n_max = field<long>(s, "n_max", "scheme.", 0);
    check(c.n_min >= 1, "scheme.n_min", "must be >= 1");
    check(!c.n_max || *c.n_max >= c.n_min, "scheme.n_max", "must be >= scheme.n_min");
  }
  c.eps = field<std::vector<double>>(j, "eps", "", c.eps);
  check(!c.eps.empty(), "eps", "must be a nonempty list");
  for (double e : c.eps) check(e > 0.0 && e <= 1.0, "eps", "entries must lie in (0, 1]");
  c.points_per_eps = field<int>(j, "points_per_eps", "", c.points_per_eps);
  check(c.points_per_eps >= 2, "points_per_eps", "must be >= 2");
  c.deltas = field<std::vector<double>>(j, "deltas", "", c.deltas);
  check(!c.deltas.empty(), "deltas", "must be a nonempty list");
  for (double d : c.deltas) check(d > 0.0, "deltas", "entries must be positive");
  c.indices = field<std::vector<long>>(j, "indices", "", c.indices);
  check(!c.indices.empty(), "indices", "must be a nonempty list");
  for (long i : c.indices) check(i >= 2, "indices", "entries must be >= 2");
  c.audit_samples = field<long>(j, "audit_samples", "", c.audit_samples);
  check(c.audit_samples >= 1, "audit_samples", "must be >= 1");
  c.with_boundary = field<bool>(j, "with_boundary", "", c.with_boundary);

  if (j.contains("generator")) {
    const json& g = j["generator"];
    check(g.is_object(), "generator", "must be an object");
    for (const auto& [key, value] : g.items())
      check(key == "kind" || key == "n" || key == "h" || key == "m" || key == "lambda", "generator." + key,
            "unknown field");
    c.generator.kind = field<std::string>(g, "kind", "generator.", c.generator.kind);
    check(c.generator.kind == "neumann_laplacian" || c.generator.kind == "multiplication", "generator.kind",
          "must be neumann_laplacian or multiplication");
    if (c.generator.kind == "multiplication") {
      const auto m = field<std::vector<double>>(g, "m", "generator.", {});
      check(!m.empty(), "generator.m", "required for a multiplication generator");
      c.generator.m = Eigen::Map<const Vector>(m.data(), static_cast<Eigen::Index>(m.size()));
      c.generator.n = field<int>(g, "n", "generator.", static_cast<int>(m.size()));
      check(c.generator.n == static_cast<int>(m.size()), "generator.n", "must equal the length of m");
    } else {
      check(!g.contains("m"), "generator.m", "only valid for a multiplication generator");
      c.generator.n = field<int>(g, "n", "generator.", c.generator.n);
      check(c.generator.n >= 3, "generator.n", "must be >= 3");
      c.generator.h = field<double>(g, "h", "generator.", 1.0 / (c.generator.n - 1));
      check(c.generator.h > 0.0, "generator.h", "must be positive");
    }
    if (g.contains("lambda")) c.generator.lambda = field<double>(g, "lambda", "generator.", 0.0);
  }
  c.source = j;
  c.source["experiment"] = name;
  c.source["seed"] = c.seed;
  return c;
}

// ---------------------------------------------------------------- reports

struct ReportRow {
  std::string case_name;
  std::string params;
  double measured = 0.0;
  double gap = 0.0;
  bool pass = true;
  Vector witness;  // set on FAIL rows
};

struct RunResult {
  std::string run_id;
  Experiment experiment = Experiment::sup_construct;
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;

  int passed() const {
    int c = 0;
    for (const auto& r : rows) c += r.pass;
    return c;
  }
  int failed() const { return static_cast<int>(rows.size()) - passed(); }
  double worst_gap() const {
    double w = 0.0;
    for (const auto& r : rows) w = std::max(w, r.gap);
    return w;
  }
  bool all_pass() const { return failed() == 0; }
};

inline constexpr const char* kCsvColumns = "run_id,experiment,case,seed,params,measured,gap,status,witness";

/// 64-bit FNV-1a as 16 hex digits.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string run_id(const ExperimentConfig& c) { return fnv1a_hex(c.source.dump()); }

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string fmt_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string serialize_witness(const Vector& w) {
  std::string out;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += fmt_exact(w[i]);
  }
  return out;
}

inline std::string to_csv(const RunResult& r) {
  std::ostringstream out;
  const std::string& exp = to_string(r.experiment);
  out << "# schema=1,experiment=" << exp << ",run_id=" << r.run_id << '\n' << kCsvColumns << '\n';
  for (const auto& row : r.rows) {
    out << r.run_id << ',' << exp << ',' << row.case_name << ',' << r.seed << ',' << row.params << ','
        << fmt(row.measured) << ',' << fmt(row.gap) << ',' << (row.pass ? "PASS" : "FAIL") << ','
        << (row.pass ? "" : serialize_witness(row.witness)) << '\n';
  }
  return out.str();
}

inline json summary(const RunResult& r) {
  return json{{"run_id", r.run_id},
              {"experiment", to_string(r.experiment)},
              {"pass", r.passed()},
              {"fail", r.failed()},
              {"worst_gap", r.worst_gap()}};
}

/// Writes through a temporary file in the same directory and renames it.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------- runners

namespace detail {

constexpr double kPi = 3.141592653589793238462643;

class ParamList {
 public:
  template <class T>
  ParamList& add(const std::string& key, const T& value) {
    if (!s_.empty()) s_ += ';';
    s_ += key + '=';
    if constexpr (std::is_floating_point_v<T>) s_ += fmt(value);
    else if constexpr (std::is_same_v<T, bool>) s_ += value ? "1" : "0";
    else if constexpr (std::is_arithmetic_v<T>) s_ += std::to_string(value);
    else s_ += value;
    return *this;
  }
  std::string str() const { return s_; }

 private:
  std::string s_;
};

inline ParamList domain_params(const ExperimentConfig& c) {
  ParamList p;
  p.add("domain", std::string(latlab::to_string(c.domain_kind))).add("n", c.n);
  return p;
}

// Smooth periodic-friendly test function: random low-mode sine series.
inline Vector smooth_sample(const GridDomain& d, Rng& rng, int modes = 3) {
  std::vector<double> a(modes), phase(modes);
  for (int k = 0; k < modes; ++k) a[k] = rng.uniform(-1.0, 1.0), phase[k] = rng.uniform(0.0, 2.0 * kPi);
  auto f = [&](double x, double y) {
    double v = 0.0;
    for (int k = 0; k < modes; ++k) v += a[k] * std::sin(2.0 * kPi * (k + 1) * (x + 0.5 * y) + phase[k]) / (k + 1);
    return v;
  };
  if (d.dim() == 2) return GridFunction::sample(d, [&](const Point& q) { return f(q[0], q[1]); }).values();
  return GridFunction::sample(d, [&](double x) { return f(x, 0.0); }).values();
}

// Sample i of a family mixing smooth, rough, and single-spike vectors.
inline Vector mixed_sample(const GridDomain& d, Rng& rng, int i) {
  switch (i % 3) {
    case 0: return smooth_sample(d, rng);
    case 1: return rng.uniform_vector(d.size(), -1.0, 1.0);
    default: {
      Vector z = Vector::Zero(d.size());
      z[rng.index(d.size())] = rng.uniform() < 0.5 ? -1.0 : 1.0;
      return z;
    }
  }
}

inline ReportRow gap_row(std::string name, std::string params, double measured, double gap, double limit,
                         const Vector& witness) {
  ReportRow r{std::move(name), std::move(params), measured, gap, gap <= limit, {}};
  if (!r.pass) r.witness = witness;
  return r;
}

inline GeneratorMatrix make_generator(const GeneratorConfig& g) {
  if (g.kind == "multiplication") return multiplication_generator(g.m);
  return neumann_laplacian_1d(g.n, g.h);
}

inline void run_sup(const ExperimentConfig& c, bool dual, RunResult& out) {
  const GridDomain d = c.domain();
  ApproximationScheme scheme;
  if (c.family == "mollifier") {
    scheme = c.n_max ? mollifier_scheme(d, *c.n_max) : mollifier_scheme(d);
    scheme.n_min = std::max(scheme.n_min, c.n_min);
  } else {
    if (d.kind() != DomainKind::interval)
      throw PreconditionError("the resolvent scheme uses the Neumann Laplacian on an interval grid");
    const GeneratorMatrix gen = neumann_laplacian_1d(d.n(), d.h());
    scheme = c.n_max ? resolvent_scheme(gen, *c.n_max) : resolvent_scheme(gen);
    scheme.n_min = std::max(scheme.n_min, c.n_min);
  }
  const double limit = 10.0 * c.tol;
  Rng rng(c.seed);
  for (int i = 0; i < c.samples; ++i) {
    const Vector z = mixed_sample(d, rng, i);
    ParamList p = domain_params(c);
    p.add("family", c.family).add("tol", c.tol).add("sample", i);
    try {
      const SupResult s = dual ? constructive_sup_dual(scheme, z, c.tol) : constructive_sup(scheme, z, c.tol);
      p.add("index", s.index);
      const double gap = max_abs(s.s - z.cwiseAbs());
      out.rows.push_back(gap_row("sample_" + std::to_string(i), p.str(), gap, gap, limit, z));
    } catch (const ConvergenceError& e) {
      ReportRow r{"sample_" + std::to_string(i), p.add("error", std::string("no_convergence")).str(),
                  e.best_value, e.best_value, false, z};
      out.rows.push_back(std::move(r));
    } catch (const NumericalError&) {
      out.rows.push_back({"sample_" + std::to_string(i), p.add("error", std::string("not_upper_bound")).str(),
                          0.0, 1.0, false, z});
    }
  }
}

/// r(eps) = ||x_eps|| / ||y_eps|| in discrete W^{1,2}(0,1) with
/// x_eps = eps sin^2(pi t / eps), y_eps = eps.
inline double normality_ratio(double eps, int points_per_eps, Vector* witness = nullptr) {
  const int n = static_cast<int>(std::ceil(points_per_eps / eps)) + 1;
  const GridDomain d = GridDomain::interval(n);
  const OrderedSpaceSpec s = OrderedSpaceSpec::standard(NormSpec::sobolev(d, 1, 2.0));
  const Vector y = Vector::Constant(n, eps);
  Vector x = GridFunction::sample(d, [&](double t) {
               const double v = std::sin(kPi * t / eps);
               return eps * v * v;
             }).values();
  x = x.cwiseMin(y);
  if (witness) *witness = x;
  return normality_constant_lower_bound(s, {{x, y}});
}

inline void run_normality(const ExperimentConfig& c, RunResult& out) {
  std::vector<double> ratios;
  for (double eps : c.eps) {
    Vector w;
    const double r = normality_ratio(eps, c.points_per_eps, &w);
    ratios.push_back(r);
    ParamList p;
    p.add("eps", eps).add("h", 1.0 / std::ceil(c.points_per_eps / eps));
    // a ratio above 1 already shows the lattice bound M = 1 fails
    out.rows.push_back(gap_row("ratio", p.str(), r, std::max(0.0, 1.0 - r), 0.0, w));
  }
  for (std::size_t i = 1; i < c.eps.size(); ++i) {
    const double factor = ratios[i] / ratios[i - 1];
    const double expected = c.eps[i - 1] / c.eps[i];  // blow-up ~ 1/eps
    const double lo = 0.85 * expected, hi = 1.15 * expected;
    const double gap = factor < lo ? lo - factor : factor > hi ? factor - hi : 0.0;
    ParamList p;
    p.add("eps", c.eps[i - 1]).add("eps_next", c.eps[i]).add("band_lo", lo).add("band_hi", hi);
    Vector w(2);
    w << c.eps[i - 1], c.eps[i];
    out.rows.push_back(gap_row("growth", p.str(), factor, gap, 0.0, w));
  }
}

inline void run_mollifier_rate(const ExperimentConfig& c, RunResult& out) {
  const GridDomain d = c.domain();
  if (d.kind() != DomainKind::torus) throw PreconditionError("mollifier-rate runs on a torus grid");
  Rng rng(c.seed);
  for (int s = 0; s < c.samples; ++s) {
    const Vector f = smooth_sample(d, rng);
    std::vector<double> errs;
    for (double delta : c.deltas) {
      const double e = max_abs(mollify(GridFunction(d, f), delta).values() - f);
      errs.push_back(e);
      ParamList p = domain_params(c);
      p.add("sample", s).add("delta", delta);
      out.rows.push_back({"error", p.str(), e, 0.0, true, {}});
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
      const double order = std::log(errs[i - 1] / errs[i]) / std::log(c.deltas[i - 1] / c.deltas[i]);
      ParamList p = domain_params(c);
      p.add("sample", s).add("delta", c.deltas[i - 1]).add("delta_next", c.deltas[i]);
      out.rows.push_back(gap_row("order", p.str(), order, std::max(0.0, 1.8 - order), 0.0, f));
    }
  }
}

inline void run_chart_audit(const ExperimentConfig& c, RunResult& out) {
  const GridDomain d = c.domain();
  const ChartCover cover = build_chart_cover(d);
  for (std::size_t i = 0; i < cover.charts().size(); ++i) {
    const BoundaryChart& ch = cover.charts()[i];
    const ChartAudit a = audit_chart(ch, d, chart_audit_indices(), c.audit_samples, c.seed + i);
    ParamList p = domain_params(c);
    const char* kind = ch.kind() == ChartKind::interior ? "interior" : ch.kind() == ChartKind::edge ? "edge" : "corner";
    p.add("chart", static_cast<long>(i)).add("kind", std::string(kind)).add("x0", ch.center()[0]);
    if (d.dim() == 2) p.add("y0", ch.center()[1]);
    p.add("r", ch.radius()).add("samples", a.samples);
    Vector w;
    if (a.first_violation) {
      w.resize(3);
      w << a.first_violation->first[0], a.first_violation->first[1], double(a.first_violation->second);
    }
    out.rows.push_back(gap_row("chart_" + std::to_string(i), p.str(), double(a.violations), double(a.violations),
                               0.0, w));
  }
}

inline void run_pushin(const ExperimentConfig& c, RunResult& out) {
  const GridDomain d = c.domain();
  const ChartCover cover = build_chart_cover(d);
  Rng rng(c.seed);
  std::vector<Vector> smooth;
  for (int s = 0; s < std::min(c.samples, 10); ++s) smooth.push_back(smooth_sample(d, rng));
  std::vector<double> prev_err(smooth.size(), std::numeric_limits<double>::infinity());
  std::vector<double> prev_r_err(smooth.size(), std::numeric_limits<double>::infinity());
  for (long n : c.indices) {
    const PushIn s = pushin_operator(cover, n);
    ParamList base = domain_params(c);
    base.add("index", n);
    // support: S_n f vanishes outside K_n
    double outside = 0.0;
    Vector witness;
    for (int t = 0; t < c.samples; ++t) {
      const Vector f = rng.uniform_vector(d.size(), -1.0, 1.0);
      const Vector g = s.S * f;
      for (int i = 0; i < d.size(); ++i)
        if (!s.in_K[i] && std::abs(g[i]) > outside) outside = std::abs(g[i]), witness = f;
    }
    out.rows.push_back(gap_row("support", base.str(), outside, outside, 0.0, witness));
    const bool positive = entrywise_nonnegative(s.S, 0.0);
    out.rows.push_back({"positivity", base.str(), positive ? 0.0 : 1.0, positive ? 0.0 : 1.0, positive, {}});
    ParamList pd = base;
    out.rows.push_back({"k_distance", pd.add("unit", std::string("boundary")).str(), s.boundary_distance, 0.0,
                        s.boundary_distance > 0.0, {}});
    for (std::size_t j = 0; j < smooth.size(); ++j) {
      const double err = lp_norm(d, s.S * smooth[j] - smooth[j], c.p);
      ParamList p = base;
      p.add("sample", static_cast<long>(j)).add("p", c.p);
      const double rise = std::max(0.0, err - prev_err[j]);
      out.rows.push_back(gap_row("lp_error", p.str(), err, rise, 0.0, smooth[j]));
      prev_err[j] = err;
    }
    if (c.with_boundary) {
      const BoundaryApproximation a = approx_identity_with_boundary(cover, n);
      for (std::size_t j = 0; j < smooth.size(); ++j) {
        const Vector g = a.R * smooth[j];
        double min_dist = std::numeric_limits<double>::infinity();
        for (int i = 0; i < d.size(); ++i)
          if (g[i] != 0.0) min_dist = std::min(min_dist, d.boundary_distance(d.node(i)));
        ParamList p = base;
        p.add("sample", static_cast<long>(j)).add("delta", a.delta);
        const double short_by = std::max(0.0, a.delta - d.max_h() - min_dist);
        out.rows.push_back(gap_row("r_support", p.str(), min_dist, short_by, 0.0, smooth[j]));
        const double err = lp_norm(d, g - smooth[j], c.p);
        const double rise = std::max(0.0, err - prev_r_err[j]);
        out.rows.push_back(gap_row("r_lp_error", p.add("p", c.p).str(), err, rise, 0.0, smooth[j]));
        prev_r_err[j] = err;
      }
    }
  }
}

// Random f on the interval vanishing to order k - 1 at both ends.
inline Vector w0_sample(const GridDomain& d, Rng& rng, int k, int i) {
  const int n = d.n();
  Vector f;
  if (i % 2 == 0) {
    f = smooth_sample(d, rng);
    const Vector env = GridFunction::sample(d, [k](double t) { return std::pow(t * (1.0 - t), k); }).values();
    f = f.cwiseProduct(env);
  } else {
    f = rng.uniform_vector(n, -1.0, 1.0);
  }
  for (int j = 0; j < k; ++j) f[j] = f[n - 1 - j] = 0.0;
  return f;
}

inline void run_prop35(const ExperimentConfig& c, RunResult& out) {
  const GridDomain d = c.domain();
  if (c.k < 1) throw PreconditionError("positive dominant needs k >= 1");
  Rng rng(c.seed);
  const double tol = 1e-10;
  for (int i = 0; i < c.samples; ++i) {
    const Vector f = w0_sample(d, rng, c.k, i);
    const Vector g = positive_dominant_w0(GridFunction(d, f), c.k, c.p).values();
    const double scale = std::max(1.0, max_abs(g));
    ParamList p = domain_params(c);
    p.add("k", c.k).add("p", c.p).add("sample", i);
    const double neg = std::max(0.0, -g.minCoeff());
    const double below = std::max(0.0, (f - g).maxCoeff());
    double ends = 0.0;
    for (int j = 0; j < c.k; ++j) ends = std::max({ends, std::abs(g[j]), std::abs(g[d.n() - 1 - j])});
    out.rows.push_back(gap_row("positive", p.str(), g.minCoeff(), neg, tol * scale, f));
    out.rows.push_back(gap_row("dominates", p.str(), (g - f).minCoeff(), below, tol * scale, f));
    out.rows.push_back(gap_row("endpoints", p.str(), ends, ends, tol * scale, f));
  }
}

inline void run_extrapolation(const ExperimentConfig& c, RunResult& out) {
  const GeneratorMatrix gen = make_generator(c.generator);
  const int n = gen.dim();
  const NormSpec base = NormSpec::lp(n, c.p);
  const ExtrapolationSpace space(base, gen, c.generator.lambda);
  const double lambda = space.lambda();
  ParamList gp;
  gp.add("kind", c.generator.kind).add("n", n).add("lambda", lambda).add("p", c.p);
  out.rows.push_back({"certificate", gp.str(), gen.certificate_min_entry(), 0.0, gen.certified(), {}});
  {
    const double mu = lambda, nu = lambda + 1.0;
    const Matrix ra = gen.resolvent(mu), rb = gen.resolvent(nu);
    const double res = (ra - rb - (nu - mu) * ra * rb).cwiseAbs().maxCoeff();
    ParamList p = gp;
    out.rows.push_back(gap_row("resolvent_identity", p.add("mu", mu).add("nu", nu).str(), res, res, 1e-9, {}));
  }
  Rng rng(c.seed);
  {
    long mismatches = 0;
    Vector witness;
    for (int t = 0; t < c.samples; ++t) {
      Vector x = rng.uniform_vector(n, -1.0, 1.0);
      if (t % 2 == 0) x = x.cwiseAbs();
      if (space.cone_contains(x) != (x.minCoeff() >= 0.0)) {
        if (mismatches == 0) witness = x;
        ++mismatches;
      }
    }
    out.rows.push_back(gap_row("cone_compatibility", gp.str(), double(mismatches), double(mismatches), 0.0, witness));
  }
  {
    const double l2 = lambda + 1.0;
    const LambdaEquivalence eq = lambda_equivalence_bound(gen, base, lambda, l2);
    const ExtrapolationSpace other(base, gen, l2);
    double worst = 0.0;
    Vector witness;
    for (int t = 0; t < c.samples; ++t) {
      const Vector x = rng.uniform_vector(n, -1.0, 1.0);
      const double ratio = space.norm(x) / other.norm(x);
      const double excess = std::max(ratio / eq.upper_factor, (1.0 / ratio) / eq.lower_factor) - 1.0;
      if (excess > worst) worst = excess, witness = x;
    }
    ParamList p = gp;
    p.add("lambda2", l2).add("rho", eq.rho());
    out.rows.push_back(gap_row("lambda_equivalence", p.str(), worst, std::max(0.0, worst), 1e-12, witness));
  }
  ApproximationScheme scheme = c.n_max ? resolvent_scheme(gen, *c.n_max) : resolvent_scheme(gen);
  scheme.n_min = std::max(scheme.n_min, c.n_min);
  for (int t = 0; t < c.samples; ++t) {
    const Vector z = rng.uniform_vector(n, -1.0, 1.0);
    ParamList p = gp;
    p.add("tol", c.tol).add("sample", t);
    try {
      const SupResult s = constructive_sup(scheme, z, c.tol);
      const double gap = max_abs(s.s - z.cwiseAbs());
      out.rows.push_back(gap_row("sup_" + std::to_string(t), p.add("index", s.index).str(), gap, gap,
                                 10.0 * c.tol, z));
    } catch (const ConvergenceError& e) {
      out.rows.push_back({"sup_" + std::to_string(t), p.add("error", std::string("no_convergence")).str(),
                          e.best_value, e.best_value, false, z});
    }
  }
  if (c.generator.kind == "multiplication") {
    const Report r = multiplication_example_check(c.generator.m, c.p, Vector::Ones(n), c.samples, c.seed);
    out.rows.push_back({"weighted_identity", gp.str(), r.worst, r.worst, r.pass, r.pass ? Vector() : r.witness});
  }
}

inline void run_renorm(const ExperimentConfig& c, RunResult& out) {
  const GridDomain d = c.domain();
  const NormSpec norm = c.k == 0 ? NormSpec::grid_lp(d, c.p) : NormSpec::sobolev(d, c.k, c.p);
  const OrderedSpaceSpec space = OrderedSpaceSpec::standard(norm);
  Rng rng(c.seed);
  std::vector<Vector> xs;
  for (int i = 0; i < c.samples; ++i) xs.push_back(rng.uniform_vector(d.size(), -1.0, 1.0));
  const double M = 1.05 * normality_constant_lower_bound(space, sample_witnesses(space, xs));
  const double C = 1.05 * decomposition_constant_estimate(space, xs);
  ParamList cp = domain_params(c);
  cp.add("k", c.k).add("p", c.p).add("M", M).add("C", C);
  out.rows.push_back({"constants", cp.str(), M * M * C, 0.0, true, {}});
  for (int i = 0; i < c.samples; ++i) {
    const Vector& x = xs[i];
    const RenormValue rv = renorm_value(space, x);
    const Report r = renorm_bounds_check(space, x, M, C);
    ParamList p = domain_params(c);
    p.add("sample", i).add("exact", rv.exact);
    out.rows.push_back(
        gap_row("bounds", p.str(), rv.value / space.norm(x), std::max(0.0, r.worst), 1e-12 * rv.value, x));
  }
}

}  // namespace detail

/// Runs one validated experiment. Precondition and dimension errors from the
/// modules propagate; per-sample convergence failures become FAIL rows.
inline RunResult run(const ExperimentConfig& c) {
  RunResult out;
  out.run_id = run_id(c);
  out.experiment = c.experiment;
  out.seed = c.seed;
  switch (c.experiment) {
    case Experiment::sup_construct: detail::run_sup(c, false, out); break;
    case Experiment::sup_construct_dual: detail::run_sup(c, true, out); break;
    case Experiment::normality_scan: detail::run_normality(c, out); break;
    case Experiment::mollifier_rate: detail::run_mollifier_rate(c, out); break;
    case Experiment::boundary_chart_audit: detail::run_chart_audit(c, out); break;
    case Experiment::pushin_audit: detail::run_pushin(c, out); break;
    case Experiment::prop35_demo: detail::run_prop35(c, out); break;
    case Experiment::extrapolation_demo: detail::run_extrapolation(c, out); break;
    case Experiment::renorm_audit: detail::run_renorm(c, out); break;
  }
  return out;
}

/// Writes <dir>/<experiment>.csv and <dir>/<experiment>.json.
inline std::pair<std::filesystem::path, std::filesystem::path> write_outputs(const RunResult& r,
                                                                             const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto csv = dir / (to_string(r.experiment) + ".csv");
  const auto js = dir / (to_string(r.experiment) + ".json");
  write_atomic(csv, to_csv(r));
  write_atomic(js, summary(r).dump(2) + "\n");
  return {csv, js};
}

// ---------------------------------------------------------------- merge

struct MergedExperiment {
  int pass = 0;
  int fail = 0;
  double worst_gap = 0.0;
  std::vector<json> failures;  // {run_id, case, witness}
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) out.push_back(std::move(cur)), cur.clear();
    else cur += ch;
  }
  out.push_back(std::move(cur));
  return out;
}

inline double parse_number(const std::string& s, const std::string& file, long line, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw MergeError(file, line, std::string("malformed ") + what + " '" + s + "'");
  }
}

}  // namespace detail

/// Combines report CSVs into one summary. A run id seen in an earlier file is
/// skipped, so merging a run with itself is idempotent.
inline json report_merge(const std::vector<std::string>& paths) {
  if (paths.empty()) throw UsageError("merge needs at least one report");
  std::map<std::string, MergedExperiment> per;
  std::set<std::string> seen_runs;
  int runs = 0;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open report " + path);
    std::string line;
    long lineno = 0;
    std::set<std::string> runs_here;
    if (!std::getline(in, line) || line.rfind("# schema=1", 0) != 0)
      throw MergeError(path, 1, "missing '# schema=1' header");
    ++lineno;
    if (!std::getline(in, line) || line != kCsvColumns) throw MergeError(path, 2, "unexpected column header");
    ++lineno;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto cols = detail::split(line, ',');
      if (cols.size() != 9) throw MergeError(path, lineno, "expected 9 columns, found " + std::to_string(cols.size()));
      const std::string& id = cols[0];
      if (id.size() != 16 || id.find_first_not_of("0123456789abcdef") != std::string::npos)
        throw MergeError(path, lineno, "malformed run id '" + id + "'");
      try {
        experiment_from_string(cols[1]);
      } catch (const UsageError&) {
        throw MergeError(path, lineno, "unknown experiment '" + cols[1] + "'");
      }
      detail::parse_number(cols[5], path, lineno, "measured value");
      const double gap = detail::parse_number(cols[6], path, lineno, "gap");
      if (cols[7] != "PASS" && cols[7] != "FAIL") throw MergeError(path, lineno, "status must be PASS or FAIL");
      const bool pass = cols[7] == "PASS";
      if (seen_runs.count(id) && !runs_here.count(id)) continue;
      runs_here.insert(id);
      MergedExperiment& m = per[cols[1]];
      (pass ? m.pass : m.fail) += 1;
      m.worst_gap = std::max(m.worst_gap, gap);
      if (!pass) m.failures.push_back(json{{"run_id", id}, {"case", cols[2]}, {"witness", cols[8]}});
    }
    for (const auto& id : runs_here)
      if (seen_runs.insert(id).second) ++runs;
  }
  json out;
  int total_fail = 0;
  json exps = json::object();
  for (const auto& [name, m] : per) {
    total_fail += m.fail;
    exps[name] = json{{"pass", m.pass}, {"fail", m.fail}, {"worst_gap", m.worst_gap}, {"failures", m.failures}};
  }
  out["status"] = total_fail == 0 ? "PASS" : "FAIL";
  out["runs"] = runs;
  out["experiments"] = exps;
  return out;
}

}  // namespace latlab::lab

#endif  // LATLAB_LAB_HPP
