#include "symirk/manifest.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "symirk/errors.hpp"
#include "symirk/numeric_text.hpp"

namespace symirk {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

mpq_class exact_field(const std::string& field, const std::string& text) {
  try {
    return parse_exact(text);
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
}

std::int64_t integer_field(const std::string& field, const std::string& text) {
  const mpq_class q = exact_field(field, text);
  if (q.get_den() != 1) throw ConfigError(field, "expected an integer, got '" + text + "'");
  if (!q.get_num().fits_slong_p()) throw ConfigError(field, "integer out of range");
  return q.get_num().get_si();
}

double real_field(const std::string& field, const std::string& text) {
  const double v = round_to_double(exact_field(field, text));
  if (!std::isfinite(v)) throw ConfigError(field, "value is not finite");
  return v;
}

}  // namespace

double RunManifest::h() const { return real_field("method.h", h_text); }

std::int64_t RunManifest::n_steps() const {
  const mpq_class h = exact_field("method.h", h_text);
  const mpq_class t = exact_field("method.t_end", t_end_text);
  if (sgn(h) <= 0) throw ConfigError("method.h", "must be > 0");
  if (sgn(t) < 0) throw ConfigError("method.t_end", "must be >= 0");
  const mpq_class n = t / h;
  mpz_class r = n.get_num() / n.get_den();
  if (2 * (n - mpq_class(r)) >= 1) r += 1;
  if (!r.fits_slong_p()) throw ConfigError("method.t_end", "step count out of range");
  return r.get_si();
}

IntegrationConfig RunManifest::integration() const {
  IntegrationConfig c;
  c.h = h();
  c.n_steps = n_steps();
  c.sample_every = m;
  c.max_iterations = max_iterations;
  c.streak_required = streak;
  c.fallback_abs_tol = real_field("method.fallback_abs_tol", fallback_abs_tol);
  c.fallback_rel_tol = real_field("method.fallback_rel_tol", fallback_rel_tol);
  c.estimator_r = r;
  c.estimator_mode = estimator_mode;
  return c;
}

EnsembleSpec RunManifest::ensemble() const {
  EnsembleSpec e;
  e.P = P;
  e.perturb_rel = real_field("ensemble.perturb_rel", perturb_rel);
  e.seed = seed;
  return e;
}

OracleConfig RunManifest::oracle() const { return OracleConfig::preset(oracle_variant, oracle_bits); }

void RunManifest::validate() const {
  if (problem_file.empty() && problem != "ncdp" && problem != "cdp" && problem != "oss") {
    throw ConfigError("problem.name", "expected ncdp, cdp, oss or a file, got '" + problem + "'");
  }
  if (stages < 1 || stages > kMaxStages) throw ConfigError("method.stages", "must be in [1, 16]");
  if (!(h() > 0)) throw ConfigError("method.h", "must be > 0");
  const auto n = n_steps();
  if (m < 1) throw ConfigError("method.m", "must be >= 1");
  if (n > 0 && m > n) throw ConfigError("method.m", "sampling interval exceeds the number of steps");
  integration().validate();
  if (r < 1 || r >= kMachineDigits) throw ConfigError("estimator.r", "must be in [1, 52]");
  ensemble().validate();
  if (bins < 1) throw ConfigError("ensemble.bins", "must be >= 1");
  oracle().validate();
  if (out_dir.empty()) throw ConfigError("output.dir", "must not be empty");
}

RunManifest parse_manifest(const std::string& text) {
  RunManifest m;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno), "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "method" && section != "estimator" && section != "ensemble" &&
          section != "oracle" && section != "output") {
        throw ConfigError(section, "unknown section");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string field = section + "." + key;
    if (section.empty()) throw ConfigError(key, "key outside of any section");
    if (value.empty()) throw ConfigError(field, "missing value");

    if (field == "problem.name") {
      m.problem = value;
    } else if (field == "problem.file") {
      m.problem_file = value;
    } else if (field == "method.stages") {
      const auto s = integer_field(field, value);
      if (s < 1) throw ConfigError(field, "must be >= 1");
      m.stages = static_cast<std::size_t>(s);
    } else if (field == "method.h") {
      exact_field(field, value);
      m.h_text = value;
    } else if (field == "method.t_end") {
      exact_field(field, value);
      m.t_end_text = value;
    } else if (field == "method.m") {
      m.m = integer_field(field, value);
    } else if (field == "method.max_iterations") {
      m.max_iterations = static_cast<int>(integer_field(field, value));
    } else if (field == "method.streak") {
      m.streak = static_cast<int>(integer_field(field, value));
    } else if (field == "method.fallback_abs_tol") {
      exact_field(field, value);
      m.fallback_abs_tol = value;
    } else if (field == "method.fallback_rel_tol") {
      exact_field(field, value);
      m.fallback_rel_tol = value;
    } else if (field == "estimator.mode") {
      try {
        m.estimator_mode = parse_estimator_mode(value);
      } catch (const Error& e) {
        throw ConfigError(field, e.what());
      }
    } else if (field == "estimator.r") {
      m.r = static_cast<int>(integer_field(field, value));
    } else if (field == "ensemble.P") {
      m.P = static_cast<int>(integer_field(field, value));
    } else if (field == "ensemble.perturb_rel") {
      exact_field(field, value);
      m.perturb_rel = value;
    } else if (field == "ensemble.threads") {
      const auto t = integer_field(field, value);
      if (t < 0) throw ConfigError(field, "must be >= 0");
      m.threads = static_cast<unsigned>(t);
    } else if (field == "ensemble.bins") {
      const auto b = integer_field(field, value);
      if (b < 1) throw ConfigError(field, "must be >= 1");
      m.bins = static_cast<std::size_t>(b);
    } else if (field == "oracle.bits") {
      m.oracle_bits = integer_field(field, value);
    } else if (field == "oracle.variant") {
      m.oracle_variant = value;
    } else if (field == "output.dir") {
      m.out_dir = value;
    } else if (field == "output.seed") {
      const auto s = integer_field(field, value);
      if (s < 0) throw ConfigError(field, "must be >= 0");
      m.seed = static_cast<std::uint64_t>(s);
    } else {
      throw ConfigError(field, "unknown key");
    }
  }
  return m;
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::string emit_manifest(const RunManifest& m) {
  std::ostringstream os;
  os << "[problem]\n";
  if (m.problem_file.empty()) {
    os << "name = " << m.problem << "\n";
  } else {
    os << "name = " << m.problem << "\nfile = " << m.problem_file << "\n";
  }
  os << "\n[method]\n"
     << "stages = " << m.stages << "\n"
     << "h = " << m.h_text << "\n"
     << "t_end = " << m.t_end_text << "\n"
     << "m = " << m.m << "\n"
     << "max_iterations = " << m.max_iterations << "\n"
     << "streak = " << m.streak << "\n"
     << "fallback_abs_tol = " << m.fallback_abs_tol << "\n"
     << "fallback_rel_tol = " << m.fallback_rel_tol << "\n";
  os << "\n[estimator]\n"
     << "mode = " << to_string(m.estimator_mode) << "\n"
     << "r = " << m.r << "\n";
  os << "\n[ensemble]\n"
     << "P = " << m.P << "\n"
     << "perturb_rel = " << m.perturb_rel << "\n"
     << "threads = " << m.threads << "\n"
     << "bins = " << m.bins << "\n";
  os << "\n[oracle]\n"
     << "bits = " << m.oracle_bits << "\n"
     << "variant = " << m.oracle_variant << "\n";
  os << "\n[output]\n"
     << "dir = " << m.out_dir << "\n"
     << "seed = " << m.seed << "\n";
  return os.str();
}

RunManifest published_manifest(const std::string& problem) {
  RunManifest m;
  m.problem = problem;
  if (problem == "ncdp") {
    m.h_text = "2^-7";
    m.t_end_text = "2^12";
    m.m = 1024;
  } else if (problem == "cdp") {
    m.h_text = "2^-7";
    m.t_end_text = "2^8";
    m.m = 256;
  } else if (problem == "oss") {
    m.h_text = "500/3";
    m.t_end_text = "10^7";
    m.m = 120;
  } else {
    throw ConfigError("problem.name", "no published parameter set for '" + problem + "'");
  }
  m.P = 1000;
  return m;
}

Problem load_problem(const RunManifest& m) {
  if (!m.problem_file.empty()) return problem_from_table(read_value_table(m.problem_file), m.problem);
  return load_named_problem(m.problem);
}

}  // namespace symirk
