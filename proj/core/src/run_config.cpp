#include "shel/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "shel/csv.hpp"
#include "shel/errors.hpp"

namespace shel {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Flat `key = value` store with consumption tracking, so leftovers can be
// reported as unknown keys.
struct Entries {
  std::map<std::string, std::string> kv;
  std::set<std::string> used;

  void insert(const std::string& key, const std::string& value) {
    if (key.empty()) bad("config: empty key");
    if (!kv.emplace(key, value).second)
      bad("config: duplicate key '" + key + "'");
  }

  std::optional<std::string> take(const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    used.insert(key);
    return it->second;
  }

  std::string take_string(const std::string& key, const std::string& dflt) {
    const auto v = take(key);
    return v ? *v : dflt;
  }

  double take_double(const std::string& key, double dflt) {
    const auto v = take(key);
    if (!v) return dflt;
    const char* begin = v->c_str();
    char* end = nullptr;
    const double parsed = std::strtod(begin, &end);
    if (end != begin + v->size() || v->empty())
      bad("config: '" + key + "' is not a number: '" + *v + "'");
    return parsed;
  }

  std::uint64_t take_u64(const std::string& key, std::uint64_t dflt) {
    const auto v = take(key);
    if (!v) return dflt;
    const char* begin = v->c_str();
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(begin, &end, 10);
    if (end != begin + v->size() || v->empty() || v->front() == '-')
      bad("config: '" + key + "' is not an unsigned integer: '" + *v + "'");
    return parsed;
  }

  bool take_bool(const std::string& key, bool dflt) {
    const auto v = take(key);
    if (!v) return dflt;
    const std::string s = lower(*v);
    if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "off" || s == "no") return false;
    bad("config: '" + key + "' is not a boolean: '" + *v + "'");
  }

  void finish() const {
    for (const auto& [key, value] : kv)
      if (!used.count(key)) bad("config: unknown key '" + key + "'");
  }
};

Entries parse_entries(const std::string& text) {
  Entries entries;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      bad("config: expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (!value.empty() && value.front() == '{') {
      if (value.back() != '}')
        bad("config: unterminated inline table for '" + key + "'");
      const std::string inner = value.substr(1, value.size() - 2);
      std::size_t start = 0;
      while (start <= inner.size()) {
        const std::size_t comma = inner.find(',', start);
        const std::string part = trim(inner.substr(
            start, comma == std::string::npos ? comma : comma - start));
        if (!part.empty()) {
          const std::size_t peq = part.find('=');
          if (peq == std::string::npos)
            bad("config: expected 'key = value' inside table '" + key + "'");
          entries.insert(key + "." + trim(part.substr(0, peq)),
                         trim(part.substr(peq + 1)));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    } else {
      entries.insert(key, value);
    }
  }
  return entries;
}

std::string boundary_gen_name(BoundaryGen g) {
  switch (g) {
    case BoundaryGen::constant: return "constant";
    case BoundaryGen::sinusoid: return "sinusoid";
    case BoundaryGen::brownian: return "brownian";
    case BoundaryGen::fbm: return "fbm";
  }
  return "constant";
}

BoundaryGen boundary_gen_from(const std::string& s) {
  if (s == "constant") return BoundaryGen::constant;
  if (s == "sinusoid") return BoundaryGen::sinusoid;
  if (s == "brownian") return BoundaryGen::brownian;
  if (s == "fbm") return BoundaryGen::fbm;
  bad("config: unknown boundary generator '" + s + "'");
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  Entries e = parse_entries(text);
  RunConfig rc;
  SolveConfig& sc = rc.solve;

  rc.name = e.take_string("name", "run");
  const std::string kind = lower(e.take_string("kind", "c1"));
  try {
    sc.kind = boundary_kind_from_string(kind);
  } catch (const Error& err) {
    bad(err.what());
  }

  const std::uint64_t grid = e.take_u64("grid", 128);
  if (grid < 16) bad("config: grid must be at least 16 nodes");
  sc.grid_n = static_cast<std::size_t>(grid);

  sc.time.t0 = e.take_double("t0", 0.0);
  sc.time.dt = e.take_double("dt", 0.0);
  if (!(sc.time.dt > 0.0)) bad("config: dt must be positive");
  const auto steps = e.take("steps");
  const auto t_end = e.take("t_end");
  if (steps && t_end) bad("config: give either steps or t_end, not both");
  if (!steps && !t_end) bad("config: give steps or t_end");
  if (steps) {
    const char* begin = steps->c_str();
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(begin, &end, 10);
    if (end != begin + steps->size() || steps->empty())
      bad("config: steps is not an unsigned integer");
    sc.time.n_steps = static_cast<std::size_t>(parsed);
  } else {
    const char* begin = t_end->c_str();
    char* end = nullptr;
    const double parsed = std::strtod(begin, &end);
    if (end != begin + t_end->size() || t_end->empty())
      bad("config: t_end is not a number");
    const double raw = (parsed - sc.time.t0) / sc.time.dt;
    sc.time.n_steps = static_cast<std::size_t>(std::llround(raw));
    if (std::abs(raw - std::round(raw)) > 1e-6)
      bad("config: t_end - t0 must be an integer multiple of dt");
  }
  if (sc.time.n_steps < 1) bad("config: need at least one time step");

  sc.seed.master = e.take_u64("seed", 0);
  sc.seed.stream = 0;
  const std::uint64_t paths = e.take_u64("paths", 1);
  if (paths < 1) bad("config: paths must be at least 1");
  rc.paths = static_cast<std::size_t>(paths);
  sc.clamp_negative = e.take_bool("clamp", false);

  const std::string kappa_kind = lower(e.take_string("kappa.kind", "constant"));
  const double ell = e.take_double("kappa.ell", 0.1);
  const double scale = e.take_double("kappa.scale", 1.0);
  if (scale < 0.0) bad("config: kappa.scale must be nonnegative");
  if (kappa_kind == "constant") {
    sc.kappa = constant_kernel(scale);
  } else if (kappa_kind == "exponential") {
    if (!(ell > 0.0)) bad("config: kappa.ell must be positive");
    sc.kappa = exponential_kernel(ell, scale);
  } else if (kappa_kind == "gaussian") {
    if (!(ell > 0.0)) bad("config: kappa.ell must be positive");
    sc.kappa = gaussian_kernel(ell, scale);
  } else if (kappa_kind == "brownian") {
    sc.kappa = brownian_kernel(scale);
  } else {
    bad("config: unknown kappa.kind '" + kappa_kind + "'");
  }

  const std::string g_kind = lower(e.take_string("g.kind", "zero"));
  const double g_param = e.take_double("g.param", 0.0);
  const std::string h_kind = lower(e.take_string("h.kind", "zero"));
  const double h_param = e.take_double("h.param", 0.5);
  const double h_scale = e.take_double("h.scale", 1.0);
  try {
    sc.coeffs = make_coefficients(g_kind, g_param, h_kind, h_param, h_scale);
  } catch (const Error& err) {
    bad(err.what());
  }

  BoundaryGenSpec& b = sc.boundary;
  b.kind = boundary_gen_from(lower(e.take_string("boundary.kind", "constant")));
  b.c0 = e.take_double("boundary.c0", 0.0);
  b.c1 = e.take_double("boundary.c1", 0.0);
  b.amp0 = e.take_double("boundary.amp0", 0.0);
  b.omega0 = e.take_double("boundary.omega0", 0.0);
  b.phase0 = e.take_double("boundary.phase0", 0.0);
  b.amp1 = e.take_double("boundary.amp1", 0.0);
  b.omega1 = e.take_double("boundary.omega1", 0.0);
  b.phase1 = e.take_double("boundary.phase1", 0.0);
  b.sigma0 = e.take_double("boundary.sigma0", 0.0);
  b.sigma1 = e.take_double("boundary.sigma1", 0.0);
  b.hurst = e.take_double("boundary.hurst", 0.25);
  if (b.sigma0 < 0.0 || b.sigma1 < 0.0)
    bad("config: boundary.sigma must be nonnegative");
  if (b.kind == BoundaryGen::fbm && !(b.hurst > 0.0 && b.hurst < 0.5))
    bad("config: boundary.hurst must lie in (0, 0.5)");

  InitialSpec& init = sc.initial;
  init.kind = lower(e.take_string("initial.kind", "zero"));
  init.a = e.take_double("initial.a", 0.0);
  init.b = e.take_double("initial.b", 0.0);
  const std::uint64_t mode = e.take_u64("initial.mode", 1);
  if (mode < 1) bad("config: initial.mode must be at least 1");
  init.mode = static_cast<int>(mode);
  static const char* kInitialKinds[] = {"zero", "constant", "linear", "sine",
                                        "cosine"};
  if (std::find_if(std::begin(kInitialKinds), std::end(kInitialKinds),
                   [&](const char* k) { return init.kind == k; }) ==
      std::end(kInitialKinds))
    bad("config: unknown initial.kind '" + init.kind + "'");

  e.finish();

  auto& r = rc.resolved;
  r["name"] = rc.name;
  r["kind"] = to_string(sc.kind);
  r["grid"] = std::to_string(sc.grid_n);
  r["t0"] = format_double(sc.time.t0);
  r["dt"] = format_double(sc.time.dt);
  r["steps"] = std::to_string(sc.time.n_steps);
  r["clamp"] = sc.clamp_negative ? "true" : "false";
  r["kappa.kind"] = kappa_kind;
  r["kappa.ell"] = format_double(ell);
  r["kappa.scale"] = format_double(scale);
  r["g.kind"] = g_kind;
  r["g.param"] = format_double(g_param);
  r["h.kind"] = h_kind;
  r["h.param"] = format_double(h_param);
  r["h.scale"] = format_double(h_scale);
  r["boundary.kind"] = boundary_gen_name(b.kind);
  r["boundary.c0"] = format_double(b.c0);
  r["boundary.c1"] = format_double(b.c1);
  r["boundary.amp0"] = format_double(b.amp0);
  r["boundary.omega0"] = format_double(b.omega0);
  r["boundary.phase0"] = format_double(b.phase0);
  r["boundary.amp1"] = format_double(b.amp1);
  r["boundary.omega1"] = format_double(b.omega1);
  r["boundary.phase1"] = format_double(b.phase1);
  r["boundary.sigma0"] = format_double(b.sigma0);
  r["boundary.sigma1"] = format_double(b.sigma1);
  r["boundary.hurst"] = format_double(b.hurst);
  r["initial.kind"] = init.kind;
  r["initial.a"] = format_double(init.a);
  r["initial.b"] = format_double(init.b);
  r["initial.mode"] = std::to_string(init.mode);

  refresh_canonical(rc);
  return rc;
}

void refresh_canonical(RunConfig& rc) {
  rc.resolved["seed"] = std::to_string(rc.solve.seed.master);
  rc.resolved["paths"] = std::to_string(rc.paths);
  std::string text;
  for (const auto& [key, value] : rc.resolved)
    text += key + " = " + value + "\n";
  rc.canonical = std::move(text);
  rc.config_hash = fnv1a64(rc.canonical);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) bad("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_run_config(buf.str());
}

}  // namespace shel
