#include "sos/run_config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sos/errors.hpp"
#include "sos/filter.hpp"
#include "sos/indirect_inference.hpp"
#include "sos/kernels.hpp"

namespace sos::cfg {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"model",
       {"m0", "gamma_kbar", "b", "sigma_delta", "kbar", "g_c", "g_d", "r_f",
        "sigma_c", "sigma_d_bar", "rho_cd", "q_bar", "alpha"}},
      {"filter",
       {"n_particles", "kernel", "bandwidth_policy", "bandwidth_value",
        "bandwidth_exponent", "adaptive_multiplier", "resampling", "seed",
        "max_escalations"}},
      {"estimation",
       {"s", "kind", "budget", "t_sim", "nw_lags", "mle_starts", "mle_evals"}},
      {"sim", {"t"}},
      {"accuracy", {"t", "n_grid", "replications", "generator", "sigma_delta"}},
      {"var", {"warmup", "levels", "horizons", "window", "paths_per_particle"}},
      {"io", {"returns", "increments_a", "increments_b"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  long line = 0;
};
using Sections = std::map<std::string, std::map<std::string, Entry>>;

[[noreturn]] void fail(const std::string& origin, long line,
                       const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

double to_double(const std::string& origin, const Entry& e) {
  char* end = nullptr;
  const double x = std::strtod(e.value.c_str(), &end);
  if (e.value.empty() || end != e.value.c_str() + e.value.size())
    fail(origin, e.line, "expected a number, got '" + e.value + "'");
  return x;
}

long to_long(const std::string& origin, const Entry& e) {
  char* end = nullptr;
  const long x = std::strtol(e.value.c_str(), &end, 10);
  if (e.value.empty() || end != e.value.c_str() + e.value.size())
    fail(origin, e.line, "expected an integer, got '" + e.value + "'");
  return x;
}

std::uint64_t to_u64(const std::string& origin, const Entry& e) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(e.value.c_str(), &end, 0);
  if (e.value.empty() || end != e.value.c_str() + e.value.size() ||
      e.value.front() == '-')
    fail(origin, e.line, "expected an unsigned integer, got '" + e.value + "'");
  return static_cast<std::uint64_t>(x);
}

std::vector<Entry> split_list(const Entry& e) {
  std::vector<Entry> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(Entry{trim(item), e.line});
  return out;
}

class Reader {
 public:
  Reader(const std::string& origin, const std::map<std::string, Entry>& kv)
      : origin_(origin), kv_(kv) {}

  const Entry* find(const std::string& key) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? nullptr : &it->second;
  }
  void num(const std::string& key, double& slot) const {
    if (const Entry* e = find(key)) slot = to_double(origin_, *e);
  }
  void integer(const std::string& key, long& slot) const {
    if (const Entry* e = find(key)) slot = to_long(origin_, *e);
  }
  void integer(const std::string& key, int& slot) const {
    if (const Entry* e = find(key)) slot = static_cast<int>(to_long(origin_, *e));
  }
  void uint64(const std::string& key, std::uint64_t& slot) const {
    if (const Entry* e = find(key)) slot = to_u64(origin_, *e);
  }
  void text(const std::string& key, std::string& slot) const {
    if (const Entry* e = find(key)) slot = e->value;
  }
  void require_range(const std::string& key, bool ok,
                     const std::string& what) const {
    if (ok) return;
    const Entry* e = find(key);
    fail(origin_, e ? e->line : 0, key + " " + what);
  }

 private:
  const std::string& origin_;
  const std::map<std::string, Entry>& kv_;
};

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  Sections sections;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  long line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(origin, line_no, "malformed section header '" + line + "'");
      current = trim(line.substr(1, line.size() - 2));
      if (schema().find(current) == schema().end())
        fail(origin, line_no, "unknown section '" + current + "'");
      sections[current];  // a section may legitimately stay empty
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(origin, line_no, "expected 'key = value', got '" + line + "'");
    if (current.empty())
      fail(origin, line_no, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& allowed = schema().at(current);
    if (allowed.find(key) == allowed.end())
      fail(origin, line_no,
           "unknown key '" + key + "' in section [" + current + "]");
    auto [it, inserted] = sections[current].emplace(key, Entry{value, line_no});
    if (!inserted)
      fail(origin, line_no, "duplicate key '" + key + "' in section [" +
                                current + "]");
  }

  RunConfig c;
  c.text = text;
  static const std::map<std::string, Entry> kEmpty;
  auto block = [&](const char* name) -> Reader {
    const auto it = sections.find(name);
    return Reader(origin, it == sections.end() ? kEmpty : it->second);
  };

  {
    const Reader r = block("model");
    r.num("m0", c.model.m0);
    r.num("gamma_kbar", c.model.gamma_kbar);
    r.num("b", c.model.b);
    r.num("sigma_delta", c.model.sigma_delta);
    r.integer("kbar", c.model.kbar);
    r.num("g_c", c.model.g_c);
    r.num("g_d", c.model.g_d);
    r.num("r_f", c.model.r_f);
    r.num("sigma_c", c.model.sigma_c);
    r.num("sigma_d_bar", c.model.sigma_d_bar);
    r.num("rho_cd", c.model.rho_cd);
    r.num("q_bar", c.model.q_bar);
    r.num("alpha", c.model.alpha);
    try {
      c.model.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(origin + ": [model] " + e.what());
    }
  }
  {
    const Reader r = block("filter");
    r.integer("n_particles", c.filter.n_particles);
    r.text("kernel", c.filter.kernel);
    r.text("bandwidth_policy", c.filter.bandwidth_policy);
    if (const Entry* e = r.find("bandwidth_value"))
      c.filter.bandwidth_value = to_double(origin, *e);
    if (const Entry* e = r.find("bandwidth_exponent"))
      c.filter.bandwidth_exponent = to_double(origin, *e);
    r.num("adaptive_multiplier", c.filter.adaptive_multiplier);
    r.text("resampling", c.filter.resampling);
    r.uint64("seed", c.filter.seed);
    if (const Entry* e = r.find("max_escalations")) {
      c.filter.max_escalations = static_cast<int>(to_long(origin, *e));
      r.require_range("max_escalations", *c.filter.max_escalations >= 0,
                      "must be >= 0");
    }
    r.require_range("n_particles", c.filter.n_particles >= 2, "must be >= 2");
    r.require_range("adaptive_multiplier", c.filter.adaptive_multiplier > 0.0,
                    "must be positive");
    if (c.filter.bandwidth_value)
      r.require_range("bandwidth_value", *c.filter.bandwidth_value > 0.0,
                      "must be positive");
    try {
      Kernel::from_name(c.filter.kernel);
      BandwidthPolicy::from_name(c.filter.bandwidth_policy);
      resampling_from_name(c.filter.resampling);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ": [filter] " + e.what());
    }
  }
  {
    const Reader r = block("estimation");
    r.integer("s", c.estimation.s);
    r.text("kind", c.estimation.kind);
    r.integer("budget", c.estimation.budget);
    r.integer("t_sim", c.estimation.t_sim);
    r.integer("nw_lags", c.estimation.nw_lags);
    r.integer("mle_starts", c.estimation.mle_starts);
    r.integer("mle_evals", c.estimation.mle_evals);
    r.require_range("s", c.estimation.s >= 1, "must be >= 1");
    r.require_range("budget", c.estimation.budget >= 1, "must be >= 1");
    r.require_range("t_sim", c.estimation.t_sim >= 0, "must be >= 0");
    r.require_range("nw_lags", c.estimation.nw_lags >= 0, "must be >= 0");
    r.require_range("mle_starts", c.estimation.mle_starts >= 1,
                    "must be >= 1");
    r.require_range("mle_evals", c.estimation.mle_evals >= 1, "must be >= 1");
    try {
      ii::eta_from_name(c.estimation.kind);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ": [estimation] " + e.what());
    }
  }
  {
    const Reader r = block("sim");
    r.integer("t", c.sim.t);
    r.require_range("t", c.sim.t >= 1, "must be >= 1");
  }
  {
    const Reader r = block("accuracy");
    r.integer("t", c.accuracy.t);
    if (const Entry* e = r.find("n_grid")) {
      c.accuracy.n_grid.clear();
      for (const Entry& item : split_list(*e))
        c.accuracy.n_grid.push_back(to_long(origin, item));
    }
    r.integer("replications", c.accuracy.replications);
    r.text("generator", c.accuracy.generator);
    r.num("sigma_delta", c.accuracy.sigma_delta);
    r.require_range("t", c.accuracy.t >= 1, "must be >= 1");
    r.require_range("n_grid", !c.accuracy.n_grid.empty(),
                    "must list at least one particle count");
    for (const long n : c.accuracy.n_grid)
      r.require_range("n_grid", n >= 2, "entries must be >= 2");
    r.require_range("replications", c.accuracy.replications >= 1,
                    "must be >= 1");
    r.require_range("generator",
                    c.accuracy.generator == "fi" ||
                        c.accuracy.generator == "learning",
                    "must be 'fi' or 'learning'");
    r.require_range("sigma_delta", c.accuracy.sigma_delta >= 0.0,
                    "must be >= 0");
  }
  {
    const Reader r = block("var");
    r.integer("warmup", c.var.warmup);
    if (const Entry* e = r.find("levels")) {
      c.var.levels.clear();
      for (const Entry& item : split_list(*e))
        c.var.levels.push_back(to_double(origin, item));
    }
    if (const Entry* e = r.find("horizons")) {
      c.var.horizons.clear();
      for (const Entry& item : split_list(*e))
        c.var.horizons.push_back(static_cast<int>(to_long(origin, item)));
    }
    r.integer("window", c.var.window);
    r.integer("paths_per_particle", c.var.paths_per_particle);
    r.require_range("warmup", c.var.warmup >= 0, "must be >= 0");
    r.require_range("levels", !c.var.levels.empty(),
                    "must list at least one level");
    for (const double p : c.var.levels)
      r.require_range("levels", p > 0.0 && p < 1.0,
                      "entries must lie in (0,1)");
    r.require_range("horizons", !c.var.horizons.empty(),
                    "must list at least one horizon");
    for (const int h : c.var.horizons)
      r.require_range("horizons", h >= 1, "entries must be >= 1");
    r.require_range("window", c.var.window >= 1, "must be >= 1");
    r.require_range("paths_per_particle", c.var.paths_per_particle >= 1,
                    "must be >= 1");
  }
  {
    const Reader r = block("io");
    if (const Entry* e = r.find("returns")) c.io.returns_path = e->value;
    if (const Entry* e = r.find("increments_a")) c.io.increments_a = e->value;
    if (const Entry* e = r.find("increments_b")) c.io.increments_b = e->value;
  }
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace sos::cfg
