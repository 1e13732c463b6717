// Command-line front end: experiment orchestration around the library
// modules, with deterministic, stamped artifacts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sos/errors.hpp"
#include "sos/filter.hpp"
#include "sos/full_information.hpp"
#include "sos/indirect_inference.hpp"
#include "sos/learning_economy.hpp"
#include "sos/returns_io.hpp"
#include "sos/risk_forecast.hpp"
#include "sos/run_config.hpp"
#include "sos/stats.hpp"
#include "sos/version.hpp"

namespace {

using json = nlohmann::ordered_json;
using sos::cfg::RunConfig;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  int workers = 1;
  std::string out_dir = ".";
};

struct Context {
  RunConfig cfg;
  std::uint64_t seed = 0;
  int workers = 1;
  std::filesystem::path out;
  std::uint64_t config_hash = 0;
};

Context make_context(const CommonArgs& a) {
  Context ctx;
  ctx.cfg = sos::cfg::parse_config_file(a.config_path);
  ctx.seed = a.seed_override ? *a.seed_override : ctx.cfg.filter.seed;
  if (a.workers < 1) throw sos::ConfigError("--workers must be >= 1");
  ctx.workers = a.workers;
  ctx.out = a.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(ctx.out, ec);
  if (ec)
    throw sos::DataError(a.out_dir + ": cannot create output directory");
  ctx.config_hash = sos::cfg::fnv1a(ctx.cfg.text);
  return ctx;
}

std::string hash_string(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

json stamp(const Context& ctx, const char* command) {
  json j;
  j["command"] = command;
  j["config_hash"] = hash_string(ctx.config_hash);
  j["seed"] = ctx.seed;
  j["versions"] = {{"sos", sos::kVersion}};
  return j;
}

void write_json(const std::filesystem::path& p, const json& j) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw sos::DataError(p.string() + ": cannot open for writing");
  out << j.dump(2) << "\n";
  out.flush();
  if (!out) throw sos::DataError(p.string() + ": write failed");
}

// CSV artifact: three '#'-prefixed stamp lines, a header row, then data rows
// with numbers at full precision.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& p, const Context& ctx)
      : path_(p.string()) {
    f_ = std::fopen(path_.c_str(), "wb");
    if (!f_) throw sos::DataError(path_ + ": cannot open for writing");
    std::fprintf(f_, "# config_hash = %s\n",
                 hash_string(ctx.config_hash).c_str());
    std::fprintf(f_, "# seed = %llu\n",
                 static_cast<unsigned long long>(ctx.seed));
    std::fprintf(f_, "# sos_version = %s\n", sos::kVersion);
  }
  ~CsvWriter() {
    if (f_) std::fclose(f_);
  }
  void header(const std::string& line) { std::fprintf(f_, "%s\n", line.c_str()); }
  void field(const char* s) {
    sep();
    std::fprintf(f_, "%s", s);
  }
  void field(const std::string& s) { field(s.c_str()); }
  void field(double x) {
    sep();
    std::fprintf(f_, "%.17g", x);
  }
  void field(long x) {
    sep();
    std::fprintf(f_, "%ld", x);
  }
  void field(int x) {
    sep();
    std::fprintf(f_, "%d", x);
  }
  void endrow() {
    std::fputc('\n', f_);
    first_ = true;
  }
  void close() {
    if (f_ && std::fclose(f_) != 0) {
      f_ = nullptr;
      throw sos::DataError(path_ + ": write failed");
    }
    f_ = nullptr;
  }

 private:
  void sep() {
    if (!first_) std::fputc(',', f_);
    first_ = false;
  }
  std::string path_;
  std::FILE* f_ = nullptr;
  bool first_ = true;
};

sos::econ::StructuralParams calibrated_model(const Context& ctx) {
  return ctx.cfg.model.has_alpha() ? ctx.cfg.model
                                   : sos::econ::calibrate(ctx.cfg.model);
}

sos::FilterConfig filter_config(const Context& ctx, long n_override = 0) {
  const auto& fb = ctx.cfg.filter;
  sos::FilterConfig fc;
  fc.n_particles = n_override > 0 ? n_override : fb.n_particles;
  fc.kernel = sos::Kernel::from_name(fb.kernel, 1);
  if (fb.bandwidth_policy == "fixed") {
    if (!fb.bandwidth_value)
      throw sos::ConfigError("[filter] fixed bandwidth needs bandwidth_value");
    fc.bandwidth = sos::BandwidthPolicy::fixed(*fb.bandwidth_value);
  } else if (fb.bandwidth_policy == "power_law") {
    if (!fb.bandwidth_value)
      throw sos::ConfigError(
          "[filter] power_law bandwidth needs bandwidth_value (the N=1 "
          "coefficient)");
    fc.bandwidth = sos::BandwidthPolicy::power_law(
        *fb.bandwidth_value, fb.bandwidth_exponent.value_or(0.0));
  } else {
    fc.bandwidth = sos::BandwidthPolicy::adaptive_scale(fb.adaptive_multiplier);
  }
  fc.resampling = sos::resampling_from_name(fb.resampling);
  fc.seed = ctx.seed;
  fc.workers = ctx.workers;
  if (fb.max_escalations) fc.max_bandwidth_escalations = *fb.max_escalations;
  return fc;
}

sos::io::ReturnSeries load_returns(const Context& ctx) {
  if (!ctx.cfg.io.returns_path)
    throw sos::ConfigError("[io] returns path is required for this command");
  sos::io::ReturnSeries s = sos::io::read_returns_csv(*ctx.cfg.io.returns_path);
  if (s.size() < 1)
    throw sos::DataError(*ctx.cfg.io.returns_path + ": empty return series");
  return s;
}

using EconState = sos::econ::EconomyState;

std::vector<sos::MomentFn<EconState>> pd_moments(
    const sos::econ::LearningEconomy& engine) {
  std::vector<sos::MomentFn<EconState>> fns;
  fns.push_back([&engine](const EconState& s) {
    return engine.price_dividend(s.belief);
  });
  fns.push_back(
      [&engine](const EconState& s) { return engine.pd()(s.nature.index); });
  return fns;
}

// ---------------------------------------------------------------- simulate

void cmd_simulate(const Context& ctx) {
  const auto model = calibrated_model(ctx);
  const Eigen::VectorXd r =
      sos::econ::simulate_returns(model, ctx.cfg.sim.t, ctx.seed);
  const auto series = sos::io::with_synthetic_dates(r);
  const std::vector<std::string> stamps = {
      "config_hash = " + hash_string(ctx.config_hash),
      "seed = " + std::to_string(ctx.seed),
      "sos_version = " + std::string(sos::kVersion)};
  sos::io::write_returns_csv((ctx.out / "returns.csv").string(), series,
                             stamps);
  json j = stamp(ctx, "simulate");
  j["t"] = ctx.cfg.sim.t;
  j["kbar"] = model.kbar;
  j["alpha"] = model.alpha;
  j["output"] = "returns.csv";
  write_json(ctx.out / "simulate.json", j);
}

// ------------------------------------------------------------------ filter

void cmd_filter(const Context& ctx) {
  const auto series = load_returns(ctx);
  const auto model = calibrated_model(ctx);
  const auto sm = sos::econ::as_state_model(model);
  const sos::econ::LearningEconomy engine(model);
  const auto fns = pd_moments(engine);
  const Eigen::MatrixXd obs = series.returns;
  const sos::FilterConfig fc = filter_config(ctx);
  const sos::FilterOutput out = sos::run_filter<EconState>(
      *sm, obs, fc, std::span<const sos::MomentFn<EconState>>(fns));

  CsvWriter csv(ctx.out / "filter_steps.csv", ctx);
  csv.header("t,increment,ess,bandwidth,escalations,q_belief,q_nature");
  for (const sos::FilterStep& s : out.steps) {
    csv.field(s.t);
    csv.field(s.increment);
    csv.field(s.ess);
    csv.field(s.bandwidth);
    csv.field(s.escalations);
    csv.field(s.moments(0));
    csv.field(s.moments(1));
    csv.endrow();
  }
  csv.close();

  json j = stamp(ctx, "filter");
  j["t"] = series.size();
  j["n_particles"] = fc.n_particles;
  j["loglik"] = out.loglik;
  j["steps"] = "filter_steps.csv";
  write_json(ctx.out / "filter.json", j);
}

// ------------------------------------------------------------- estimate-fi

void cmd_estimate_fi(const Context& ctx) {
  const auto series = load_returns(ctx);
  const auto tmpl = sos::fi::FIParams::from_structural(calibrated_model(ctx));
  sos::fi::FIMleOptions mo;
  mo.starts = ctx.cfg.estimation.mle_starts;
  mo.max_evals = ctx.cfg.estimation.mle_evals;
  mo.seed = ctx.seed;
  const sos::fi::FIMleResult res = sos::fi::fi_mle(series.returns, tmpl, mo);
  const Eigen::Vector3d se = sos::ii::fi_standard_errors(
      series.returns, res.params, ctx.cfg.estimation.nw_lags);

  json j = stamp(ctx, "estimate-fi");
  j["t"] = series.size();
  j["estimate"] = {{"m0", res.params.m0},
                   {"gamma_kbar", res.params.gamma_kbar},
                   {"b", res.params.b}};
  j["std_errors"] = {se(0), se(1), se(2)};
  j["loglik"] = res.loglik;
  j["best_start"] = res.best_start;
  json starts = json::array();
  for (const auto& s : res.starts)
    starts.push_back({{"loglik", s.loglik},
                      {"evaluations", s.evaluations},
                      {"converged", s.converged}});
  j["starts"] = starts;
  write_json(ctx.out / "fi_estimate.json", j);
}

// -------------------------------------------------- estimate-ii / -smm

sos::ii::IIOptions ii_options(const Context& ctx) {
  sos::ii::IIOptions o;
  o.s = ctx.cfg.estimation.s;
  o.t = ctx.cfg.estimation.t_sim;
  o.seed = ctx.seed;
  o.kind = sos::ii::eta_from_name(ctx.cfg.estimation.kind);
  o.tmpl = calibrated_model(ctx);
  o.max_evals = ctx.cfg.estimation.budget;
  o.nw_lags = ctx.cfg.estimation.nw_lags;
  o.aux.mle.starts = ctx.cfg.estimation.mle_starts;
  o.aux.mle.max_evals = ctx.cfg.estimation.mle_evals;
  o.aux.mle.seed = ctx.seed;
  o.aux_sim.mle.max_evals = ctx.cfg.estimation.mle_evals;
  o.aux_sim.mle.seed = ctx.seed;
  return o;
}

json theta_json(const sos::econ::StructuralParams& p) {
  return {{"m0", p.m0},
          {"gamma_kbar", p.gamma_kbar},
          {"b", p.b},
          {"sigma_delta", p.sigma_delta}};
}

json matrix_json(const Eigen::Matrix4d& m) {
  json rows = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int k = 0; k < 4; ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Eigen::Vector4d& v) {
  return {v(0), v(1), v(2), v(3)};
}

void fill_ii_result(json& j, const sos::ii::IIResult& res) {
  j["theta"] = theta_json(res.theta);
  j["objective"] = res.objective;
  j["std_errors"] = vector_json(res.std_errors);
  j["covariance"] = matrix_json(res.covariance);
  j["mu_data"] = vector_json(res.mu_data);
  j["evaluations"] = res.search.evaluations;
  j["converged"] = res.search.converged;
}

void cmd_estimate_ii(const Context& ctx) {
  const auto series = load_returns(ctx);
  const sos::ii::IIOptions opts = ii_options(ctx);
  const sos::ii::IIResult res = sos::ii::estimate_ii(series.returns, opts);
  json j = stamp(ctx, "estimate-ii");
  j["t"] = series.size();
  j["kind"] = std::string(sos::ii::eta_name(opts.kind));
  j["s"] = opts.s;
  fill_ii_result(j, res);
  j["auxiliary"] = {{"m0", res.data_aux.fi.params.m0},
                    {"gamma_kbar", res.data_aux.fi.params.gamma_kbar},
                    {"b", res.data_aux.fi.params.b},
                    {"eta", res.data_aux.eta},
                    {"loglik", res.data_aux.fi.loglik}};
  write_json(ctx.out / "ii_estimate.json", j);
}

void cmd_estimate_smm(const Context& ctx) {
  const auto series = load_returns(ctx);
  const sos::ii::IIOptions opts = ii_options(ctx);
  const sos::ii::IIResult res = sos::ii::estimate_smm(series.returns, opts);
  json j = stamp(ctx, "estimate-smm");
  j["t"] = series.size();
  j["s"] = opts.s;
  fill_ii_result(j, res);
  write_json(ctx.out / "smm_estimate.json", j);
}

// ------------------------------------------------------------- mc-accuracy

double pseudo_r2(const std::vector<sos::FilterStep>& steps,
                 const Eigen::VectorXd& truth, int moment_idx) {
  const long t = truth.size();
  const double tbar = truth.mean();
  double num = 0.0, den = 0.0;
  for (long i = 0; i < t; ++i) {
    const double est = steps[static_cast<std::size_t>(i)].moments(moment_idx);
    num += (est - truth(i)) * (est - truth(i));
    den += (est - tbar) * (est - tbar);
  }
  return 1.0 - num / den;
}

void cmd_mc_accuracy(const Context& ctx) {
  const auto& ac = ctx.cfg.accuracy;
  const auto gen_model = calibrated_model(ctx);
  sos::econ::StructuralParams filter_model = gen_model;
  filter_model.sigma_delta = ac.sigma_delta;

  const std::uint64_t path_seed = sos::derive_seed(ctx.seed, "accuracy-path");
  Eigen::VectorXd returns;
  std::optional<sos::econ::SimulatedPath> truth;
  double reference = std::numeric_limits<double>::quiet_NaN();
  if (ac.generator == "fi") {
    const auto fip = sos::fi::FIParams::from_structural(gen_model);
    returns = sos::fi::simulate_returns(fip, ac.t, path_seed);
    reference = sos::fi::fi_filter(returns, fip).loglik;
  } else {
    truth = sos::econ::simulate_path(gen_model, ac.t, path_seed);
    returns = truth->returns;
  }

  const auto sm = sos::econ::as_state_model(filter_model);
  const sos::econ::LearningEconomy engine(filter_model);
  const auto fns = pd_moments(engine);
  const Eigen::MatrixXd obs = returns;
  const std::uint64_t run_base = sos::derive_seed(ctx.seed, "accuracy-run");

  CsvWriter csv(ctx.out / "accuracy.csv", ctx);
  csv.header(
      "n,replications,loglik_mean,loglik_sd,loglik_rmse,reference_loglik,"
      "relative_rmse,r2_q_belief,r2_q_nature");
  json rows = json::array();
  for (std::size_t gi = 0; gi < ac.n_grid.size(); ++gi) {
    const long n = ac.n_grid[gi];
    std::vector<double> lls;
    double r2b = std::numeric_limits<double>::quiet_NaN();
    double r2n = std::numeric_limits<double>::quiet_NaN();
    for (int rep = 0; rep < ac.replications; ++rep) {
      sos::FilterConfig fc = filter_config(ctx, n);
      fc.seed = sos::derive_seed(
          run_base, static_cast<std::uint64_t>(gi) * 1000003ULL +
                        static_cast<std::uint64_t>(rep));
      const sos::FilterOutput out = sos::run_filter<EconState>(
          *sm, obs, fc, std::span<const sos::MomentFn<EconState>>(fns));
      lls.push_back(out.loglik);
      if (rep == 0 && truth) {
        r2b = pseudo_r2(out.steps, truth->q_belief, 0);
        r2n = pseudo_r2(out.steps, truth->q_nature, 1);
      }
    }
    const double m = sos::mean(lls);
    const double sd = lls.size() > 1 ? std::sqrt(sos::variance(lls)) : 0.0;
    double rmse = sd;
    double rel = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(reference)) {
      double acc = 0.0;
      for (const double v : lls) acc += (v - reference) * (v - reference);
      rmse = std::sqrt(acc / static_cast<double>(lls.size()));
      rel = rmse / std::abs(reference);
    }
    csv.field(n);
    csv.field(ac.replications);
    csv.field(m);
    csv.field(sd);
    csv.field(rmse);
    csv.field(reference);
    csv.field(rel);
    csv.field(r2b);
    csv.field(r2n);
    csv.endrow();
    json row;
    row["n"] = n;
    row["loglik_mean"] = m;
    row["loglik_sd"] = sd;
    row["loglik_rmse"] = rmse;
    row["reference_loglik"] = reference;
    row["relative_rmse"] = rel;
    row["r2_q_belief"] = r2b;
    row["r2_q_nature"] = r2n;
    rows.push_back(row);
  }
  csv.close();
  json j = stamp(ctx, "mc-accuracy");
  j["t"] = ac.t;
  j["generator"] = ac.generator;
  j["sigma_delta_filter"] = ac.sigma_delta;
  j["grid"] = rows;
  j["table"] = "accuracy.csv";
  write_json(ctx.out / "accuracy.json", j);
}

// ------------------------------------------------------------ var-backtest

struct ForecastPanel {
  std::vector<sos::risk::VaRForecast> forecasts;
  std::vector<double> realized;
};

void cmd_var_backtest(const Context& ctx) {
  const auto series = load_returns(ctx);
  const Eigen::VectorXd& r = series.returns;
  const long t_max = r.size();
  const auto& vb = ctx.cfg.var;
  const int hmax = *std::max_element(vb.horizons.begin(), vb.horizons.end());
  if (vb.warmup < vb.window)
    throw sos::ConfigError(
        "[var] warmup must cover at least the historical window");
  if (vb.warmup + hmax >= t_max)
    throw sos::ConfigError("[var] sample too short for warmup and horizon");

  const auto model = calibrated_model(ctx);
  const auto sm = sos::econ::as_state_model(model);
  const std::uint64_t var_base = sos::derive_seed(ctx.seed, "var-day");

  // panels[(source, horizon, level)] in deterministic iteration order
  std::map<std::tuple<std::string, int, double>, ForecastPanel> panels;

  sos::StepCallback<EconState> per_step = [&](long t,
                                              const sos::ParticleCloud<
                                                  EconState>& cloud) {
    if (t < vb.warmup) return;
    for (std::size_t hi = 0; hi < vb.horizons.size(); ++hi) {
      const int h = vb.horizons[hi];
      if (t + h > t_max) continue;
      const std::uint64_t day_seed = sos::derive_seed(
          var_base,
          static_cast<std::uint64_t>(t) * 8ULL + static_cast<std::uint64_t>(hi));
      const std::vector<double> draws = sos::risk::predictive_draws(
          cloud, *sm, h, vb.paths_per_particle, day_seed, ctx.workers);
      const double realized = r.segment(t, h).sum();
      for (const double p : vb.levels) {
        ForecastPanel& panel = panels[{"model", h, p}];
        panel.forecasts.push_back(
            sos::risk::var_from_draws(draws, h, p, t));
        panel.realized.push_back(realized);
      }
    }
  };

  const sos::FilterConfig fc = filter_config(ctx);
  sos::run_filter<EconState>(*sm, Eigen::MatrixXd(r), fc, {}, nullptr,
                             per_step);

  // Historical benchmark, one-day horizon.
  for (long t = vb.warmup; t + 1 <= t_max; ++t) {
    for (const double p : vb.levels) {
      ForecastPanel& panel = panels[{"historical", 1, p}];
      panel.forecasts.push_back(
          sos::risk::historical_var(r, t, vb.window, p));
      panel.realized.push_back(r(t));
    }
  }

  CsvWriter csv(ctx.out / "backtest.csv", ctx);
  csv.header(
      "source,level,horizon,evaluation,n,failure_rate,std_error,"
      "reject_at_1pct");
  json rows = json::array();
  auto emit = [&](const std::string& source, const ForecastPanel& panel,
                  const std::string& evaluation, int stride, int hac_lags) {
    std::vector<sos::risk::VaRForecast> fc_sub;
    std::vector<double> rz_sub;
    for (std::size_t i = 0; i < panel.forecasts.size();
         i += static_cast<std::size_t>(stride)) {
      fc_sub.push_back(panel.forecasts[i]);
      rz_sub.push_back(panel.realized[i]);
    }
    const Eigen::VectorXd realized = Eigen::Map<const Eigen::VectorXd>(
        rz_sub.data(), static_cast<Eigen::Index>(rz_sub.size()));
    const sos::risk::BacktestReport rep =
        sos::risk::failure_rate(realized, fc_sub, hac_lags);
    csv.field(source);
    csv.field(rep.level);
    csv.field(rep.horizon);
    csv.field(evaluation);
    csv.field(rep.n);
    csv.field(rep.failure_rate);
    csv.field(rep.std_error);
    csv.field(rep.reject_at_1pct ? 1 : 0);
    csv.endrow();
    json row;
    row["source"] = source;
    row["level"] = rep.level;
    row["horizon"] = rep.horizon;
    row["evaluation"] = evaluation;
    row["n"] = rep.n;
    row["failure_rate"] = rep.failure_rate;
    row["std_error"] = rep.std_error;
    row["reject_at_1pct"] = rep.reject_at_1pct;
    rows.push_back(row);
  };
  for (const auto& [key, panel] : panels) {
    const auto& [source, horizon, level] = key;
    if (horizon == 1) {
      emit(source, panel, "iid", 1, 0);
    } else {
      emit(source, panel, "overlapping", 1, horizon - 1);
      emit(source, panel, "nonoverlapping", horizon, 0);
    }
  }
  csv.close();

  json j = stamp(ctx, "var-backtest");
  j["t"] = t_max;
  j["warmup"] = vb.warmup;
  j["window"] = vb.window;
  j["paths_per_particle"] = vb.paths_per_particle;
  j["results"] = rows;
  j["table"] = "backtest.csv";
  write_json(ctx.out / "backtest.json", j);
}

// ------------------------------------------------------------------- vuong

Eigen::VectorXd read_log_increments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sos::DataError(path + ": cannot open for reading");
  std::string line;
  long line_no = 0;
  int col = -1;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) fields.push_back(item);
    if (col < 0) {
      for (std::size_t i = 0; i < fields.size(); ++i)
        if (fields[i] == "increment") col = static_cast<int>(i);
      if (col < 0)
        throw sos::DataError(path + ":" + std::to_string(line_no) +
                             ": no 'increment' column in header");
      continue;
    }
    if (static_cast<std::size_t>(col) >= fields.size())
      throw sos::DataError(path + ":" + std::to_string(line_no) +
                           ": short row");
    const std::string& v = fields[static_cast<std::size_t>(col)];
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !(x > 0.0))
      throw sos::DataError(path + ":" + std::to_string(line_no) +
                           ": malformed increment '" + v + "'");
    values.push_back(std::log(x));
  }
  if (values.empty()) throw sos::DataError(path + ": no increment rows");
  return Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
}

void cmd_vuong(const Context& ctx) {
  if (!ctx.cfg.io.increments_a || !ctx.cfg.io.increments_b)
    throw sos::ConfigError(
        "[io] increments_a and increments_b are required for 'vuong'");
  const Eigen::VectorXd a = read_log_increments(*ctx.cfg.io.increments_a);
  const Eigen::VectorXd b = read_log_increments(*ctx.cfg.io.increments_b);
  const double stat =
      sos::risk::vuong_test(a, b, ctx.cfg.estimation.nw_lags);
  json j = stamp(ctx, "vuong");
  j["t"] = a.size();
  j["lags"] = ctx.cfg.estimation.nw_lags;
  j["statistic"] = stat;
  write_json(ctx.out / "vuong.json", j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Kernel particle filtering and estimation for the multifrequency "
      "learning economy"};
  app.require_subcommand(1);

  CommonArgs args;
  const std::map<std::string,
                 std::pair<const char*, std::function<void(const Context&)>>>
      commands = {
          {"simulate", {"Simulate a return path from the learning economy",
                        cmd_simulate}},
          {"filter", {"Run the kernel particle filter over a return series",
                      cmd_filter}},
          {"estimate-fi", {"Maximum likelihood for the observed-state model",
                           cmd_estimate_fi}},
          {"estimate-ii", {"Indirect inference for the learning economy",
                           cmd_estimate_ii}},
          {"estimate-smm", {"Simulated method of moments benchmark",
                            cmd_estimate_smm}},
          {"mc-accuracy", {"Likelihood accuracy study over particle counts",
                           cmd_mc_accuracy}},
          {"var-backtest",
           {"Value-at-risk forecasting and failure-rate backtest",
            cmd_var_backtest}},
          {"vuong", {"Likelihood comparison of two filtered models",
                     cmd_vuong}},
      };
  for (const auto& [name, info] : commands) {
    CLI::App* sub = app.add_subcommand(name, info.first);
    sub->add_option("--config", args.config_path, "Run configuration file")
        ->required();
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&args](const std::uint64_t& v) { args.seed_override = v; },
        "Master seed override");
    sub->add_option("--workers", args.workers, "Worker thread count");
    sub->add_option("--out-dir", args.out_dir, "Artifact directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const Context ctx = make_context(args);
    const std::string name = app.get_subcommands().front()->get_name();
    commands.at(name).second(ctx);
    return 0;
  } catch (const sos::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const sos::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 4;
  } catch (const sos::InvalidArgument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const sos::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const sos::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}
