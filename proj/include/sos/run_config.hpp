#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sos/learning_economy.hpp"

namespace sos::cfg {

struct FilterBlock {
  long n_particles = 10000;
  std::string kernel = "gaussian";
  std::string bandwidth_policy = "adaptive_scale";
  std::optional<double> bandwidth_value;     // h for fixed, h1 for power_law
  std::optional<double> bandwidth_exponent;  // power_law only
  double adaptive_multiplier = 1.0;
  std::string resampling = "residual_stratified";
  std::uint64_t seed = 0;  // master seed; the --seed flag overrides it
  std::optional<int> max_escalations;
};

struct EstimationBlock {
  long s = 20;
  std::string kind = "median";
  int budget = 250;
  long t_sim = 0;  // simulated block length; 0 = data length
  int nw_lags = 10;
  int mle_starts = 5;
  int mle_evals = 400;
};

struct SimBlock {
  long t = 10000;
};

struct AccuracyBlock {
  long t = 2000;
  std::vector<long> n_grid{1000, 10000, 100000};
  int replications = 20;
  std::string generator = "fi";  // fi | learning
  double sigma_delta = 0.01;     // signal noise of the filtering model
};

struct VarBlock {
  long warmup = 250;
  std::vector<double> levels{0.01, 0.05, 0.10};
  std::vector<int> horizons{1, 5};
  int window = 60;
  int paths_per_particle = 10;
};

struct IoBlock {
  std::optional<std::string> returns_path;
  std::optional<std::string> increments_a;
  std::optional<std::string> increments_b;
};

// Parsed and range-checked experiment description. Sections and keys outside
// the schema are rejected; every numeric range is enforced at parse time.
struct RunConfig {
  econ::StructuralParams model{};
  FilterBlock filter{};
  EstimationBlock estimation{};
  SimBlock sim{};
  AccuracyBlock accuracy{};
  VarBlock var{};
  IoBlock io{};
  std::string text;  // raw file contents; hashed into artifacts
};

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin);
RunConfig parse_config_file(const std::string& path);

// 64-bit FNV-1a, used to stamp artifacts with the exact configuration.
std::uint64_t fnv1a(const std::string& text);

}  // namespace sos::cfg
