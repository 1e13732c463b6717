#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string_view>

#include "sos/full_information.hpp"
#include "sos/learning_economy.hpp"
#include "sos/optim.hpp"

namespace sos::ii {

// Completion statistic paired with the observed-state likelihood block: the
// signal-noise scale sigma_delta is identified off return asymmetry, captured
// either by the sample median or the third moment.
enum class EtaKind { median, third_moment };
EtaKind eta_from_name(std::string_view name);
std::string_view eta_name(EtaKind kind);

double eta_statistic(const Eigen::VectorXd& returns, EtaKind kind);

struct AuxOptions {
  fi::FIMleOptions mle{};
  // Optional warm start for the likelihood block; when set, the fit runs a
  // single start from this point (used for simulated auxiliary fits, where
  // the optimum moves smoothly with the structural parameters).
  std::optional<Eigen::Vector3d> warm_start;
};

// Fitted auxiliary statistic vector mu = (m0, gamma_kbar, b, eta).
struct AuxiliaryEstimate {
  fi::FIMleResult fi;
  EtaKind kind = EtaKind::median;
  double eta = 0.0;
  Eigen::Vector4d as_vector() const;
};

AuxiliaryEstimate auxiliary_estimator(const Eigen::VectorXd& returns,
                                      EtaKind kind, const fi::FIParams& tmpl,
                                      const AuxOptions& opts = {});

// Auxiliary estimate on a path of length s * t simulated at theta; common
// random numbers (the seed) keep the map theta -> estimate smooth.
AuxiliaryEstimate binding_function(const econ::StructuralParams& theta, long s,
                                   long t, std::uint64_t seed, EtaKind kind,
                                   const AuxOptions& opts = {});

// Quadratic distance between the data statistic and its simulated
// counterpart under theta.
double ii_objective(const econ::StructuralParams& theta,
                    const Eigen::Vector4d& mu_data, long s, long t,
                    const Eigen::Matrix4d& weight, std::uint64_t seed,
                    EtaKind kind, const AuxOptions& opts = {});

// Long-run covariance of the rows of psi (T x k):
// Gamma_0 + sum_v w_v (Gamma_v + Gamma_v'), w_v = 1 - v/(lags+1),
// Gamma_v = T^-1 sum_t psi_t psi_{t-v}'.
Eigen::MatrixXd newey_west(const Eigen::MatrixXd& psi, int lags);

// Per-observation scores of the auxiliary statistic at the fitted point:
// three likelihood-score columns (unconstrained coordinates) plus the eta
// estimating-equation column.
Eigen::MatrixXd auxiliary_scores(const Eigen::VectorXd& returns,
                                 const AuxiliaryEstimate& aux);

// Asymptotic covariance of sqrt(T) (mu_hat - mu), natural units, by the
// sandwich J0^-1 I0 J0^-1 with a lag-window long-run score covariance.
Eigen::Matrix4d auxiliary_sandwich(const Eigen::VectorXd& returns,
                                   const AuxiliaryEstimate& aux, int nw_lags);

// Jacobian d mu / d zeta' of the simulated binding function at theta, where
// zeta are the unconstrained structural coordinates; central differences
// under common random numbers.
Eigen::Matrix4d binding_jacobian(const econ::StructuralParams& theta, long s,
                                 long t, std::uint64_t seed, EtaKind kind,
                                 const AuxOptions& opts, double rel_step = 1e-3);

// Assembles the estimator covariance from its pieces:
//   (1 + 1/s) / t * D J^-1 W* J^-T D,
// where J is the binding-function Jacobian in unconstrained coordinates and
// the diagonal D rescales unconstrained into natural parameter units.
Eigen::Matrix4d ii_covariance(const Eigen::Matrix4d& binding_jac,
                              const Eigen::Matrix4d& wstar,
                              const Eigen::Vector4d& natural_scale, long s,
                              long t);

struct IIOptions {
  long s = 20;               // simulation multiple
  long t = 0;                // simulated block length; 0 = data length
  std::uint64_t seed = 0;
  EtaKind kind = EtaKind::median;
  Eigen::Matrix4d weight = Eigen::Matrix4d::Identity();
  econ::StructuralParams tmpl{};  // calibrated block, kbar, starting sigma_delta
  AuxOptions aux{};          // controls for the data auxiliary fit
  AuxOptions aux_sim{};      // controls for simulated fits (warm started)
  int max_evals = 250;       // structural search budget
  double objective_floor = 1e-9;
  double jacobian_rel_step = 1e-3;
  int nw_lags = 10;
};

struct IIResult {
  econ::StructuralParams theta;
  double objective = 0.0;
  Eigen::Matrix4d covariance;   // of the estimator (already divided by T)
  Eigen::Vector4d std_errors;
  AuxiliaryEstimate data_aux;
  Eigen::Vector4d mu_data;
  NelderMeadResult search;
};

// Indirect inference for theta = (m0, gamma_kbar, b, sigma_delta): match the
// auxiliary statistic of the data with its simulated counterpart, then report
// the usual (1 + 1/S) sandwich standard errors.
IIResult estimate_ii(const Eigen::VectorXd& returns, const IIOptions& opts);

// Score-based objective: average auxiliary score of the simulated path,
// evaluated at the data's fitted auxiliary statistic, weighted quadratic form.
double emm_objective(const econ::StructuralParams& theta,
                     const AuxiliaryEstimate& data_aux, long s, long t,
                     const Eigen::Matrix4d& weight, std::uint64_t seed);

// Simulated method of moments on (m2, m3, m4, E[r_{t-1} r_t^2]).
Eigen::Vector4d smm_moments(const Eigen::VectorXd& returns);
IIResult estimate_smm(const Eigen::VectorXd& returns, const IIOptions& opts);

// Sandwich standard errors of the observed-state ML block alone (natural
// units of m0, gamma_kbar, b).
Eigen::Vector3d fi_standard_errors(const Eigen::VectorXd& returns,
                                   const fi::FIParams& at, int nw_lags = 10);

// Unconstrained structural coordinates
// (logit(m0-1), logit(gamma), ln(b-1), ln sigma_delta).
Eigen::Vector4d theta_to_unconstrained(const econ::StructuralParams& p);
econ::StructuralParams theta_from_unconstrained(
    const Eigen::Vector4d& z, const econ::StructuralParams& tmpl);

}  // namespace sos::ii
