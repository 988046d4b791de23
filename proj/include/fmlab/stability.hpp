#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmlab/core/rng.hpp"
#include "fmlab/core/types.hpp"
#include "fmlab/fields.hpp"
#include "fmlab/ode.hpp"

namespace fmlab {

// Multipliers for the ISS and contraction inequalities of a ControlSynth
// field with M blocks of widths k_j. Diagonal multipliers are stored as full
// matrices and checked for diagonality.
struct StabilityCertificate {
  // ISS
  Mat P;                           // d x d
  std::vector<Mat> Lambda;         // k_j x k_j
  Mat Xi0;                         // d x d
  std::vector<Mat> Xi;             // k_s x k_s, s = 1..M
  std::vector<Mat> Upsilon0;       // k_j x k_j, pairs (0, j)
  std::vector<Mat> Upsilon;        // k_s x k_r, pairs s < r in row-major order
  Mat Phi;                         // d x d
  // Contraction
  Mat P_tilde;                     // d x d
  std::vector<Mat> Lambda_tilde;   // k_j x k_j
  Mat Xi_tilde0;                   // d x d
  std::vector<Mat> Gamma;          // k_j x k_j
  std::vector<Mat> Omega;          // k_j x k_j
  std::vector<Mat> Upsilon_tilde;  // k_j x k_r, all pairs (j, r) row-major
  double gamma = 1.0;
  double theta = 1.0;
  // Activation decomposition indices; every menu activation is unbounded
  // with an unbounded integral, so both equal M.
  int omega_idx = 0;
  int zeta_idx = 0;

  // All-zero multipliers (Phi = I, gamma = theta = 1) shaped for `field`.
  static StabilityCertificate zeros_for(const ControlSynthField& field);
  static int pair_index(int s, int r, int blocks);  // s < r, zero-based
};

nlohmann::json certificate_to_json(const StabilityCertificate& cert);
// Missing keys keep the zeros_for(field) defaults.
StabilityCertificate certificate_from_json(const nlohmann::json& j, const ControlSynthField& field);

// Structural problems (shape, symmetry, diagonality, definiteness, sign).
std::vector<std::string> certificate_structure_violations(const StabilityCertificate& cert,
                                                          const ControlSynthField& field);

// Blocks ordered [x (d), f_1 (k_1) .. f_M (k_M), g (d)]. Pairwise blocks use
// the Gram form (W_s W_s^T) Upsilon_{s,r} (W_r W_r^T).
Mat assemble_Q(const ControlSynthField& field, const StabilityCertificate& cert);
// Blocks ordered [xi (d), p (sum k), f (sum k)].
Mat assemble_Qtilde(const ControlSynthField& field, const StabilityCertificate& cert);

inline constexpr double kLmiTol = 1e-9;

struct CertificateVerdict {
  bool iss_ok = false;
  bool contraction_ok = false;
  double lambda_max_Q = 0.0;
  double lambda_max_Qtilde = 0.0;
  double iss_positivity_margin = 0.0;       // lambda_min of P + sum W^T Lambda W
  double iss_sum_margin = 0.0;              // lambda_min of the multiplier sum
  double contraction_sum_margin = 0.0;
  std::vector<std::string> violations;
};

nlohmann::json verdict_to_json(const CertificateVerdict& v);

CertificateVerdict verify_iss(const ControlSynthField& field, const StabilityCertificate& cert,
                              double tol = kLmiTol);
CertificateVerdict verify_contraction(const ControlSynthField& field,
                                      const StabilityCertificate& cert, double tol = kLmiTol);
// Both checks merged into one verdict.
CertificateVerdict verify_certificate(const ControlSynthField& field,
                                      const StabilityCertificate& cert, double tol = kLmiTol);

// V~(xi) = xi^T P~ xi + 2 sum_j sum_i Lambda~^j_i int_0^{(W_j xi)_i} f_j^i.
double lyapunov_value(const StabilityCertificate& cert, const Vec& xi,
                      const ControlSynthField& field);

struct ContractionRegion {
  double level = 0.0;  // +inf when global
  bool global = false;
  std::function<bool(const Vec&)> contains;
};

struct RegionOptions {
  double radius = 5.0;       // probing box half-width R; growth is checked at 2R
  int grid_per_axis = 81;
  int random_probes = 100000;  // used instead of a grid in high dimension
  double growth_tol = 1e-6;    // relative
  std::uint64_t seed = 0;
};

// Sublevel threshold of V over a probing box. Growth between the R and 2R
// boxes flags an unbounded V and a global region.
ContractionRegion contraction_region(const std::function<double(const Vec&)>& V, int dim,
                                     const RegionOptions& opts = {});
// Refuses (ConfigError) unless the certificate passes verify_contraction.
ContractionRegion contraction_region(const StabilityCertificate& cert,
                                     const ControlSynthField& field,
                                     const RegionOptions& opts = {});

struct ContractionProbe {
  std::vector<double> times;
  std::vector<double> norms;  // ||xi(t_k)||
  double ratio = 0.0;         // ||xi(horizon)|| / ||xi(0)||, 0 when d0 = 0
};

SolverConfig tight_probe_solver();

// Solves from x0 and x0 + d0 on one shared grid over [0, horizon].
ContractionProbe contraction_probe(const VectorField& field, const Vec& x0, const Vec& d0,
                                   double horizon, const SolverConfig& solver = tight_probe_solver());
// ControlSynth field with both trajectories driven by the same input u.
ContractionProbe contraction_probe(ControlSynthField& field, const Vec& u, const Vec& x0,
                                   const Vec& d0, double horizon,
                                   const SolverConfig& solver = tight_probe_solver());

struct SlopeInequalityCheck {
  long probes = 0;
  long violations = 0;
  double worst_excess = 0.0;  // max of lhs - rhs
};

// Checks p^T p <= xi^T W^T L p with p = f(W(x + xi)) - f(W x) on random
// (x, xi, W) draws.
SlopeInequalityCheck slope_inequality_check(const Activation& act, long probes, Rng& rng, int dim = 3, int width = 4);

struct SearchOptions {
  std::vector<double> grid = {1e-3, 1e-2, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0};
  double slack = 1e-3;  // added to Gamma_j and Omega_j beyond the Lipschitz minimum
  double tol = kLmiTol;
};

struct SearchResult {
  StabilityCertificate certificate;
  CertificateVerdict verdict;
  long candidates = 0;
};

// Grid search over scalar multiples of the identity for every multiplier,
// minimizing lambda_max of Q and Q~ separately. Every result is re-verified.
SearchResult search_certificate(const ControlSynthField& field, const SearchOptions& opts = {});

}  // namespace fmlab
