#include "fmlab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fmlab/core/errors.hpp"
#include "fmlab/core/linalg.hpp"
#include "fmlab/io.hpp"

namespace fmlab {

namespace {

Mat sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

std::string block_name(const std::string& base, int j) { return base + std::to_string(j + 1); }

void expect_shape(const Mat& m, Eigen::Index r, Eigen::Index c, const std::string& name) {
  if (m.rows() != r || m.cols() != c)
    throw DimensionError("certificate block " + name + " is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(r) + "x" +
                         std::to_string(c));
}

void expect_count(const std::vector<Mat>& v, std::size_t n, const std::string& name) {
  if (v.size() != n)
    throw DimensionError("certificate list " + name + " has " + std::to_string(v.size()) +
                         " entries, expected " + std::to_string(n));
}

void check_shapes(const ControlSynthField& field, const StabilityCertificate& c) {
  const int d = field.dim();
  const int m = field.block_count();
  const auto mm = static_cast<std::size_t>(m);
  if (field.input_dim() < 0) throw DimensionError("field input dimension unset");
  expect_shape(c.P, d, d, "P");
  expect_shape(c.P_tilde, d, d, "P_tilde");
  expect_shape(c.Xi0, d, d, "Xi0");
  expect_shape(c.Xi_tilde0, d, d, "Xi_tilde0");
  expect_shape(c.Phi, d, d, "Phi");
  expect_count(c.Lambda, mm, "Lambda");
  expect_count(c.Lambda_tilde, mm, "Lambda_tilde");
  expect_count(c.Xi, mm, "Xi");
  expect_count(c.Upsilon0, mm, "Upsilon0");
  expect_count(c.Gamma, mm, "Gamma");
  expect_count(c.Omega, mm, "Omega");
  expect_count(c.Upsilon, mm * (mm > 0 ? mm - 1 : 0) / 2, "Upsilon");
  expect_count(c.Upsilon_tilde, mm * mm, "Upsilon_tilde");
  for (int j = 0; j < m; ++j) {
    const int k = field.width(j);
    expect_shape(c.Lambda[j], k, k, block_name("Lambda", j));
    expect_shape(c.Lambda_tilde[j], k, k, block_name("Lambda_tilde", j));
    expect_shape(c.Xi[j], k, k, block_name("Xi", j));
    expect_shape(c.Upsilon0[j], k, k, block_name("Upsilon0_", j));
    expect_shape(c.Gamma[j], k, k, block_name("Gamma", j));
    expect_shape(c.Omega[j], k, k, block_name("Omega", j));
    for (int r = 0; r < m; ++r) {
      const std::string pair = "(" + std::to_string(j + 1) + "," + std::to_string(r + 1) + ")";
      expect_shape(c.Upsilon_tilde[static_cast<std::size_t>(j * m + r)], k, field.width(r),
                   "Upsilon_tilde" + pair);
      if (j < r)
        expect_shape(c.Upsilon[static_cast<std::size_t>(StabilityCertificate::pair_index(j, r, m))],
                     k, field.width(r), "Upsilon" + pair);
    }
  }
}

// Offsets of the activation blocks inside a stacked vector.
std::vector<Eigen::Index> offsets(const ControlSynthField& field) {
  std::vector<Eigen::Index> off{0};
  for (int j = 0; j < field.block_count(); ++j) off.push_back(off.back() + field.width(j));
  return off;
}

void set_block(Mat& q, Eigen::Index r, Eigen::Index c, const Mat& b) {
  q.block(r, c, b.rows(), b.cols()) = b;
  if (r != c) q.block(c, r, b.cols(), b.rows()) = b.transpose();
}

Mat gram(const Mat& w) { return w * w.transpose(); }

bool is_diagonal(const Mat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

void check_diag_psd(const Mat& m, const std::string& name, std::vector<std::string>& out) {
  if (!is_diagonal(m)) {
    out.push_back(name + " is not diagonal");
    return;
  }
  const Eigen::Index n = std::min(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(m(i, i) >= 0.0)) {
      out.push_back(name + " has a negative diagonal entry");
      return;
    }
}

void check_sym_psd(const Mat& m, const std::string& name, bool strict,
                   std::vector<std::string>& out) {
  if (asymmetry(m) > kSymmetryTol) {
    out.push_back(name + " is not symmetric");
    return;
  }
  const double lo = sym_eig_min(sym(m));
  if (strict ? !(lo > 0.0) : !(lo >= -kLmiTol))
    out.push_back(name + (strict ? " is not positive definite" : " is not positive semidefinite") +
                  " (lambda_min " + format_double(lo) + ")");
}

bool equal_widths(const ControlSynthField& field) {
  for (int j = 1; j < field.block_count(); ++j)
    if (field.width(j) != field.width(0)) return false;
  return true;
}

Mat lipschitz_matrix(const ControlSynthField& field, int j) {
  return field.activation(j).lipschitz() * Mat::Identity(field.width(j), field.width(j));
}

}  // namespace

StabilityCertificate StabilityCertificate::zeros_for(const ControlSynthField& field) {
  const int d = field.dim();
  const int m = field.block_count();
  StabilityCertificate c;
  c.P = Mat::Zero(d, d);
  c.P_tilde = Mat::Zero(d, d);
  c.Xi0 = Mat::Zero(d, d);
  c.Xi_tilde0 = Mat::Zero(d, d);
  c.Phi = Mat::Identity(d, d);
  for (int j = 0; j < m; ++j) {
    const int k = field.width(j);
    c.Lambda.push_back(Mat::Zero(k, k));
    c.Lambda_tilde.push_back(Mat::Zero(k, k));
    c.Xi.push_back(Mat::Zero(k, k));
    c.Upsilon0.push_back(Mat::Zero(k, k));
    c.Gamma.push_back(Mat::Zero(k, k));
    c.Omega.push_back(Mat::Zero(k, k));
  }
  for (int s = 0; s < m; ++s)
    for (int r = s + 1; r < m; ++r) c.Upsilon.push_back(Mat::Zero(field.width(s), field.width(r)));
  for (int j = 0; j < m; ++j)
    for (int r = 0; r < m; ++r) c.Upsilon_tilde.push_back(Mat::Zero(field.width(j), field.width(r)));
  c.omega_idx = m;
  c.zeta_idx = m;
  return c;
}

int StabilityCertificate::pair_index(int s, int r, int blocks) {
  if (!(0 <= s && s < r && r < blocks)) throw ConfigError("pair index needs 0 <= s < r < M");
  // Pairs before row s: sum_{i<s} (blocks - 1 - i).
  return s * (2 * blocks - s - 1) / 2 + (r - s - 1);
}

nlohmann::json certificate_to_json(const StabilityCertificate& c) {
  auto list = [](const std::vector<Mat>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Mat& m : v) arr.push_back(matrix_to_json(m));
    return arr;
  };
  nlohmann::json j;
  j["P"] = matrix_to_json(c.P);
  j["Lambda"] = list(c.Lambda);
  j["Xi0"] = matrix_to_json(c.Xi0);
  j["Xi"] = list(c.Xi);
  j["Upsilon0"] = list(c.Upsilon0);
  j["Upsilon"] = list(c.Upsilon);
  j["Phi"] = matrix_to_json(c.Phi);
  j["P_tilde"] = matrix_to_json(c.P_tilde);
  j["Lambda_tilde"] = list(c.Lambda_tilde);
  j["Xi_tilde0"] = matrix_to_json(c.Xi_tilde0);
  j["Gamma"] = list(c.Gamma);
  j["Omega"] = list(c.Omega);
  j["Upsilon_tilde"] = list(c.Upsilon_tilde);
  j["gamma"] = c.gamma;
  j["theta"] = c.theta;
  j["omega_idx"] = c.omega_idx;
  j["zeta_idx"] = c.zeta_idx;
  return j;
}

StabilityCertificate certificate_from_json(const nlohmann::json& j, const ControlSynthField& field) {
  static const std::vector<std::string> known = {
      "P",      "Lambda",   "Xi0",     "Xi",        "Upsilon0",     "Upsilon",
      "Phi",    "P_tilde",  "Lambda_tilde", "Xi_tilde0", "Gamma",   "Omega",
      "Upsilon_tilde", "gamma", "theta", "omega_idx", "zeta_idx"};
  if (!j.is_object()) throw ConfigError("certificate JSON must be an object");
  std::vector<std::string> unknown;
  for (const auto& item : j.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) unknown.push_back(item.key());
  if (!unknown.empty()) {
    std::string msg = "unknown certificate keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  StabilityCertificate c = StabilityCertificate::zeros_for(field);
  auto mat = [&](const char* key, Mat& out) {
    if (j.contains(key)) out = matrix_from_json(j.at(key));
  };
  auto list = [&](const char* key, std::vector<Mat>& out) {
    if (!j.contains(key)) return;
    const auto& arr = j.at(key);
    if (!arr.is_array()) throw ConfigError(std::string("certificate key ") + key + " must be a list");
    out.clear();
    for (const auto& m : arr) out.push_back(matrix_from_json(m));
  };
  mat("P", c.P);
  list("Lambda", c.Lambda);
  mat("Xi0", c.Xi0);
  list("Xi", c.Xi);
  list("Upsilon0", c.Upsilon0);
  list("Upsilon", c.Upsilon);
  mat("Phi", c.Phi);
  mat("P_tilde", c.P_tilde);
  list("Lambda_tilde", c.Lambda_tilde);
  mat("Xi_tilde0", c.Xi_tilde0);
  list("Gamma", c.Gamma);
  list("Omega", c.Omega);
  list("Upsilon_tilde", c.Upsilon_tilde);
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  if (j.contains("theta")) c.theta = j.at("theta").get<double>();
  if (j.contains("omega_idx")) c.omega_idx = j.at("omega_idx").get<int>();
  if (j.contains("zeta_idx")) c.zeta_idx = j.at("zeta_idx").get<int>();
  check_shapes(field, c);
  return c;
}

std::vector<std::string> certificate_structure_violations(const StabilityCertificate& c,
                                                          const ControlSynthField& field) {
  check_shapes(field, c);
  std::vector<std::string> out;
  const int m = field.block_count();
  check_sym_psd(c.P, "P", false, out);
  check_sym_psd(c.P_tilde, "P_tilde", false, out);
  check_sym_psd(c.Phi, "Phi", true, out);
  check_diag_psd(c.Xi0, "Xi0", out);
  check_diag_psd(c.Xi_tilde0, "Xi_tilde0", out);
  for (int j = 0; j < m; ++j) {
    check_diag_psd(c.Lambda[j], block_name("Lambda", j), out);
    check_diag_psd(c.Lambda_tilde[j], block_name("Lambda_tilde", j), out);
    check_diag_psd(c.Xi[j], block_name("Xi", j), out);
    check_diag_psd(c.Upsilon0[j], block_name("Upsilon0_", j), out);
    check_diag_psd(c.Gamma[j], block_name("Gamma", j), out);
    check_diag_psd(c.Omega[j], block_name("Omega", j), out);
  }
  for (std::size_t i = 0; i < c.Upsilon.size(); ++i)
    check_diag_psd(c.Upsilon[i], "Upsilon pair " + std::to_string(i), out);
  for (std::size_t i = 0; i < c.Upsilon_tilde.size(); ++i)
    check_diag_psd(c.Upsilon_tilde[i], "Upsilon_tilde pair " + std::to_string(i), out);
  if (!(c.gamma > 0.0)) out.push_back("gamma must be > 0");
  if (!(c.theta > 0.0)) out.push_back("theta must be > 0");
  if (c.omega_idx < 0 || c.omega_idx > m || c.zeta_idx < c.omega_idx || c.zeta_idx > m)
    out.push_back("activation indices must satisfy 0 <= omega_idx <= zeta_idx <= M");
  return out;
}

Mat assemble_Q(const ControlSynthField& field, const StabilityCertificate& c) {
  check_shapes(field, c);
  const int d = field.dim();
  const int m = field.block_count();
  const auto off = offsets(field);
  const Eigen::Index n = d + off.back() + d;
  const Eigen::Index g = d + off.back();
  const Mat& A0 = field.A0();
  Mat q = Mat::Zero(n, n);
  set_block(q, 0, 0, A0.transpose() * c.P + c.P * A0 + c.Xi0);
  for (int j = 0; j < m; ++j) {
    const Mat& Aj = field.A(j);
    const Mat& Wj = field.W(j);
    const Eigen::Index bj = d + off[j];
    const Mat lw = c.Lambda[j] * Wj;  // k_j x d
    set_block(q, bj, bj, lw * Aj + (lw * Aj).transpose() + c.Xi[j]);
    set_block(q, 0, bj, c.P * Aj + A0.transpose() * lw.transpose() + Wj.transpose() * c.Upsilon0[j]);
    set_block(q, bj, g, lw);
  }
  for (int s = 0; s < m; ++s) {
    for (int r = s + 1; r < m; ++r) {
      const Mat& ups = c.Upsilon[static_cast<std::size_t>(StabilityCertificate::pair_index(s, r, m))];
      const Mat b = field.A(s).transpose() * field.W(r).transpose() * c.Lambda[r] +
                    c.Lambda[s] * field.W(s) * field.A(r) +
                    gram(field.W(s)) * ups * gram(field.W(r));
      set_block(q, d + off[s], d + off[r], b);
    }
  }
  set_block(q, 0, g, c.P);
  set_block(q, g, g, -c.Phi);
  // Exact symmetry: blocks on the diagonal are symmetrized, off-diagonal
  // blocks are mirrored by set_block.
  return 0.5 * (q + q.transpose());
}

Mat assemble_Qtilde(const ControlSynthField& field, const StabilityCertificate& c) {
  check_shapes(field, c);
  const int d = field.dim();
  const int m = field.block_count();
  const auto off = offsets(field);
  const Eigen::Index k = off.back();
  const Mat& A0 = field.A0();
  Mat A(d, k), Gam(d, k), Del(d, k), Om(d, k);
  for (int j = 0; j < m; ++j) {
    const Eigen::Index w = field.width(j);
    A.middleCols(off[j], w) = field.A(j);
    Gam.middleCols(off[j], w) = field.W(j).transpose() * c.Gamma[j];
    Del.middleCols(off[j], w) = field.W(j).transpose() * c.Lambda_tilde[j];
    Om.middleCols(off[j], w) = field.W(j).transpose() * c.Omega[j];
  }
  Mat ups = Mat::Zero(k, k);
  for (int j = 0; j < m; ++j)
    for (int r = 0; r < m; ++r)
      ups.block(off[j], off[r], field.width(j), field.width(r)) =
          gram(field.W(j)) * c.Upsilon_tilde[static_cast<std::size_t>(j * m + r)] * gram(field.W(r));
  Mat q = Mat::Zero(d + 2 * k, d + 2 * k);
  set_block(q, 0, 0, A0.transpose() * c.P_tilde + c.P_tilde * A0 + c.Xi_tilde0);
  set_block(q, 0, d, c.P_tilde * A + Gam);
  set_block(q, 0, d + k, A0.transpose() * Del + Om);
  set_block(q, d, d, -2.0 * c.gamma * Mat::Identity(k, k));
  set_block(q, d, d + k, A.transpose() * Del + ups);
  set_block(q, d + k, d + k, -2.0 * c.theta * Mat::Identity(k, k));
  return 0.5 * (q + q.transpose());
}

nlohmann::json verdict_to_json(const CertificateVerdict& v) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
  };
  nlohmann::json j;
  j["iss_ok"] = v.iss_ok;
  j["contraction_ok"] = v.contraction_ok;
  j["lambda_max_Q"] = num(v.lambda_max_Q);
  j["lambda_max_Qtilde"] = num(v.lambda_max_Qtilde);
  j["iss_positivity_margin"] = num(v.iss_positivity_margin);
  j["iss_sum_margin"] = num(v.iss_sum_margin);
  j["contraction_sum_margin"] = num(v.contraction_sum_margin);
  j["violations"] = v.violations;
  return j;
}

CertificateVerdict verify_iss(const ControlSynthField& field, const StabilityCertificate& c,
                              double tol) {
  CertificateVerdict v;
  v.violations = certificate_structure_violations(c, field);
  const bool structure_ok = v.violations.empty();
  const int m = field.block_count();

  Mat pos = c.P;
  for (int j = 0; j < std::min(c.zeta_idx, m); ++j)
    pos += field.W(j).transpose() * c.Lambda[j] * field.W(j);
  v.iss_positivity_margin = sym_eig_min(sym(pos));
  const bool cond1 = v.iss_positivity_margin > tol;
  if (!cond1) v.violations.push_back("ISS (i): P + sum W^T Lambda W is not positive definite");

  v.lambda_max_Q = sym_eig_max(assemble_Q(field, c));
  const bool cond2 = v.lambda_max_Q <= tol;
  if (!cond2) v.violations.push_back("ISS (ii): lambda_max(Q) = " + format_double(v.lambda_max_Q) + " > tol");

  bool cond3 = true;
  if (m == 0) {
    v.iss_sum_margin = std::numeric_limits<double>::infinity();
  } else if (!equal_widths(field)) {
    cond3 = false;
    v.iss_sum_margin = std::nan("");
    v.violations.push_back("ISS (iii): multiplier sum needs equal block widths");
  } else {
    Mat s = Mat::Zero(field.width(0), field.width(0));
    for (int j = 0; j < m; ++j) s += c.Upsilon0[j];
    const int w = std::min(c.omega_idx, m);
    for (int j = 0; j < w; ++j) s += c.Xi[j];
    for (int a = 0; a < w; ++a)
      for (int b = a + 1; b < w; ++b)
        s += c.Upsilon[static_cast<std::size_t>(StabilityCertificate::pair_index(a, b, m))];
    v.iss_sum_margin = sym_eig_min(sym(s));
    cond3 = v.iss_sum_margin > tol;
    if (!cond3) v.violations.push_back("ISS (iii): multiplier sum is not positive definite");
  }
  v.iss_ok = structure_ok && cond1 && cond2 && cond3;
  return v;
}

CertificateVerdict verify_contraction(const ControlSynthField& field,
                                      const StabilityCertificate& c, double tol) {
  CertificateVerdict v;
  v.violations = certificate_structure_violations(c, field);
  bool ok = v.violations.empty();
  const int m = field.block_count();

  v.lambda_max_Qtilde = sym_eig_max(assemble_Qtilde(field, c));
  if (!(v.lambda_max_Qtilde <= tol)) {
    ok = false;
    v.violations.push_back("contraction: lambda_max(Q~) = " + format_double(v.lambda_max_Qtilde) +
                           " > tol");
  }
  for (int j = 0; j < m; ++j) {
    const Mat l = lipschitz_matrix(field, j);
    if (sym_eig_min(sym(c.Gamma[j] - c.gamma * l)) < -tol) {
      ok = false;
      v.violations.push_back("contraction: " + block_name("Gamma", j) + " - gamma L is not PSD");
    }
    if (sym_eig_min(sym(c.Omega[j] - c.theta * l)) < -tol) {
      ok = false;
      v.violations.push_back("contraction: " + block_name("Omega", j) + " - theta L is not PSD");
    }
  }
  if (m == 0) {
    v.contraction_sum_margin = std::numeric_limits<double>::infinity();
  } else if (!equal_widths(field)) {
    ok = false;
    v.contraction_sum_margin = std::nan("");
    v.violations.push_back("contraction: final sum needs equal block widths");
  } else {
    const int k = field.width(0);
    Mat s = Mat::Zero(k, k);
    for (int j = 0; j < m; ++j) {
      const Mat l = lipschitz_matrix(field, j);
      s += c.Gamma[j] - c.gamma * l + c.Omega[j] - c.theta * l;
      for (int r = 0; r < m; ++r) s += c.Upsilon_tilde[static_cast<std::size_t>(j * m + r)];
    }
    v.contraction_sum_margin = sym_eig_min(sym(s));
    if (!(v.contraction_sum_margin > tol)) {
      ok = false;
      v.violations.push_back("contraction: final multiplier sum is not positive definite");
    }
  }
  v.contraction_ok = ok;
  return v;
}

CertificateVerdict verify_certificate(const ControlSynthField& field,
                                      const StabilityCertificate& cert, double tol) {
  CertificateVerdict iss = verify_iss(field, cert, tol);
  const CertificateVerdict con = verify_contraction(field, cert, tol);
  iss.contraction_ok = con.contraction_ok;
  iss.lambda_max_Qtilde = con.lambda_max_Qtilde;
  iss.contraction_sum_margin = con.contraction_sum_margin;
  const auto structural = certificate_structure_violations(cert, field).size();
  for (std::size_t i = structural; i < con.violations.size(); ++i) iss.violations.push_back(con.violations[i]);
  return iss;
}

double lyapunov_value(const StabilityCertificate& c, const Vec& xi, const ControlSynthField& field) {
  check_shapes(field, c);
  if (xi.size() != field.dim())
    throw DimensionError("lyapunov_value: xi has " + std::to_string(xi.size()) + " entries, expected " +
                         std::to_string(field.dim()));
  double v = xi.dot(c.P_tilde * xi);
  for (int j = 0; j < field.block_count(); ++j) {
    const Vec s = field.W(j) * xi;
    const Activation& act = field.activation(j);
    for (Eigen::Index i = 0; i < s.size(); ++i) v += 2.0 * c.Lambda_tilde[j](i, i) * act.integral(s(i));
  }
  return v;
}

ContractionRegion contraction_region(const std::function<double(const Vec&)>& V, int dim,
                                     const RegionOptions& opts) {
  if (dim < 1) throw ConfigError("contraction_region: dimension must be >= 1");
  if (!(opts.radius > 0.0) || opts.grid_per_axis < 2)
    throw ConfigError("contraction_region: radius > 0 and at least 2 grid points per axis required");
  const double cells = std::pow(static_cast<double>(opts.grid_per_axis), dim);
  auto box_max = [&](double radius) {
    double best = -std::numeric_limits<double>::infinity();
    if (cells <= 1e6) {
      std::vector<int> idx(static_cast<std::size_t>(dim), 0);
      Vec p(dim);
      const double h = 2.0 * radius / (opts.grid_per_axis - 1);
      while (true) {
        for (int a = 0; a < dim; ++a) p(a) = -radius + h * idx[static_cast<std::size_t>(a)];
        best = std::max(best, V(p));
        int a = 0;
        while (a < dim && ++idx[static_cast<std::size_t>(a)] == opts.grid_per_axis) idx[static_cast<std::size_t>(a++)] = 0;
        if (a == dim) break;
      }
    } else {
      Rng rng(opts.seed);
      for (int i = 0; i < opts.random_probes; ++i) {
        Vec p(dim);
        for (int a = 0; a < dim; ++a) p(a) = rng.uniform(-radius, radius);
        best = std::max(best, V(p));
      }
    }
    return best;
  };
  const double inner = box_max(opts.radius);
  const double outer = box_max(2.0 * opts.radius);
  ContractionRegion region;
  if (outer > inner + opts.growth_tol * std::max(1.0, std::abs(inner))) {
    region.global = true;
    region.level = std::numeric_limits<double>::infinity();
    region.contains = [](const Vec&) { return true; };
  } else {
    region.level = std::max(inner, outer);
    const double level = region.level;
    region.contains = [V, level](const Vec& xi) { return V(xi) <= level; };
  }
  return region;
}

ContractionRegion contraction_region(const StabilityCertificate& cert, const ControlSynthField& field,
                                     const RegionOptions& opts) {
  const CertificateVerdict v = verify_contraction(field, cert);
  if (!v.contraction_ok)
    throw ConfigError("contraction_region: certificate does not verify (" +
                      (v.violations.empty() ? std::string("unknown") : v.violations.front()) + ")");
  auto V = [cert, field](const Vec& xi) { return lyapunov_value(cert, xi, field); };
  return contraction_region(V, field.dim(), opts);
}

SolverConfig tight_probe_solver() {
  SolverConfig cfg = SolverConfig::dopri5(1e-11, 1e-12);
  cfg.h_max = 0.05;
  return cfg;
}

ContractionProbe contraction_probe(const VectorField& field, const Vec& x0, const Vec& d0,
                                   double horizon, const SolverConfig& solver) {
  if (x0.size() != field.dim() || d0.size() != field.dim())
    throw DimensionError("contraction_probe: x0 and d0 must have the field dimension");
  if (!(horizon > 0.0)) throw ConfigError("contraction_probe: horizon must be > 0");
  ContractionProbe out;
  if (d0.norm() == 0.0) {
    out.times = {0.0, horizon};
    out.norms = {0.0, 0.0};
    out.ratio = 0.0;
    return out;
  }
  Mat x(2, field.dim());
  x.row(0) = x0.transpose();
  x.row(1) = (x0 + d0).transpose();
  SolverConfig cfg = solver;
  cfg.record_trajectory = true;
  const Trajectory traj = integrate(field, x, 0.0, horizon, cfg);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out.times.push_back(traj.times[k]);
    out.norms.push_back((traj.states[k].row(1) - traj.states[k].row(0)).norm());
  }
  out.ratio = out.norms.back() / out.norms.front();
  return out;
}

ContractionProbe contraction_probe(ControlSynthField& field, const Vec& u, const Vec& x0,
                                   const Vec& d0, double horizon, const SolverConfig& solver) {
  if (u.size() != field.input_dim())
    throw DimensionError("contraction_probe: input has " + std::to_string(u.size()) +
                         " entries, expected " + std::to_string(field.input_dim()));
  Mat input(2, u.size());
  input.row(0) = u.transpose();
  input.row(1) = u.transpose();
  ConditionedField stage(field, input);
  return contraction_probe(stage, x0, d0, horizon, solver);
}

SlopeInequalityCheck slope_inequality_check(const Activation& act, long probes, Rng& rng, int dim, int width) {
  SlopeInequalityCheck out;
  const double L = act.lipschitz();
  for (long i = 0; i < probes; ++i) {
    const Mat w = rng.normal_matrix(width, dim);
    const double scale = std::exp(rng.uniform(-3.0, 3.0));
    const Mat x = scale * rng.normal_matrix(dim, 1);
    const Mat xi = scale * rng.normal_matrix(dim, 1);
    const Mat wx = w * x;
    const Mat wxi = w * xi;
    const Mat p = act.apply(Mat(wx + wxi)) - act.apply(wx);
    const double lhs = p.squaredNorm();
    const double rhs = L * (wxi.transpose() * p)(0, 0);
    const double excess = lhs - rhs;
    ++out.probes;
    out.worst_excess = std::max(out.worst_excess, excess);
    if (excess > 1e-12 * std::max(1.0, std::abs(rhs))) ++out.violations;
  }
  return out;
}

SearchResult search_certificate(const ControlSynthField& field, const SearchOptions& opts) {
  const int d = field.dim();
  const int m = field.block_count();
  const Mat eye = Mat::Identity(d, d);
  std::vector<double> with_zero{0.0};
  with_zero.insert(with_zero.end(), opts.grid.begin(), opts.grid.end());

  SearchResult result;
  StabilityCertificate base = StabilityCertificate::zeros_for(field);
  base.P = eye;
  base.P_tilde = eye;

  // ISS: P = I, Lambda = lambda I, Upsilon0 = upsilon I, Phi = phi I.
  double best_iss = std::numeric_limits<double>::infinity();
  bool best_iss_ok = false;
  StabilityCertificate iss = base;
  for (double lam : with_zero) {
    for (double ups : (m > 0 ? opts.grid : std::vector<double>{0.0})) {
      for (double phi : opts.grid) {
        StabilityCertificate c = base;
        c.Phi = phi * eye;
        for (int j = 0; j < m; ++j) {
          const auto k = field.width(j);
          c.Lambda[j] = lam * Mat::Identity(k, k);
          c.Upsilon0[j] = ups * Mat::Identity(k, k);
        }
        ++result.candidates;
        const CertificateVerdict v = verify_iss(field, c, opts.tol);
        const bool better = (v.iss_ok && !best_iss_ok) ||
                            (v.iss_ok == best_iss_ok && v.lambda_max_Q < best_iss);
        if (better) {
          best_iss = v.lambda_max_Q;
          best_iss_ok = v.iss_ok;
          iss = c;
        }
      }
    }
  }

  // Contraction: P~ = I, Lambda~ = lambda I, Gamma_j = gamma L + slack,
  // Omega_j = theta L + slack, Upsilon~ = 0.
  double best_con = std::numeric_limits<double>::infinity();
  bool best_con_ok = false;
  StabilityCertificate con = base;
  for (double lam : with_zero) {
    for (double gamma : opts.grid) {
      for (double theta : opts.grid) {
        StabilityCertificate c = base;
        c.gamma = gamma;
        c.theta = theta;
        for (int j = 0; j < m; ++j) {
          const auto k = field.width(j);
          const Mat id = Mat::Identity(k, k);
          const Mat l = lipschitz_matrix(field, j);
          c.Lambda_tilde[j] = lam * id;
          c.Gamma[j] = gamma * l + opts.slack * id;
          c.Omega[j] = theta * l + opts.slack * id;
        }
        ++result.candidates;
        const CertificateVerdict v = verify_contraction(field, c, opts.tol);
        const bool better = (v.contraction_ok && !best_con_ok) ||
                            (v.contraction_ok == best_con_ok && v.lambda_max_Qtilde < best_con);
        if (better) {
          best_con = v.lambda_max_Qtilde;
          best_con_ok = v.contraction_ok;
          con = c;
        }
      }
    }
  }

  StabilityCertificate merged = iss;
  merged.P_tilde = con.P_tilde;
  merged.Lambda_tilde = con.Lambda_tilde;
  merged.Xi_tilde0 = con.Xi_tilde0;
  merged.Gamma = con.Gamma;
  merged.Omega = con.Omega;
  merged.Upsilon_tilde = con.Upsilon_tilde;
  merged.gamma = con.gamma;
  merged.theta = con.theta;
  result.certificate = merged;
  result.verdict = verify_certificate(field, merged, opts.tol);
  return result;
}

}  // namespace fmlab
