#pragma once

#include <stdexcept>
#include <string>

namespace fmlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class AsymmetryError : public Error {
 public:
  AsymmetryError(const std::string& what, double asymmetry)
      : Error(what), asymmetry_(asymmetry) {}
  double asymmetry() const { return asymmetry_; }

 private:
  double asymmetry_;
};

// Adaptive step size fell below h_min.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double t, double h)
      : Error(what), t_(t), h_(h) {}
  double t() const { return t_; }
  double h() const { return h_; }

 private:
  double t_;
  double h_;
};

}  // namespace fmlab
