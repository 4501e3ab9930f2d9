#pragma once

#include <stdexcept>
#include <string>
#include <variant>

namespace sparsecert {

/// Normal density with standard deviation s, exp(-t^2 / (2 s^2)) / (s sqrt(2 pi)),
/// periodized over the unit torus. The argument is first
/// reduced to its principal representative in [-1/2, 1/2); the periodic sum
/// is then truncated to shifts |w| <= wrap_order. Relative truncation error is
/// about exp(-wrap_order^2 / (2 s^2)).
struct PeriodizedGaussian {
  double width = 0.08;
  int wrap_order = 5;
};

/// 1 + 2 sum_{w=1..cutoff} rho_w cos(2 pi w t), rho_w = (1 + cos(pi w / (cutoff+1))) / 2.
struct RaisedCosine {
  int cutoff = 8;
};

class KernelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Kernel {
 public:
  using Spec = std::variant<PeriodizedGaussian, RaisedCosine>;

  explicit Kernel(Spec spec);

  static Kernel periodized_gaussian(double width, int wrap_order = 5) {
    return Kernel(PeriodizedGaussian{width, wrap_order});
  }
  static Kernel raised_cosine(int cutoff) { return Kernel(RaisedCosine{cutoff}); }

  const Spec& spec() const { return spec_; }
  std::string name() const;

  struct Values {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
  };

  /// k(t), k'(t) or k''(t) for order 0, 1, 2.
  double eval(double t, int order = 0) const;
  /// k, k', k'' in one pass.
  Values eval_all(double t) const;

  bool has_antiderivative() const { return true; }
  /// A primitive of k on the real line (not periodic: it grows by the
  /// period integral per unit shift).
  double antiderivative(double t) const;

  /// Integral of k over [lo, hi]; exact primitive when available.
  double integral(double lo, double hi) const;
  /// Same integral by 8-point Gauss-Legendre panels of width <= width()/4,
  /// independent of the primitive.
  double quadrature_integral(double lo, double hi) const;

  /// Characteristic length scale.
  double width() const;
  /// Integral over one period.
  double period_integral() const;
  /// Upper bound on sup |k'| (used for Lipschitz estimates).
  double derivative_bound() const;

 private:
  double reduced_antiderivative(double r) const;

  Spec spec_;
  double period_integral_ = 0.0;
};

}  // namespace sparsecert
