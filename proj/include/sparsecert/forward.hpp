#pragma once

#include <vector>

#include <Eigen/Core>

#include "sparsecert/domain.hpp"
#include "sparsecert/kernels.hpp"

namespace sparsecert {

/// Discretized element of Y: one block of m samples per channel, with the
/// quadrature inner product (y, z) = h * sum_j y_j z_j over all blocks.
class Signal {
 public:
  Signal() = default;
  Signal(int channels, int samples, double weight);
  Signal(int channels, int samples, double weight, Eigen::VectorXd values);

  int channels() const { return channels_; }
  int samples() const { return samples_; }
  double weight() const { return weight_; }

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  auto channel(int c) const { return values_.segment(c * samples_, samples_); }
  auto channel(int c) { return values_.segment(c * samples_, samples_); }

  bool same_shape(const Signal& other) const {
    return channels_ == other.channels_ && samples_ == other.samples_;
  }

  Signal& operator+=(const Signal& other);
  Signal& operator-=(const Signal& other);
  Signal& operator*=(double t);

 private:
  int channels_ = 0;
  int samples_ = 0;
  double weight_ = 1.0;
  Eigen::VectorXd values_;
};

Signal operator+(Signal a, const Signal& b);
Signal operator-(Signal a, const Signal& b);
Signal operator*(double t, Signal a);

double inner(const Signal& a, const Signal& b);
double norm(const Signal& a);

using Observation = Signal;
using DualVariable = Signal;

/// Value, parameter gradient and parameter Hessian of e -> (Ke, p).
/// `degenerate` marks paired atoms on the kink x = x_bar (or the antipodal
/// kink), where the chart-based derivatives are one-sided.
struct PairingDerivatives {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  bool degenerate = false;
};

/// eta = K*p evaluated in closed form, per channel.
class CertificateFunction {
 public:
  struct Values {
    double primitive = 0.0;
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
  };

  CertificateFunction(Setting setting, SampleGrid grid, std::vector<Kernel> kernels,
                      DualVariable p);

  const Setting& setting() const { return setting_; }
  const DualVariable& dual() const { return p_; }
  int channels() const { return static_cast<int>(kernels_.size()); }

  /// eta_c(t) and its derivatives; order 0, 1, 2.
  double eval(int channel, double t, int order = 0) const;
  /// All orders at once; the primitive int_0^t eta_c only when requested.
  Values eval_all(int channel, double t, bool with_primitive = false) const;

  /// <eta, e>.
  double pairing(const ExtremePoint& e) const;
  PairingDerivatives derivatives(const ExtremePoint& e) const;

 private:
  Setting setting_;
  SampleGrid grid_;
  std::vector<Kernel> kernels_;
  DualVariable p_;
};

/// The measurement operator K for one of the three settings, together with
/// the pre-adjoint and the dual pairing.
class ForwardModel {
 public:
  ForwardModel(Setting setting, SampleGrid grid, std::vector<Kernel> kernels);

  const Setting& setting() const { return setting_; }
  const SampleGrid& grid() const { return grid_; }
  const std::vector<Kernel>& kernels() const { return kernels_; }
  int channels() const { return setting_.channels(); }

  Signal zero_signal() const;
  Signal make_signal(Eigen::VectorXd values) const;

  /// Ke for a single extreme point.
  Signal column(const ExtremePoint& e) const;
  /// d(Ke)/d(theta): one column per atom parameter.
  Eigen::MatrixXd column_jacobian(const ExtremePoint& e) const;

  Observation apply(const SparseElement& element) const;

  CertificateFunction certificate(const DualVariable& p) const;
  double pairing(const DualVariable& p, const ExtremePoint& e) const;
  PairingDerivatives pairing_derivatives(const DualVariable& p, const ExtremePoint& e) const;

 private:
  void check_atom(const ExtremePoint& e) const;
  void check_signal(const Signal& s) const;

  Setting setting_;
  SampleGrid grid_;
  std::vector<Kernel> kernels_;
};

}  // namespace sparsecert
