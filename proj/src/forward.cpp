#include "sparsecert/forward.hpp"

#include <cmath>

namespace sparsecert {

namespace {

struct PairedChart {
  double distance = 0.0;  // d(x, x_bar)
  double orientation = 1.0;  // d = orientation * (x - x_bar) locally
  bool degenerate = false;
};

PairedChart paired_chart(double x, double x_bar) {
  const double delta = torus_delta(x, x_bar);
  PairedChart chart;
  chart.distance = std::abs(delta);
  chart.orientation = delta < 0.0 ? -1.0 : 1.0;
  chart.degenerate = chart.distance < 1e-12 || chart.distance > 0.5 - 1e-12;
  return chart;
}

}  // namespace

Signal::Signal(int channels, int samples, double weight)
    : channels_(channels),
      samples_(samples),
      weight_(weight),
      values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channels) * samples)) {}

Signal::Signal(int channels, int samples, double weight, Eigen::VectorXd values)
    : channels_(channels), samples_(samples), weight_(weight), values_(std::move(values)) {
  if (values_.size() != static_cast<Eigen::Index>(channels) * samples) {
    throw DomainError("signal value count does not match channels * samples");
  }
}

Signal& Signal::operator+=(const Signal& other) {
  if (!same_shape(other)) throw DomainError("signal shape mismatch");
  values_ += other.values_;
  return *this;
}

Signal& Signal::operator-=(const Signal& other) {
  if (!same_shape(other)) throw DomainError("signal shape mismatch");
  values_ -= other.values_;
  return *this;
}

Signal& Signal::operator*=(double t) {
  values_ *= t;
  return *this;
}

Signal operator+(Signal a, const Signal& b) { return a += b; }
Signal operator-(Signal a, const Signal& b) { return a -= b; }
Signal operator*(double t, Signal a) { return a *= t; }

double inner(const Signal& a, const Signal& b) {
  if (!a.same_shape(b)) throw DomainError("signal shape mismatch in inner product");
  return a.weight() * a.values().dot(b.values());
}

double norm(const Signal& a) { return std::sqrt(inner(a, a)); }

// --- CertificateFunction ---------------------------------------------------

CertificateFunction::CertificateFunction(Setting setting, SampleGrid grid,
                                         std::vector<Kernel> kernels, DualVariable p)
    : setting_(setting), grid_(grid), kernels_(std::move(kernels)), p_(std::move(p)) {}

double CertificateFunction::eval(int channel, double t, int order) const {
  const Kernel& k = kernels_[channel];
  const auto pc = p_.channel(channel);
  double sum = 0.0;
  for (int j = 0; j < grid_.size(); ++j) {
    if (pc[j] == 0.0) continue;
    sum += k.eval(t - grid_.point(j), order) * pc[j];
  }
  return grid_.weight() * sum;
}

CertificateFunction::Values CertificateFunction::eval_all(int channel, double t,
                                                          bool with_primitive) const {
  const Kernel& k = kernels_[channel];
  const auto pc = p_.channel(channel);
  Values v;
  for (int j = 0; j < grid_.size(); ++j) {
    const double pj = pc[j];
    if (pj == 0.0) continue;
    const double u = t - grid_.point(j);
    const Kernel::Values kv = k.eval_all(u);
    v.value += kv.value * pj;
    v.d1 += kv.d1 * pj;
    v.d2 += kv.d2 * pj;
    if (with_primitive) v.primitive += (k.antiderivative(u) - k.antiderivative(-grid_.point(j))) * pj;
  }
  const double h = grid_.weight();
  v.primitive *= h;
  v.value *= h;
  v.d1 *= h;
  v.d2 *= h;
  return v;
}

double CertificateFunction::pairing(const ExtremePoint& e) const {
  if (const auto* d = std::get_if<SignedDirac>(&e)) {
    return as_double(d->sign) * eval(0, d->x);
  }
  if (const auto* ind = std::get_if<SignedIndicator>(&e)) {
    const Kernel& k = kernels_[0];
    const auto pc = p_.channel(0);
    double sum = 0.0;
    for (int j = 0; j < grid_.size(); ++j) {
      if (pc[j] == 0.0) continue;
      const double s = grid_.point(j);
      sum += k.integral(ind->a - s, ind->b - s) * pc[j];
    }
    return 0.5 * as_double(ind->sign) * grid_.weight() * sum;
  }
  const auto& pd = std::get<PairedDirac>(e);
  const PairedChart chart = paired_chart(pd.x, pd.x_bar);
  return (eval(0, pd.x) + eval(1, pd.x_bar)) / (2.0 + chart.distance);
}

PairingDerivatives CertificateFunction::derivatives(const ExtremePoint& e) const {
  PairingDerivatives out;
  if (const auto* d = std::get_if<SignedDirac>(&e)) {
    const double sigma = as_double(d->sign);
    const Values v = eval_all(0, d->x);
    out.value = sigma * v.value;
    out.gradient = Eigen::VectorXd::Constant(1, sigma * v.d1);
    out.hessian = Eigen::MatrixXd::Constant(1, 1, sigma * v.d2);
    return out;
  }
  if (const auto* ind = std::get_if<SignedIndicator>(&e)) {
    const double half_sigma = 0.5 * as_double(ind->sign);
    const Values va = eval_all(0, ind->a);
    const Values vb = eval_all(0, ind->b);
    out.value = pairing(e);
    out.gradient.resize(2);
    out.gradient << -half_sigma * va.value, half_sigma * vb.value;
    out.hessian = Eigen::MatrixXd::Zero(2, 2);
    out.hessian(0, 0) = -half_sigma * va.d1;
    out.hessian(1, 1) = half_sigma * vb.d1;
    return out;
  }
  const auto& pd = std::get<PairedDirac>(e);
  const PairedChart chart = paired_chart(pd.x, pd.x_bar);
  const Values phi = eval_all(0, pd.x);
  const Values psi = eval_all(1, pd.x_bar);
  const double s = chart.orientation;
  const double D = 2.0 + chart.distance;
  const double D2 = D * D, D3 = D2 * D;
  const double S = phi.value + psi.value;
  out.value = S / D;
  out.degenerate = chart.degenerate;
  out.gradient.resize(2);
  out.gradient << phi.d1 / D - s * S / D2, psi.d1 / D + s * S / D2;
  out.hessian.resize(2, 2);
  out.hessian(0, 0) = phi.d2 / D - 2.0 * s * phi.d1 / D2 + 2.0 * S / D3;
  out.hessian(1, 1) = psi.d2 / D + 2.0 * s * psi.d1 / D2 + 2.0 * S / D3;
  out.hessian(0, 1) = s * (phi.d1 - psi.d1) / D2 - 2.0 * S / D3;
  out.hessian(1, 0) = out.hessian(0, 1);
  return out;
}

// --- ForwardModel ------------------------------------------------------------

ForwardModel::ForwardModel(Setting setting, SampleGrid grid, std::vector<Kernel> kernels)
    : setting_(setting), grid_(grid), kernels_(std::move(kernels)) {
  if (static_cast<int>(kernels_.size()) != setting_.channels()) {
    throw DomainError("setting " + to_string(setting_.kind) + " needs " +
                      std::to_string(setting_.channels()) + " kernel(s)");
  }
  const GridKind expected = setting_.on_torus() ? GridKind::Torus : GridKind::UnitInterval;
  if (grid_.kind() != expected) throw DomainError("sample grid kind does not match setting");
}

Signal ForwardModel::zero_signal() const {
  return Signal(channels(), grid_.size(), grid_.weight());
}

Signal ForwardModel::make_signal(Eigen::VectorXd values) const {
  return Signal(channels(), grid_.size(), grid_.weight(), std::move(values));
}

void ForwardModel::check_atom(const ExtremePoint& e) const {
  if (kind_of(e) != setting_.kind) {
    throw DomainError("atom variant does not match the forward model setting");
  }
}

void ForwardModel::check_signal(const Signal& s) const {
  if (s.channels() != channels() || s.samples() != grid_.size()) {
    throw DomainError("signal shape does not match the forward model");
  }
}

Signal ForwardModel::column(const ExtremePoint& e) const {
  check_atom(e);
  Signal out = zero_signal();
  const int m = grid_.size();
  if (const auto* d = std::get_if<SignedDirac>(&e)) {
    const double sigma = as_double(d->sign);
    for (int j = 0; j < m; ++j) out.values()[j] = sigma * kernels_[0].eval(d->x - grid_.point(j));
  } else if (const auto* ind = std::get_if<SignedIndicator>(&e)) {
    const double half_sigma = 0.5 * as_double(ind->sign);
    for (int j = 0; j < m; ++j) {
      const double s = grid_.point(j);
      out.values()[j] = half_sigma * kernels_[0].integral(ind->a - s, ind->b - s);
    }
  } else {
    const auto& pd = std::get<PairedDirac>(e);
    const double inv = 1.0 / (2.0 + paired_chart(pd.x, pd.x_bar).distance);
    for (int j = 0; j < m; ++j) {
      out.values()[j] = inv * kernels_[0].eval(pd.x - grid_.point(j));
      out.values()[m + j] = inv * kernels_[1].eval(pd.x_bar - grid_.point(j));
    }
  }
  return out;
}

Eigen::MatrixXd ForwardModel::column_jacobian(const ExtremePoint& e) const {
  check_atom(e);
  const int m = grid_.size();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(channels()) * m,
                                              setting_.parameter_count());
  if (const auto* d = std::get_if<SignedDirac>(&e)) {
    const double sigma = as_double(d->sign);
    for (int j = 0; j < m; ++j) jac(j, 0) = sigma * kernels_[0].eval(d->x - grid_.point(j), 1);
  } else if (const auto* ind = std::get_if<SignedIndicator>(&e)) {
    const double half_sigma = 0.5 * as_double(ind->sign);
    for (int j = 0; j < m; ++j) {
      const double s = grid_.point(j);
      jac(j, 0) = -half_sigma * kernels_[0].eval(ind->a - s);
      jac(j, 1) = half_sigma * kernels_[0].eval(ind->b - s);
    }
  } else {
    const auto& pd = std::get<PairedDirac>(e);
    const PairedChart chart = paired_chart(pd.x, pd.x_bar);
    const double s = chart.orientation;
    const double D = 2.0 + chart.distance;
    const double D2 = D * D;
    for (int j = 0; j < m; ++j) {
      const Kernel::Values kv1 = kernels_[0].eval_all(pd.x - grid_.point(j));
      const Kernel::Values kv2 = kernels_[1].eval_all(pd.x_bar - grid_.point(j));
      const double k1 = kv1.value, k1d = kv1.d1, k2 = kv2.value, k2d = kv2.d1;
      jac(j, 0) = k1d / D - s * k1 / D2;
      jac(m + j, 0) = -s * k2 / D2;
      jac(j, 1) = s * k1 / D2;
      jac(m + j, 1) = k2d / D + s * k2 / D2;
    }
  }
  return jac;
}

Observation ForwardModel::apply(const SparseElement& element) const {
  if (!(element.setting() == setting_)) throw DomainError("element setting mismatch");
  Observation out = zero_signal();
  for (const auto& atom : element.atoms()) out.values() += atom.coef * column(atom.point).values();
  return out;
}

CertificateFunction ForwardModel::certificate(const DualVariable& p) const {
  check_signal(p);
  return CertificateFunction(setting_, grid_, kernels_, p);
}

double ForwardModel::pairing(const DualVariable& p, const ExtremePoint& e) const {
  check_atom(e);
  return certificate(p).pairing(e);
}

PairingDerivatives ForwardModel::pairing_derivatives(const DualVariable& p,
                                                     const ExtremePoint& e) const {
  check_atom(e);
  return certificate(p).derivatives(e);
}

}  // namespace sparsecert
