#include "sparsecert/kernels.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sparsecert {

namespace {

// exp underflows to zero past this exponent.
constexpr double kMaxExponent = 745.0;

constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

double principal(double t) { return t - std::floor(t + 0.5); }

double rho(int w, int cutoff) {
  return 0.5 * (1.0 + std::cos(std::numbers::pi * w / (cutoff + 1)));
}

}  // namespace

Kernel::Kernel(Spec spec) : spec_(spec) {
  if (const auto* g = std::get_if<PeriodizedGaussian>(&spec_)) {
    if (!(g->width > 0.0)) throw KernelError("gaussian width must be positive");
    if (g->wrap_order < 1) throw KernelError("wrap order must be at least 1");
  } else {
    const auto& rc = std::get<RaisedCosine>(spec_);
    if (rc.cutoff < 1) throw KernelError("raised cosine cutoff must be at least 1");
  }
  period_integral_ = reduced_antiderivative(0.5) - reduced_antiderivative(-0.5);
}

std::string Kernel::name() const {
  return std::holds_alternative<PeriodizedGaussian>(spec_) ? "periodized_gaussian"
                                                           : "raised_cosine";
}

double Kernel::eval(double t, int order) const {
  if (order < 0 || order > 2) throw KernelError("derivative order must be 0, 1 or 2");
  const Values v = eval_all(t);
  return order == 0 ? v.value : (order == 1 ? v.d1 : v.d2);
}

Kernel::Values Kernel::eval_all(double t) const {
  Values out;
  if (const auto* g = std::get_if<PeriodizedGaussian>(&spec_)) {
    const double r = principal(t);
    const double s2 = g->width * g->width;
    const double amplitude = 1.0 / (g->width * std::sqrt(2.0 * std::numbers::pi));
    auto add = [&](double u) {
      const double e = u * u / (2.0 * s2);
      if (e > kMaxExponent) return Values{};
      const double val = amplitude * std::exp(-e);
      return Values{val, -u / s2 * val, (u * u / (s2 * s2) - 1.0 / s2) * val};
    };
    out = add(r);
    // Mirror shifts are summed pairwise so that k stays exactly even.
    for (int w = 1; w <= g->wrap_order; ++w) {
      const Values lo = add(r - w), hi = add(r + w);
      out.value += lo.value + hi.value;
      out.d1 += lo.d1 + hi.d1;
      out.d2 += lo.d2 + hi.d2;
    }
    return out;
  }
  const int cutoff = std::get<RaisedCosine>(spec_).cutoff;
  out.value = 1.0;
  for (int w = 1; w <= cutoff; ++w) {
    const double omega = 2.0 * std::numbers::pi * w;
    const double c = 2.0 * rho(w, cutoff);
    const double cs = std::cos(omega * t), sn = std::sin(omega * t);
    out.value += c * cs;
    out.d1 -= c * omega * sn;
    out.d2 -= c * omega * omega * cs;
  }
  return out;
}

double Kernel::reduced_antiderivative(double r) const {
  if (const auto* g = std::get_if<PeriodizedGaussian>(&spec_)) {
    const double scale = 0.5;
    const double inv = 1.0 / (g->width * std::numbers::sqrt2);
    double sum = 0.0;
    for (int w = -g->wrap_order; w <= g->wrap_order; ++w) {
      sum += scale * std::erf((r + w) * inv);
    }
    return sum;
  }
  const int cutoff = std::get<RaisedCosine>(spec_).cutoff;
  double sum = r;
  for (int w = 1; w <= cutoff; ++w) {
    const double omega = 2.0 * std::numbers::pi * w;
    sum += 2.0 * rho(w, cutoff) * std::sin(omega * r) / omega;
  }
  return sum;
}

double Kernel::antiderivative(double t) const {
  const double n = std::floor(t + 0.5);
  return n * period_integral_ + reduced_antiderivative(t - n);
}

double Kernel::integral(double lo, double hi) const {
  if (lo == hi) return 0.0;
  return antiderivative(hi) - antiderivative(lo);
}

double Kernel::quadrature_integral(double lo, double hi) const {
  if (lo == hi) return 0.0;
  const double panel = width() / 4.0;
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(hi - lo) / panel)));
  const double step = (hi - lo) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * step;
    double acc = 0.0;
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      acc += kGaussWeights[q] * eval(mid + 0.5 * step * kGaussNodes[q]);
    }
    sum += 0.5 * step * acc;
  }
  return sum;
}

double Kernel::width() const {
  if (const auto* g = std::get_if<PeriodizedGaussian>(&spec_)) return g->width;
  return 0.5 / (std::get<RaisedCosine>(spec_).cutoff + 1);
}

double Kernel::period_integral() const { return period_integral_; }

double Kernel::derivative_bound() const {
  if (const auto* g = std::get_if<PeriodizedGaussian>(&spec_)) {
    // |u|/s^2 exp(-u^2/2s^2) peaks at 1/(s sqrt(e)); neighbouring wraps add at
    // most a geometric tail, bounded generously by a factor 2.
    const double amplitude = 1.0 / (g->width * std::sqrt(2.0 * std::numbers::pi));
    return 2.0 * amplitude / (g->width * std::sqrt(std::numbers::e));
  }
  const int cutoff = std::get<RaisedCosine>(spec_).cutoff;
  double bound = 0.0;
  for (int w = 1; w <= cutoff; ++w) bound += 2.0 * rho(w, cutoff) * 2.0 * std::numbers::pi * w;
  return bound;
}

}  // namespace sparsecert
