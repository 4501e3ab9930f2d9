#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace sparsecert {

/// Raised for violated preconditions on domain values (bad parameters,
/// mismatched settings).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kPruneThreshold = 1e-10;

enum class SettingKind { RadonTV, BVIndicator, PairedWasserstein };

std::string to_string(SettingKind kind);
SettingKind setting_kind_from_string(const std::string& name);

/// Which of the three concrete problems is being solved. For BV indicators
/// `margin` is the zero-boundary width: endpoints live in [margin, 1-margin].
struct Setting {
  SettingKind kind = SettingKind::RadonTV;
  double margin = 0.0;

  static Setting radon_tv() { return {SettingKind::RadonTV, 0.0}; }
  static Setting bv_indicator(double margin);
  static Setting paired_wasserstein() {
    return {SettingKind::PairedWasserstein, 0.0};
  }

  int channels() const { return kind == SettingKind::PairedWasserstein ? 2 : 1; }
  /// Number of continuous parameters of one extreme point.
  int parameter_count() const { return kind == SettingKind::RadonTV ? 1 : 2; }
  bool on_torus() const { return kind != SettingKind::BVIndicator; }

  bool operator==(const Setting&) const = default;
};

enum class Sign : int { Negative = -1, Positive = 1 };

inline double as_double(Sign s) { return static_cast<double>(static_cast<int>(s)); }
Sign sign_from_int(int s);

// Torus [0,1) helpers.
inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}
/// Representative of x - y in [-1/2, 1/2).
inline double torus_delta(double x, double y) {
  double d = x - y;
  d -= std::floor(d + 0.5);
  return d;
}
inline double torus_distance(double x, double y) { return std::abs(torus_delta(x, y)); }

struct SignedDirac {
  double x = 0.0;
  Sign sign = Sign::Positive;
};

/// sign * (1/2) * indicator of [a, b].
struct SignedIndicator {
  double a = 0.0;
  double b = 0.0;
  Sign sign = Sign::Positive;
};

/// (delta_x, delta_xbar) / (2 + d(x, xbar)).
struct PairedDirac {
  double x = 0.0;
  double x_bar = 0.0;
};

using ExtremePoint = std::variant<SignedDirac, SignedIndicator, PairedDirac>;

SettingKind kind_of(const ExtremePoint& e);

/// Validates (and for torus coordinates, wraps) an extreme point against a
/// setting. Throws DomainError on violation.
ExtremePoint normalized(const ExtremePoint& e, const Setting& setting);

/// Continuous parameters of the atom: [x], [a, b] or [x, x_bar].
Eigen::VectorXd parameters(const ExtremePoint& e);
/// Same variant and sign as `e`, parameters replaced. No validation.
ExtremePoint with_parameters(const ExtremePoint& e, const Eigen::VectorXd& theta);

/// Sign of the atom; paired atoms are always positive.
Sign sign_of(const ExtremePoint& e);

/// Coordinate surrogate of the weak* distance. +inf across signs.
/// Throws DomainError across variants.
double atom_distance(const ExtremePoint& e1, const ExtremePoint& e2);

struct Atom {
  double coef = 0.0;
  ExtremePoint point;
};

/// Finite conic combination of extreme points. Coefficients at or below the
/// prune threshold are dropped on construction.
class SparseElement {
 public:
  explicit SparseElement(Setting setting) : setting_(setting) {}
  SparseElement(Setting setting, std::vector<Atom> atoms);

  const Setting& setting() const { return setting_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  SparseElement scaled(double t) const;
  SparseElement concatenated(const SparseElement& other) const;

 private:
  Setting setting_;
  std::vector<Atom> atoms_;
};

/// Regularizer value; every extreme point has unit value so this is the
/// coefficient sum.
double g_value(const SparseElement& element);

enum class GridKind { Torus, UnitInterval };

/// Uniform samples with quadrature weight 1/m. Torus samples sit at j/m,
/// interval samples at cell midpoints (j + 1/2)/m.
class SampleGrid {
 public:
  SampleGrid(int m, GridKind kind);

  static SampleGrid for_setting(const Setting& setting, int m) {
    return {m, setting.on_torus() ? GridKind::Torus : GridKind::UnitInterval};
  }

  int size() const { return m_; }
  GridKind kind() const { return kind_; }
  double weight() const { return 1.0 / m_; }
  double point(int j) const {
    return kind_ == GridKind::Torus ? static_cast<double>(j) / m_ : (j + 0.5) / m_;
  }

  bool operator==(const SampleGrid&) const = default;

 private:
  int m_;
  GridKind kind_;
};

}  // namespace sparsecert
