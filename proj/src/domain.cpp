#include "sparsecert/domain.hpp"

#include <algorithm>

namespace sparsecert {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string to_string(SettingKind kind) {
  switch (kind) {
    case SettingKind::RadonTV:
      return "radon_tv";
    case SettingKind::BVIndicator:
      return "bv_indicator";
    case SettingKind::PairedWasserstein:
      return "paired_wasserstein";
  }
  return "unknown";
}

SettingKind setting_kind_from_string(const std::string& name) {
  if (name == "radon_tv") return SettingKind::RadonTV;
  if (name == "bv_indicator") return SettingKind::BVIndicator;
  if (name == "paired_wasserstein") return SettingKind::PairedWasserstein;
  throw DomainError("unknown setting '" + name + "'");
}

Setting Setting::bv_indicator(double margin) {
  if (!(margin > 0.0 && margin < 0.5)) {
    throw DomainError("BV margin must lie in (0, 1/2), got " + std::to_string(margin));
  }
  return {SettingKind::BVIndicator, margin};
}

Sign sign_from_int(int s) {
  if (s == 1) return Sign::Positive;
  if (s == -1) return Sign::Negative;
  throw DomainError("sign must be +1 or -1, got " + std::to_string(s));
}

SettingKind kind_of(const ExtremePoint& e) {
  return std::visit(Overloaded{
                        [](const SignedDirac&) { return SettingKind::RadonTV; },
                        [](const SignedIndicator&) { return SettingKind::BVIndicator; },
                        [](const PairedDirac&) { return SettingKind::PairedWasserstein; },
                    },
                    e);
}

ExtremePoint normalized(const ExtremePoint& e, const Setting& setting) {
  if (kind_of(e) != setting.kind) {
    throw DomainError("extreme point variant " + to_string(kind_of(e)) +
                      " does not match setting " + to_string(setting.kind));
  }
  return std::visit(
      Overloaded{
          [](const SignedDirac& d) -> ExtremePoint {
            if (!std::isfinite(d.x)) throw DomainError("non-finite Dirac location");
            return SignedDirac{wrap_unit(d.x), d.sign};
          },
          [&](const SignedIndicator& ind) -> ExtremePoint {
            const double lo = setting.margin, hi = 1.0 - setting.margin;
            if (!(ind.a < ind.b) || ind.a < lo || ind.b > hi) {
              throw DomainError("indicator endpoints must satisfy margin <= a < b <= 1-margin");
            }
            return ind;
          },
          [](const PairedDirac& pd) -> ExtremePoint {
            if (!std::isfinite(pd.x) || !std::isfinite(pd.x_bar)) {
              throw DomainError("non-finite paired Dirac location");
            }
            return PairedDirac{wrap_unit(pd.x), wrap_unit(pd.x_bar)};
          },
      },
      e);
}

Eigen::VectorXd parameters(const ExtremePoint& e) {
  return std::visit(Overloaded{
                        [](const SignedDirac& d) {
                          Eigen::VectorXd v(1);
                          v << d.x;
                          return v;
                        },
                        [](const SignedIndicator& ind) {
                          Eigen::VectorXd v(2);
                          v << ind.a, ind.b;
                          return v;
                        },
                        [](const PairedDirac& pd) {
                          Eigen::VectorXd v(2);
                          v << pd.x, pd.x_bar;
                          return v;
                        },
                    },
                    e);
}

ExtremePoint with_parameters(const ExtremePoint& e, const Eigen::VectorXd& theta) {
  return std::visit(
      Overloaded{
          [&](const SignedDirac& d) -> ExtremePoint { return SignedDirac{theta(0), d.sign}; },
          [&](const SignedIndicator& ind) -> ExtremePoint {
            return SignedIndicator{theta(0), theta(1), ind.sign};
          },
          [&](const PairedDirac&) -> ExtremePoint { return PairedDirac{theta(0), theta(1)}; },
      },
      e);
}

Sign sign_of(const ExtremePoint& e) {
  return std::visit(Overloaded{
                        [](const SignedDirac& d) { return d.sign; },
                        [](const SignedIndicator& ind) { return ind.sign; },
                        [](const PairedDirac&) { return Sign::Positive; },
                    },
                    e);
}

double atom_distance(const ExtremePoint& e1, const ExtremePoint& e2) {
  if (kind_of(e1) != kind_of(e2)) {
    throw DomainError("atom_distance across different extreme-point variants");
  }
  if (sign_of(e1) != sign_of(e2)) return std::numeric_limits<double>::infinity();
  if (const auto* d1 = std::get_if<SignedDirac>(&e1)) {
    return torus_distance(d1->x, std::get<SignedDirac>(e2).x);
  }
  if (const auto* i1 = std::get_if<SignedIndicator>(&e1)) {
    const auto& i2 = std::get<SignedIndicator>(e2);
    return std::abs(i1->a - i2.a) + std::abs(i1->b - i2.b);
  }
  const auto& p1 = std::get<PairedDirac>(e1);
  const auto& p2 = std::get<PairedDirac>(e2);
  return torus_distance(p1.x, p2.x) + torus_distance(p1.x_bar, p2.x_bar);
}

SparseElement::SparseElement(Setting setting, std::vector<Atom> atoms) : setting_(setting) {
  atoms_.reserve(atoms.size());
  for (auto& atom : atoms) {
    if (!std::isfinite(atom.coef) || atom.coef < 0.0) {
      throw DomainError("sparse element coefficients must be finite and nonnegative");
    }
    if (atom.coef <= kPruneThreshold) continue;
    atoms_.push_back({atom.coef, normalized(atom.point, setting_)});
  }
}

SparseElement SparseElement::scaled(double t) const {
  if (!(t > 0.0)) throw DomainError("scale factor must be positive");
  std::vector<Atom> out = atoms_;
  for (auto& a : out) a.coef *= t;
  return SparseElement(setting_, std::move(out));
}

SparseElement SparseElement::concatenated(const SparseElement& other) const {
  if (!(other.setting_ == setting_)) throw DomainError("cannot concatenate across settings");
  std::vector<Atom> out = atoms_;
  out.insert(out.end(), other.atoms_.begin(), other.atoms_.end());
  return SparseElement(setting_, std::move(out));
}

double g_value(const SparseElement& element) {
  double total = 0.0;
  for (const auto& a : element.atoms()) total += a.coef;
  return total;
}

SampleGrid::SampleGrid(int m, GridKind kind) : m_(m), kind_(kind) {
  if (m < 1) throw DomainError("sample grid needs at least one point");
}

}  // namespace sparsecert
