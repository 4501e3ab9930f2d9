#pragma once

#include <random>

#include "sparsecert/domain.hpp"
#include "sparsecert/forward.hpp"
#include "sparsecert/kernels.hpp"

namespace sparsecert::testing {

inline ForwardModel tv_model(int m = 512, double width = 0.08) {
  const Setting s = Setting::radon_tv();
  return ForwardModel(s, SampleGrid::for_setting(s, m), {Kernel::periodized_gaussian(width)});
}

inline ForwardModel bv_model(int m = 512, double width = 0.08, double margin = 0.1) {
  const Setting s = Setting::bv_indicator(margin);
  return ForwardModel(s, SampleGrid::for_setting(s, m), {Kernel::periodized_gaussian(width)});
}

inline ForwardModel paired_model(int m = 512, double width = 0.08) {
  const Setting s = Setting::paired_wasserstein();
  return ForwardModel(s, SampleGrid::for_setting(s, m),
                      {Kernel::periodized_gaussian(width), Kernel::periodized_gaussian(width)});
}

inline ForwardModel model_for(SettingKind kind, int m = 512) {
  switch (kind) {
    case SettingKind::RadonTV:
      return tv_model(m);
    case SettingKind::BVIndicator:
      return bv_model(m);
    case SettingKind::PairedWasserstein:
      return paired_model(m);
  }
  return tv_model(m);
}

inline Sign random_sign(std::mt19937_64& rng) {
  return std::bernoulli_distribution(0.5)(rng) ? Sign::Positive : Sign::Negative;
}

/// Random atom; for paired atoms keeps x and x_bar at least `kink_gap` away
/// from the diagonal and antipodal kinks.
inline ExtremePoint random_atom(const Setting& setting, std::mt19937_64& rng,
                                double kink_gap = 0.02) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (setting.kind) {
    case SettingKind::RadonTV:
      return SignedDirac{unit(rng), random_sign(rng)};
    case SettingKind::BVIndicator: {
      const double lo = setting.margin, hi = 1.0 - setting.margin;
      double a = 0, b = 0;
      do {
        a = lo + (hi - lo) * unit(rng);
        b = lo + (hi - lo) * unit(rng);
        if (a > b) std::swap(a, b);
      } while (b - a < 1e-3);
      return SignedIndicator{a, b, random_sign(rng)};
    }
    case SettingKind::PairedWasserstein: {
      double x = 0, xb = 0;
      do {
        x = unit(rng);
        xb = unit(rng);
      } while (torus_distance(x, xb) < kink_gap || torus_distance(x, xb) > 0.5 - kink_gap);
      return PairedDirac{x, xb};
    }
  }
  return SignedDirac{};
}

inline Signal random_signal(const ForwardModel& model, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Signal s = model.zero_signal();
  for (Eigen::Index i = 0; i < s.values().size(); ++i) s.values()[i] = normal(rng);
  return s;
}

inline SparseElement random_element(const ForwardModel& model, std::mt19937_64& rng,
                                    int atoms) {
  std::uniform_real_distribution<double> coef(0.1, 2.0);
  std::vector<Atom> list;
  for (int i = 0; i < atoms; ++i) list.push_back({coef(rng), random_atom(model.setting(), rng)});
  return SparseElement(model.setting(), list);
}

}  // namespace sparsecert::testing
