#include "nvmag/cavity.hpp"

#include <algorithm>
#include <cmath>

#include "nvmag/errors.hpp"
#include "nvmag/least_squares.hpp"
#include "nvmag/units.hpp"

namespace nvmag {

void CavityConfig::validate() const {
  if (!(r1 > 0 && r1 < 1) || !(r2 > 0 && r2 < 1)) {
    throw ValidationError("cavity: reflectivities must lie in (0, 1)");
  }
  if (!(finesse_empty > 1) || !(finesse_loaded > 1)) {
    throw ValidationError("cavity: finesse values must exceed 1");
  }
  if (!(path_len_mm > 0)) {
    throw ValidationError("cavity: path length must be positive");
  }
  if (reflection_fraction < 0 || reflection_fraction >= 1) {
    throw ValidationError("cavity: reflection fraction out of range");
  }
  if (s_polarized_fraction < 0 || s_polarized_fraction > 1) {
    throw ValidationError("cavity: s-polarized fraction out of range");
  }
}

double loss_from_finesse(double finesse) {
  if (!(finesse > units::pi / 2.0)) {
    throw ValidationError("loss_from_finesse: finesse must exceed pi/2");
  }
  // F x^2 + pi x - F = 0, positive root.
  const double x =
      (-units::pi + std::sqrt(units::pi * units::pi + 4.0 * finesse * finesse)) /
      (2.0 * finesse);
  return x * x;
}

double finesse_from_reflectivities(double r1, double r2) {
  const double prod = r1 * r2;
  if (!(prod > 0) || prod >= 1.0 - 1e-9) {
    throw ValidationError("finesse_from_reflectivities: r1*r2 out of range");
  }
  const double rho = std::sqrt(prod);
  return units::pi * std::sqrt(rho) / (1.0 - rho);
}

double intracavity_power_w(double p_in_w, double t_in, double rho) {
  if (!(rho > 0 && rho < 1)) {
    throw ValidationError("intracavity_power: rho must lie in (0, 1)");
  }
  if (!(t_in > 0 && t_in <= 1) || p_in_w < 0) {
    throw ValidationError("intracavity_power: invalid input power or t_in");
  }
  const double denom = (1.0 - rho) * (1.0 - rho);
  return p_in_w * t_in / denom;
}

double pump_rate_mhz(double p_cav_w, double epsilon_khz_per_mw) {
  if (!(epsilon_khz_per_mw > 0)) {
    throw ValidationError("pump_rate: epsilon must be positive");
  }
  // kHz/mW is numerically MHz/W.
  return 0.25 * epsilon_khz_per_mw * p_cav_w;
}

SaturationFit fit_saturation(
    const std::vector<std::pair<double, double>>& power_flux) {
  if (power_flux.size() < 3) {
    throw ValidationError("fit_saturation: need at least 3 points");
  }
  std::vector<double> powers;
  for (const auto& [p, r] : power_flux) {
    if (p < 0) throw ValidationError("fit_saturation: negative power");
    powers.push_back(p);
  }
  std::sort(powers.begin(), powers.end());
  if (std::adjacent_find(powers.begin(), powers.end()) != powers.end()) {
    throw ValidationError("fit_saturation: powers must be distinct");
  }

  double max_flux = 0;
  for (const auto& [p, r] : power_flux) max_flux = std::max(max_flux, r);
  const double median_power = powers[powers.size() / 2];

  auto residuals = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(power_flux.size());
    for (std::size_t i = 0; i < power_flux.size(); ++i) {
      const auto& [p, flux] = power_flux[i];
      r(i) = x(0) * p / (p + x(1)) - flux;
    }
    return r;
  };
  auto jacobian = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd j(power_flux.size(), 2);
    for (std::size_t i = 0; i < power_flux.size(); ++i) {
      const double p = power_flux[i].first;
      const double denom = p + x(1);
      j(i, 0) = p / denom;
      j(i, 1) = -x(0) * p / (denom * denom);
    }
    return j;
  };

  Eigen::VectorXd x0(2);
  x0 << max_flux, median_power;
  const LmResult fit = levenberg_marquardt(residuals, jacobian, x0);
  if (!fit.converged) {
    throw NumericalError("fit_saturation: no convergence after " +
                         std::to_string(fit.iterations) +
                         " iterations, residual " +
                         std::to_string(fit.residual_norm));
  }
  return {fit.params(0), fit.params(1), fit.residual_norm, fit.iterations};
}

double saturation_efficiency(double p, double p_sat) {
  return p / (p + p_sat);
}

AbsorptionBudget absorption_budget(const CavityConfig& cfg) {
  cfg.validate();
  if (!(cfg.finesse_empty > cfg.finesse_loaded)) {
    throw ValidationError(
        "absorption_budget: loaded finesse must be below the empty finesse");
  }

  AbsorptionBudget b;
  b.rho_empty = loss_from_finesse(cfg.finesse_empty);
  b.rho_loaded = loss_from_finesse(cfg.finesse_loaded);

  const double scale = cfg.convention == LossConvention::intensity ? 1.0 : 2.0;
  b.alpha_total = scale * std::log(b.rho_empty / b.rho_loaded);

  // The measured surface reflection, split into a birefringence-induced
  // s-polarized part and residual scattering; surface absorption is
  // taken as negligible. Small losses are allocated linearly.
  const double br_loss = cfg.s_polarized_fraction * cfg.reflection_fraction;
  const double sc_loss = (1.0 - cfg.s_polarized_fraction) * cfg.reflection_fraction;
  b.alpha_br_per_mm = br_loss / cfg.path_len_mm;
  b.alpha_sc = sc_loss / 4.0;
  b.alpha_surf = 0.0;

  const double remainder = b.alpha_total - br_loss - sc_loss;
  if (remainder < 0) {
    throw NumericalError(
        "absorption_budget: surface losses exceed the total round-trip loss");
  }
  b.alpha_ab_per_mm = remainder / cfg.path_len_mm;
  return b;
}

NvConcentration nv_concentration(double alpha_ab_per_mm,
                                 double alpha_background_per_mm,
                                 double sigma_nv_mm2) {
  if (!(sigma_nv_mm2 > 0)) {
    throw ValidationError("nv_concentration: sigma_nv must be positive");
  }
  if (alpha_ab_per_mm < alpha_background_per_mm) {
    throw ValidationError(
        "nv_concentration: alpha_ab below background, negative concentration");
  }
  NvConcentration c;
  c.density_per_mm3 = (alpha_ab_per_mm - alpha_background_per_mm) / sigma_nv_mm2;
  c.ppb = c.density_per_mm3 / units::diamond_carbon_density_per_mm3 * 1e9;
  return c;
}

}  // namespace nvmag
