#pragma once

#include <utility>
#include <vector>

namespace nvmag {

// Loss bookkeeping convention for the round-trip loss product rho and the
// loss exponent alpha. `intensity` treats rho as an intensity factor;
// `amplitude` treats it as a field factor (alpha doubles).
enum class LossConvention { intensity, amplitude };

struct CavityConfig {
  double r1 = 0.948;  // input mirror power reflectivity
  double r2 = 0.998;
  double finesse_empty = 114.0;
  double finesse_loaded = 45.0;
  double path_len_mm = 2.6;  // diamond round-trip optical path
  double reflection_fraction = 0.006;   // surface-reflected fraction of P_cav
  double s_polarized_fraction = 0.8;    // portion of the reflection that is s-pol
  LossConvention convention = LossConvention::intensity;

  void validate() const;
};

struct AbsorptionBudget {
  double alpha_total = 0;    // round-trip loss exponent
  double alpha_ab_per_mm = 0;   // bulk absorption coefficient
  double alpha_surf = 0;     // per-surface absorption (assumed zero)
  double alpha_sc = 0;       // per-surface scattering
  double alpha_br_per_mm = 0;   // birefringence-related loss coefficient
  double rho_empty = 0;
  double rho_loaded = 0;
};

// Round-trip loss product from finesse: the positive root of
// F x^2 + pi x - F = 0 with x = sqrt(rho).
double loss_from_finesse(double finesse);

// Projected finesse from mirror reflectivities, rho = sqrt(r1 r2):
// F = pi sqrt(rho) / (1 - rho).
double finesse_from_reflectivities(double r1, double r2);

// P_cav = P_in T1 / (1 - rho)^2 on resonance.
double intracavity_power_w(double p_in_w, double t_in, double rho);

// Gamma_p = (epsilon / 4) P_cav; epsilon in kHz/mW equals MHz/W.
double pump_rate_mhz(double p_cav_w, double epsilon_khz_per_mw);

// Saturation fit R = R_sat P / (P + P_sat), deterministic least squares
// with the initial guess (max flux, median power).
struct SaturationFit {
  double r_sat = 0;
  double p_sat = 0;
  double residual_norm = 0;
  int iterations = 0;
};
SaturationFit fit_saturation(const std::vector<std::pair<double, double>>& power_flux);

double saturation_efficiency(double p, double p_sat);

// Decomposes the finesse drop between the empty and loaded cavity into
// bulk absorption, surface scattering and birefringence loss. Surface
// absorption is taken as zero; the birefringence channel receives the
// s-polarized share of the measured surface reflection. Components
// recombine to alpha_total exactly.
AbsorptionBudget absorption_budget(const CavityConfig& cfg);

// (alpha_ab - alpha_background) / sigma_nv, plus the ppb equivalent
// against the carbon density of diamond.
struct NvConcentration {
  double density_per_mm3 = 0;
  double ppb = 0;
};
NvConcentration nv_concentration(double alpha_ab_per_mm,
                                 double alpha_background_per_mm,
                                 double sigma_nv_mm2);

}  // namespace nvmag
