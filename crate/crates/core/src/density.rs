//! Exact laws of the empirical correlation coefficient and quadrature-based
//! tail probabilities and cumulant generating functions.
//!
//! * spherical, centred: `√(n-2) r / √(1-r²)` is Student `t_{n-2}`, density
//!   `Γ((n-1)/2) / (√π Γ((n-2)/2)) (1-r²)^{(n-4)/2}`;
//! * spherical, known mean (and Gaussian with known means and ρ = 0): `t_{n-1}`,
//!   density `Γ(n/2) / (√π Γ((n-1)/2)) (1-r²)^{(n-3)/2}`;
//! * Gaussian, centred, correlation ρ, with `m = n - 1`:
//!   `(m-1) Γ(m) / (Γ(m+½) √(2π)) (1-ρ²)^{m/2} (1-ρr)^{-m+½} (1-r²)^{(m-3)/2}
//!    ₂F₁(½, ½; m+½; (1+ρr)/2)`.
//!
//! The Gaussian density is renormalised numerically; the analytic constant is
//! only compared against it.

use crate::error::{domain, Result};
use crate::laplace::find_interior_max;
use crate::quadrature::{integrate_log_clustered, QuadOptions, QuadratureResult};
use crate::real::Real;
use crate::specfun::{hyp2f1, log_gamma, log_gamma_ratio, Hyp2F1Params};

/// Smallest sample size accepted by the density oracle.
pub const MIN_SAMPLE_SIZE: usize = 5;

/// Tolerated gap between the analytic and numerical Gaussian log-normalisers.
const NORMALIZATION_MISMATCH: f64 = 1e-3;

/// Which coefficient under which sampling model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario<T> {
    /// Pearson coefficient with empirical means, spherical sample.
    SphericalCentered,
    /// Coefficient centred at the true means, spherical sample.
    SphericalKnownMean,
    /// Pearson coefficient of an i.i.d. bivariate Gaussian sample.
    GaussianCentered { rho: T },
    /// Known-mean coefficient of an uncorrelated Gaussian sample.
    GaussianKnownMeanRhoZero,
}

impl<T: Real> Scenario<T> {
    /// Gaussian centred scenario; `|rho| < 1`.
    pub fn gaussian(rho: T) -> Result<Self> {
        if !(rho.abs() < T::one()) {
            return domain(format!("correlation must satisfy |rho| < 1, got {rho}"));
        }
        Ok(Scenario::GaussianCentered { rho })
    }

    /// Population correlation (zero outside the Gaussian centred model).
    pub fn rho(&self) -> T {
        match *self {
            Scenario::GaussianCentered { rho } => rho,
            _ => T::zero(),
        }
    }

    pub fn is_known_mean(&self) -> bool {
        matches!(self, Scenario::SphericalKnownMean | Scenario::GaussianKnownMeanRhoZero)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::SphericalCentered => "spherical-centered",
            Scenario::SphericalKnownMean => "spherical-known",
            Scenario::GaussianCentered { .. } => "gaussian",
            Scenario::GaussianKnownMeanRhoZero => "gaussian-known-rho0",
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if let Scenario::GaussianCentered { rho } = *self {
            if !(rho.abs() < T::one()) {
                return domain(format!("correlation must satisfy |rho| < 1, got {rho}"));
            }
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn ln_one_minus_sq<T: Real>(r: T) -> T {
    ((T::one() - r) * (T::one() + r)).ln()
}

/// Density of the coefficient for one scenario and sample size, with its
/// normalising constant resolved once.
#[derive(Debug, Clone, Copy)]
pub struct Density<T> {
    scenario: Scenario<T>,
    n: usize,
    log_norm: T,
}

impl<T: Real> Density<T> {
    pub fn new(scenario: Scenario<T>, n: usize) -> Result<Self> {
        scenario.validate()?;
        if n < MIN_SAMPLE_SIZE {
            return domain(format!("sample size must be at least {MIN_SAMPLE_SIZE}, got {n}"));
        }
        let mut density = Self { scenario, n, log_norm: T::zero() };
        density.log_norm = match scenario {
            Scenario::GaussianCentered { .. } => {
                let numeric = -density.integrate_kernel(&[-T::one(), scenario.rho(), T::one()])?.log_value;
                let analytic = density.analytic_log_constant()?;
                if (numeric - analytic).abs() > T::lit(NORMALIZATION_MISMATCH) {
                    log::warn!(
                        "Gaussian density n = {n}, rho = {}: analytic log-constant {analytic} \
                         differs from numerical {numeric}",
                        scenario.rho()
                    );
                }
                numeric
            }
            _ => density.analytic_log_constant()?,
        };
        Ok(density)
    }

    pub fn scenario(&self) -> Scenario<T> {
        self.scenario
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    /// Log-normaliser in use (numerical for the Gaussian centred model).
    pub fn log_normalizer(&self) -> T {
        self.log_norm
    }

    /// Closed-form log-normaliser of the kernel.
    pub fn analytic_log_constant(&self) -> Result<T> {
        let n = T::from_count(self.n);
        let half = T::lit(0.5);
        let ln_pi = T::PI().ln();
        match self.scenario {
            Scenario::SphericalCentered => Ok(log_gamma_ratio((n - T::one()) * half, (n - T::lit(2.0)) * half)? - half * ln_pi),
            Scenario::SphericalKnownMean | Scenario::GaussianKnownMeanRhoZero => {
                Ok(log_gamma_ratio(n * half, (n - T::one()) * half)? - half * ln_pi)
            }
            Scenario::GaussianCentered { .. } => {
                let m = n - T::one();
                Ok((m - T::one()).ln() + log_gamma(m)? - log_gamma(m + half)? - half * T::TAU().ln())
            }
        }
    }

    /// Unnormalised log-density. NaN signals a failed hypergeometric series.
    fn log_kernel(&self, r: T) -> T {
        let n = T::from_count(self.n);
        let half = T::lit(0.5);
        let l = ln_one_minus_sq(r);
        match self.scenario {
            Scenario::SphericalCentered => (n - T::lit(4.0)) * half * l,
            Scenario::SphericalKnownMean | Scenario::GaussianKnownMeanRhoZero => (n - T::lit(3.0)) * half * l,
            Scenario::GaussianCentered { rho } => {
                let m = n - T::one();
                let z = (T::one() + rho * r) * half;
                let f = hyp2f1(Hyp2F1Params::new(half, half, m + half, z)).map(|v| v.ln()).unwrap_or(T::nan());
                m * half * ln_one_minus_sq(rho) + (half - m) * (-rho * r).ln_1p() + (m - T::lit(3.0)) * half * l + f
            }
        }
    }

    fn integrate_kernel(&self, breaks: &[T]) -> Result<QuadratureResult<T>> {
        integrate_log_clustered(|r| self.log_kernel(r), breaks, &QuadOptions::default())
    }

    /// Log-density at `r ∈ (-1, 1)`.
    pub fn log_density(&self, r: T) -> Result<T> {
        if !(r.abs() < T::one()) {
            return domain(format!("density argument must satisfy |r| < 1, got {r}"));
        }
        Ok(self.log_norm + self.log_kernel(r))
    }

    fn log_density_unchecked(&self, r: T) -> T {
        self.log_norm + self.log_kernel(r)
    }

    /// Approximate location of the density's mode.
    fn mode_hint(&self) -> T {
        self.scenario.rho()
    }

    /// `log ∫_a^b f(r) dr` for `-1 <= a < b <= 1`.
    pub fn log_probability(&self, a: T, b: T) -> Result<QuadratureResult<T>> {
        if !(a >= -T::one() && b <= T::one() && a < b) {
            return domain(format!("probability interval ({a}, {b}) must lie in [-1, 1]"));
        }
        let mode = self.mode_hint();
        let breaks: Vec<T> = if a < mode && mode < b { vec![a, mode, b] } else { vec![a, b] };
        integrate_log_clustered(|r| self.log_density_unchecked(r), &breaks, &QuadOptions::default())
    }

    /// `log P(R >= c)` by quadrature.
    pub fn tail(&self, c: T) -> Result<QuadratureResult<T>> {
        if !(c >= -T::one() && c < T::one()) {
            return domain(format!("threshold must lie in [-1, 1), got {c}"));
        }
        self.log_probability(c, T::one())
    }

    /// `(1/n) log E exp(n λ R)` by quadrature.
    pub fn ncgf(&self, lambda: T) -> Result<T> {
        let n = T::from_count(self.n);
        let rho = self.scenario.rho();
        // Maximiser of λr + ½ln(1-r²) - ln(1-ρr): a break point at the peak.
        let peak = find_interior_max(
            |r: T| lambda + rho / (T::one() - rho * r) - r / ((T::one() - r) * (T::one() + r)),
            |_r: T| -T::one(),
            -T::one(),
            T::one(),
        )
        .unwrap_or(T::zero());
        let q = integrate_log_clustered(
            |r| n * lambda * r + self.log_density_unchecked(r),
            &[-T::one(), peak, T::one()],
            &QuadOptions::default(),
        )?;
        Ok(q.log_value / n)
    }
}

/// Log-density of the coefficient at `r` for sample size `n`.
pub fn log_density<T: Real>(s: Scenario<T>, n: usize, r: T) -> Result<T> {
    Density::new(s, n)?.log_density(r)
}

/// `log P(R_n >= c)` by adaptive quadrature of the exact density.
pub fn tail_exact<T: Real>(s: Scenario<T>, n: usize, c: T) -> Result<QuadratureResult<T>> {
    Density::new(s, n)?.tail(c)
}

/// Exact normalised cumulant generating function `(1/n) log E exp(n λ R_n)`.
pub fn mgf_exact<T: Real>(s: Scenario<T>, n: usize, lambda: T) -> Result<T> {
    Density::new(s, n)?.ncgf(lambda)
}
