//! Rate functions, saddle points and first-order sharp large-deviation tail
//! approximations for the correlation coefficient.
//!
//! With `λ_c = L'^{-1}(c)` and `σ_c² = L''(λ_c)`,
//!
//! ```text
//! P(R_n >= c) ≈ exp(-n L*(c)) K(c) / (λ_c σ_c √(2πn)),
//! ```
//!
//! where `K` is the exponential of the `1/n` coefficient of the normalised
//! cumulant generating function evaluated at `λ_c`.

use crate::density::{ln_one_minus_sq, Scenario};
use crate::error::{domain, Result};
use crate::laplace::{find_interior_max, laplace_coefficient, DerivativeJet};
use crate::real::Real;

/// `ρ₀ = √(3+2√3)/3`: beyond it the Gaussian phase `h̄` stops being concave.
pub fn rho0<T: Real>() -> T {
    (T::lit(3.0) + T::lit(2.0) * T::lit(3.0).sqrt()).sqrt() / T::lit(3.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddlePoint<T> {
    pub lambda_c: T,
    pub r0: T,
    pub sigma_sq: T,
    pub rate: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sld,
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sld => "sld",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

/// A tail probability `P(R_n >= c)` in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate<T> {
    pub log_prob: T,
    pub method: Method,
    /// `-n L*(c)`, SLD only.
    pub leading_exponent: Option<T>,
    /// Log of the algebraic prefactor, SLD only.
    pub log_prefactor: Option<T>,
    /// Absolute error of `log_prob` where one is known.
    pub log_error: Option<T>,
}

impl<T: Real> TailEstimate<T> {
    pub fn probability(&self) -> T {
        self.log_prob.exp()
    }
}

/// Two-term expansion `L_n(λ) = limit + correction / n + O(1/n²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcgfExpansion<T> {
    pub limit: T,
    pub correction: T,
}

impl<T: Real> NcgfExpansion<T> {
    pub fn at(&self, n: usize) -> T {
        self.limit + self.correction / T::from_count(n)
    }

    /// `R₀ = log c₀`, the log of the leading Laplace coefficient.
    pub fn log_c0(&self) -> T {
        self.correction + T::lit(0.5) * T::TAU().ln()
    }
}

/// `r₀(λ) = (√(1+4λ²) - 1) / (2λ)`, the maximiser of `λr + ½ log(1-r²)`.
pub fn r0_of_lambda<T: Real>(lambda: T) -> T {
    let two = T::lit(2.0);
    two * lambda / (T::one() + T::one().hypot(two * lambda))
}

fn spherical_expansion<T: Real>(lambda: T, amplitude_power: T) -> NcgfExpansion<T> {
    let half = T::lit(0.5);
    let s = T::one().hypot(T::lit(2.0) * lambda);
    let excess = (s - T::one()) * half;
    let log_mid = excess.ln_1p();
    NcgfExpansion {
        limit: excess - half * log_mid,
        correction: amplitude_power * log_mid - half * s.ln(),
    }
}

/// Spherical, centred coefficient.
pub fn ncgf_limit_spherical<T: Real>(lambda: T) -> NcgfExpansion<T> {
    spherical_expansion(lambda, T::lit(1.5))
}

/// Spherical coefficient with known means.
pub fn ncgf_limit_spherical_known_mean<T: Real>(lambda: T) -> NcgfExpansion<T> {
    spherical_expansion(lambda, T::one())
}

/// Expansion of the normalised cumulant generating function for a scenario.
pub fn ncgf_expansion<T: Real>(s: Scenario<T>, lambda: T) -> Result<NcgfExpansion<T>> {
    match s {
        Scenario::SphericalCentered => Ok(ncgf_limit_spherical(lambda)),
        Scenario::SphericalKnownMean | Scenario::GaussianKnownMeanRhoZero => Ok(ncgf_limit_spherical_known_mean(lambda)),
        Scenario::GaussianCentered { rho } => Ok(GaussianSaddleContext::new(rho, lambda, 2)?.expansion()),
    }
}

fn check_rho_sld<T: Real>(rho: T) -> Result<()> {
    let limit = rho0::<T>();
    if !(rho.abs() <= limit) {
        return domain(format!(
            "sharp large deviations need |rho| <= rho0 = {limit:.10} (concavity of the Gaussian phase), got {rho}"
        ));
    }
    Ok(())
}

/// Jet of `h(r) = λr + ½ log(1-r²)`.
pub fn spherical_phase_jet<T: Real>(lambda: T, r: T, order: usize) -> DerivativeJet<T> {
    DerivativeJet::affine(r, T::zero(), lambda, order).add(
        &DerivativeJet::ln_affine(r, T::one(), -T::one(), order)
            .add(&DerivativeJet::ln_affine(r, T::one(), T::one(), order))
            .scale(T::lit(0.5)),
    )
}

/// Jet of `(1-r²)^{-2}` (centred) or `(1-r²)^{-3/2}` (known means).
pub fn spherical_amplitude_jet<T: Real>(r: T, order: usize, known_mean: bool) -> DerivativeJet<T> {
    let alpha = if known_mean { T::lit(-1.5) } else { T::lit(-2.0) };
    DerivativeJet::pow_affine(r, T::one(), -T::one(), alpha, order)
        .product(&DerivativeJet::pow_affine(r, T::one(), T::one(), alpha, order))
}

/// Jet of `h̄(r) = λr - log(1-ρr) + ½ log(1-r²)`.
pub fn gaussian_phase_jet<T: Real>(lambda: T, rho: T, r: T, order: usize) -> DerivativeJet<T> {
    spherical_phase_jet(lambda, r, order).add(&DerivativeJet::ln_affine(r, T::one(), -rho, order).scale(-T::one()))
}

/// Jet of `ḡ_ρ(r) = (1-ρ²)^{-1/2} (1-ρr)^{3/2} (1-r²)^{-2}`.
pub fn gaussian_amplitude_jet<T: Real>(rho: T, r: T, order: usize) -> DerivativeJet<T> {
    let front = (-T::lit(0.5) * ln_one_minus_sq(rho)).exp();
    DerivativeJet::pow_affine(r, T::one(), -rho, T::lit(1.5), order)
        .product(&spherical_amplitude_jet(r, order, false))
        .scale(front)
}

fn gaussian_phase_d1<T: Real>(lambda: T, rho: T, r: T) -> T {
    lambda + rho / (T::one() - rho * r) - r / ((T::one() - r) * (T::one() + r))
}

fn gaussian_phase_d2<T: Real>(rho: T, r: T) -> T {
    let a = rho / (T::one() - rho * r);
    let q = (T::one() - r) * (T::one() + r);
    a * a - (T::one() + r * r) / (q * q)
}

fn log_gbar<T: Real>(rho: T, r: T) -> T {
    let half = T::lit(0.5);
    -half * ln_one_minus_sq(rho) + T::lit(1.5) * (-rho * r).ln_1p() - T::lit(2.0) * ln_one_minus_sq(r)
}

/// Gaussian phase and amplitude at the maximiser `r₀(λ)` of `h̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSaddleContext<T> {
    pub rho: T,
    pub lambda: T,
    pub hbar_jet: DerivativeJet<T>,
    pub gbar_value: T,
}

impl<T: Real> GaussianSaddleContext<T> {
    /// Requires `|ρ| <= ρ₀`; `order >= 2`.
    pub fn new(rho: T, lambda: T, order: usize) -> Result<Self> {
        check_rho_sld(rho)?;
        let r0 = find_interior_max(
            |r| gaussian_phase_d1(lambda, rho, r),
            |r| gaussian_phase_d2(rho, r),
            -T::one(),
            T::one(),
        )?;
        let hbar_jet = gaussian_phase_jet(lambda, rho, r0, order.max(2));
        Ok(Self { rho, lambda, hbar_jet, gbar_value: log_gbar(rho, r0).exp() })
    }

    pub fn r0(&self) -> T {
        self.hbar_jet.point
    }

    pub fn expansion(&self) -> NcgfExpansion<T> {
        let half = T::lit(0.5);
        NcgfExpansion {
            limit: self.hbar_jet.value() + half * ln_one_minus_sq(self.rho),
            correction: log_gbar(self.rho, self.r0()) - half * self.hbar_jet.derivs[2].abs().ln(),
        }
    }
}

/// `R₀(λ) = log c₀(λ)` through the Laplace engine rather than closed forms.
pub fn log_c0_laplace<T: Real>(s: Scenario<T>, lambda: T) -> Result<T> {
    let (phase, amp) = match s {
        Scenario::GaussianCentered { rho } => {
            let ctx = GaussianSaddleContext::new(rho, lambda, 2)?;
            let r0 = ctx.r0();
            (ctx.hbar_jet, gaussian_amplitude_jet(rho, r0, 0))
        }
        _ => {
            let r0 = r0_of_lambda(lambda);
            (spherical_phase_jet(lambda, r0, 2), spherical_amplitude_jet(r0, 0, s.is_known_mean()))
        }
    };
    Ok(laplace_coefficient(0, &phase, &amp)?.ln())
}

fn check_threshold<T: Real>(c: T) -> Result<()> {
    if !(c > T::zero() && c < T::one()) {
        return domain(format!("threshold c must lie in (0, 1), got {c}"));
    }
    Ok(())
}

/// Saddle point at threshold `c`.
pub fn saddle<T: Real>(s: Scenario<T>, c: T) -> Result<SaddlePoint<T>> {
    s.validate()?;
    check_threshold(c)?;
    let one = T::one();
    let q = (one - c) * (one + c);
    match s {
        Scenario::GaussianCentered { rho } => {
            check_rho_sld(rho)?;
            if !(c > rho) {
                return domain(format!("threshold c = {c} must exceed rho = {rho}"));
            }
            Ok(SaddlePoint {
                lambda_c: c / q - rho / (one - rho * c),
                r0: c,
                sigma_sq: one / gaussian_phase_d2(rho, c).abs(),
                rate: rate_function(s, c)?,
            })
        }
        _ => Ok(SaddlePoint {
            lambda_c: c / q,
            r0: c,
            sigma_sq: q * q / (one + c * c),
            rate: -T::lit(0.5) * q.ln(),
        }),
    }
}

/// First-order sharp large-deviation approximation of `P(R_n >= c)`.
pub fn tail_sld<T: Real>(s: Scenario<T>, n: usize, c: T) -> Result<TailEstimate<T>> {
    if n < 2 {
        return domain(format!("sample size must be at least 2, got {n}"));
    }
    let sp = saddle(s, c)?;
    let half = T::lit(0.5);
    let l = ln_one_minus_sq(c);
    let log_k = match s {
        Scenario::SphericalCentered => -l - half * (c * c).ln_1p(),
        Scenario::SphericalKnownMean | Scenario::GaussianKnownMeanRhoZero => -half * l - half * (c * c).ln_1p(),
        Scenario::GaussianCentered { rho } => log_gbar(rho, c) - half * gaussian_phase_d2(rho, c).abs().ln(),
    };
    let nf = T::from_count(n);
    let log_prefactor = log_k - sp.lambda_c.ln() - half * sp.sigma_sq.ln() - half * (T::TAU() * nf).ln();
    let leading = -nf * sp.rate;
    Ok(TailEstimate {
        log_prob: leading + log_prefactor,
        method: Method::Sld,
        leading_exponent: Some(leading),
        log_prefactor: Some(log_prefactor),
        log_error: None,
    })
}

/// Rate function `L*(y)`: `-½ log(1-y²)` (spherical) or
/// `I_ρ(y) = log((1-ρy) / (√(1-ρ²) √(1-y²)))` (Gaussian).
pub fn rate_function<T: Real>(s: Scenario<T>, y: T) -> Result<T> {
    s.validate()?;
    if !(y.abs() < T::one()) {
        return domain(format!("rate function argument must satisfy |y| < 1, got {y}"));
    }
    let rho = s.rho();
    if y == rho {
        return Ok(T::zero());
    }
    let half = T::lit(0.5);
    Ok((-rho * y).ln_1p() - half * ln_one_minus_sq(rho) - half * ln_one_minus_sq(y))
}

/// `I_ρ''(y) = (1+y²)/(1-y²)² - ρ²/(1-ρy)²`.
pub fn rate_second_derivative<T: Real>(rho: T, y: T) -> T {
    -gaussian_phase_d2(rho, y)
}

const GOLDEN_MAX_ITER: usize = 300;
const BRACKET_MAX_DOUBLINGS: usize = 80;

/// `sup_λ {λy - L(λ)}` by bracketing and golden-section search on the
/// limit cumulant generating function.
pub fn legendre_rate_numeric<T: Real>(s: Scenario<T>, y: T) -> Result<T> {
    s.validate()?;
    if !(y.abs() < T::one()) {
        return domain(format!("rate function argument must satisfy |y| < 1, got {y}"));
    }
    let objective = |lam: T| -> Result<T> { Ok(lam * y - ncgf_expansion(s, lam)?.limit) };
    // L'(0) is the law-of-large-numbers limit.
    let mean = s.rho();
    if y == mean {
        return objective(T::zero());
    }
    let dir = if y > mean { T::one() } else { -T::one() };
    let (mut a, mut fa) = (T::zero(), objective(T::zero())?);
    let mut step = T::one();
    let (mut b, mut fb) = (dir * step, objective(dir * step)?);
    let mut prev = a;
    let mut doublings = 0;
    while fb > fa {
        prev = a;
        a = b;
        fa = fb;
        step = step * T::lit(2.0);
        b = a + dir * step;
        fb = objective(b)?;
        doublings += 1;
        if doublings > BRACKET_MAX_DOUBLINGS {
            return domain(format!("Legendre transform at y = {y} has no finite maximiser"));
        }
    }
    let (mut lo, mut hi) = if prev < b { (prev, b) } else { (b, prev) };
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (objective(x1)?, objective(x2)?);
    let tol = T::epsilon().sqrt() * T::lit(1e-2);
    for _ in 0..GOLDEN_MAX_ITER {
        if hi - lo <= tol * (T::one() + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1)?;
        }
    }
    Ok(f1.max(f2).max(fa))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityPoint<T> {
    pub y: T,
    pub rate: T,
    pub second_derivative: T,
}

/// `I_ρ` and `I_ρ''` on the interior grid `y_i = -1 + 2(i+1)/(points+1)`.
pub fn convexity_profile<T: Real>(rho: T, points: usize) -> Result<Vec<ConvexityPoint<T>>> {
    let s = Scenario::gaussian(rho)?;
    let denom = T::from_count(points + 1);
    (0..points)
        .map(|i| {
            let y = -T::one() + T::lit(2.0) * T::from_count(i + 1) / denom;
            Ok(ConvexityPoint { y, rate: rate_function(s, y)?, second_derivative: rate_second_derivative(rho, y) })
        })
        .collect()
}
