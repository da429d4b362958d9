//! Bahadur exact slope of the correlation test of `H₀: ρ = 0`.
//!
//! Under the alternative `ρ` the statistic `r_n` tends to `ρ`, and the null tail
//! decays like `exp(n ½ log(1-t²))`, so the slope is `c(ρ) = -log(1-ρ²)`. The
//! Kullback-Leibler infimum over the null family is `J(ρ) = -½ log(1-ρ²)`, and
//! `c = 2J` makes the test asymptotically optimal.

use crate::density::{ln_one_minus_sq, tail_exact, Scenario};
use crate::error::{domain, Result};
use crate::real::Real;
use crate::sld::tail_sld;

pub type Mat2<T> = [[T; 2]; 2];

fn check_rho<T: Real>(rho: T) -> Result<()> {
    if !(rho.abs() < T::one()) {
        return domain(format!("correlation must satisfy |rho| < 1, got {rho}"));
    }
    Ok(())
}

/// `c(ρ) = -log(1-ρ²)`; undefined at the null `ρ = 0`.
pub fn bahadur_slope<T: Real>(rho: T) -> Result<T> {
    check_rho(rho)?;
    if rho == T::zero() {
        return domain("the Bahadur slope is undefined at the null rho = 0".to_string());
    }
    Ok(-ln_one_minus_sq(rho))
}

/// `J(ρ) = -½ log(1-ρ²)`.
pub fn kl_infimum<T: Real>(rho: T) -> Result<T> {
    check_rho(rho)?;
    Ok(-T::lit(0.5) * ln_one_minus_sq(rho))
}

fn det2<T: Real>(m: &Mat2<T>) -> T {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `KL(N(μ₁, Σ₁) ‖ N(μ₀, Σ₀))` for bivariate normals.
pub fn gaussian_kl<T: Real>(mu1: [T; 2], sigma1: &Mat2<T>, mu0: [T; 2], sigma0: &Mat2<T>) -> Result<T> {
    let d0 = det2(sigma0);
    let d1 = det2(sigma1);
    if !(d0 > T::zero() && d1 > T::zero() && sigma0[0][0] > T::zero() && sigma1[0][0] > T::zero()) {
        return domain("covariance matrices must be positive definite".to_string());
    }
    let inv = [[sigma0[1][1] / d0, -sigma0[0][1] / d0], [-sigma0[1][0] / d0, sigma0[0][0] / d0]];
    let trace = (0..2).map(|i| (0..2).map(|k| inv[i][k] * sigma1[k][i]).sum::<T>()).sum::<T>();
    let diff = [mu0[0] - mu1[0], mu0[1] - mu1[1]];
    let quad = (0..2).map(|i| (0..2).map(|k| diff[i] * inv[i][k] * diff[k]).sum::<T>()).sum::<T>();
    let half = T::lit(0.5);
    Ok(half * (trace + quad - T::lit(2.0) + (d0 / d1).ln()))
}

fn golden_min<T: Real, F: Fn(T) -> T>(f: F, mut lo: T, mut hi: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= T::epsilon().sqrt() * T::lit(1e-3) {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        x1
    } else {
        x2
    }
}

const DESCENT_SWEEPS: usize = 8;
const SEARCH_HALF_WIDTH: f64 = 4.0;

/// Minimises `KL(N(0, [[1, ρ], [ρ, 1]]) ‖ N(μ₀, diag(e^{a}, e^{b})))` over
/// `(μ₀, a, b)` by a coarse grid followed by coordinate-wise golden sections.
pub fn kl_infimum_numeric<T: Real>(rho: T) -> Result<T> {
    check_rho(rho)?;
    let sigma = [[T::one(), rho], [rho, T::one()]];
    let objective = |p: &[T; 4]| -> T {
        let sigma0 = [[p[2].exp(), T::zero()], [T::zero(), p[3].exp()]];
        gaussian_kl([T::zero(), T::zero()], &sigma, [p[0], p[1]], &sigma0).unwrap_or(T::infinity())
    };
    let width = T::lit(SEARCH_HALF_WIDTH);
    let grid: Vec<T> = (0..=8).map(|i| -width + width * T::lit(0.25) * T::from_count(i)).collect();
    let mut best = [T::zero(); 4];
    let mut best_val = T::infinity();
    for &m in &grid {
        for &a in &grid {
            let p = [m, m, a, a];
            let v = objective(&p);
            if v < best_val {
                best_val = v;
                best = p;
            }
        }
    }
    for _ in 0..DESCENT_SWEEPS {
        for k in 0..4 {
            let centre = best[k];
            let x = golden_min(
                |t| {
                    let mut p = best;
                    p[k] = t;
                    objective(&p)
                },
                centre - width,
                centre + width,
            );
            best[k] = x;
        }
    }
    Ok(objective(&best))
}

/// Outcome of the one-sided correlation test at an observed coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestReport<T> {
    pub statistic: T,
    pub n: usize,
    pub centered: bool,
    /// Sharp large-deviation log p-value, capped at 0.
    pub log_p_value: T,
    /// Log p-value from quadrature of the null density.
    pub log_p_exact: T,
    /// Exact slope `c(ρ)` at `ρ = statistic`.
    pub slope_at: T,
}

/// P-value of `r_obs` under the null `ρ = 0`, whose law does not depend on
/// means or variances.
pub fn p_value_sld<T: Real>(n: usize, r_obs: T, centered: bool) -> Result<TestReport<T>> {
    if !(r_obs > T::zero() && r_obs < T::one()) {
        return domain(format!("observed coefficient must lie in (0, 1), got {r_obs}"));
    }
    let null = if centered { Scenario::SphericalCentered } else { Scenario::SphericalKnownMean };
    let sld = tail_sld(null, n, r_obs)?;
    let exact = tail_exact(null, n, r_obs)?;
    Ok(TestReport {
        statistic: r_obs,
        n,
        centered,
        log_p_value: sld.log_prob.min(T::zero()),
        log_p_exact: exact.log_value,
        slope_at: bahadur_slope(r_obs)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rho_grid() -> Vec<f64> {
        (1..=9).flat_map(|k| [0.1 * k as f64, -0.1 * k as f64]).collect()
    }

    #[test]
    fn slope_examples() {
        assert!((bahadur_slope(0.5_f64).unwrap() - 0.287_682_1).abs() < 1e-7);
        assert!(bahadur_slope(1e-8_f64).unwrap() < 1e-15);
        assert!(bahadur_slope(0.0_f64).is_err());
        assert!(bahadur_slope(1.0_f64).is_err());
        assert_eq!(kl_infimum(0.0_f64).unwrap(), 0.0);
        assert!((kl_infimum(0.5_f64).unwrap() - 0.143_841_0).abs() < 1e-7);
    }

    #[test]
    fn optimality_identity() {
        for rho in rho_grid() {
            let d = bahadur_slope(rho).unwrap() - 2.0 * kl_infimum(rho).unwrap();
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn kl_basics() {
        let id = [[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(gaussian_kl([0.0, 0.0], &id, [0.0, 0.0], &id).unwrap(), 0.0);
        // Univariate-product check: KL(N(0,1)‖N(1,4)) per coordinate.
        let four = [[4.0, 0.0], [0.0, 4.0]];
        let per = 0.5 * (0.25 + 0.25 - 1.0 + 4f64.ln());
        let got = gaussian_kl([0.0, 0.0], &id, [1.0, 1.0], &four).unwrap();
        assert!((got - 2.0 * per).abs() < 1e-15);
        assert!(gaussian_kl([0.0, 0.0], &id, [0.0, 0.0], &[[1.0, 1.0], [1.0, 1.0]]).is_err());
    }

    #[test]
    fn numeric_infimum_matches() {
        for rho in [0.0_f64, 0.5, -0.8, 0.95] {
            let numeric = kl_infimum_numeric(rho).unwrap();
            assert!((numeric - kl_infimum(rho).unwrap()).abs() < 1e-6, "ρ = {rho}: {numeric}");
        }
    }

    #[test]
    fn p_value_behaviour() {
        let rep = p_value_sld(20, 0.5_f64, true).unwrap();
        assert!((rep.log_p_value.exp() / 1.34e-2 - 1.0).abs() < 2e-3);
        assert!((rep.log_p_exact.exp() / 1.24e-2 - 1.0).abs() < 2e-3);
        assert!((rep.log_p_value - rep.log_p_exact).abs() < 2.0 / 20.0);

        let tiny = p_value_sld(50, 1e-9_f64, true).unwrap();
        assert_eq!(tiny.log_p_value, 0.0);
        assert!((tiny.log_p_exact - 0.5f64.ln()).abs() < 1e-6);

        for centered in [true, false] {
            let mut prev = f64::INFINITY;
            for k in 2..10 {
                let v = p_value_sld(40, 0.1 * k as f64, centered).unwrap().log_p_value;
                assert!(v < prev);
                prev = v;
            }
            let mut prev = f64::INFINITY;
            for n in [10usize, 20, 40, 80, 160] {
                let v = p_value_sld(n, 0.4, centered).unwrap().log_p_value;
                assert!(v < prev);
                prev = v;
            }
        }
        for &c in &[0.3_f64, 0.6] {
            let target = -0.5 * (1.0 - c * c).ln();
            let gap = |n: usize| (-p_value_sld(n, c, true).unwrap().log_p_value / n as f64 - target).abs();
            assert!(gap(800) < gap(100) && gap(800) < 0.01);
        }
    }

    #[test]
    fn empirical_slope() {
        for rho in [0.2_f64, 0.5, 0.8] {
            let n = 400;
            let lp = tail_exact(Scenario::SphericalCentered, n, rho).unwrap().log_value;
            let slope = -2.0 * lp / n as f64;
            assert!((slope - bahadur_slope(rho).unwrap()).abs() < 0.02, "ρ = {rho}: {slope}");
        }
    }
}
