use std::fmt;

use sld_correl::specfun::double_factorial_odd;
use sld_correl::{
    bahadur_slope, convexity_profile, kl_infimum, kl_infimum_numeric, laplace_coefficient, mgf_exact, p_value_sld,
    rate_function, rate_second_derivative, rho0, saddle, tail_exact, tail_mc_partitioned, tail_sld,
    DerivativeJet64, Error, McEstimate64, Scenario64,
};

use crate::table::{Cell, Table};
use crate::{Figure, McArgs, ModelArgs, ScenarioArg};

#[derive(Debug)]
pub enum CliError {
    /// Invalid input; exit code 2.
    Precondition(String),
    /// Numerical failure; exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Precondition(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Precondition(m) => write!(f, "precondition violated: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_precondition() {
            CliError::Precondition(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

type CmdResult = Result<Table, CliError>;

fn scenario(model: &ModelArgs) -> Result<Scenario64, CliError> {
    match (model.scenario, model.rho) {
        (ScenarioArg::Gaussian, Some(rho)) => Ok(Scenario64::gaussian(rho)?),
        (ScenarioArg::Gaussian, None) => Err(CliError::Precondition("--rho is required for the gaussian scenario".into())),
        (_, Some(rho)) if rho != 0.0 => {
            Err(CliError::Precondition("--rho applies only to the gaussian scenario".into()))
        }
        (ScenarioArg::SphericalCentered, _) => Ok(Scenario64::SphericalCentered),
        (ScenarioArg::SphericalKnown, _) => Ok(Scenario64::SphericalKnownMean),
        (ScenarioArg::GaussianKnownRho0, _) => Ok(Scenario64::GaussianKnownMeanRhoZero),
    }
}

fn run_mc(s: Scenario64, n: usize, c: f64, mc: &McArgs) -> Result<McEstimate64, CliError> {
    if mc.threads == 0 {
        return Err(CliError::Precondition("--threads must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(mc.threads)
        .build()
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    log::debug!("simulating {} draws on {} streams", mc.samples, mc.threads);
    Ok(pool.install(|| tail_mc_partitioned(s, n, c, mc.samples, mc.seed, mc.threads))?)
}

pub fn approx(model: &ModelArgs, n: usize, c: f64) -> CmdResult {
    let s = scenario(model)?;
    let est = tail_sld(s, n, c)?;
    let sp = saddle(s, c)?;
    let mut t = Table::new(&[
        "scenario",
        "n",
        "c",
        "rho",
        "log_prob",
        "prob",
        "leading_exponent",
        "log_prefactor",
        "lambda_c",
        "sigma_sq",
        "rate",
    ]);
    t.push(vec![
        s.name().into(),
        n.into(),
        c.into(),
        s.rho().into(),
        est.log_prob.into(),
        est.probability().into(),
        est.leading_exponent.into(),
        est.log_prefactor.into(),
        sp.lambda_c.into(),
        sp.sigma_sq.into(),
        sp.rate.into(),
    ]);
    Ok(t)
}

pub fn compare(model: &ModelArgs, n_list: &[usize], c: f64, mc: &McArgs) -> CmdResult {
    let s = scenario(model)?;
    if n_list.is_empty() {
        return Err(CliError::Precondition("--n-list is empty".into()));
    }
    let with_mc = mc.samples > 0;
    let mut columns = vec!["n", "sld_log_prob", "exact_log_prob", "exact_log_error"];
    if with_mc {
        columns.extend(["mc_p_hat", "mc_std_err"]);
    }
    columns.extend(["sld_prob", "exact_prob", "ratio", "n_abs_ratio_minus_1"]);
    let mut t = Table::new(&columns);
    for &n in n_list {
        let sld = tail_sld(s, n, c)?;
        let exact = tail_exact(s, n, c)?;
        let ratio = (sld.log_prob - exact.log_value).exp();
        let mut row: Vec<Cell> = vec![
            n.into(),
            sld.log_prob.into(),
            exact.log_value.into(),
            exact.abs_error_estimate.into(),
        ];
        if with_mc {
            let e = run_mc(s, n, c, mc)?;
            row.extend([e.p_hat.into(), e.std_err.into()]);
        }
        row.extend([
            sld.probability().into(),
            exact.value().into(),
            ratio.into(),
            (n as f64 * (ratio - 1.0).abs()).into(),
        ]);
        t.push(row);
    }
    Ok(t)
}

pub fn rate(rho: Option<f64>, figure: Option<Figure>, points: usize) -> CmdResult {
    let rho = match (rho, figure) {
        (Some(r), _) => r,
        (None, Some(Figure::Below)) => rho0::<f64>() - 0.1,
        (None, Some(Figure::Above)) => rho0::<f64>() + 0.1,
        (None, None) => return Err(CliError::Precondition("give --rho or --figure".into())),
    };
    if points == 0 {
        return Err(CliError::Precondition("--points must be positive".into()));
    }
    let mut grid: Vec<(f64, f64, f64)> =
        convexity_profile(rho, points)?.into_iter().map(|p| (p.y, p.rate, p.second_derivative)).collect();
    if !grid.iter().any(|p| p.0 == rho) {
        let s = Scenario64::gaussian(rho)?;
        let at = grid.partition_point(|p| p.0 < rho);
        grid.insert(at, (rho, rate_function(s, rho)?, rate_second_derivative(rho, rho)));
    }
    let mut t = Table::new(&["rho", "y", "rate", "second_derivative", "convex"]);
    for (y, r, d2) in grid {
        t.push(vec![rho.into(), y.into(), r.into(), d2.into(), (d2 >= 0.0).into()]);
    }
    Ok(t)
}

pub fn bahadur(rho: f64, n: Option<usize>, r_obs: Option<f64>, known_mean: bool) -> CmdResult {
    let slope = bahadur_slope(rho)?;
    let j = kl_infimum(rho)?;
    let numeric = kl_infimum_numeric(rho)?;
    let mut columns = vec!["rho", "slope", "kl_infimum", "two_j", "kl_infimum_numeric"];
    let mut row: Vec<Cell> = vec![rho.into(), slope.into(), j.into(), (2.0 * j).into(), numeric.into()];
    if let (Some(n), Some(r)) = (n, r_obs) {
        let rep = p_value_sld(n, r, !known_mean)?;
        columns.extend(["n", "r_obs", "centered", "log_p_sld", "log_p_exact", "p_sld", "p_exact"]);
        row.extend([
            n.into(),
            r.into(),
            rep.centered.into(),
            rep.log_p_value.into(),
            rep.log_p_exact.into(),
            rep.log_p_value.exp().into(),
            rep.log_p_exact.exp().into(),
        ]);
    }
    let mut t = Table::new(&columns);
    t.push(row);
    Ok(t)
}

pub fn mc(model: &ModelArgs, n: usize, c: f64, mc: &McArgs) -> CmdResult {
    let s = scenario(model)?;
    if mc.samples == 0 {
        return Err(CliError::Precondition("--samples must be positive".into()));
    }
    let e = run_mc(s, n, c, mc)?;
    let mut t = Table::new(&[
        "scenario",
        "n",
        "c",
        "rho",
        "samples",
        "seed",
        "partitions",
        "hits",
        "p_hat",
        "std_err",
        "log_p_hat",
    ]);
    t.push(vec![
        s.name().into(),
        n.into(),
        c.into(),
        s.rho().into(),
        e.samples.into(),
        e.seed.into(),
        e.partitions.into(),
        e.hits.into(),
        e.p_hat.into(),
        e.std_err.into(),
        e.p_hat.ln().into(),
    ]);
    Ok(t)
}

pub fn exact(model: &ModelArgs, n: usize, c: f64, lambda: Option<f64>) -> CmdResult {
    let s = scenario(model)?;
    let q = tail_exact(s, n, c)?;
    let mut columns = vec!["scenario", "n", "c", "rho", "log_prob", "prob", "log_error", "subdivisions"];
    let mut row: Vec<Cell> = vec![
        s.name().into(),
        n.into(),
        c.into(),
        s.rho().into(),
        q.log_value.into(),
        q.value().into(),
        q.abs_error_estimate.into(),
        q.subdivisions.into(),
    ];
    if let Some(lam) = lambda {
        columns.extend(["lambda", "ncgf"]);
        row.extend([lam.into(), mgf_exact(s, n, lam)?.into()]);
    }
    let mut t = Table::new(&columns);
    t.push(row);
    Ok(t)
}

/// Largest order whose exact value `√(2π) (2j-1)!! (2j)!` stays well inside `f64`.
const MAX_DEMO_ORDER: usize = 12;

pub fn laplace_demo(order: usize) -> CmdResult {
    if order > MAX_DEMO_ORDER {
        return Err(CliError::Precondition(format!("--order must be at most {MAX_DEMO_ORDER}")));
    }
    // ∫ exp(-x t²/2) t^{2j} dt = √(2π) (2j-1)!! x^{-j-1/2}, so c_j = √(2π) (2j-1)!! (2j)!.
    let root = (2.0 * std::f64::consts::PI).sqrt();
    let mut t = Table::new(&["j", "coefficient", "exact", "rel_error"]);
    for j in 0..=order {
        let mut d = vec![0.0; 2 * j + 3];
        d[2] = -1.0;
        let phase = DerivativeJet64::new(0.0, d);
        let fact: f64 = (1..=2 * j).map(|k| k as f64).product();
        let mut q = vec![0.0; 2 * j + 1];
        q[2 * j] = fact;
        let amp = DerivativeJet64::new(0.0, q);
        let c = laplace_coefficient(j, &phase, &amp)?;
        let dfact = if j == 0 { 1.0 } else { double_factorial_odd(j as u64 - 1)? as f64 };
        let want = root * dfact * fact;
        t.push(vec![j.into(), c.into(), want.into(), ((c - want) / want).abs().into()]);
    }
    Ok(t)
}
