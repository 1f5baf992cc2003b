//! Closed-form and asymptotic predictions for profiles, currents and
//! correlations, plus the fit that measures the constant in the isotropic
//! moment ratio.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::anisotropy::chain_table;
use crate::error::{Error, Result};
use crate::transfer::{build_transfer, Balancing, ChainContraction};

/// Which isotropic formula family applies at `(ε, n)`, relative to the
/// crossover `ε* = 2π/n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsotropicBranch {
    /// `ε ≤ ε*/3`.
    Perturbative,
    /// `ε*/3 < ε < 3ε*`: neither formula is reliable.
    Crossover,
    /// `ε ≥ 3ε*`.
    StrongCoupling,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidityWarning {
    pub eps: f64,
    pub crossover: f64,
    pub branch: IsotropicBranch,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub validity: String,
    pub warning: Option<ValidityWarning>,
}

impl AsymptoticPrediction {
    fn new(name: &str, params: &[(&str, f64)], value: f64, validity: &str) -> Self {
        AsymptoticPrediction {
            name: name.into(),
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            value,
            validity: validity.into(),
            warning: None,
        }
    }
}

/// Large-`n` current at `Δ = 1/2`.
pub fn ballistic_current_limit(eps: f64) -> f64 {
    let e2 = eps * eps;
    ((81.0 + 74.0 * e2 + 9.0 * e2 * e2).sqrt() - 7.0 - 3.0 * e2) * eps / (4.0 * (1.0 + e2))
}

/// Small-coupling slope of [`ballistic_current_limit`].
pub const BALLISTIC_SLOPE: f64 = 0.5;

/// Large-coupling tail coefficient: the limit decays as `4/(3ε)`.
pub const BALLISTIC_TAIL: f64 = 4.0 / 3.0;

/// Coupling that maximizes [`ballistic_current_limit`], by golden-section
/// search on `[0.1, 10]`.
pub fn ballistic_current_argmax() -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.1, 10.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while b - a > 1e-12 {
        if ballistic_current_limit(c) > ballistic_current_limit(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    (a + b) / 2.0
}

/// `M(x) = cos πx`.
pub fn isotropic_profile(x: f64) -> f64 {
    (PI * x).cos()
}

/// `ε* = 2π/n`.
pub fn isotropic_crossover(n: usize) -> f64 {
    2.0 * PI / n as f64
}

pub fn isotropic_branch(eps: f64, n: usize) -> IsotropicBranch {
    let c = isotropic_crossover(n);
    if eps <= c / 3.0 {
        IsotropicBranch::Perturbative
    } else if eps < 3.0 * c {
        IsotropicBranch::Crossover
    } else {
        IsotropicBranch::StrongCoupling
    }
}

fn isotropic_warning(eps: f64, n: usize) -> Option<ValidityWarning> {
    let crossover = isotropic_crossover(n);
    let branch = isotropic_branch(eps, n);
    let message = match branch {
        IsotropicBranch::StrongCoupling => return None,
        IsotropicBranch::Crossover => format!("eps = {eps} lies within a factor 3 of the crossover 2*pi/n = {crossover}"),
        IsotropicBranch::Perturbative => {
            format!("eps = {eps} is below the crossover 2*pi/n = {crossover}; the perturbative current eps/2 applies")
        }
    };
    Some(ValidityWarning { eps, crossover, branch, message })
}

/// `π²/(εn²)`, with a warning unless `ε ≥ 3·2π/n`.
pub fn isotropic_current(eps: f64, n: usize) -> AsymptoticPrediction {
    let nf = n as f64;
    let mut p = AsymptoticPrediction::new(
        "isotropic_current",
        &[("delta", 1.0), ("eps", eps), ("n", nf)],
        PI * PI / (eps * nf * nf),
        "delta = 1, eps >> 2*pi/n",
    );
    p.warning = isotropic_warning(eps, n);
    p
}

/// `f(x, y) = 2πx(y−1) sin πx sin πy + cos πx ((1−2y) sin πy + π(y−1)y cos πy)`.
pub fn correlator_shape(x: f64, y: f64) -> f64 {
    let (sx, cx) = (PI * x).sin_cos();
    let (sy, cy) = (PI * y).sin_cos();
    2.0 * PI * x * (y - 1.0) * sx * sy + cx * ((1.0 - 2.0 * y) * sy + PI * (y - 1.0) * y * cy)
}

/// First term of [`correlator_shape`], `2πx(y−1) sin πx sin πy`. The exact
/// large-`n` limit of `(4n/π)·C(x, y)` follows this term alone; the second
/// term of `f` is absent from the exact correlators.
pub fn correlator_bulk_term(x: f64, y: f64) -> f64 {
    2.0 * PI * x * (y - 1.0) * (PI * x).sin() * (PI * y).sin()
}

/// `C(x, y) ≈ (π/4n) f(min, max)`.
pub fn isotropic_correlator(x: f64, y: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) || x == y {
        return Err(Error::Domain(format!("need distinct x, y in [0, 1], got ({x}, {y})")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("chain length must be at least 2, got {n}")));
    }
    Ok(PI / (4.0 * n as f64) * correlator_shape(x.min(y), x.max(y)))
}

/// `arcosh Δ`, the exponential decay rate of the current in `n`.
pub fn easy_axis_decay_rate(delta: f64) -> Result<f64> {
    if !(delta > 1.0) || !delta.is_finite() {
        return Err(Error::Domain(format!("decay rate needs delta > 1, got {delta}")));
    }
    Ok(delta.acosh())
}

/// `(⟨J⟩, ⟨σ_j^z⟩) = (ε/2, (ε²/4)(n+1−2j))` for `ε ≪ 2π/n`.
pub fn perturbative_limits(eps: f64, n: usize, j: usize) -> (f64, f64) {
    let m = n as f64 + 1.0 - 2.0 * j as f64;
    (eps / 2.0, eps * eps / 4.0 * m)
}

/// `ε²((4n−3)²/(32π²) − α) + 1`.
pub fn isotropic_moment_ratio(eps: f64, n: usize, alpha: f64) -> f64 {
    let q = 4.0 * n as f64 - 3.0;
    eps * eps * (q * q / (32.0 * PI * PI) - alpha) + 1.0
}

/// Least-squares fit of `α_n = α + β/n + γ/n²`, where
/// `α_n = (4n−3)²/(32π²) − (ratio_n − 1)/ε²` and `ratio_n` is the exact
/// isotropic moment ratio.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaFit {
    pub eps: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Max absolute fit residual in `α_n`.
    pub residual: f64,
}

pub fn fit_alpha(eps: f64, n_min: usize, n_max: usize) -> Result<AlphaFit> {
    if !(eps > 0.0) || n_min < 2 || n_max < n_min + 3 {
        return Err(Error::Domain(format!("bad fit window eps={eps}, n in [{n_min}, {n_max}]")));
    }
    let ts = build_transfer(&chain_table(1.0, eps, n_max)?, Balancing::On)?;
    let c = ChainContraction::new(&ts, n_max)?;
    let ns: Vec<usize> = (n_min..=n_max).collect();
    let a_n: Vec<f64> = ns
        .iter()
        .map(|&n| (isotropic_moment_ratio(eps, n, 0.0) - c.moment_ratio(n)) / (eps * eps))
        .collect();
    let x = DMatrix::from_fn(ns.len(), 3, |i, k| (ns[i] as f64).powi(-(k as i32)));
    let y = DVector::from_vec(a_n.clone());
    let coef = x.clone().svd(true, true).solve(&y, 1e-14).map_err(|e| Error::NumericalInstability(e.into()))?;
    let residual = (&x * &coef - &y).amax();
    Ok(AlphaFit { eps, n_min, n_max, alpha: coef[0], beta: coef[1], gamma: coef[2], residual })
}

/// `n·C(x, y)` from the exact chain, bilinearly interpolated between the
/// four site pairs surrounding `x = (j−1)/(n−1)`, `y = (k−1)/(n−1)`.
pub fn scaled_correlator_sample(c: &ChainContraction<'_, f64>, x: f64, y: f64) -> Result<f64> {
    let n = c.n();
    let (x, y) = (x.min(y), x.max(y));
    let pos = |t: f64| {
        let p = t * (n - 1) as f64;
        let j = (p.floor() as usize).min(n - 2);
        (j + 1, p - j as f64)
    };
    let (j, fx) = pos(x);
    let (k, fy) = pos(y);
    if k <= j + 1 {
        return Err(Error::Domain(format!("points ({x}, {y}) too close for n = {n}")));
    }
    let profile = c.profile()?;
    let conn = |a: usize, b: usize| -> Result<f64> { Ok(c.zz(a, b)? - profile[a - 1] * profile[b - 1]) };
    let v = (1.0 - fx) * (1.0 - fy) * conn(j, k)?
        + fx * (1.0 - fy) * conn(j + 1, k)?
        + (1.0 - fx) * fy * conn(j, k + 1)?
        + fx * fy * conn(j + 1, k + 1)?;
    Ok(n as f64 * v)
}

/// Every prediction that applies at `(Δ, ε, n)`, for the CLI.
pub fn predictions(delta: f64, eps: f64, n: usize) -> Vec<AsymptoticPrediction> {
    let nf = n as f64;
    let mut out = Vec::new();
    if delta == 0.5 {
        out.push(AsymptoticPrediction::new(
            "ballistic_current_limit",
            &[("delta", delta), ("eps", eps)],
            ballistic_current_limit(eps),
            "delta = 1/2, n -> infinity",
        ));
    }
    if delta == 1.0 {
        out.push(isotropic_current(eps, n));
        for (name, x) in [("isotropic_profile_quarter", 0.25), ("isotropic_profile_center", 0.5)] {
            let mut p = AsymptoticPrediction::new(
                name,
                &[("delta", 1.0), ("eps", eps), ("n", nf), ("x", x)],
                isotropic_profile(x),
                "delta = 1, eps >> 2*pi/n",
            );
            p.warning = isotropic_warning(eps, n);
            out.push(p);
        }
        let mut p = AsymptoticPrediction::new(
            "isotropic_correlator",
            &[("delta", 1.0), ("eps", eps), ("n", nf), ("x", 0.25), ("y", 0.75)],
            PI / (4.0 * nf) * correlator_shape(0.25, 0.75),
            "delta = 1, eps >> 2*pi/n, leading order in 1/n",
        );
        p.warning = isotropic_warning(eps, n);
        out.push(p);
    }
    if delta > 1.0 {
        if let Ok(rate) = easy_axis_decay_rate(delta) {
            out.push(AsymptoticPrediction::new(
                "easy_axis_decay_rate",
                &[("delta", delta)],
                rate,
                "delta > 1, current ~ exp(-n * rate)",
            ));
        }
    }
    let (j, sz) = perturbative_limits(eps, n, 1);
    let validity = "eps << 2*pi/n";
    out.push(AsymptoticPrediction::new("perturbative_current", &[("eps", eps)], j, validity));
    out.push(AsymptoticPrediction::new("perturbative_sz_first_site", &[("eps", eps), ("n", nf)], sz, validity));
    out
}
