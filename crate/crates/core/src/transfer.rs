//! Transfer matrices on the diagonal auxiliary subspace and the
//! `σ^z`-string, hopping and current observables built from them.
//!
//! Boundary vectors `⟨0|T^k` and `T^k|0⟩` are iterated with power-of-two
//! renormalization and an integer exponent accumulator, so chains far
//! beyond the double range of `⟨0|T^n|0⟩` are handled without overflow.

use serde::Serialize;

use crate::anisotropy::{truncation_dim, AmplitudeTable};
use crate::error::{Error, Result};
use crate::linalg::Tridiag;
use crate::scalar::{abs2, Cx, Real};

use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Balancing {
    On,
    Off,
}

/// `T`, `V` (real) and `W` (complex) with the diagonal similarity that was
/// applied to all three.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferSet<T> {
    pub d: usize,
    pub eps: T,
    pub t: Tridiag<T>,
    pub v: Tridiag<T>,
    pub w: Tridiag<Cx<T>>,
    /// `M ↦ D⁻¹ M D` with `D = diag(balance)`, `balance[0] = 1`.
    pub balance: Vec<T>,
}

fn modulus2<T: Real>(z: Cx<T>) -> Result<T> {
    let p = z * z.conj();
    if p.im.abs() > T::lit(1e-14) * p.re.abs() {
        return Err(Error::NumericalInstability(format!("non-real squared modulus {p}")));
    }
    Ok(p.re)
}

/// Builds `T`, `V`, `W` from the amplitude table, optionally balanced.
pub fn build_transfer<T: Real>(table: &AmplitudeTable<T>, balancing: Balancing) -> Result<TransferSet<T>> {
    let d = table.d;
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let mut t = Tridiag::zeros(d);
    let mut v = Tridiag::zeros(d);
    let mut w = Tridiag::zeros(d);
    let p: Vec<Cx<T>> = (0..d).map(|r| table.aplus[r] * table.aminus[r]).collect();
    for r in 0..d {
        let a0 = table.a0[r];
        t.diag[r] = modulus2(a0)?;
        let mut wd = Cx::zero();
        if r + 1 < d {
            let up = modulus2(table.aplus[r])? * half;
            let down = modulus2(table.aminus[r])? * half;
            t.upper[r] = up;
            t.lower[r] = down;
            v.upper[r] = up;
            v.lower[r] = -down;
            let cross = a0 * table.a0[r + 1].conj() * quarter;
            w.upper[r] = cross * (up + up);
            w.lower[r] = cross * (down + down);
            wd = wd + a0 * a0 * p[r].conj();
        }
        if r > 0 {
            let ab = a0.conj();
            wd = wd + p[r - 1] * ab * ab;
        }
        w.diag[r] = wd * quarter;
    }
    let ts = TransferSet { d, eps: table.eps, t, v, w, balance: vec![T::one(); d] };
    Ok(match balancing {
        Balancing::On => ts.balanced(),
        Balancing::Off => ts,
    })
}

impl<T: Real> TransferSet<T> {
    pub fn is_balanced(&self) -> bool {
        self.balance.iter().any(|&b| b != T::one())
    }

    /// Geometric-mean balancing: after the similarity the two off-diagonal
    /// entries of every 2×2 block of `T` have equal magnitude.
    pub fn balanced(&self) -> Self {
        let d = self.d;
        let mut step = vec![T::one(); d.saturating_sub(1)];
        for r in 0..d.saturating_sub(1) {
            let (up, down) = (self.t.upper[r], self.t.lower[r]);
            if up > T::zero() && down > T::zero() {
                step[r] = (down / up).sqrt();
            }
        }
        let mut balance = self.balance.clone();
        let mut t = self.t.clone();
        let mut v = self.v.clone();
        let mut w = self.w.clone();
        for r in 0..d.saturating_sub(1) {
            balance[r + 1] = balance[r] * step[r];
            let k = step[r];
            t.upper[r] = t.upper[r] * k;
            v.upper[r] = v.upper[r] * k;
            w.upper[r] = w.upper[r] * k;
            t.lower[r] = t.lower[r] / k;
            v.lower[r] = v.lower[r] / k;
            w.lower[r] = w.lower[r] / k;
        }
        TransferSet { d, eps: self.eps, t, v, w, balance }
    }
}

/// A vector together with a power-of-two scale: value = `v · 2^exp`.
#[derive(Clone, Debug)]
struct Scaled<T> {
    v: Vec<T>,
    exp: i64,
}

impl<T: Real> Scaled<T> {
    fn unit(d: usize) -> Self {
        let mut v = vec![T::zero(); d];
        v[0] = T::one();
        Scaled { v, exp: 0 }
    }

    /// Zeroes components `r > keep`; they cannot reach `|0⟩` in the steps
    /// that remain and would otherwise swamp the scale.
    fn clip(mut self, keep: usize) -> Self {
        for x in self.v.iter_mut().skip(keep + 1) {
            *x = T::zero();
        }
        self
    }

    fn normalize(mut self) -> Result<Self> {
        let m = self.v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        if !m.is_finite() {
            return Err(Error::NumericalInstability("non-finite boundary vector".into()));
        }
        if let Some(e) = m.exponent2() {
            for x in &mut self.v {
                *x = x.mul_pow2(-e);
            }
            self.exp += e as i64;
        }
        Ok(self)
    }
}

fn scale_by_pow2<T: Real>(x: T, e: i64) -> T {
    x.mul_pow2(e.clamp(-1 << 20, 1 << 20) as i32)
}

/// Boundary vectors `⟨0|T^k` and `T^k|0⟩` for `k = 0..=n`, shared by every
/// observable of a chain of length `n`.
#[derive(Clone, Debug)]
pub struct ChainContraction<'a, T> {
    ts: &'a TransferSet<T>,
    n: usize,
    fwd: Vec<Scaled<T>>,
    bwd: Vec<Scaled<T>>,
}

impl<'a, T: Real> ChainContraction<'a, T> {
    pub fn new(ts: &'a TransferSet<T>, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("chain length must be at least 2, got {n}")));
        }
        let need = truncation_dim(n);
        if ts.d < need {
            return Err(Error::Dimension { d: ts.d, n, need });
        }
        let mut fwd = vec![Scaled::unit(ts.d)];
        let mut bwd = vec![Scaled::unit(ts.d)];
        for k in 1..=n {
            let keep = k.min(n - k);
            let f = &fwd[k - 1];
            fwd.push(Scaled { v: ts.t.left_mul(&f.v), exp: f.exp }.clip(keep).normalize()?);
            let b = &bwd[k - 1];
            bwd.push(Scaled { v: ts.t.right_mul(&b.v), exp: b.exp }.clip(keep).normalize()?);
        }
        Ok(ChainContraction { ts, n, fwd, bwd })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(m, e)` with `⟨0|T^k|0⟩ = m · 2^e`.
    fn moment(&self, k: usize) -> (T, i64) {
        (self.fwd[k].v[0], self.fwd[k].exp)
    }

    /// `ln ⟨0|T^n|0⟩`.
    pub fn log_norm(&self) -> T {
        let (m, e) = self.moment(self.n);
        m.ln() + T::LN_2() * T::from_i64(e).expect("exponent fits")
    }

    /// `⟨0|T^k|0⟩ / ⟨0|T^{k-1}|0⟩` for `1 ≤ k ≤ n`.
    pub fn moment_ratio(&self, k: usize) -> T {
        let (a, ea) = self.moment(k);
        let (b, eb) = self.moment(k - 1);
        scale_by_pow2(a / b, ea - eb)
    }

    fn ratio(&self, num: T, exp: i64) -> Result<T> {
        let (z, ez) = self.moment(self.n);
        let x = scale_by_pow2(num / z, exp - ez);
        if !x.is_finite() {
            return Err(Error::NumericalInstability("non-finite observable".into()));
        }
        Ok(x)
    }

    /// `⟨σ_j^z⟩` for 1-based `j`.
    pub fn sz(&self, j: usize) -> Result<T> {
        self.check_site(j)?;
        let (f, b) = (&self.fwd[j - 1], &self.bwd[self.n - j]);
        self.ratio(self.ts.v.sandwich(&f.v, &b.v), f.exp + b.exp)
    }

    pub fn profile(&self) -> Result<Vec<T>> {
        (1..=self.n).map(|j| self.sz(j)).collect()
    }

    /// `⟨J⟩ = (ε/2) ⟨0|T^{n-1}|0⟩ / ⟨0|T^n|0⟩`.
    pub fn current(&self) -> Result<T> {
        let (m, e) = self.moment(self.n - 1);
        Ok(self.ratio(m, e)? * self.ts.eps * T::lit(0.5))
    }

    /// `⟨σ_j^+ σ_{j+1}^-⟩ = ⟨0|T^{j-1} W T^{n-j-1}|0⟩ / ⟨0|T^n|0⟩`.
    pub fn hopping(&self, j: usize) -> Result<Cx<T>> {
        if j == 0 || j >= self.n {
            return Err(Error::Index { j, k: j + 1, n: self.n });
        }
        let (f, b) = (&self.fwd[j - 1], &self.bwd[self.n - j - 1]);
        let s = self.ts.w.sandwich(&f.v, &b.v);
        let exp = f.exp + b.exp;
        Ok(Cx::new(self.ratio(s.re, exp)?, self.ratio(s.im, exp)?))
    }

    /// Current on bond `(j, j+1)` through the hopping vertex, `-2 Im⟨w_j⟩`.
    pub fn current_at(&self, j: usize) -> Result<T> {
        Ok(-(self.hopping(j)?.im + self.hopping(j)?.im))
    }

    /// `⟨σ_j^z σ_k^z⟩` for `1 ≤ j < k ≤ n`.
    pub fn zz(&self, j: usize, k: usize) -> Result<T> {
        if j == 0 || j >= k || k > self.n {
            return Err(Error::Index { j, k, n: self.n });
        }
        let f = &self.fwd[j - 1];
        let mut u = self.advance(&self.ts.v, f, j)?;
        for p in j + 1..k {
            u = self.advance(&self.ts.t, &u, p)?;
        }
        let b = &self.bwd[self.n - k];
        self.ratio(self.ts.v.sandwich(&u.v, &b.v), u.exp + b.exp)
    }

    /// All `⟨σ_j^z σ_k^z⟩` with `j < k`, row by row, in `O(n² d)`.
    pub fn zz_all(&self) -> Result<Vec<(usize, usize, T)>> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for j in 1..self.n {
            let f = &self.fwd[j - 1];
            let mut u = self.advance(&self.ts.v, f, j)?;
            for k in j + 1..=self.n {
                if k > j + 1 {
                    u = self.advance(&self.ts.t, &u, k - 1)?;
                }
                let b = &self.bwd[self.n - k];
                out.push((j, k, self.ratio(self.ts.v.sandwich(&u.v, &b.v), u.exp + b.exp)?));
            }
        }
        Ok(out)
    }

    /// `uᵀ M` as the `p`-th factor of the chain.
    fn advance(&self, m: &Tridiag<T>, u: &Scaled<T>, p: usize) -> Result<Scaled<T>> {
        Scaled { v: m.left_mul(&u.v), exp: u.exp }.clip(p.min(self.n - p)).normalize()
    }

    fn check_site(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.n {
            return Err(Error::Index { j, k: j, n: self.n });
        }
        Ok(())
    }
}

pub fn magnetization_profile<T: Real>(ts: &TransferSet<T>, n: usize) -> Result<Vec<T>> {
    ChainContraction::new(ts, n)?.profile()
}

pub fn spin_current<T: Real>(ts: &TransferSet<T>, n: usize) -> Result<T> {
    ChainContraction::new(ts, n)?.current()
}

pub fn zz_correlator<T: Real>(ts: &TransferSet<T>, n: usize, j: usize, k: usize) -> Result<T> {
    ChainContraction::new(ts, n)?.zz(j, k)
}

/// Connected correlator `⟨σ_j^z σ_k^z⟩ - ⟨σ_j^z⟩⟨σ_k^z⟩`.
pub fn connected_correlator<T: Real>(ts: &TransferSet<T>, n: usize, j: usize, k: usize) -> Result<T> {
    let c = ChainContraction::new(ts, n)?;
    Ok(c.zz(j, k)? - c.sz(j)? * c.sz(k)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Correlation<T> {
    pub j: usize,
    pub k: usize,
    pub zz: T,
    pub connected: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableReport<T> {
    pub n: usize,
    pub delta: T,
    pub eps: T,
    pub profile: Vec<T>,
    pub current: T,
    pub correlations: Option<Vec<Correlation<T>>>,
    /// `ln ⟨0|T^n|0⟩`.
    pub log_trace_ratio: T,
}

/// Profile, current and optionally the full correlation matrix.
pub fn observables<T: Real>(
    ts: &TransferSet<T>,
    delta: T,
    n: usize,
    with_correlations: bool,
) -> Result<ObservableReport<T>> {
    let c = ChainContraction::new(ts, n)?;
    let profile = c.profile()?;
    let correlations = if with_correlations {
        Some(
            c.zz_all()?
                .into_iter()
                .map(|(j, k, zz)| Correlation { j, k, zz, connected: zz - profile[j - 1] * profile[k - 1] })
                .collect(),
        )
    } else {
        None
    };
    Ok(ObservableReport {
        n,
        delta,
        eps: ts.eps,
        current: c.current()?,
        profile,
        correlations,
        log_trace_ratio: c.log_norm(),
    })
}

/// Squared moduli used by `T`; exposed for the closed-form tables.
pub fn transfer_weights<T: Real>(table: &AmplitudeTable<T>) -> (Vec<T>, Vec<T>, Vec<T>) {
    (
        table.a0.iter().map(|&z| abs2(z)).collect(),
        table.aplus.iter().map(|&z| abs2(z)).collect(),
        table.aminus.iter().map(|&z| abs2(z)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anisotropy::{amplitude_table, chain_table, make_anisotropy, GaugeChoice};
    use crate::dd::Dd;
    use crate::mpo::{build_b_matrices, build_mpo};

    fn ts(delta: f64, eps: f64, n: usize, b: Balancing) -> TransferSet<f64> {
        build_transfer(&chain_table(delta, eps, n).unwrap(), b).unwrap()
    }

    #[test]
    fn half_anisotropy_matrix() {
        let spec = make_anisotropy(0.5).unwrap();
        for eps in [0.3, 1.0, 7.0] {
            let tab = amplitude_table(&spec, eps, 3, &GaugeChoice::default()).unwrap();
            let t = build_transfer(&tab, Balancing::Off).unwrap().t.to_dense();
            let e2: f64 = eps * eps;
            let expect = [
                [1.0, e2 / 2.0, 0.0],
                [0.5, (1.0 + e2) / 4.0, (9.0 + e2) / 24.0],
                [0.0, 3.0 * (1.0 + e2) / 8.0, (1.0 + e2) / 4.0],
            ];
            for r in 0..3 {
                for c in 0..3 {
                    let x: f64 = expect[r][c];
                    assert!((t[(r, c)].re - x).abs() <= 1e-14 * x.abs().max(1.0), "({r},{c}) ε={eps}");
                }
            }
        }
    }

    #[test]
    fn imaginary_part_of_w_and_sum_rules() {
        for (delta, eps) in [(0.3, 0.4), (0.5, 1.0), (1.0, 2.0), (1.5, 0.2), (3.0, 1.0)] {
            let s = ts(delta, eps, 10, Balancing::Off);
            // the last diagonal entry of W is cut by the truncation and never
            // reached by an exact contraction
            for r in 0..s.d {
                for c in 0..s.d {
                    if r == s.d - 1 && c == r {
                        continue;
                    }
                    let (w, t) = (s.w.get(r, c), s.t.get(r, c));
                    assert!((w.im + eps / 4.0 * t).abs() <= 1e-12 * (1.0 + w.norm()), "Δ={delta} ({r},{c}) {w} {t}");
                }
            }
            let row0: Vec<f64> = (0..s.d).map(|c| s.t.get(0, c) - s.v.get(0, c)).collect();
            let col0: Vec<f64> = (0..s.d).map(|r| s.t.get(r, 0) + s.v.get(r, 0)).collect();
            let mut unit = vec![0.0; s.d];
            unit[0] = 1.0;
            assert_eq!(row0, unit);
            assert_eq!(col0, unit);
        }
    }

    #[test]
    fn matches_doubled_space_restriction() {
        for delta in [0.5, 1.0, 1.5] {
            let tab = chain_table(delta, 0.8, 8).unwrap();
            let s = build_transfer(&tab, Balancing::Off).unwrap();
            let b = build_b_matrices(&build_mpo(&tab));
            let t = b.restrict_diagonal(&b.b0);
            let v = b.restrict_diagonal(&b.bz);
            assert!(t.max_abs_diff(&s.t.to_dense()) < 1e-13);
            assert!(v.max_abs_diff(&s.v.to_dense()) < 1e-13);
            // the vertex that yields ⟨σ^+σ^-⟩ is ¼ B_- B_+; ¼ B_+ B_- is its conjugate
            let q = 0.25;
            let mp = b.restrict_diagonal(&b.bminus.matmul(&b.bplus).scale(Cx::new(q, 0.0)));
            let pm = b.restrict_diagonal(&b.bplus.matmul(&b.bminus).scale(Cx::new(q, 0.0)));
            let w = s.w.to_dense();
            assert!(mp.max_abs_diff(&w) < 1e-12 * (1.0 + w.max_abs()));
            assert!(pm.max_abs_diff(&w.conj()) < 1e-12 * (1.0 + w.max_abs()));
        }
    }

    #[test]
    fn two_site_closed_forms() {
        for delta in [0.5, 1.0, 2.0] {
            for eps in [0.2, 1.0, 3.0] {
                let s = ts(delta, eps, 2, Balancing::On);
                let c = ChainContraction::new(&s, 2).unwrap();
                let z = 4.0 + eps * eps;
                assert!((c.sz(1).unwrap() - eps * eps / z).abs() < 1e-15);
                assert!((c.sz(2).unwrap() + eps * eps / z).abs() < 1e-15);
                assert!((c.current().unwrap() - 2.0 * eps / z).abs() < 1e-15);
                let h = c.hopping(1).unwrap();
                assert!((h.im + eps / z).abs() < 1e-15);
                // ⟨σ_1^zσ_2^z⟩ = -1 + 4/(4+ε²) · (1 + ... ) checked against the oracle elsewhere
                assert!(c.zz(1, 2).unwrap().abs() <= 1.0);
            }
        }
    }

    #[test]
    fn balancing_does_not_change_observables() {
        for delta in [0.5, 1.0, 1.5] {
            let a = ts(delta, 1.0, 30, Balancing::Off);
            let b = ts(delta, 1.0, 30, Balancing::On);
            assert!(b.is_balanced() && !a.is_balanced());
            assert_eq!(b.balance[0], 1.0);
            for r in 0..b.d - 1 {
                if b.t.upper[r] > 0.0 && b.t.lower[r] > 0.0 {
                    assert!((b.t.upper[r] / b.t.lower[r] - 1.0).abs() < 1e-12);
                }
            }
            let ra = observables(&a, delta, 30, true).unwrap();
            let rb = observables(&b, delta, 30, true).unwrap();
            assert!((ra.current / rb.current - 1.0).abs() < 1e-12);
            for (x, y) in ra.profile.iter().zip(&rb.profile) {
                assert!((x - y).abs() < 1e-12);
            }
            for (x, y) in ra.correlations.unwrap().iter().zip(&rb.correlations.unwrap()) {
                assert!((x.zz - y.zz).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn large_chains_do_not_overflow() {
        let s = ts(3.0, 1.0, 400, Balancing::On);
        let c = ChainContraction::new(&s, 400).unwrap();
        assert!(c.log_norm() > 700.0);
        let j = c.current().unwrap();
        assert!(j > 0.0 && j.is_finite());
        let p = c.profile().unwrap();
        assert!(p.iter().all(|x| x.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn pointwise_correlator_matches_row_sweep() {
        let s = ts(1.0, 1.0, 12, Balancing::On);
        let c = ChainContraction::new(&s, 12).unwrap();
        for (j, k, zz) in c.zz_all().unwrap() {
            assert!((zz - c.zz(j, k).unwrap()).abs() < 1e-14);
        }
        assert_eq!(c.zz(3, 3), Err(Error::Index { j: 3, k: 3, n: 12 }));
    }

    #[test]
    fn rejects_single_site_and_short_dimension() {
        let s = ts(0.5, 1.0, 4, Balancing::On);
        assert!(matches!(ChainContraction::new(&s, 1), Err(Error::Domain(_))));
        assert_eq!(ChainContraction::new(&s, 6).err(), Some(Error::Dimension { d: 3, n: 6, need: 4 }));
    }

    #[test]
    fn easy_axis_current_is_uniform_in_double_double() {
        let n = 40;
        let tab = chain_table(Dd::from_f64(1.5), Dd::from_f64(1.0), n).unwrap();
        let s = build_transfer(&tab, Balancing::On).unwrap();
        let c = ChainContraction::new(&s, n).unwrap();
        let j0 = c.current().unwrap();
        for j in 1..n {
            let jj = c.current_at(j).unwrap();
            assert!(((jj - j0) / j0).approx_f64().abs() < 1e-12, "bond {j}");
        }
    }
}
