//! Dense steady-state density matrices for short chains.
//!
//! Two independent routes are provided: the Cholesky factor `S_n` from
//! single-layer words, and the two-layer ladder contraction that sums over
//! the internal bitstring directly. Expectations of arbitrary Pauli strings
//! use the doubled matrices `B_s` without materializing `ρ`.

use serde::Serialize;

use crate::anisotropy::{table_for, make_anisotropy, truncation_dim, GaugeChoice};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMat};
use crate::mpo::{build_mpo, BMatrices, MpoMatrices};
use crate::scalar::{max_abs, re, Cx, Real};
use crate::spin::{down_count, Pauli};

use num_traits::Zero;

/// Largest chain for which dense `2^n × 2^n` matrices are built.
pub const N_MAX_DENSE: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct CholeskyFactor<T> {
    pub n: usize,
    pub s: CMat<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    pub n: usize,
    pub rho: CMat<T>,
    /// `tr R` of the unnormalized `R = S S†`.
    pub trace_r: T,
}

fn check_dense(n: usize, mpo: &MpoMatrices<impl Real>) -> Result<()> {
    if n == 0 || n > N_MAX_DENSE {
        return Err(Error::Size { n, max: N_MAX_DENSE, what: "dense density matrices" });
    }
    mpo.require_length(n)
}

/// Dense `S_n` with `S[seq(ν'), seq(ν)] = ⟨ν'|S_n|ν⟩`.
pub fn build_cholesky<T: Real>(mpo: &MpoMatrices<T>, n: usize) -> Result<CholeskyFactor<T>> {
    check_dense(n, mpo)?;
    let dim = 1usize << n;
    let mut s = CMat::zeros(dim, dim);
    let mut start = vec![Cx::zero(); mpo.d];
    start[0] = re(T::one());
    for row in 0..dim {
        fill_row(mpo, n, row, 0, 0, &start, &mut s);
    }
    Ok(CholeskyFactor { n, s })
}

/// Depth-first over the column bits so that shared prefixes are contracted once.
fn fill_row<T: Real>(
    mpo: &MpoMatrices<T>,
    n: usize,
    row: usize,
    site: usize,
    col: usize,
    v: &[Cx<T>],
    s: &mut CMat<T>,
) {
    if site == n {
        s[(row, col)] = v[0];
        return;
    }
    let out_bit = ((row >> (n - 1 - site)) & 1) as i8;
    for in_bit in 0..2i8 {
        let next = mpo.apply_left(v, in_bit - out_bit);
        let col = (col << 1) | in_bit as usize;
        if next.iter().all(|z| z.is_zero()) {
            continue;
        }
        fill_row(mpo, n, row, site + 1, col, &next, s);
    }
}

impl<T: Real> CholeskyFactor<T> {
    /// Exact check: zero below the diagonal, ones on it.
    pub fn is_unit_upper_triangular(&self) -> bool {
        let dim = self.s.rows();
        (0..dim).all(|i| {
            self.s[(i, i)] == re(T::one()) && (0..i).all(|j| self.s[(i, j)].is_zero())
        })
    }

    /// `R = S S†`.
    pub fn unnormalized(&self) -> CMat<T> {
        self.s.matmul(&self.s.adjoint())
    }
}

pub fn build_density<T: Real>(factor: &CholeskyFactor<T>) -> DensityMatrix<T> {
    let r = factor.unnormalized();
    let trace_r = r.trace().re;
    DensityMatrix { n: factor.n, rho: r.scale(re(trace_r.recip())), trace_r }
}

/// Analytic NESS for `(Δ, ε, n)` with the default gauge.
pub fn ness_density<T: Real>(delta: T, eps: T, n: usize) -> Result<DensityMatrix<T>> {
    let spec = make_anisotropy(delta)?;
    let table = table_for(&spec, eps, truncation_dim(n), &GaugeChoice::default())?;
    Ok(build_density(&build_cholesky(&build_mpo(&table), n)?))
}

impl<T: Real> DensityMatrix<T> {
    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    /// `tr(ρ A)`.
    pub fn expectation(&self, op: &CMat<T>) -> Cx<T> {
        let dim = self.dim();
        let mut acc = Cx::zero();
        for i in 0..dim {
            for k in 0..dim {
                acc += self.rho[(i, k)] * op[(k, i)];
            }
        }
        acc
    }

    pub fn hermiticity_error(&self) -> T {
        self.rho.max_abs_diff(&self.rho.adjoint())
    }

    pub fn trace(&self) -> Cx<T> {
        self.rho.trace()
    }
}

impl<T: Real + nalgebra::RealField> DensityMatrix<T> {
    /// Spectrum of the Hermitian part of `ρ`, ascending.
    pub fn eigenvalues(&self) -> Vec<T> {
        let h = (&self.rho + &self.rho.adjoint()).scale(re(T::lit(0.5)));
        hermitian_eigenvalues(&h)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }
}

/// Largest entry of `m` that connects different magnetization sectors.
pub fn magnetization_sector_violation<T: Real>(m: &CMat<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if down_count(i) != down_count(j) {
                worst = worst.max(max_abs(m[(i, j)]));
            }
        }
    }
    worst
}

/// `A_{s1} ⊗ Ā_{s2}` for all step pairs, indexed `[s1 + 1][s2 + 1]`.
fn ladder_steps<T: Real>(mpo: &MpoMatrices<T>) -> Vec<Vec<CMat<T>>> {
    let a = [mpo.aminus(), mpo.a0(), mpo.aplus()];
    a.iter().map(|x| a.iter().map(|y| x.kron(&y.conj())).collect()).collect()
}

fn ladder_with<T: Real>(steps: &[Vec<CMat<T>>], d: usize, nu_out: &[u8], nu_in: &[u8]) -> Cx<T> {
    let mut v = vec![Cx::zero(); d * d];
    v[0] = re(T::one());
    for (&a, &b) in nu_out.iter().zip(nu_in) {
        let mut next = vec![Cx::zero(); d * d];
        for mu in 0..2i8 {
            let m = &steps[(mu - a as i8 + 1) as usize][(mu - b as i8 + 1) as usize];
            for (o, x) in next.iter_mut().zip(m.left_mul(&v)) {
                *o += x;
            }
        }
        v = next;
    }
    v[0]
}

/// `⟨ν'|R|ν⟩ = Σ_μ ⟨ν'|S|μ⟩⟨ν|S|μ⟩*` as a product of two-layer steps.
pub fn ladder_contract<T: Real>(mpo: &MpoMatrices<T>, n: usize, nu_out: &[u8], nu_in: &[u8]) -> Result<Cx<T>> {
    check_dense(n, mpo)?;
    if nu_out.len() != n || nu_in.len() != n {
        return Err(Error::Domain(format!("bitstrings must have length {n}")));
    }
    Ok(ladder_with(&ladder_steps(mpo), mpo.d, nu_out, nu_in))
}

/// Unnormalized `R` assembled entry by entry from the ladder contraction.
pub fn ladder_density<T: Real>(mpo: &MpoMatrices<T>, n: usize) -> Result<CMat<T>> {
    check_dense(n, mpo)?;
    let steps = ladder_steps(mpo);
    let dim = 1usize << n;
    let bits: Vec<Vec<u8>> = (0..dim).map(|i| crate::spin::bits_of(i, n)).collect();
    Ok(CMat::from_fn(dim, dim, |i, j| ladder_with(&steps, mpo.d, &bits[i], &bits[j])))
}

fn dual(p: Pauli) -> Pauli {
    p.adjoint()
}

/// `⟨∏_j σ_j^{s_j}⟩` in the normalized steady state, where each label is
/// the operator acting on site `j`.
///
/// Since `tr(R σ) = Σ_{ν'ν} R_{ν'ν} σ_{νν'}`, the operator `σ^s` is picked up
/// by the doubled matrix of its transpose, `B_{s̃}` with `±` exchanged, and
/// weighted by `tr(σ^{s̃†}σ^{s̃}) / 2`.
pub fn pauli_string_expectation<T: Real>(b: &BMatrices<T>, ops: &[Pauli]) -> Result<Cx<T>> {
    let n = ops.len();
    if n == 0 {
        return Err(Error::Domain("empty operator string".into()));
    }
    let need = truncation_dim(n);
    if b.d < need {
        return Err(Error::Dimension { d: b.d, n, need });
    }
    let d2 = b.d2();
    let mut num = vec![Cx::zero(); d2];
    let mut den = vec![Cx::zero(); d2];
    num[0] = re(T::one());
    den[0] = re(T::one());
    let (mut e_num, mut e_den) = (0i64, 0i64);
    let mut weight = T::one();
    for &s in ops {
        let t = dual(s);
        num = b.get(t).left_mul(&num);
        den = b.b0.left_mul(&den);
        e_num += rescale(&mut num);
        e_den += rescale(&mut den);
        weight = weight * T::lit(t.norm2() / 2.0);
    }
    let shift = (e_num - e_den).clamp(-1 << 20, 1 << 20) as i32;
    let z = num[0] / den[0] * weight;
    let out = Cx::new(z.re.mul_pow2(shift), z.im.mul_pow2(shift));
    if !out.re.is_finite() || !out.im.is_finite() {
        return Err(Error::NumericalInstability("non-finite string expectation".into()));
    }
    Ok(out)
}

fn rescale<T: Real>(v: &mut [Cx<T>]) -> i64 {
    let m = v.iter().fold(T::zero(), |m, &z| m.max(max_abs(z)));
    match m.exponent2() {
        Some(e) => {
            for z in v.iter_mut() {
                *z = Cx::new(z.re.mul_pow2(-e), z.im.mul_pow2(-e));
            }
            e as i64
        }
        None => 0,
    }
}

/// Polynomial coefficients (ascending powers) through the points `(x_k, y_k)`,
/// via Newton divided differences.
pub fn interpolate<T: Real>(xs: &[T], ys: &[Cx<T>]) -> Vec<Cx<T>> {
    let m = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..m {
        for i in (level..m).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / re(xs[i] - xs[i - level]);
        }
    }
    // expand the Newton form from the innermost factor outwards
    let mut coef = vec![Cx::zero(); m];
    for i in (0..m).rev() {
        // coef ← coef·(x - x_i) + dd[i]
        let mut next = vec![Cx::zero(); m];
        for k in 0..m {
            if k + 1 < m {
                next[k + 1] += coef[k];
            }
            next[k] -= coef[k] * re(xs[i]);
        }
        next[0] += dd[i];
        coef = next;
    }
    coef
}

/// Outcome of the coupling-degree analysis for one chain length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeReport {
    pub n: usize,
    /// Largest `|c_k|` with `k > 2n - 2` over all entries of `R`, relative to the largest coefficient.
    pub r_excess: f64,
    /// Largest `|c_{2n-2}|` over all entries of `R`, relative to the largest coefficient.
    pub r_top: f64,
    /// Largest `|c_k|` with `k > n` over all entries of `S`, relative to the largest coefficient.
    pub s_excess: f64,
}

impl DegreeReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.r_excess <= tol && self.s_excess <= tol && self.r_top > tol.sqrt()
    }
}

/// Interpolates every entry of `S_n` and `R = S_n S_n†` in `ε` through `2n + 1`
/// Chebyshev nodes on `[-1, 1]` and measures the coefficients beyond the
/// claimed degrees.
pub fn coupling_degree_report(delta: f64, n: usize) -> Result<DegreeReport> {
    let spec = make_anisotropy(delta)?;
    let m = 2 * n + 1;
    let nodes: Vec<f64> = (0..m)
        .map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / m as f64).cos())
        .collect();
    let mut s_samples = Vec::with_capacity(m);
    let mut r_samples = Vec::with_capacity(m);
    for &eps in &nodes {
        let table = table_for(&spec, eps, truncation_dim(n), &GaugeChoice::default())?;
        let f = build_cholesky(&build_mpo(&table), n)?;
        r_samples.push(f.unnormalized());
        s_samples.push(f.s);
    }
    let dim = 1usize << n;
    let analyse = |samples: &[CMat<f64>], degree: usize| {
        let mut scale = 0f64;
        let mut excess = 0f64;
        let mut top = 0f64;
        for i in 0..dim {
            for j in 0..dim {
                let ys: Vec<Cx<f64>> = samples.iter().map(|s| s[(i, j)]).collect();
                let c = interpolate(&nodes, &ys);
                for (k, z) in c.iter().enumerate() {
                    scale = scale.max(z.norm());
                    if k > degree {
                        excess = excess.max(z.norm());
                    }
                }
                top = top.max(c[degree].norm());
            }
        }
        (excess / scale, top / scale)
    };
    let (r_excess, r_top) = analyse(&r_samples, 2 * n - 2);
    let (s_excess, _) = analyse(&s_samples, n);
    Ok(DegreeReport { n, r_excess, r_top, s_excess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anisotropy::chain_table;
    use crate::mpo::build_b_matrices;
    use crate::scalar::im;
    use crate::spin::{bits_of, current_operator, pauli_on, parse_pauli_string};
    use proptest::prelude::*;

    fn mpo(delta: f64, eps: f64, n: usize) -> MpoMatrices<f64> {
        build_mpo(&chain_table(delta, eps, n).unwrap())
    }

    #[test]
    fn two_site_factor_and_state() {
        let eps = 0.6;
        let f = build_cholesky(&mpo(0.5, eps, 2), 2).unwrap();
        let mut expect = CMat::identity(4);
        expect[(1, 2)] = im(eps);
        assert_eq!(f.s, expect);
        let rho = build_density(&f);
        let z = 4.0 + eps * eps;
        assert!((rho.trace_r - z).abs() < 1e-15);
        let sz1 = rho.expectation(&pauli_on(2, 1, Pauli::Z));
        assert!((sz1 - re(eps * eps / z)).norm() < 1e-15);
        let j = rho.expectation(&current_operator(2, 1));
        assert!((j - re(2.0 * eps / z)).norm() < 1e-15);
    }

    #[test]
    fn structure_of_the_factor() {
        for delta in [0.5, 1.0, 1.5] {
            for n in 2..=5 {
                let f = build_cholesky(&mpo(delta, 0.8, n), n).unwrap();
                assert!(f.is_unit_upper_triangular());
                assert!(magnetization_sector_violation(&f.unnormalized()) == 0.0);
            }
        }
        let f = build_cholesky(&mpo(0.7, 0.0, 4), 4).unwrap();
        assert_eq!(f.s, CMat::identity(16));
    }

    #[test]
    fn size_limit() {
        let m = mpo(0.5, 1.0, 12);
        assert_eq!(build_cholesky(&m, 11), Err(Error::Size { n: 11, max: 10, what: "dense density matrices" }));
    }

    #[test]
    fn ladder_and_cholesky_agree() {
        for (delta, eps) in [(0.5, 1.0), (1.0, 0.3), (1.5, 2.0)] {
            for n in 2..=4 {
                let m = mpo(delta, eps, n);
                let r = build_cholesky(&m, n).unwrap().unnormalized();
                let l = ladder_density(&m, n).unwrap();
                assert!(r.max_abs_diff(&l) <= 1e-12 * r.max_abs());
            }
        }
        let m = mpo(0.5, 1.0, 2);
        assert!((ladder_contract(&m, 2, &[0, 0], &[0, 0]).unwrap() - re(1.0)).norm() < 1e-15);
        assert!((ladder_contract(&m, 2, &[0, 1], &[0, 1]).unwrap() - re(2.0)).norm() < 1e-15);
        let m = mpo(1.2, 0.9, 4);
        assert!((ladder_contract(&m, 4, &[1; 4], &[1; 4]).unwrap() - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn pauli_strings_match_dense_state() {
        let n = 4;
        for delta in [0.5, 1.0, 1.5] {
            let m = mpo(delta, 0.9, n);
            let rho = build_density(&build_cholesky(&m, n).unwrap());
            let b = build_b_matrices(&m);
            for word in ["0000", "z000", "0z0z", "+-00", "0-+0", "00+-", "zz+-", "+0-0", "-z+z"] {
                let ops = parse_pauli_string(word).unwrap();
                let mut op = CMat::identity(1);
                for &p in &ops {
                    op = op.kron(&p.matrix());
                }
                let dense = rho.expectation(&op);
                let fast = pauli_string_expectation(&b, &ops).unwrap();
                assert!((dense - fast).norm() < 1e-13, "{word}: {dense} vs {fast}");
            }
        }
    }

    #[test]
    fn two_site_hopping_string() {
        let eps = 1.3;
        let b = build_b_matrices(&mpo(0.5, eps, 2));
        let w = pauli_string_expectation(&b, &[Pauli::Plus, Pauli::Minus]).unwrap();
        assert!((w.im + eps / (4.0 + eps * eps)).abs() < 1e-15);
        let one = pauli_string_expectation(&b, &[Pauli::Id, Pauli::Id]).unwrap();
        assert!((one - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn density_is_a_state() {
        for delta in [0.5, 1.0, 1.5] {
            for eps in [0.1, 1.0, 5.0] {
                for n in 2..=5 {
                    let rho = build_density(&build_cholesky(&mpo(delta, eps, n), n).unwrap());
                    assert!(rho.hermiticity_error() < 1e-13);
                    assert!((rho.trace() - re(1.0)).norm() < 1e-13);
                    assert!(rho.min_eigenvalue() > 0.0, "Δ={delta} ε={eps} n={n}");
                }
            }
        }
    }

    #[test]
    fn degrees_in_coupling() {
        for delta in [0.5, 1.0, 1.5] {
            for n in 2..=4 {
                let rep = coupling_degree_report(delta, n).unwrap();
                assert!(rep.passes(1e-10), "{rep:?}");
            }
        }
    }

    #[test]
    fn interpolation_recovers_a_cubic() {
        let xs = [-1.0, -0.3, 0.2, 0.9, 1.4];
        let poly = |x: f64| Cx::new(1.0 - 2.0 * x + 0.5 * x * x * x, x * x);
        let ys: Vec<_> = xs.iter().map(|&x| poly(x)).collect();
        let c = interpolate(&xs, &ys);
        let want = [Cx::new(1.0, 0.0), Cx::new(-2.0, 0.0), Cx::new(0.0, 1.0), Cx::new(0.5, 0.0), Cx::new(0.0, 0.0)];
        for (a, b) in c.iter().zip(&want) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn ladder_entries_match_factor(delta in 0.1f64..2.5, eps in 0.05f64..4.0, a in 0usize..32, b in 0usize..32) {
            let n = 5;
            let m = mpo(delta, eps, n);
            let r = build_cholesky(&m, n).unwrap().unnormalized();
            let l = ladder_contract(&m, n, &bits_of(a, n), &bits_of(b, n)).unwrap();
            prop_assert!((r[(a, b)] - l).norm() <= 1e-12 * (1.0 + r.max_abs()));
        }
    }
}
