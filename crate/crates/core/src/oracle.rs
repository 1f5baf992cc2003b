//! Brute-force steady state from the explicit Liouvillian superoperator.
//!
//! Vectorization stacks columns: `vec(X)[i + D·j] = X[i, j]`, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector, FullPivLU, RealField, Schur, SVD};
use num_traits::Float;
use serde::Serialize;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{im_unit, re, Cx, Real};
use crate::spin::{pauli_on, xxz_hamiltonian, Pauli};

/// Largest chain for the dense superoperator.
pub const N_MAX_ORACLE: usize = 6;

/// Above this size the null vector comes from full-pivot LU instead of SVD.
pub const N_MAX_SVD: usize = 4;

#[derive(Clone, Debug)]
pub struct LiouvillianMatrix<T: Real + RealField> {
    pub n: usize,
    pub delta: T,
    pub eps: T,
    pub l: DMatrix<Cx<T>>,
    h: CMat<T>,
    jumps: Vec<CMat<T>>,
}

/// Nonzero entries `(row, col, value)` of a dense matrix.
fn nonzeros<T: Real>(m: &CMat<T>) -> Vec<(usize, usize, Cx<T>)> {
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            if z.re != T::zero() || z.im != T::zero() {
                out.push((i, j, z));
            }
        }
    }
    out
}

/// `vec(A X B)` accumulated into `l` with weight `w`, for sparse `A` and `B`.
fn add_sandwich<T: Real + RealField>(
    l: &mut DMatrix<Cx<T>>,
    dim: usize,
    a: &[(usize, usize, Cx<T>)],
    b: &[(usize, usize, Cx<T>)],
    w: Cx<T>,
) {
    // (A X B)[i, l] = Σ A[i, k] X[k, m] B[m, l]
    for &(i, k, av) in a {
        for &(m, col, bv) in b {
            l[(i + dim * col, k + dim * m)] += w * av * bv;
        }
    }
}

fn identity_entries<T: Real>(dim: usize) -> Vec<(usize, usize, Cx<T>)> {
    (0..dim).map(|i| (i, i, re(T::one()))).collect()
}

/// Dense Liouvillian of the boundary-driven XXZ chain.
pub fn build_liouvillian<T: Real + RealField>(n: usize, delta: T, eps: T) -> Result<LiouvillianMatrix<T>> {
    if !(2..=N_MAX_ORACLE).contains(&n) {
        return Err(Error::Size { n, max: N_MAX_ORACLE, what: "the Liouvillian oracle" });
    }
    if !(eps >= T::zero()) || !Float::is_finite(eps) {
        return Err(Error::Domain(format!("coupling must be finite and non-negative, got {eps}")));
    }
    if !Float::is_finite(delta) {
        return Err(Error::Domain(format!("anisotropy must be finite, got {delta}")));
    }
    let dim = 1usize << n;
    let h = xxz_hamiltonian::<T>(n, delta);
    let root = Float::sqrt(eps);
    let jumps = vec![
        pauli_on::<T>(n, 1, Pauli::Plus).scale(re(root)),
        pauli_on::<T>(n, n, Pauli::Minus).scale(re(root)),
    ];
    let mut l = DMatrix::from_element(dim * dim, dim * dim, re(T::zero()));
    let id = identity_entries::<T>(dim);
    let hs = nonzeros(&h);
    let i = im_unit::<T>();
    let one = re(T::one());
    add_sandwich(&mut l, dim, &hs, &id, -i);
    add_sandwich(&mut l, dim, &id, &hs, i);
    let two = re(T::lit(2.0));
    for jump in &jumps {
        let ls = nonzeros(jump);
        let ld = nonzeros(&jump.adjoint());
        let ldl = nonzeros(&jump.adjoint().matmul(jump));
        add_sandwich(&mut l, dim, &ls, &ld, two);
        add_sandwich(&mut l, dim, &ldl, &id, -one);
        add_sandwich(&mut l, dim, &id, &ldl, -one);
    }
    let liouv = LiouvillianMatrix { n, delta, eps, l, h, jumps };
    let residual = liouv.self_check();
    if !(residual <= T::lit(1e-10) * (T::one() + liouv.norm())) {
        return Err(Error::NumericalInstability(format!(
            "vectorized Liouvillian disagrees with the master equation by {residual}"
        )));
    }
    Ok(liouv)
}

fn vec_of<T: Real + RealField>(x: &CMat<T>) -> DVector<Cx<T>> {
    let dim = x.rows();
    DVector::from_fn(dim * dim, |k, _| x[(k % dim, k / dim)])
}

fn unvec<T: Real + RealField>(v: &DVector<Cx<T>>, dim: usize) -> CMat<T> {
    CMat::from_fn(dim, dim, |i, j| v[i + dim * j])
}

impl<T: Real + RealField> LiouvillianMatrix<T> {
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Largest entry magnitude, used as the scale of residuals.
    pub fn norm(&self) -> T {
        self.l.iter().fold(T::zero(), |m, z| Float::max(m, z.norm()))
    }

    /// `-i[H, X] + Σ_k 2 L_k X L_k† - {L_k†L_k, X}` with the `ε` absorbed in `L_k`.
    pub fn apply_master(&self, x: &CMat<T>) -> CMat<T> {
        let mut out = self.h.commutator(x).scale(-im_unit::<T>());
        for jump in &self.jumps {
            let ld = jump.adjoint();
            let jump_term = jump.matmul(x).matmul(&ld).scale(re(T::lit(2.0)));
            out = &out + &jump_term;
            out = &out - &ld.matmul(jump).anticommutator(x);
        }
        out
    }

    /// `unvec(L vec X)` for a dense `X`.
    pub fn apply(&self, x: &CMat<T>) -> CMat<T> {
        unvec(&(&self.l * vec_of(x)), self.dim())
    }

    /// Max deviation between the superoperator and the master equation on a
    /// fixed pseudo-random test matrix.
    fn self_check(&self) -> T {
        let dim = self.dim();
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            T::lit((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        };
        let x = CMat::from_fn(dim, dim, |_, _| Cx::new(next(), next()));
        self.apply(&x).max_abs_diff(&self.apply_master(&x))
    }

    /// `‖vec(1)† L‖_max`; zero for a trace-preserving generator.
    pub fn trace_residual(&self) -> T {
        let id = vec_of(&CMat::<T>::identity(self.dim()));
        let row = id.adjoint() * &self.l;
        row.iter().fold(T::zero(), |m, z| Float::max(m, z.norm()))
    }

    /// `‖L vec(ρ)‖_max` for a candidate steady state.
    pub fn fixed_point_residual(&self, rho: &CMat<T>) -> T {
        (&self.l * vec_of(rho)).iter().fold(T::zero(), |m, z| Float::max(m, z.norm()))
    }

    /// All eigenvalues from a complex Schur decomposition.
    pub fn spectrum(&self) -> Vec<Cx<T>> {
        let eps = T::lit(1e-14);
        let (_, t) = Schur::try_new(self.l.clone(), eps, 0).expect("unbounded iteration").unpack();
        (0..t.nrows()).map(|k| t[(k, k)]).collect()
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub enum NullSpaceMethod {
    Svd,
    FullPivotLu,
}

#[derive(Clone, Debug)]
pub struct OracleSolution<T> {
    pub density: DensityMatrix<T>,
    pub method: NullSpaceMethod,
    /// Second-smallest singular value (SVD) or pivot magnitude (LU),
    /// relative to the largest one.
    pub gap: T,
    /// Set when the gap is small enough to doubt uniqueness.
    pub warning: Option<String>,
}

/// Null vector of the Liouvillian reshaped into a unit-trace density matrix.
pub fn solve_ness<T: Real + RealField>(liouv: &LiouvillianMatrix<T>) -> Result<OracleSolution<T>> {
    let null_tol = T::lit(1e-10);
    let unique_tol = T::lit(1e-6);
    let (v, gap, nullity, method) = if liouv.n <= N_MAX_SVD {
        let svd = SVD::new(liouv.l.clone(), false, true);
        let sv = &svd.singular_values;
        let vt = svd.v_t.as_ref().expect("right singular vectors requested");
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[a].partial_cmp(&sv[b]).unwrap_or(std::cmp::Ordering::Equal));
        let top = sv[order[order.len() - 1]];
        let nullity = sv.iter().filter(|&&s| s <= null_tol * top).count();
        let v = DVector::from_fn(sv.len(), |k, _| vt[(order[0], k)].conj());
        (v, sv[order[1]] / top, nullity, NullSpaceMethod::Svd)
    } else {
        let lu = FullPivLU::new(liouv.l.clone());
        let u = lu.u();
        let m = u.nrows();
        let pivots: Vec<T> = (0..m).map(|k| u[(k, k)].norm()).collect();
        let top = pivots.iter().fold(T::zero(), |a, &b| Float::max(a, b));
        let nullity = pivots.iter().filter(|&&p| p <= null_tol * top).count();
        // full pivoting pushes the vanishing pivot to the end: set y_last = 1
        // and back-substitute through U
        let mut y = DVector::from_element(m, re(T::zero()));
        y[m - 1] = re(T::one());
        for k in (0..m - 1).rev() {
            let mut acc = re(T::zero());
            for c in k + 1..m {
                acc += u[(k, c)] * y[c];
            }
            y[k] = -acc / u[(k, k)];
        }
        lu.q().inv_permute_rows(&mut y);
        (y, pivots[m - 2] / top, nullity, NullSpaceMethod::FullPivotLu)
    };
    if nullity > 1 {
        return Err(Error::DegenerateNess { nullity });
    }
    let dim = liouv.dim();
    let x = unvec(&v, dim);
    let tr = x.trace();
    if tr.norm() == T::zero() {
        return Err(Error::NumericalInstability("null vector has zero trace".into()));
    }
    let rho = x.scale(tr.inv());
    let warning = (gap <= unique_tol)
        .then(|| format!("steady state may not be unique: relative gap {gap}"));
    let density = DensityMatrix { n: liouv.n, rho, trace_r: T::one() };
    Ok(OracleSolution { density, method, gap, warning })
}

/// Convenience: build and solve.
pub fn oracle_density<T: Real + RealField>(n: usize, delta: T, eps: T) -> Result<OracleSolution<T>> {
    solve_ness(&build_liouvillian(n, delta, eps)?)
}
