//! Numerical certificates for the cubic bulk algebra, the boundary
//! relations, the many-body commutation identity and the isotropic
//! transfer-matrix identities.
//!
//! Bulk identities are compared on the protected block of auxiliary
//! indices `0..=d-4`: a product of at most three banded factors moves an
//! index by at most three, so entries there never see the truncation edge.

use serde::Serialize;

use crate::density::build_cholesky;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::mpo::MpoMatrices;
use crate::scalar::{im, max_abs, re, Cx, Real};
use crate::spin::{xxz_hamiltonian, Pauli};
use crate::transfer::TransferSet;

/// Relative residual below which a relation is reported as satisfied.
pub const PASS_TOLERANCE: f64 = 1e-11;

/// Largest chain for the dense commutation check.
pub const N_MAX_COMMUTATION: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationId {
    /// `[A_0, A_+ A_-] = 0`
    DiagCommutesRaiseLower,
    /// `[A_0, A_- A_+] = 0`
    DiagCommutesLowerRaise,
    /// `{A_0, A_+²} = 2Δ A_+ A_0 A_+`
    DiagAnticommutesRaiseSquared,
    /// `{A_0, A_-²} = 2Δ A_- A_0 A_-`
    DiagAnticommutesLowerSquared,
    /// `2Δ{A_0², A_+} - 4A_0A_+A_0 = {A_-, A_+²} - 2A_+A_-A_+`
    MixedAnticommutatorRaise,
    /// `2Δ{A_0², A_-} - 4A_0A_-A_0 = {A_+, A_-²} - 2A_-A_+A_-`
    MixedAnticommutatorLower,
    /// `2Δ[A_0², A_+] = [A_-, A_+²]`
    MixedCommutatorRaise,
    /// `2Δ[A_0², A_-] = [A_+, A_-²]`
    MixedCommutatorLower,
    /// `⟨0|A_- = 0`
    LeftLowerVanishes,
    /// `⟨0|A_+(A_-A_+ - iε) = 0`
    LeftRaiseLoop,
    /// `⟨0|A_+A_-² = 0`
    LeftRaiseLowerSquared,
    /// `A_+|0⟩ = 0`
    RightRaiseVanishes,
    /// `(A_-A_+ - iε)A_-|0⟩ = 0`
    RightLowerLoop,
    /// `A_+²A_-|0⟩ = 0`
    RightRaiseSquaredLower,
    /// `⟨0|A_0 = ⟨0|`
    LeftDiagFixed,
    /// `A_0|0⟩ = |0⟩`
    RightDiagFixed,
    /// `⟨0|A_+A_-|0⟩ = iε`
    BoundaryHopping,
    /// `[H, S_n] = -iε(σ^z ⊗ S_{n-1} - S_{n-1} ⊗ σ^z)`
    ManyBodyCommutation,
    /// `[T, [T, V]] = -(ε²/4)(2V + {T, V})`
    TransferDoubleCommutator,
    /// `⟨0|(T - V) = ⟨0|`
    TransferLeftSum,
    /// `(T + V)|0⟩ = |0⟩`
    TransferRightSum,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgebraReport {
    pub relation_id: RelationId,
    /// Max-norm of the difference of both sides on the compared entries.
    pub residual: f64,
    /// Max-norm of the individual terms on the same entries.
    pub scale: f64,
    /// Number of leading auxiliary indices compared, or the many-body dimension.
    pub protected_dim: usize,
}

impl AlgebraReport {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }

    pub fn passed(&self) -> bool {
        self.relative() <= PASS_TOLERANCE
    }
}

fn block_report<T: Real>(id: RelationId, lhs: &CMat<T>, rhs: &CMat<T>, k: usize) -> AlgebraReport {
    let diff = lhs - rhs;
    let scale = lhs.max_abs_block(k).max(rhs.max_abs_block(k));
    AlgebraReport {
        relation_id: id,
        residual: diff.max_abs_block(k).approx_f64(),
        scale: scale.approx_f64(),
        protected_dim: k,
    }
}

fn vector_report<T: Real>(id: RelationId, lhs: &[Cx<T>], rhs: &[Cx<T>], scale: T) -> AlgebraReport {
    let residual = lhs.iter().zip(rhs).fold(T::zero(), |m, (&a, &b)| m.max(max_abs(a - b)));
    let scale = lhs.iter().chain(rhs).fold(scale, |m, &z| m.max(max_abs(z)));
    AlgebraReport {
        relation_id: id,
        residual: residual.approx_f64(),
        scale: scale.approx_f64(),
        protected_dim: lhs.len(),
    }
}

/// Protected block size for products of up to three banded factors.
pub fn protected_dim(d: usize) -> usize {
    d.saturating_sub(3)
}

/// The eight cubic bulk relations.
pub fn check_bulk_algebra<T: Real>(mpo: &MpoMatrices<T>) -> Result<Vec<AlgebraReport>> {
    if mpo.d < 5 {
        return Err(Error::Domain(format!("bulk checks need d >= 5, got {}", mpo.d)));
    }
    let k = protected_dim(mpo.d);
    let two_delta = re(mpo.table.delta + mpo.table.delta);
    let four = re(T::lit(4.0));
    let two = re(T::lit(2.0));
    let a0 = mpo.a0();
    let a0sq = a0.matmul(&a0);
    let mut out = Vec::with_capacity(8);
    for (a, b, ids) in [
        (
            mpo.aplus(),
            mpo.aminus(),
            [
                RelationId::DiagCommutesRaiseLower,
                RelationId::DiagAnticommutesRaiseSquared,
                RelationId::MixedAnticommutatorRaise,
                RelationId::MixedCommutatorRaise,
            ],
        ),
        (
            mpo.aminus(),
            mpo.aplus(),
            [
                RelationId::DiagCommutesLowerRaise,
                RelationId::DiagAnticommutesLowerSquared,
                RelationId::MixedAnticommutatorLower,
                RelationId::MixedCommutatorLower,
            ],
        ),
    ] {
        let ab = a.matmul(&b);
        let asq = a.matmul(&a);
        let zero = CMat::zeros(mpo.d, mpo.d);
        out.push(block_report(ids[0], &a0.commutator(&ab), &zero, k));
        out.push(block_report(
            ids[1],
            &a0.anticommutator(&asq),
            &a.matmul(&a0).matmul(&a).scale(two_delta),
            k,
        ));
        let lhs = &a0sq.anticommutator(&a).scale(two_delta) - &a0.matmul(&a).matmul(&a0).scale(four);
        let rhs = &b.anticommutator(&asq) - &ab.matmul(&a).scale(two);
        out.push(block_report(ids[2], &lhs, &rhs, k));
        out.push(block_report(ids[3], &a0sq.commutator(&a).scale(two_delta), &b.commutator(&asq), k));
    }
    Ok(out)
}

/// The nine boundary relations, as row-0 and column-0 contractions.
pub fn check_boundary_relations<T: Real>(mpo: &MpoMatrices<T>) -> Result<Vec<AlgebraReport>> {
    if mpo.d < 4 {
        return Err(Error::Domain(format!("boundary checks need d >= 4, got {}", mpo.d)));
    }
    let d = mpo.d;
    let (a0, ap, am) = (mpo.a0(), mpo.aplus(), mpo.aminus());
    let i_eps = im(mpo.eps);
    let loop_op = &am.matmul(&ap) - &CMat::identity(d).scale(i_eps);
    let row0 = |m: &CMat<T>| m.row(0).to_vec();
    let col0 = |m: &CMat<T>| (0..d).map(|r| m[(r, 0)]).collect::<Vec<_>>();
    let zero = vec![re(T::zero()); d];
    let mut unit = zero.clone();
    unit[0] = re(T::one());
    let one = T::one();
    Ok(vec![
        vector_report(RelationId::LeftLowerVanishes, &row0(&am), &zero, one),
        vector_report(RelationId::LeftRaiseLoop, &row0(&ap.matmul(&loop_op)), &zero, one),
        vector_report(RelationId::LeftRaiseLowerSquared, &row0(&ap.matmul(&am).matmul(&am)), &zero, one),
        vector_report(RelationId::RightRaiseVanishes, &col0(&ap), &zero, one),
        vector_report(RelationId::RightLowerLoop, &col0(&loop_op.matmul(&am)), &zero, one),
        vector_report(RelationId::RightRaiseSquaredLower, &col0(&ap.matmul(&ap).matmul(&am)), &zero, one),
        vector_report(RelationId::LeftDiagFixed, &row0(&a0), &unit, one),
        vector_report(RelationId::RightDiagFixed, &col0(&a0), &unit, one),
        vector_report(RelationId::BoundaryHopping, &[ap.matmul(&am)[(0, 0)]], &[i_eps], one),
    ])
}

/// Dense check of `[H, S_n] = -iε(σ^z ⊗ S_{n-1} - S_{n-1} ⊗ σ^z)`.
pub fn check_commutation_identity<T: Real>(mpo: &MpoMatrices<T>, n: usize) -> Result<AlgebraReport> {
    if !(2..=N_MAX_COMMUTATION).contains(&n) {
        return Err(Error::Size { n, max: N_MAX_COMMUTATION, what: "the commutation identity" });
    }
    let s = build_cholesky(mpo, n)?.s;
    let s1 = build_cholesky(mpo, n - 1)?.s;
    let h = xxz_hamiltonian(n, mpo.table.delta);
    let sz = Pauli::Z.matrix::<T>();
    let lhs = h.commutator(&s);
    let rhs = (&sz.kron(&s1) - &s1.kron(&sz)).scale(im(-mpo.eps));
    let dim = 1 << n;
    let mut rep = block_report(RelationId::ManyBodyCommutation, &lhs, &rhs, dim);
    rep.scale = rep.scale.max(h.matmul(&s).max_abs().approx_f64());
    Ok(rep)
}

/// Double-commutator identity and boundary sum rules of the isotropic
/// transfer matrices.
pub fn check_isotropic_identities<T: Real>(ts: &TransferSet<T>) -> Result<Vec<AlgebraReport>> {
    if ts.d < 6 {
        return Err(Error::Domain(format!("isotropic checks need d >= 6, got {}", ts.d)));
    }
    let (t, v) = (ts.t.to_dense(), ts.v.to_dense());
    let k = protected_dim(ts.d);
    let lhs = t.commutator(&t.commutator(&v));
    let e2 = ts.eps * ts.eps * T::lit(0.25);
    let rhs = (&v.scale(re(T::lit(2.0))) + &t.anticommutator(&v)).scale(re(-e2));
    let mut double = block_report(RelationId::TransferDoubleCommutator, &lhs, &rhs, k);
    double.scale = double.scale.max(t.matmul(&t).matmul(&v).max_abs_block(k).approx_f64());
    let d = ts.d;
    let mut unit = vec![re(T::zero()); d];
    unit[0] = re(T::one());
    let left: Vec<Cx<T>> = (0..d).map(|c| re(ts.t.get(0, c) - ts.v.get(0, c))).collect();
    let right: Vec<Cx<T>> = (0..d).map(|r| re(ts.t.get(r, 0) + ts.v.get(r, 0))).collect();
    Ok(vec![
        double,
        vector_report(RelationId::TransferLeftSum, &left, &unit, T::one()),
        vector_report(RelationId::TransferRightSum, &right, &unit, T::one()),
    ])
}

/// Every report of the single-layer algebra for one table, plus the dense
/// commutation identity at chain length `n`.
pub fn full_report<T: Real>(mpo: &MpoMatrices<T>, n: usize) -> Result<Vec<AlgebraReport>> {
    let mut out = check_bulk_algebra(mpo)?;
    out.extend(check_boundary_relations(mpo)?);
    out.push(check_commutation_identity(mpo, n)?);
    Ok(out)
}
