//! Banded auxiliary-space matrices `A_0, A_±` and the doubled matrices `B_s`.
//!
//! Matrix elements of the Cholesky factor are boundary-contracted words
//! `⟨ν'|S_n|ν⟩ = ⟨0|A_{ν_1-ν'_1} ⋯ A_{ν_n-ν'_n}|0⟩`, where the step
//! `s = ν_j - ν'_j` selects `A_-`, `A_0` or `A_+`.

use crate::anisotropy::{truncation_dim, AmplitudeTable};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{re, Cx, Real};
use crate::spin::Pauli;

use num_traits::Zero;

/// `A_0` (diagonal), `A_+` (superdiagonal) and `A_-` (subdiagonal), stored as
/// their bands. The fields are public so that tests can inject faults.
#[derive(Clone, Debug, PartialEq)]
pub struct MpoMatrices<T> {
    pub d: usize,
    pub eps: T,
    /// `A_0[r, r]`.
    pub diag: Vec<Cx<T>>,
    /// `A_+[r, r+1]`.
    pub up: Vec<Cx<T>>,
    /// `A_-[r+1, r]`.
    pub down: Vec<Cx<T>>,
    pub table: AmplitudeTable<T>,
}

/// Builds the banded matrices from an amplitude table of dimension `d`.
pub fn build_mpo<T: Real>(table: &AmplitudeTable<T>) -> MpoMatrices<T> {
    let d = table.d;
    MpoMatrices {
        d,
        eps: table.eps,
        diag: table.a0.clone(),
        up: table.aplus[..d - 1].to_vec(),
        down: table.aminus[..d - 1].to_vec(),
        table: table.clone(),
    }
}

impl<T: Real> MpoMatrices<T> {
    /// Dense `A_s` for `s ∈ {-1, 0, +1}`.
    pub fn dense(&self, s: i8) -> CMat<T> {
        let mut m = CMat::zeros(self.d, self.d);
        match s {
            0 => (0..self.d).for_each(|r| m[(r, r)] = self.diag[r]),
            1 => (0..self.d - 1).for_each(|r| m[(r, r + 1)] = self.up[r]),
            -1 => (0..self.d - 1).for_each(|r| m[(r + 1, r)] = self.down[r]),
            _ => panic!("step {s} outside -1..=1"),
        }
        m
    }

    pub fn a0(&self) -> CMat<T> {
        self.dense(0)
    }

    pub fn aplus(&self) -> CMat<T> {
        self.dense(1)
    }

    pub fn aminus(&self) -> CMat<T> {
        self.dense(-1)
    }

    /// `v ← vᵀ A_s` using the band structure.
    pub fn apply_left(&self, v: &[Cx<T>], s: i8) -> Vec<Cx<T>> {
        let d = self.d;
        let mut out = vec![Cx::zero(); d];
        match s {
            0 => (0..d).for_each(|r| out[r] = v[r] * self.diag[r]),
            1 => (0..d - 1).for_each(|r| out[r + 1] = v[r] * self.up[r]),
            -1 => (0..d - 1).for_each(|r| out[r] = v[r + 1] * self.down[r]),
            _ => panic!("step {s} outside -1..=1"),
        }
        out
    }

    /// `⟨0|A_{s_1} ⋯ A_{s_n}|0⟩` for an arbitrary word.
    pub fn word(&self, steps: &[i8]) -> Cx<T> {
        let mut v = vec![Cx::zero(); self.d];
        v[0] = re(T::one());
        for &s in steps {
            v = self.apply_left(&v, s);
        }
        v[0]
    }

    /// Checks that `d` is large enough for exact words of length `n`.
    pub fn require_length(&self, n: usize) -> Result<()> {
        let need = truncation_dim(n);
        if self.d < need {
            return Err(Error::Dimension { d: self.d, n, need });
        }
        Ok(())
    }
}

/// `⟨ν'|S_n|ν⟩` for bitstrings of equal length.
pub fn s_matrix_element<T: Real>(mpo: &MpoMatrices<T>, nu_out: &[u8], nu_in: &[u8]) -> Result<Cx<T>> {
    if nu_out.len() != nu_in.len() {
        return Err(Error::Domain(format!(
            "bitstrings differ in length: {} vs {}",
            nu_out.len(),
            nu_in.len()
        )));
    }
    mpo.require_length(nu_in.len())?;
    let steps: Vec<i8> = nu_in.iter().zip(nu_out).map(|(&a, &b)| a as i8 - b as i8).collect();
    Ok(mpo.word(&steps))
}

/// Doubled-space matrices `B_s` acting on `C^d ⊗ C^d`, index `r·d + r'`.
#[derive(Clone, Debug, PartialEq)]
pub struct BMatrices<T> {
    pub d: usize,
    pub b0: CMat<T>,
    pub bplus: CMat<T>,
    pub bminus: CMat<T>,
    pub bz: CMat<T>,
}

impl<T: Real> BMatrices<T> {
    pub fn d2(&self) -> usize {
        self.d * self.d
    }

    pub fn get(&self, s: Pauli) -> &CMat<T> {
        match s {
            Pauli::Id => &self.b0,
            Pauli::Plus => &self.bplus,
            Pauli::Minus => &self.bminus,
            Pauli::Z => &self.bz,
        }
    }

    /// Restriction of a doubled-space matrix to the diagonal subspace
    /// spanned by `|r⟩ ⊗ |r⟩`.
    pub fn restrict_diagonal(&self, m: &CMat<T>) -> CMat<T> {
        let d = self.d;
        CMat::from_fn(d, d, |r, c| m[(r * d + r, c * d + c)])
    }
}

/// `B_s = (tr σ^{s†}σ^s)^{-1} Σ_{ν',ν,μ} σ^s_{ν'ν} A_{μ-ν'} ⊗ Ā_{μ-ν}`.
pub fn build_b_matrices<T: Real>(mpo: &MpoMatrices<T>) -> BMatrices<T> {
    let a = [mpo.aminus(), mpo.a0(), mpo.aplus()];
    let abar: Vec<CMat<T>> = a.iter().map(CMat::conj).collect();
    let step = |x: i8| (x + 1) as usize;
    let d2 = mpo.d * mpo.d;
    let build = |s: Pauli| {
        let mut b = CMat::zeros(d2, d2);
        for nu_p in 0..2u8 {
            for nu in 0..2u8 {
                let w = s.entry(nu_p, nu);
                if w == 0.0 {
                    continue;
                }
                for mu in 0..2i8 {
                    let term = a[step(mu - nu_p as i8)].kron(&abar[step(mu - nu as i8)]);
                    b = &b + &term.scale(re(T::lit(w)));
                }
            }
        }
        b.scale(re(T::lit(1.0 / s.norm2())))
    };
    BMatrices {
        d: mpo.d,
        b0: build(Pauli::Id),
        bplus: build(Pauli::Plus),
        bminus: build(Pauli::Minus),
        bz: build(Pauli::Z),
    }
}
