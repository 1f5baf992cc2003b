//! Many-body basis conventions and dense spin operators.
//!
//! A basis state is a bitstring `ν = (ν_1, …, ν_n)` with `ν_j = 0` for spin
//! up (`σ^z = +1`). Site 1 is the leftmost tensor factor, so the dense
//! index of `ν` is `seq(ν) = Σ_j ν_j 2^{n-j}`.

use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::scalar::{re, Cx, Real};

/// Single-site operator basis `{1, σ^+, σ^-, σ^z}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    Id,
    Plus,
    Minus,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::Id, Pauli::Plus, Pauli::Minus, Pauli::Z];

    /// Entry `⟨a|σ|b⟩` with `a, b ∈ {0, 1}`.
    pub fn entry(self, a: u8, b: u8) -> f64 {
        match (self, a, b) {
            (Pauli::Id, a, b) if a == b => 1.0,
            (Pauli::Plus, 0, 1) => 1.0,
            (Pauli::Minus, 1, 0) => 1.0,
            (Pauli::Z, 0, 0) => 1.0,
            (Pauli::Z, 1, 1) => -1.0,
            _ => 0.0,
        }
    }

    pub fn matrix<T: Real>(self) -> CMat<T> {
        CMat::from_fn(2, 2, |a, b| re(T::lit(self.entry(a as u8, b as u8))))
    }

    /// `σ^†`.
    pub fn adjoint(self) -> Pauli {
        match self {
            Pauli::Plus => Pauli::Minus,
            Pauli::Minus => Pauli::Plus,
            p => p,
        }
    }

    /// `tr(σ^† σ)`: 2 for `1, σ^z`, 1 for `σ^±`.
    pub fn norm2(self) -> f64 {
        match self {
            Pauli::Id | Pauli::Z => 2.0,
            _ => 1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::Id => '0',
            Pauli::Plus => '+',
            Pauli::Minus => '-',
            Pauli::Z => 'z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli> {
        match c {
            '0' | 'I' | 'i' => Some(Pauli::Id),
            '+' | 'p' => Some(Pauli::Plus),
            '-' | 'm' => Some(Pauli::Minus),
            'z' | 'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Parses a string such as `"0+-z"` into operator labels.
pub fn parse_pauli_string(s: &str) -> Option<Vec<Pauli>> {
    s.chars().map(Pauli::from_symbol).collect()
}

/// `seq(ν)`.
pub fn seq(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Inverse of [`seq`] for a chain of `n` sites.
pub fn bits_of(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|j| ((index >> (n - 1 - j)) & 1) as u8).collect()
}

/// Number of down spins.
pub fn down_count(index: usize) -> u32 {
    index.count_ones()
}

/// `1_{2^{j-1}} ⊗ op ⊗ 1_{2^{n-j}}` for 1-based site `j`.
pub fn site_operator<T: Real>(n: usize, j: usize, op: &CMat<T>) -> CMat<T> {
    assert!(j >= 1 && j <= n, "site {j} outside 1..={n}");
    let left = CMat::identity(1 << (j - 1));
    let right = CMat::identity(1 << (n - j));
    left.kron(op).kron(&right)
}

pub fn pauli_on<T: Real>(n: usize, j: usize, p: Pauli) -> CMat<T> {
    site_operator(n, j, &p.matrix())
}

/// Open XXZ Hamiltonian `Σ_j 2σ_j^+σ_{j+1}^- + 2σ_j^-σ_{j+1}^+ + Δ σ_j^zσ_{j+1}^z`.
pub fn xxz_hamiltonian<T: Real>(n: usize, delta: T) -> CMat<T> {
    let dim = 1usize << n;
    let mut h = CMat::zeros(dim, dim);
    let two = re(T::lit(2.0));
    for j in 1..n {
        let pm = pauli_on::<T>(n, j, Pauli::Plus).matmul(&pauli_on(n, j + 1, Pauli::Minus));
        let mp = pauli_on::<T>(n, j, Pauli::Minus).matmul(&pauli_on(n, j + 1, Pauli::Plus));
        let zz = pauli_on::<T>(n, j, Pauli::Z).matmul(&pauli_on(n, j + 1, Pauli::Z));
        h = &h + &(&pm.scale(two) + &mp.scale(two));
        h = &h + &zz.scale(re(delta));
    }
    h
}

/// Spin current operator `J_j = i(σ_j^+σ_{j+1}^- − σ_j^-σ_{j+1}^+)`.
pub fn current_operator<T: Real>(n: usize, j: usize) -> CMat<T> {
    let pm = pauli_on::<T>(n, j, Pauli::Plus).matmul(&pauli_on(n, j + 1, Pauli::Minus));
    let mp = pauli_on::<T>(n, j, Pauli::Minus).matmul(&pauli_on(n, j + 1, Pauli::Plus));
    (&pm - &mp).scale(Cx::new(T::zero(), T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seq_roundtrip_and_order() {
        assert_eq!(seq(&[0, 1, 1]), 3);
        assert_eq!(seq(&[1, 0, 0]), 4);
        for i in 0..16 {
            assert_eq!(seq(&bits_of(i, 4)), i);
        }
        assert_eq!(bits_of(6, 3), vec![1, 1, 0]);
    }

    #[test]
    fn pauli_conventions() {
        // σ^z |ν⟩ = (1 - 2ν)|ν⟩, σ^+ raises down to up
        let sz = Pauli::Z.matrix::<f64>();
        assert_eq!(sz[(1, 1)].re, -1.0);
        let sp = Pauli::Plus.matrix::<f64>();
        assert_eq!(sp[(0, 1)].re, 1.0);
        let comm = sp.commutator(&Pauli::Minus.matrix());
        assert_eq!(comm, sz);
        assert_eq!(parse_pauli_string("0+-z"), Some(vec![Pauli::Id, Pauli::Plus, Pauli::Minus, Pauli::Z]));
        assert_eq!(parse_pauli_string("0x"), None);
    }

    #[test]
    fn hamiltonian_is_hermitian_and_conserves_magnetization() {
        let h = xxz_hamiltonian::<f64>(3, 0.7);
        assert!(h.max_abs_diff(&h.adjoint()) < 1e-15);
        for a in 0..8 {
            for b in 0..8 {
                if h[(a, b)].norm() > 0.0 {
                    assert_eq!(down_count(a), down_count(b));
                }
            }
        }
        // |↑↑↑⟩ has energy 2Δ
        assert!((h[(0, 0)].re - 1.4).abs() < 1e-15);
    }
}
