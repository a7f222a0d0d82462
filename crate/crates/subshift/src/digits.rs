//! Digit systems (Q, D) for Z^d, block shapes, and Q-adic decomposition of
//! lattice points into address words.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{vec_sub, IMat, IVec};

/// A complete digit system: an expansive integer matrix `Q` together with a
/// complete residue system `digits` modulo `Q Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DigitSystem {
    pub dim: usize,
    pub q: IMat,
    pub digits: Vec<IVec>,
    /// Side lengths when this is a block system (Q diagonal, digits a box in
    /// canonical order); `None` for general digit sets.
    pub block_lengths: Option<Vec<i64>>,
}

/// An address word `[n_{k-1}, ..., n_0]` of digit indices: the encoded point is
/// `n = sum_i Q^i n_i`. Stored most significant digit first.
pub type Address = Vec<usize>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DigitError {
    #[error("point {0:?} has no level-{1} decomposition")]
    NotInSupport(IVec, usize),
}

/// A violation found by [`DigitSystem::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DigitSystemViolation {
    SingularMatrix,
    NotExpansive,
    WrongDigitCount { expected: usize, got: usize },
    DuplicateResidueClass { first: usize, second: usize },
    DimensionMismatch { digit: usize },
}

impl std::fmt::Display for DigitSystemViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DigitSystemViolation::SingularMatrix => write!(f, "matrix Q is singular"),
            DigitSystemViolation::NotExpansive => {
                write!(f, "matrix Q has an eigenvalue of modulus <= 1")
            }
            DigitSystemViolation::WrongDigitCount { expected, got } => {
                write!(f, "expected |det Q| = {expected} digits, got {got}")
            }
            DigitSystemViolation::DuplicateResidueClass { first, second } => {
                write!(f, "duplicate residue class: digits #{first} and #{second}")
            }
            DigitSystemViolation::DimensionMismatch { digit } => {
                write!(f, "digit #{digit} has the wrong dimension")
            }
        }
    }
}

impl DigitSystem {
    /// Explicit digit system from a matrix and digit list (no validation;
    /// call [`DigitSystem::validate`]).
    pub fn explicit(q: IMat, digits: Vec<IVec>) -> Self {
        let dim = q.dim;
        DigitSystem { dim, q, digits, block_lengths: None }
    }

    /// Block system: `Q = diag(lengths)`, digits the box `prod [0, l_j - 1]` in
    /// canonical order (lexicographic on `(n_1, ..., n_d)` with `n_d` fastest).
    pub fn block(lengths: &[i64]) -> Self {
        let dim = lengths.len();
        let mut digits = vec![vec![0i64; dim]];
        for axis in 0..dim {
            let mut next = Vec::new();
            for prefix in &digits {
                for v in 0..lengths[axis] {
                    let mut p = prefix.clone();
                    p[axis] = v;
                    next.push(p);
                }
            }
            digits = next;
        }
        DigitSystem {
            dim,
            q: IMat::diagonal(lengths),
            digits,
            block_lengths: Some(lengths.to_vec()),
        }
    }

    pub fn size(&self) -> usize {
        self.digits.len()
    }

    /// Check the complete-digit-system axioms, returning every violation found.
    pub fn validate(&self) -> Vec<DigitSystemViolation> {
        let mut out = Vec::new();
        for (i, d) in self.digits.iter().enumerate() {
            if d.len() != self.dim {
                out.push(DigitSystemViolation::DimensionMismatch { digit: i });
            }
        }
        if !out.is_empty() {
            return out;
        }
        let det = self.q.det();
        if det == 0 {
            out.push(DigitSystemViolation::SingularMatrix);
            return out;
        }
        if !self.q.all_eigenvalues_outside_unit_circle(1e-9) {
            out.push(DigitSystemViolation::NotExpansive);
        }
        let expected = det.unsigned_abs() as usize;
        if self.digits.len() != expected {
            out.push(DigitSystemViolation::WrongDigitCount {
                expected,
                got: self.digits.len(),
            });
        }
        for i in 0..self.digits.len() {
            for j in i + 1..self.digits.len() {
                let diff = vec_sub(&self.digits[i], &self.digits[j]);
                if self.q.solve_integral(&diff).is_some() {
                    out.push(DigitSystemViolation::DuplicateResidueClass {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        out
    }

    /// Index of the digit congruent to `n` modulo `Q Z^d`, together with the
    /// quotient `Q^{-1}(n - digit)`.
    pub fn residue(&self, n: &[i64]) -> (usize, IVec) {
        for (i, d) in self.digits.iter().enumerate() {
            if let Some(q) = self.q.solve_integral(&vec_sub(n, d)) {
                return (i, q);
            }
        }
        unreachable!("complete digit system covers every residue class")
    }

    /// Q-adic decomposition of `n` at level `k`: greedy residue extraction.
    /// Errors when `n` is not in the level-`k` support `D^(k)`.
    pub fn q_adic_decompose(&self, n: &[i64], k: usize) -> Result<Address, DigitError> {
        let mut word = vec![0usize; k];
        let mut rest = n.to_vec();
        for i in 0..k {
            let (digit, quotient) = self.residue(&rest);
            word[k - 1 - i] = digit;
            rest = quotient;
        }
        if rest.iter().any(|&v| v != 0) {
            return Err(DigitError::NotInSupport(n.to_vec(), k));
        }
        Ok(word)
    }

    /// The point encoded by an address word: `sum_i Q^i n_i`.
    pub fn address_to_point(&self, addr: &[usize]) -> IVec {
        let mut point = vec![0i64; self.dim];
        for &digit in addr {
            point = self.q.mul_vec(&point);
            for (r, v) in self.digits[digit].iter().enumerate() {
                point[r] += v;
            }
        }
        point
    }

    /// All points of the level-`k` support `D^(k)`, with their addresses, in
    /// lexicographic address order.
    pub fn support(&self, k: usize) -> Vec<(Address, IVec)> {
        let mut out: Vec<(Address, IVec)> = vec![(Vec::new(), vec![0i64; self.dim])];
        for _ in 0..k {
            let mut next = Vec::with_capacity(out.len() * self.size());
            for (addr, point) in &out {
                let scaled = self.q.mul_vec(point);
                for (i, digit) in self.digits.iter().enumerate() {
                    let mut a = addr.clone();
                    a.push(i);
                    let mut p = scaled.clone();
                    for (r, v) in digit.iter().enumerate() {
                        p[r] += v;
                    }
                    next.push((a, p));
                }
            }
            out = next;
        }
        out
    }

    /// Map point -> address over the level-`k` support.
    pub fn support_index(&self, k: usize) -> HashMap<IVec, Address> {
        self.support(k).into_iter().map(|(a, p)| (p, a)).collect()
    }
}
