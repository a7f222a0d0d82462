//! Return module and height lattice: the lattice generated by equal-letter
//! position differences of a reference (pre-)fixed point, its saturation to
//! the height lattice Gamma (verified against the defining properties), the
//! induced alphabet partition, and the `A Gamma = Gamma` admissibility filter.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{vec_add, vec_sub, IMat, IVec, Lattice};
use crate::subst::Substitution;

#[derive(Debug, Error)]
pub enum HeightError {
    #[error("digit system has no zero digit; no corner fixed point available")]
    NoZeroDigit,
    #[error("return module did not stabilize to a full-rank lattice by level {0}")]
    NoStabilization(usize),
    #[error("saturation construction failed verification: {0}")]
    SaturationInvalid(String),
    #[error("letter {0} occurs in two distinct residue classes")]
    InconsistentPartition(String),
}

/// Height lattice plus the induced alphabet partition.
#[derive(Clone, Debug, Serialize)]
pub struct HeightData {
    pub gamma: Lattice,
    /// Canonical coset representatives (HNF-reduced) in lexicographic order.
    pub fundamental_domain: Vec<IVec>,
    /// For each letter, its residue class representative.
    pub partition: Vec<IVec>,
    /// Offset of the reference point; the anchor cell carries residue 0.
    pub anchor: IVec,
}

/// A letter lying on a cycle of the zero-corner column map, i.e. a letter `a`
/// with `a = theta^m(a)` at digit 0 for some `m >= 1`.
pub fn corner_cycle_letter(sub: &Substitution) -> Result<usize, HeightError> {
    let zero = vec![0i64; sub.dim()];
    let corner = sub
        .system
        .digits
        .iter()
        .position(|d| *d == zero)
        .ok_or(HeightError::NoZeroDigit)?;
    let col = sub.digit_column(corner);
    // Follow the functional graph from letter 0 until a repeat: that repeat
    // lies on a cycle.
    let mut seen = vec![false; sub.letters()];
    let mut x = 0usize;
    while !seen[x] {
        seen[x] = true;
        x = col[x];
    }
    Ok(x)
}

const RETURN_MODULE_MAX_LEVEL: usize = 12;

/// The return module: the lattice generated by position differences of equal
/// letters inside supertiles, declared stable when successive levels (k >= 4)
/// add no new generators.
///
/// Supertiles are never materialized. The level-k tile of `b` decomposes as
/// `theta^k(b) = U_i Q^{k-1} d_i + theta^{k-1}(rules[b][i])`, so one stored
/// occurrence of each letter per tile, together with the lattice collected so
/// far, generates all new equal-letter differences of the next level.
pub fn return_module(sub: &Substitution) -> Result<Lattice, HeightError> {
    corner_cycle_letter(sub)?;
    let d = sub.dim();
    let letters = sub.letters();
    // occ[x][b]: one occurrence of letter x in the current-level tile of b.
    let mut occ: Vec<Vec<Option<IVec>>> = vec![vec![None; letters]; letters];
    for (x, row) in occ.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            *slot = sub.rules[b]
                .iter()
                .position(|&l| l == x)
                .map(|i| sub.system.digits[i].clone());
        }
    }
    let mut basis: Vec<IVec> = Vec::new();
    let mut lattice: Option<Lattice> = None;
    let add = |diff: IVec, basis: &mut Vec<IVec>, lattice: &mut Option<Lattice>| -> bool {
        if diff.iter().all(|&v| v == 0)
            || lattice.as_ref().map(|l| l.contains(&diff)).unwrap_or(false)
        {
            return false;
        }
        basis.push(diff);
        *lattice = Lattice::from_generators(d, basis);
        true
    };
    // Level-1 within-tile differences.
    for b in 0..letters {
        let mut first: HashMap<usize, &IVec> = HashMap::new();
        for (i, &x) in sub.rules[b].iter().enumerate() {
            let pos = &sub.system.digits[i];
            match first.get(&x) {
                None => {
                    first.insert(x, pos);
                }
                Some(p0) => {
                    add(vec_sub(pos, p0), &mut basis, &mut lattice);
                }
            }
        }
    }
    for level in 2..=RETURN_MODULE_MAX_LEVEL {
        let scale = sub.system.q.pow((level - 1) as u32);
        let mut changed = false;
        let mut next_occ: Vec<Vec<Option<IVec>>> = vec![vec![None; letters]; letters];
        for b in 0..letters {
            for x in 0..letters {
                // Cells of theta(b) whose level-(k-1) tile contains x.
                let mut base: Option<IVec> = None;
                for (i, &c) in sub.rules[b].iter().enumerate() {
                    let Some(inner) = &occ[x][c] else { continue };
                    let pos = vec_add(&scale.mul_vec(&sub.system.digits[i]), inner);
                    match &base {
                        None => {
                            next_occ[x][b] = Some(pos.clone());
                            base = Some(pos);
                        }
                        Some(p0) => {
                            changed |= add(vec_sub(&pos, p0), &mut basis, &mut lattice);
                        }
                    }
                }
            }
        }
        occ = next_occ;
        if !changed && level >= 4 {
            if let Some(l) = &lattice {
                return Ok(l.clone());
            }
        }
    }
    Err(HeightError::NoStabilization(RETURN_MODULE_MAX_LEVEL))
}

/// The height lattice: saturation of the return module under `Q^{-1}`,
/// verified to be coprime with `Q Z^d` and minimal among lattices between the
/// return module and itself.
pub fn height_lattice(sub: &Substitution) -> Result<Lattice, HeightError> {
    let l = return_module(sub)?;
    height_lattice_from_return_module(sub, &l)
}

pub fn height_lattice_from_return_module(
    sub: &Substitution,
    l: &Lattice,
) -> Result<Lattice, HeightError> {
    let d = sub.dim();
    let q_lattice = Lattice::from_matrix(&sub.system.q).expect("Q is non-singular");
    let mut gamma = l.clone();
    loop {
        // Pull back: { x : Q x in Gamma } = Q^{-1} (Gamma intersect Q Z^d).
        let inter = gamma.intersect(&q_lattice);
        let pulled: Vec<IVec> = inter
            .basis
            .columns()
            .iter()
            .map(|v| {
                sub.system
                    .q
                    .solve_integral(v)
                    .expect("intersection with Q Z^d is divisible by Q")
            })
            .collect();
        let pulled =
            Lattice::from_generators(d, &pulled).expect("pullback keeps full rank");
        let next = gamma.sum(&pulled);
        if next == gamma {
            break;
        }
        gamma = next;
    }
    // Verification (i): coprime with the supertile lattice.
    if gamma.sum(&q_lattice) != Lattice::standard(d) {
        return Err(HeightError::SaturationInvalid(format!(
            "Gamma + Q Z^d = {} is a proper sublattice of Z^d",
            gamma.sum(&q_lattice)
        )));
    }
    if !l.is_sublattice_of(&gamma) {
        return Err(HeightError::SaturationInvalid(
            "saturation lost the return module".to_string(),
        ));
    }
    // Verification (ii): minimality among lattices between L and Gamma that
    // are coprime with Q Z^d, by brute-force enumeration of intermediate
    // sublattices (indices divide [Gamma : L]).
    let rel_index = l.index() / gamma.index();
    for e in 2..=rel_index {
        if rel_index % e != 0 {
            continue;
        }
        for h in hnf_sublattices(d, e) {
            // Candidate = Gamma * H in ambient coordinates.
            let gens: Vec<IVec> =
                h.columns().iter().map(|c| gamma.basis.mul_vec(c)).collect();
            let candidate = Lattice::from_generators(d, &gens)
                .expect("sublattice of full-rank lattice");
            if candidate != gamma
                && l.is_sublattice_of(&candidate)
                && candidate.sum(&q_lattice) == Lattice::standard(d)
            {
                return Err(HeightError::SaturationInvalid(format!(
                    "strictly smaller admissible lattice found: {candidate}"
                )));
            }
        }
    }
    Ok(gamma)
}

/// All HNF matrices of determinant `e` in dimension `d` (lower triangular,
/// reduced off-diagonal entries).
fn hnf_sublattices(d: usize, e: i64) -> Vec<IMat> {
    let mut out = Vec::new();
    let mut diag = vec![1i64; d];
    fn rec_diag(i: usize, rem: i64, diag: &mut Vec<i64>, out: &mut Vec<IMat>) {
        let d = diag.len();
        if i == d {
            if rem == 1 {
                // Enumerate reduced below-diagonal entries: for row i, columns
                // j < i take values in [0, diag[i]).
                let mut mat = IMat::diagonal(diag);
                fn rec_fill(
                    row: usize,
                    col: usize,
                    mat: &mut IMat,
                    diag: &[i64],
                    out: &mut Vec<IMat>,
                ) {
                    let d = diag.len();
                    if row == d {
                        out.push(mat.clone());
                        return;
                    }
                    if col == row {
                        rec_fill(row + 1, 0, mat, diag, out);
                        return;
                    }
                    for v in 0..diag[row] {
                        mat[(row, col)] = v;
                        rec_fill(row, col + 1, mat, diag, out);
                    }
                    mat[(row, col)] = 0;
                }
                rec_fill(0, 0, &mut mat, diag, out);
            }
            return;
        }
        let mut v = 1;
        while v <= rem {
            if rem % v == 0 {
                diag[i] = v;
                rec_diag(i + 1, rem / v, diag, out);
            }
            v += 1;
        }
        diag[i] = 1;
    }
    rec_diag(0, e, &mut diag, &mut out);
    out
}

/// Partition of the alphabet by residue class modulo Gamma, scanned from a
/// large supertile of the corner-cycle letter.
pub fn alphabet_partition(sub: &Substitution, gamma: &Lattice) -> Result<HeightData, HeightError> {
    let a = corner_cycle_letter(sub)?;
    // Level large enough that every letter appears (primitivity exponent) and
    // well past the return-module stabilisation scale.
    let level = match sub.is_primitive() {
        Some(k) => (k + 2).min(8),
        None => 6,
    };
    let tile = sub.supertile(a, level);
    let mut partition: Vec<Option<IVec>> = vec![None; sub.letters()];
    for (pos, letter) in tile.cells() {
        let r = reduce_mod(gamma, pos);
        match &partition[*letter] {
            None => partition[*letter] = Some(r),
            Some(existing) if *existing == r => {}
            Some(_) => {
                return Err(HeightError::InconsistentPartition(
                    sub.alphabet.name(*letter).to_string(),
                ))
            }
        }
    }
    let partition: Vec<IVec> = partition
        .into_iter()
        .map(|p| p.expect("every letter occurs in a high supertile"))
        .collect();
    Ok(HeightData {
        fundamental_domain: fundamental_domain(gamma),
        partition,
        anchor: vec![0; sub.dim()],
        gamma: gamma.clone(),
    })
}

/// Canonical residue of a point modulo the lattice (entries reduced by the
/// triangular basis into `[0, diag)`).
pub fn reduce_mod(lattice: &Lattice, v: &[i64]) -> IVec {
    let d = lattice.dim();
    let mut r: Vec<i64> = v.to_vec();
    for i in 0..d {
        let diag = lattice.basis[(i, i)];
        let q = r[i].div_euclid(diag);
        for row in 0..d {
            r[row] -= q * lattice.basis[(row, i)];
        }
    }
    r
}

/// The canonical coset representatives of Z^d / lattice.
pub fn fundamental_domain(lattice: &Lattice) -> Vec<IVec> {
    let d = lattice.dim();
    let mut reps: Vec<IVec> = vec![Vec::new()];
    for i in 0..d {
        let mut next = Vec::new();
        for prefix in &reps {
            for v in 0..lattice.basis[(i, i)] {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        reps = next;
    }
    // Entries built digit-by-digit are already canonical (reduce_mod fixes
    // them), but normalise for safety.
    reps.into_iter().map(|r| reduce_mod(lattice, &r)).collect()
}

/// Theorem-level admissibility filter: does `A` map Gamma onto itself?
pub fn matrix_preserves_lattice(a: &IMat, gamma: &Lattice) -> bool {
    gamma.transform(a).map(|t| t == *gamma).unwrap_or(false)
}
