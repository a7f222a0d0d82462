//! Exact integer linear algebra for small dimensions: determinants, adjugates,
//! Hermite normal form, and full-rank sublattices of Z^d.
//!
//! Everything is `i64`-valued with `i128` intermediates; the dimensions that
//! occur in substitution analysis are tiny (d <= 4), so no asymptotic cleverness
//! is needed, only correctness.

use std::fmt;

use serde::Serialize;

/// Integer column vector in Z^d.
pub type IVec = Vec<i64>;

/// Add two vectors componentwise.
pub fn vec_add(a: &[i64], b: &[i64]) -> IVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Subtract `b` from `a` componentwise.
pub fn vec_sub(a: &[i64], b: &[i64]) -> IVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Square integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct IMat {
    pub dim: usize,
    entries: Vec<i64>,
}

impl IMat {
    pub fn zero(dim: usize) -> Self {
        IMat { dim, entries: vec![0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = IMat::zero(dim);
        for i in 0..dim {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn diagonal(diag: &[i64]) -> Self {
        let mut m = IMat::zero(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        IMat { dim, entries: rows.iter().flatten().copied().collect() }
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> IVec {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<IVec> {
        (0..self.dim).map(|j| self.column(j)).collect()
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.dim, other.dim);
        let mut out = IMat::zero(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut acc: i128 = 0;
                for k in 0..self.dim {
                    acc += self[(i, k)] as i128 * other[(k, j)] as i128;
                }
                out[(i, j)] = narrow(acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[i64]) -> IVec {
        assert_eq!(self.dim, v.len());
        (0..self.dim)
            .map(|i| {
                let acc: i128 =
                    (0..self.dim).map(|k| self[(i, k)] as i128 * v[k] as i128).sum();
                narrow(acc)
            })
            .collect()
    }

    /// Matrix power with non-negative exponent.
    pub fn pow(&self, k: u32) -> IMat {
        let mut out = IMat::identity(self.dim);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Determinant by cofactor expansion (fine for the dimensions in play).
    pub fn det(&self) -> i64 {
        narrow(det_i128(&self.to_i128(), self.dim))
    }

    /// Adjugate matrix: `self * adj = det * I`.
    pub fn adjugate(&self) -> IMat {
        let d = self.dim;
        let mut out = IMat::zero(d);
        if d == 1 {
            out[(0, 0)] = 1;
            return out;
        }
        let big = self.to_i128();
        for i in 0..d {
            for j in 0..d {
                // Cofactor C_{j,i} (transposed into the adjugate).
                let mut minor = Vec::with_capacity((d - 1) * (d - 1));
                for r in 0..d {
                    if r == j {
                        continue;
                    }
                    for c in 0..d {
                        if c == i {
                            continue;
                        }
                        minor.push(big[r * d + c]);
                    }
                }
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                out[(i, j)] = narrow(sign * det_i128(&minor, d - 1));
            }
        }
        out
    }

    /// Exact inverse, available iff `det = ±1`.
    pub fn inverse_unimodular(&self) -> Option<IMat> {
        let det = self.det();
        if det.abs() != 1 {
            return None;
        }
        let adj = self.adjugate();
        let mut out = IMat::zero(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = adj[(i, j)] * det; // det is ±1
            }
        }
        Some(out)
    }

    /// Solve `self * y = x` over the integers, if an integral solution exists.
    /// Requires `det != 0`.
    pub fn solve_integral(&self, x: &[i64]) -> Option<IVec> {
        let det = self.det() as i128;
        assert!(det != 0, "singular matrix");
        let adj = self.adjugate();
        let mut y = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let acc: i128 =
                (0..self.dim).map(|k| adj[(i, k)] as i128 * x[k] as i128).sum();
            if acc % det != 0 {
                return None;
            }
            y.push(narrow(acc / det));
        }
        Some(y)
    }

    /// Lower bound check on eigenvalue moduli: true iff every eigenvalue of the
    /// matrix has modulus strictly greater than `1 + tol`.
    ///
    /// Uses the Gelfand formula on the inverse: the spectral radius of `Q^{-1}`
    /// equals `1 / min |lambda(Q)|` and is approximated by repeated squaring of
    /// a floating-point inverse with renormalisation.
    pub fn all_eigenvalues_outside_unit_circle(&self, tol: f64) -> bool {
        let det = self.det();
        if det == 0 {
            return false;
        }
        let d = self.dim;
        let adj = self.adjugate();
        // Floating-point inverse.
        let mut m = vec![0f64; d * d];
        for i in 0..d {
            for j in 0..d {
                m[i * d + j] = adj[(i, j)] as f64 / det as f64;
            }
        }
        // Repeated squaring with renormalisation: after k squarings the tracked
        // exponent satisfies rho(M) ~ exp(log_norm / 2^k).
        let mut log_norm = 0f64;
        let squarings = 40;
        for _ in 0..squarings {
            let norm = frobenius(&m);
            if norm == 0.0 {
                return true; // nilpotent inverse cannot happen for det != 0
            }
            log_norm += norm.ln();
            let inv = 1.0 / norm;
            for v in m.iter_mut() {
                *v *= inv;
            }
            m = square(&m, d);
            // M^(2^(k+1)) = exp(2 * log_norm) * m after this step.
            log_norm *= 2.0;
        }
        let final_norm = frobenius(&m).max(f64::MIN_POSITIVE);
        let total = log_norm + final_norm.ln();
        let rho = (total / f64::powi(2.0, squarings)).exp();
        rho < 1.0 / (1.0 + tol)
    }

    fn to_i128(&self) -> Vec<i128> {
        self.entries.iter().map(|&v| v as i128).collect()
    }
}

impl std::ops::Index<(usize, usize)> for IMat {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl fmt::Debug for IMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for IMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn square(m: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0f64; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = 0f64;
            for k in 0..d {
                acc += m[i * d + k] * m[k * d + j];
            }
            out[i * d + j] = acc;
        }
    }
    out
}

fn det_i128(m: &[i128], d: usize) -> i128 {
    match d {
        0 => 1,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            let mut acc: i128 = 0;
            for c in 0..d {
                if m[c] == 0 {
                    continue;
                }
                let mut minor = Vec::with_capacity((d - 1) * (d - 1));
                for r in 1..d {
                    for cc in 0..d {
                        if cc != c {
                            minor.push(m[r * d + cc]);
                        }
                    }
                }
                let sign = if c % 2 == 0 { 1 } else { -1 };
                acc += sign * m[c] * det_i128(&minor, d - 1);
            }
            acc
        }
    }
}

fn narrow(v: i128) -> i64 {
    i64::try_from(v).expect("integer overflow in exact linear algebra")
}

/// Column-style Hermite normal form of the lattice spanned by `gens` in Z^d:
/// lower triangular, positive diagonal, off-diagonal entries reduced into
/// `[0, diagonal)`. Returns `None` when the generators do not span a full-rank
/// lattice.
pub fn hermite_normal_form(dim: usize, gens: &[IVec]) -> Option<IMat> {
    let mut w: Vec<Vec<i128>> = gens
        .iter()
        .map(|g| {
            assert_eq!(g.len(), dim);
            g.iter().map(|&v| v as i128).collect()
        })
        .collect();
    let m = w.len();
    if m < dim {
        return None;
    }
    for i in 0..dim {
        // Clear row i in all columns beyond i via gcd elimination.
        loop {
            let pivot = (i..m)
                .filter(|&j| w[j][i] != 0)
                .min_by_key(|&j| w[j][i].abs());
            let Some(p) = pivot else { return None };
            w.swap(i, p);
            let mut done = true;
            for j in i + 1..m {
                if w[j][i] != 0 {
                    let q = w[j][i].div_euclid(w[i][i]);
                    for r in 0..dim {
                        let delta = q * w[i][r];
                        w[j][r] -= delta;
                    }
                    if w[j][i] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if w[i][i] < 0 {
            for r in 0..dim {
                w[i][r] = -w[i][r];
            }
        }
        // Reduce the already-placed columns against column i.
        for j in 0..i {
            let q = w[j][i].div_euclid(w[i][i]);
            if q != 0 {
                for r in 0..dim {
                    let delta = q * w[i][r];
                    w[j][r] -= delta;
                }
            }
        }
    }
    let mut h = IMat::zero(dim);
    for j in 0..dim {
        for i in 0..dim {
            h[(i, j)] = narrow(w[j][i]);
        }
    }
    Some(h)
}

/// Basis of the integer kernel of the `dim x n` matrix with the given columns.
pub fn integer_kernel(dim: usize, cols: &[IVec]) -> Vec<IVec> {
    let n = cols.len();
    let mut w: Vec<Vec<i128>> = cols
        .iter()
        .map(|g| g.iter().map(|&v| v as i128).collect())
        .collect();
    // Transformation matrix: u[j] tracks the combination producing column j.
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|j| (0..n).map(|k| i128::from(j == k)).collect())
        .collect();
    let mut row = 0;
    let mut placed = 0;
    while row < dim && placed < n {
        loop {
            let pivot = (placed..n)
                .filter(|&j| w[j][row] != 0)
                .min_by_key(|&j| w[j][row].abs());
            let Some(p) = pivot else { break };
            w.swap(placed, p);
            u.swap(placed, p);
            let mut done = true;
            for j in placed + 1..n {
                if w[j][row] != 0 {
                    let q = w[j][row].div_euclid(w[placed][row]);
                    for r in 0..dim {
                        let delta = q * w[placed][r];
                        w[j][r] -= delta;
                    }
                    for r in 0..n {
                        let delta = q * u[placed][r];
                        u[j][r] -= delta;
                    }
                    if w[j][row] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if w[placed][row] != 0 {
            placed += 1;
        }
        row += 1;
    }
    // Columns `placed..n` are now zero; their transformation columns span the kernel.
    (placed..n)
        .filter(|&j| w[j].iter().all(|&v| v == 0))
        .map(|j| u[j].iter().map(|&v| narrow(v)).collect())
        .collect()
}

/// A full-rank sublattice of Z^d in canonical Hermite form. Equality of the
/// canonical basis is equality of lattices.
#[derive(Clone, PartialEq, Eq, Serialize)]
pub struct Lattice {
    pub basis: IMat,
}

impl Lattice {
    /// The full lattice Z^d.
    pub fn standard(dim: usize) -> Self {
        Lattice { basis: IMat::identity(dim) }
    }

    pub fn from_generators(dim: usize, gens: &[IVec]) -> Option<Self> {
        hermite_normal_form(dim, gens).map(|basis| Lattice { basis })
    }

    pub fn from_matrix(m: &IMat) -> Option<Self> {
        Self::from_generators(m.dim, &m.columns())
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    /// Index in Z^d, i.e. the determinant of the canonical basis.
    pub fn index(&self) -> i64 {
        (0..self.dim()).map(|i| self.basis[(i, i)]).product()
    }

    /// Membership test by forward substitution on the triangular basis.
    pub fn contains(&self, v: &[i64]) -> bool {
        let d = self.dim();
        let mut rem: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for i in 0..d {
            let diag = self.basis[(i, i)] as i128;
            if rem[i] % diag != 0 {
                return false;
            }
            let c = rem[i] / diag;
            for r in 0..d {
                rem[r] -= c * self.basis[(r, i)] as i128;
            }
        }
        true
    }

    pub fn is_sublattice_of(&self, other: &Lattice) -> bool {
        self.basis.columns().iter().all(|c| other.contains(c))
    }

    /// Lattice sum (join): the lattice generated by both bases.
    pub fn sum(&self, other: &Lattice) -> Lattice {
        let mut gens = self.basis.columns();
        gens.extend(other.basis.columns());
        Lattice::from_generators(self.dim(), &gens).expect("sum of full-rank lattices")
    }

    /// Lattice intersection via the integer kernel of `[A | -B]`.
    pub fn intersect(&self, other: &Lattice) -> Lattice {
        let d = self.dim();
        let mut cols = self.basis.columns();
        for c in other.basis.columns() {
            cols.push(c.iter().map(|&v| -v).collect());
        }
        let kernel = integer_kernel(d, &cols);
        let gens: Vec<IVec> = kernel
            .iter()
            .map(|k| {
                let mut v = vec![0i64; d];
                for (j, col) in self.basis.columns().iter().enumerate() {
                    for r in 0..d {
                        v[r] += k[j] * col[r];
                    }
                }
                v
            })
            .collect();
        Lattice::from_generators(d, &gens).expect("intersection of full-rank lattices")
    }

    /// Image lattice `A * self` for invertible-over-Q `A`.
    pub fn transform(&self, a: &IMat) -> Option<Lattice> {
        let gens: Vec<IVec> =
            self.basis.columns().iter().map(|c| a.mul_vec(c)).collect();
        Lattice::from_generators(self.dim(), &gens)
    }
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lattice({:?})", self.basis)
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.basis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_adjugate() {
        let m = IMat::from_rows(&[vec![1, -2], vec![2, 1]]);
        assert_eq!(m.det(), 5);
        let adj = m.adjugate();
        let prod = m.mul(&adj);
        assert_eq!(prod, IMat::diagonal(&[5, 5]));
    }

    #[test]
    fn solve_integral_divisibility() {
        let q = IMat::from_rows(&[vec![1, -2], vec![2, 1]]);
        // q * (1, 1) = (-1, 3)
        assert_eq!(q.solve_integral(&[-1, 3]), Some(vec![1, 1]));
        assert_eq!(q.solve_integral(&[1, 0]), None);
    }

    #[test]
    fn hnf_canonical() {
        // Lattice generated by (2, 0) and (1, 3): HNF should be [[1, 0], [?, ?]]...
        let h = hermite_normal_form(2, &[vec![2, 0], vec![1, 3]]).unwrap();
        // det preserved up to sign
        assert_eq!((h[(0, 0)] * h[(1, 1)]).abs(), 6);
        assert_eq!(h[(0, 1)], 0); // lower triangular
        // Any equivalent generating set yields the same form.
        let h2 = hermite_normal_form(2, &[vec![3, 3], vec![1, 3], vec![2, 0]]).unwrap();
        assert_eq!(h, h2);
    }

    #[test]
    fn lattice_membership_sum_intersection() {
        let three_by_one =
            Lattice::from_generators(2, &[vec![3, 0], vec![0, 1]]).unwrap();
        assert!(three_by_one.contains(&[3, 5]));
        assert!(!three_by_one.contains(&[2, 0]));
        assert_eq!(three_by_one.index(), 3);

        let four = Lattice::from_generators(2, &[vec![4, 0], vec![0, 4]]).unwrap();
        let sum = three_by_one.sum(&four);
        assert_eq!(sum, Lattice::standard(2));

        let inter = three_by_one.intersect(&four);
        assert_eq!(inter.index(), 48);
        assert!(inter.contains(&[12, 4]));
        assert!(!inter.contains(&[3, 4]));
    }

    #[test]
    fn kernel_of_rectangular_matrix() {
        // Columns (2,0), (0,2), (1,1): kernel contains (1,1,-2).
        let k = integer_kernel(2, &[vec![2, 0], vec![0, 2], vec![1, 1]]);
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert_eq!(2 * v[0] + v[2], 0);
        assert_eq!(2 * v[1] + v[2], 0);
    }

    #[test]
    fn expansivity() {
        assert!(IMat::diagonal(&[2]).all_eigenvalues_outside_unit_circle(1e-9));
        assert!(!IMat::diagonal(&[1]).all_eigenvalues_outside_unit_circle(1e-9));
        // Helix matrix: eigenvalues 1 ± 2i, modulus sqrt(5).
        let helix = IMat::from_rows(&[vec![1, -2], vec![2, 1]]);
        assert!(helix.all_eigenvalues_outside_unit_circle(1e-9));
        // Shear with eigenvalue 1 must be rejected.
        let shear = IMat::from_rows(&[vec![1, 1], vec![0, 2]]);
        assert!(!shear.all_eigenvalues_outside_unit_circle(1e-9));
    }
}
