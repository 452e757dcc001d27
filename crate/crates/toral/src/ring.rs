//! Exact arithmetic in Mat(d, Z/nZ): canonical residue matrices, determinants,
//! inverses, integer Smith normal form, kernel cardinalities and the group
//! order |GL(d, Z/nZ)|.
//!
//! Entries are stored as canonical residues in {0, ..., n-1}, so equality is
//! structural. The degenerate modulus n = 1 (single-point lattice) is legal
//! everywhere.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, inv_mod, mul_mod, sub_mod};
use crate::error::{Error, Result};

/// The lattice (Z/nZ)^d together with its dimension, i.e. the n-division
/// points of the d-torus in integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    d: usize,
    n: u64,
}

impl LatticeSpec {
    pub fn new(d: usize, n: u64) -> Result<Self> {
        if d < 1 || n < 1 {
            return Err(Error::InvalidLattice { d, n });
        }
        Ok(LatticeSpec { d, n })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of lattice points, n^d.
    pub fn points(&self) -> BigUint {
        BigUint::from(self.n).pow(self.d as u32)
    }

    /// n^d when it fits in a u64.
    pub fn points_u64(&self) -> Option<u64> {
        self.points().to_u64()
    }
}

/// A d x d integer matrix; the exact (characteristic-zero) side of the
/// library. Reductions mod n produce [`ResidueMatrix`] values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    d: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn new(d: usize, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != d * d || d == 0 {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: entries.len(),
            });
        }
        Ok(IntMatrix { d, entries })
    }

    pub fn from_rows(rows: &[&[i64]]) -> Result<Self> {
        let d = rows.len();
        let mut entries = Vec::with_capacity(d * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        IntMatrix::new(d, entries)
    }

    /// Parses the matrix text format: rows separated by ';', entries by ','.
    /// Ragged rows are rejected, with the byte offset of the offending row.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut width: Option<usize> = None;
        let mut pos = 0usize;
        for row in text.split(';') {
            let mut count = 0usize;
            for tok in row.split(',') {
                let t = tok.trim();
                let v: i64 = t.parse().map_err(|_| Error::Parse {
                    pos,
                    msg: format!("invalid integer entry {t:?}"),
                })?;
                entries.push(v);
                count += 1;
            }
            match width {
                None => width = Some(count),
                Some(w) if w != count => {
                    return Err(Error::Parse {
                        pos,
                        msg: format!("ragged row: expected {w} entries, got {count}"),
                    })
                }
                _ => {}
            }
            pos += row.len() + 1;
        }
        let d = width.unwrap_or(0);
        if entries.len() != d * d {
            return Err(Error::Parse {
                pos: 0,
                msg: format!("matrix is not square: {d} columns, {} rows", entries.len() / d.max(1)),
            });
        }
        IntMatrix::new(d, entries)
    }

    pub fn identity(d: usize) -> Self {
        let mut entries = vec![0i64; d * d];
        for i in 0..d {
            entries[i * d + i] = 1;
        }
        IntMatrix { d, entries }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.d + j]
    }

    pub fn trace(&self) -> i64 {
        (0..self.d).map(|i| self.get(i, i)).sum()
    }

    /// Exact determinant over Z.
    pub fn det(&self) -> BigInt {
        bigint_det(&self.lift())
    }

    /// The matrix gcd of a 2 x 2 matrix `[[a,b],[c,d]]`: gcd(b, c, d - a),
    /// a GL(2,Z)-conjugation invariant. The all-zero case yields 0, which
    /// is exactly the scalar-matrix case M = a*1.
    pub fn mgcd(&self) -> u64 {
        assert_eq!(self.d, 2, "mgcd is defined for 2 x 2 matrices");
        let b = self.get(0, 1).unsigned_abs();
        let c = self.get(1, 0).unsigned_abs();
        let da = (self.get(1, 1) - self.get(0, 0)).unsigned_abs();
        arith::gcd(arith::gcd(b, c), da)
    }

    /// Reduction mod n with canonical entries.
    pub fn reduce(&self, n: u64) -> Result<ResidueMatrix> {
        let spec = LatticeSpec::new(self.d, n)?;
        let entries = self
            .entries
            .iter()
            .map(|&e| arith::reduce_i128(e as i128, n))
            .collect();
        Ok(ResidueMatrix { spec, entries })
    }

    pub fn lift(&self) -> Vec<BigInt> {
        self.entries.iter().map(|&e| BigInt::from(e)).collect()
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.d != rhs.d {
            return Err(Error::DimensionMismatch {
                expected: self.d * self.d,
                got: rhs.d * rhs.d,
            });
        }
        let d = self.d;
        let mut out = vec![0i64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc: i128 = 0;
                for k in 0..d {
                    acc += self.get(i, k) as i128 * rhs.get(k, j) as i128;
                }
                out[i * d + j] = i64::try_from(acc).map_err(|_| Error::Overflow("IntMatrix::mul"))?;
            }
        }
        IntMatrix::new(d, out)
    }

    /// Exact integer power via BigInt entries (no overflow).
    pub fn pow_bigint(&self, e: u64) -> Vec<BigInt> {
        let d = self.d;
        let mut acc = bigint_identity(d);
        let mut base = self.lift();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = bigint_mul(&acc, &base, d);
            }
            base = bigint_mul(&base, &base, d);
            e >>= 1;
        }
        acc
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.d)
            .map(|i| {
                (0..self.d)
                    .map(|j| self.get(i, j).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

/// A d x d matrix over Z/nZ with canonically reduced entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResidueMatrix {
    spec: LatticeSpec,
    entries: Vec<u64>,
}

impl ResidueMatrix {
    /// Builds a matrix from arbitrary integers, reducing each entry mod n.
    pub fn from_i64(entries: &[i64], spec: LatticeSpec) -> Result<Self> {
        if entries.len() != spec.d * spec.d {
            return Err(Error::DimensionMismatch {
                expected: spec.d * spec.d,
                got: entries.len(),
            });
        }
        Ok(ResidueMatrix {
            spec,
            entries: entries
                .iter()
                .map(|&e| arith::reduce_i128(e as i128, spec.n))
                .collect(),
        })
    }

    pub fn from_u64(entries: Vec<u64>, spec: LatticeSpec) -> Result<Self> {
        if entries.len() != spec.d * spec.d {
            return Err(Error::DimensionMismatch {
                expected: spec.d * spec.d,
                got: entries.len(),
            });
        }
        Ok(ResidueMatrix {
            spec,
            entries: entries.into_iter().map(|e| e % spec.n).collect(),
        })
    }

    pub fn identity(spec: LatticeSpec) -> Self {
        let mut entries = vec![0u64; spec.d * spec.d];
        for i in 0..spec.d {
            entries[i * spec.d + i] = 1 % spec.n;
        }
        ResidueMatrix { spec, entries }
    }

    pub fn zero(spec: LatticeSpec) -> Self {
        ResidueMatrix {
            spec,
            entries: vec![0u64; spec.d * spec.d],
        }
    }

    pub fn scalar(a: u64, spec: LatticeSpec) -> Self {
        let mut m = ResidueMatrix::zero(spec);
        for i in 0..spec.d {
            m.entries[i * spec.d + i] = a % spec.n;
        }
        m
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn d(&self) -> usize {
        self.spec.d
    }

    pub fn n(&self) -> u64 {
        self.spec.n
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.spec.d + j]
    }

    fn check_spec(&self, rhs: &ResidueMatrix) -> Result<()> {
        if self.spec.n != rhs.spec.n {
            return Err(Error::ModulusMismatch(self.spec.n, rhs.spec.n));
        }
        if self.spec.d != rhs.spec.d {
            return Err(Error::DimensionMismatch {
                expected: self.spec.d,
                got: rhs.spec.d,
            });
        }
        Ok(())
    }

    pub fn mul(&self, rhs: &ResidueMatrix) -> Result<ResidueMatrix> {
        self.check_spec(rhs)?;
        let d = self.spec.d;
        let n = self.spec.n;
        let mut out = vec![0u64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0u64;
                for k in 0..d {
                    acc = arith::add_mod(acc, mul_mod(self.get(i, k), rhs.get(k, j), n), n);
                }
                out[i * d + j] = acc;
            }
        }
        Ok(ResidueMatrix { spec: self.spec, entries: out })
    }

    pub fn add(&self, rhs: &ResidueMatrix) -> Result<ResidueMatrix> {
        self.check_spec(rhs)?;
        let n = self.spec.n;
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(&a, &b)| arith::add_mod(a, b, n))
            .collect();
        Ok(ResidueMatrix { spec: self.spec, entries })
    }

    pub fn sub(&self, rhs: &ResidueMatrix) -> Result<ResidueMatrix> {
        self.check_spec(rhs)?;
        let n = self.spec.n;
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(&a, &b)| sub_mod(a, b, n))
            .collect();
        Ok(ResidueMatrix { spec: self.spec, entries })
    }

    pub fn scalar_mul(&self, c: u64) -> ResidueMatrix {
        let n = self.spec.n;
        ResidueMatrix {
            spec: self.spec,
            entries: self.entries.iter().map(|&a| mul_mod(a, c, n)).collect(),
        }
    }

    /// M^e by binary exponentiation; M^0 is the identity.
    pub fn pow(&self, mut e: u128) -> ResidueMatrix {
        let mut acc = ResidueMatrix::identity(self.spec);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same spec");
            }
            base = base.mul(&base).expect("same spec");
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        *self == ResidueMatrix::identity(self.spec)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// True when the matrix is a scalar multiple of the identity mod n.
    pub fn is_scalar(&self) -> bool {
        let a = self.get(0, 0);
        for i in 0..self.spec.d {
            for j in 0..self.spec.d {
                let want = if i == j { a } else { 0 };
                if self.get(i, j) != want {
                    return false;
                }
            }
        }
        true
    }

    pub fn trace(&self) -> u64 {
        let n = self.spec.n;
        (0..self.spec.d).fold(0u64, |acc, i| arith::add_mod(acc, self.get(i, i), n))
    }

    /// Determinant mod n (exact integer determinant of the canonical lift,
    /// reduced). Dimensions 1-3 are computed in machine words.
    pub fn det(&self) -> u64 {
        let n = self.spec.n;
        match self.spec.d {
            1 => self.entries[0] % n,
            2 => sub_mod(
                mul_mod(self.get(0, 0), self.get(1, 1), n),
                mul_mod(self.get(0, 1), self.get(1, 0), n),
                n,
            ),
            3 => {
                let m = |i: usize, j: usize| self.get(i, j);
                let term = |a: u64, b: u64, c: u64| mul_mod(mul_mod(a, b, n), c, n);
                let pos = arith::add_mod(
                    arith::add_mod(
                        term(m(0, 0), m(1, 1), m(2, 2)),
                        term(m(0, 1), m(1, 2), m(2, 0)),
                        n,
                    ),
                    term(m(0, 2), m(1, 0), m(2, 1)),
                    n,
                );
                let neg = arith::add_mod(
                    arith::add_mod(
                        term(m(0, 2), m(1, 1), m(2, 0)),
                        term(m(0, 0), m(1, 2), m(2, 1)),
                        n,
                    ),
                    term(m(0, 1), m(1, 0), m(2, 2)),
                    n,
                );
                sub_mod(pos, neg, n)
            }
            _ => bigint_mod_u64(&bigint_det(&self.lift()), n),
        }
    }

    /// The matrix is a unit in Mat(d, Z/nZ) iff its determinant is a unit.
    pub fn is_invertible(&self) -> bool {
        arith::gcd(self.det(), self.spec.n) == 1
    }

    /// Inverse mod n, or `None` when det is not a unit.
    ///
    /// d = 2 goes through the adjugate; larger d through integer row
    /// reduction on [M | 1] where each pivot is made a unit by extended-gcd
    /// row combinations (a unit pivot always exists since det is a unit).
    #[allow(clippy::needless_range_loop)]
    pub fn inverse(&self) -> Option<ResidueMatrix> {
        let n = self.spec.n;
        let d = self.spec.d;
        let det = self.det();
        let det_inv = inv_mod(det, n)?;
        if d == 1 {
            return Some(ResidueMatrix { spec: self.spec, entries: vec![det_inv] });
        }
        if d == 2 {
            let (a, b, c, dd) = (self.get(0, 0), self.get(0, 1), self.get(1, 0), self.get(1, 1));
            let adj = [dd, n - b % n, n - c % n, a];
            let entries = adj.iter().map(|&x| mul_mod(x % n, det_inv, n)).collect();
            return Some(ResidueMatrix { spec: self.spec, entries });
        }
        // Augmented system [M | I] over Z/nZ.
        let mut a: Vec<Vec<u64>> = (0..d)
            .map(|i| {
                let mut row: Vec<u64> = (0..d).map(|j| self.get(i, j)).collect();
                row.extend((0..d).map(|j| if i == j { 1 % n } else { 0 }));
                row
            })
            .collect();
        for col in 0..d {
            // Fold rows below into the pivot row with unimodular 2-row
            // transforms until the pivot is the gcd of the column entries;
            // that gcd is coprime to n because det is.
            for r in col + 1..d {
                if arith::gcd(a[col][col], n) == 1 {
                    break;
                }
                let (pa, pb) = (a[col][col], a[r][col]);
                let (g, x, y) = arith::xgcd(pa as i128, pb as i128);
                if g == 0 {
                    continue;
                }
                // [[x, y], [-pb/g, pa/g]] has determinant 1.
                let (x, y) = (arith::reduce_i128(x, n), arith::reduce_i128(y, n));
                let u = arith::reduce_i128(-(pb as i128 / g), n);
                let v = arith::reduce_i128(pa as i128 / g, n);
                for j in 0..2 * d {
                    let (s, t) = (a[col][j], a[r][j]);
                    a[col][j] = arith::add_mod(mul_mod(x, s, n), mul_mod(y, t, n), n);
                    a[r][j] = arith::add_mod(mul_mod(u, s, n), mul_mod(v, t, n), n);
                }
            }
            let piv_inv = inv_mod(a[col][col], n)?;
            for j in 0..2 * d {
                a[col][j] = mul_mod(a[col][j], piv_inv, n);
            }
            for r in 0..d {
                if r == col || a[r][col] == 0 {
                    continue;
                }
                let f = a[r][col];
                for j in 0..2 * d {
                    a[r][j] = sub_mod(a[r][j], mul_mod(f, a[col][j], n), n);
                }
            }
        }
        let entries = (0..d)
            .flat_map(|i| a[i][d..2 * d].to_vec())
            .collect();
        Some(ResidueMatrix { spec: self.spec, entries })
    }

    /// Applies the matrix to a column vector of residues.
    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        let d = self.spec.d;
        let n = self.spec.n;
        (0..d)
            .map(|i| {
                (0..d).fold(0u64, |acc, j| {
                    arith::add_mod(acc, mul_mod(self.get(i, j), x[j] % n, n), n)
                })
            })
            .collect()
    }

    /// Reduction mod k for k | n (entry-wise).
    pub fn reduce_mod(&self, k: u64) -> Result<ResidueMatrix> {
        if k == 0 || !self.spec.n.is_multiple_of(k) {
            return Err(Error::Precondition(format!(
                "{k} does not divide the modulus {}",
                self.spec.n
            )));
        }
        let spec = LatticeSpec::new(self.spec.d, k)?;
        Ok(ResidueMatrix {
            spec,
            entries: self.entries.iter().map(|&e| e % k).collect(),
        })
    }

    /// Canonical integer lift with entries in {0, ..., n-1}.
    pub fn lift(&self) -> Vec<BigInt> {
        self.entries.iter().map(|&e| BigInt::from(e)).collect()
    }

    pub fn lift_int(&self) -> IntMatrix {
        IntMatrix {
            d: self.spec.d,
            entries: self.entries.iter().map(|&e| e as i64).collect(),
        }
    }
}

impl fmt::Display for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.spec.d;
        let rows: Vec<String> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| self.get(i, j).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

// ---------------------------------------------------------------------------
// BigInt helpers for exact d x d linear algebra
// ---------------------------------------------------------------------------

pub(crate) fn bigint_identity(d: usize) -> Vec<BigInt> {
    let mut m = vec![BigInt::zero(); d * d];
    for i in 0..d {
        m[i * d + i] = BigInt::one();
    }
    m
}

pub(crate) fn bigint_mul(a: &[BigInt], b: &[BigInt], d: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); d * d];
    for i in 0..d {
        for k in 0..d {
            if a[i * d + k].is_zero() {
                continue;
            }
            for j in 0..d {
                let t = &a[i * d + k] * &b[k * d + j];
                out[i * d + j] += t;
            }
        }
    }
    out
}

/// Fraction-free (Bareiss) determinant of a square BigInt matrix.
pub(crate) fn bigint_det(m: &[BigInt]) -> BigInt {
    let d = (m.len() as f64).sqrt() as usize;
    debug_assert_eq!(d * d, m.len());
    let mut a: Vec<Vec<BigInt>> = (0..d).map(|i| m[i * d..(i + 1) * d].to_vec()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..d {
        if a[k][k].is_zero() {
            match (k + 1..d).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = &t / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * a[d - 1][d - 1].clone()
}

pub(crate) fn bigint_mod_u64(x: &BigInt, n: u64) -> u64 {
    let m = x.mod_floor(&BigInt::from(n));
    m.to_u64().expect("residue fits")
}

// ---------------------------------------------------------------------------
// Smith normal form
// ---------------------------------------------------------------------------

/// The diagonal of an integer Smith normal form: non-negative, with the
/// divisibility chain d_1 | d_2 | ... and zeros only at the tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithProfile {
    diagonal: Vec<BigUint>,
}

impl SmithProfile {
    pub fn diagonal(&self) -> &[BigUint] {
        &self.diagonal
    }

    pub fn diagonal_u64(&self) -> Option<Vec<u64>> {
        self.diagonal.iter().map(|x| x.to_u64()).collect()
    }
}

/// Full SNF data: `lhs_inv * S * rhs_inv = A`, i.e. S = L A R with
/// unimodular L, R, `lhs_inv = L^{-1}` and `rhs = R`.
///
/// Solutions of A x = 0 mod n are x = R y with s_i y_i = 0 mod n;
/// the image of A mod n is spanned by s_i * (column i of L^{-1}).
pub(crate) struct SmithDecomposition {
    pub diag: Vec<BigInt>,
    pub lhs_inv: Vec<Vec<BigInt>>, // columns indexed second: lhs_inv[i][j] = (L^{-1})_{ij}
    pub rhs: Vec<Vec<BigInt>>,     // rhs[i][j] = R_{ij}
}

/// Smith normal form of a square integer matrix.
pub fn smith_normal_form(m: &IntMatrix) -> SmithProfile {
    let s = smith_decompose(&m.lift(), m.d());
    SmithProfile {
        diagonal: s.diag.iter().map(|x| x.magnitude().clone()).collect(),
    }
}

#[allow(clippy::needless_range_loop)]
pub(crate) fn smith_decompose(m: &[BigInt], d: usize) -> SmithDecomposition {
    let mut a: Vec<Vec<BigInt>> = (0..d).map(|i| m[i * d..(i + 1) * d].to_vec()).collect();
    let mut linv: Vec<Vec<BigInt>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut r = linv.clone();

    // Row op A <- E A mirrors as L^{-1} <- L^{-1} E^{-1} (column ops on linv);
    // column op A <- A F mirrors as R <- R F.
    fn row_swap(a: &mut [Vec<BigInt>], linv: &mut [Vec<BigInt>], i: usize, j: usize, d: usize) {
        a.swap(i, j);
        for row in linv.iter_mut().take(d) {
            row.swap(i, j);
        }
    }
    fn col_swap(a: &mut [Vec<BigInt>], r: &mut [Vec<BigInt>], i: usize, j: usize, d: usize) {
        for row in a.iter_mut().take(d) {
            row.swap(i, j);
        }
        for row in r.iter_mut().take(d) {
            row.swap(i, j);
        }
    }
    // row_i += q * row_j  =>  linv col_j -= q * col_i
    fn row_add(a: &mut [Vec<BigInt>], linv: &mut [Vec<BigInt>], i: usize, j: usize, q: &BigInt, d: usize) {
        for t in 0..d {
            let v = &a[j][t] * q;
            a[i][t] += v;
        }
        for row in linv.iter_mut().take(d) {
            let v = &row[i] * q;
            row[j] -= v;
        }
    }
    // col_i += q * col_j  =>  r col_i += q * col_j
    fn col_add(a: &mut [Vec<BigInt>], r: &mut [Vec<BigInt>], i: usize, j: usize, q: &BigInt, d: usize) {
        for t in 0..d {
            let v = &a[t][j] * q;
            a[t][i] += v;
            let w = &r[t][j] * q;
            r[t][i] += w;
        }
    }
    fn row_negate(a: &mut [Vec<BigInt>], linv: &mut [Vec<BigInt>], i: usize, d: usize) {
        for t in 0..d {
            let v = -a[i][t].clone();
            a[i][t] = v;
        }
        for row in linv.iter_mut().take(d) {
            let v = -row[i].clone();
            row[i] = v;
        }
    }

    for t in 0..d {
        'pivot: loop {
            // Smallest nonzero |entry| in the trailing block.
            let mut best: Option<(usize, usize)> = None;
            for i in t..d {
                for j in t..d {
                    if !a[i][j].is_zero()
                        && best
                            .map(|(bi, bj)| a[i][j].magnitude() < a[bi][bj].magnitude())
                            .unwrap_or(true)
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                break 'pivot; // trailing block all zero
            };
            if bi != t {
                row_swap(&mut a, &mut linv, t, bi, d);
            }
            if bj != t {
                col_swap(&mut a, &mut r, t, bj, d);
            }
            let mut dirty = false;
            for i in t + 1..d {
                if a[i][t].is_zero() {
                    continue;
                }
                // Truncated quotient leaves |remainder| < |pivot|.
                let q = -(&a[i][t] / &a[t][t]);
                if !q.is_zero() {
                    row_add(&mut a, &mut linv, i, t, &q, d);
                }
                if !a[i][t].is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..d {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = -(&a[t][j] / &a[t][t]);
                if !q.is_zero() {
                    col_add(&mut a, &mut r, j, t, &q, d);
                }
                if !a[t][j].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                continue 'pivot;
            }
            // Divisibility fix-up: fold a non-divisible entry into row t.
            for i in t + 1..d {
                for j in t + 1..d {
                    if !(&a[i][j] % &a[t][t]).is_zero() {
                        row_add(&mut a, &mut linv, t, i, &BigInt::one(), d);
                        continue 'pivot;
                    }
                }
            }
            break 'pivot;
        }
        if a[t][t].is_negative() {
            row_negate(&mut a, &mut linv, t, d);
        }
    }

    SmithDecomposition {
        diag: (0..d).map(|i| a[i][i].clone()).collect(),
        lhs_inv: linv,
        rhs: r,
    }
}

/// |ker(A)| on (Z/nZ)^d: the product of gcd(d_i, n) over the Smith invariants
/// of an integer lift, with gcd(0, n) = n.
pub fn kernel_size(a: &ResidueMatrix) -> BigUint {
    let n = a.n();
    let s = smith_decompose(&a.lift(), a.d());
    let nn = BigInt::from(n);
    s.diag
        .iter()
        .map(|di| di.gcd(&nn).magnitude().clone())
        .product()
}

/// |GL(d, Z/nZ)| = n^{d^2} prod_p |GL(d, F_p)| / p^{d^2}
///               = prod_{p^r || n} p^{(r-1) d^2} |GL(d, F_p)|.
pub fn gl_order(d: usize, n: u64) -> BigUint {
    assert!(d >= 1 && n >= 1);
    let mut acc = BigUint::one();
    for (p, r) in arith::factor(n) {
        let pb = BigUint::from(p);
        acc *= pb.pow((r - 1) * (d * d) as u32);
        acc *= gl_order_fp(d, p);
    }
    acc
}

/// |GL(d, F_p)| = (p^d - 1)(p^d - p) ... (p^d - p^{d-1}).
pub fn gl_order_fp(d: usize, p: u64) -> BigUint {
    let pd = BigUint::from(p).pow(d as u32);
    let mut acc = BigUint::one();
    for i in 0..d {
        acc *= &pd - BigUint::from(p).pow(i as u32);
    }
    acc
}

// ---------------------------------------------------------------------------
// Solution modules of linear systems A x = 0 over Z/nZ
// ---------------------------------------------------------------------------

/// The solution set {x in (Z/nZ)^k : A x = 0}, parametrised through the SNF
/// of A: x = sum_i t_i * (n / g_i) * (column i of R), 0 <= t_i < g_i.
pub(crate) struct SolutionModule {
    pub n: u64,
    k: usize,
    gens: Vec<Vec<u64>>, // scaled generator columns
    counts: Vec<u64>,    // g_i > 1 only
}

impl SolutionModule {
    /// Kernel of the k x k integer operator `a` over Z/nZ.
    pub fn kernel(a: &[BigInt], k: usize, n: u64) -> SolutionModule {
        let s = smith_decompose(a, k);
        let nn = BigInt::from(n);
        let mut gens = Vec::new();
        let mut counts = Vec::new();
        for i in 0..k {
            let g = s.diag[i].gcd(&nn).to_u64().expect("divides n");
            if g <= 1 {
                continue;
            }
            let scale = BigInt::from(n / g);
            let col: Vec<u64> = (0..k)
                .map(|row| bigint_mod_u64(&(&s.rhs[row][i] * &scale), n))
                .collect();
            gens.push(col);
            counts.push(g);
        }
        SolutionModule { n, k, gens, counts }
    }

    pub fn size(&self) -> BigUint {
        self.counts.iter().map(|&g| BigUint::from(g)).product()
    }

    /// Iterates over every solution, starting from 0, in odometer order.
    pub fn iter(&self) -> SolutionIter<'_> {
        SolutionIter {
            module: self,
            odo: vec![0; self.counts.len()],
            current: Some(vec![0u64; self.k]),
        }
    }
}

pub(crate) struct SolutionIter<'a> {
    module: &'a SolutionModule,
    odo: Vec<u64>,
    current: Option<Vec<u64>>,
}

impl<'a> Iterator for SolutionIter<'a> {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.current.take()?;
        // Advance the odometer and incrementally update the point.
        let m = self.module;
        let mut next = out.clone();
        let mut pos = 0usize;
        loop {
            if pos == m.counts.len() {
                self.current = None;
                return Some(out);
            }
            self.odo[pos] += 1;
            for (x, g) in next.iter_mut().zip(&m.gens[pos]) {
                *x = arith::add_mod(*x, *g, m.n);
            }
            if self.odo[pos] < m.counts[pos] {
                break;
            }
            // roll over: subtract the g_i copies added since the last reset
            self.odo[pos] = 0;
            let back = m.counts[pos] % m.n;
            for (x, g) in next.iter_mut().zip(&m.gens[pos]) {
                *x = sub_mod(*x, mul_mod(back, *g, m.n), m.n);
            }
            pos += 1;
        }
        self.current = Some(next);
        Some(out)
    }
}
