//! Equivariant harmonic spaces H_N^m as spaces of bidegree (p, q) harmonic polynomials.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Tag identifying the monomial normalization stored in basis caches.
pub const NORMALIZATION_TAG: &str = "gauss-2pi2";
const CACHE_MAGIC: &[u8; 4] = b"S3HB";
const CACHE_VERSION: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bidegree {
    pub p: u32,
    pub q: u32,
}

impl Bidegree {
    pub fn new(p: u32, q: u32) -> Self {
        Bidegree { p, q }
    }

    /// `p = (N+m)/2`, `q = (N−m)/2`; fails when H_N^m is trivial.
    pub fn from_nm(n: u32, m: i32) -> Result<Self> {
        if !is_nonempty(n, m) {
            return Err(Error::EmptySpace { n, m });
        }
        let n = n as i64;
        let m = m as i64;
        Ok(Bidegree {
            p: ((n + m) / 2) as u32,
            q: ((n - m) / 2) as u32,
        })
    }

    pub fn n(&self) -> u32 {
        self.p + self.q
    }

    pub fn m(&self) -> i32 {
        self.p as i32 - self.q as i32
    }

    /// Number of bidegree-(p, q) monomials.
    pub fn monomial_count(&self) -> usize {
        (self.p as usize + 1) * (self.q as usize + 1)
    }

    /// Index of `z1^a1 z2^(p−a1) z̄1^b1 z̄2^(q−b1)` in coefficient vectors.
    pub fn index(&self, a1: u32, b1: u32) -> usize {
        a1 as usize * (self.q as usize + 1) + b1 as usize
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        let mut out = Vec::with_capacity(self.monomial_count());
        for a1 in 0..=self.p {
            for b1 in 0..=self.q {
                out.push(Monomial {
                    alpha: [a1, self.p - a1],
                    beta: [b1, self.q - b1],
                });
            }
        }
        out
    }
}

pub fn is_nonempty(n: u32, m: i32) -> bool {
    m.unsigned_abs() <= n && (n as i64 - m as i64) % 2 == 0
}

/// dim H_N^m.
pub fn dimension(n: u32, m: i32) -> usize {
    if is_nonempty(n, m) {
        n as usize + 1
    } else {
        0
    }
}

/// `z^alpha z̄^beta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub alpha: [u32; 2],
    pub beta: [u32; 2],
}

impl Monomial {
    /// Squared L²(S³) norm; |z^α z̄^β|² = |z^(α+β)|².
    pub fn norm_sqr(&self) -> f64 {
        let g = [self.alpha[0] + self.beta[0], self.alpha[1] + self.beta[1]];
        monomial_inner_product(g, g)
    }
}

/// ⟨z^α z̄^β, z^α' z̄^β'⟩ on S³ = ∫ z^(α+β') z̄^(β+α') dV.
///
/// Nonzero exactly when α₁ − β₁ = α₁' − β₁', so distinct monomials need not be orthogonal.
pub fn monomial_pair_inner_product(x: &Monomial, y: &Monomial) -> f64 {
    let a = [x.alpha[0] + y.beta[0], x.alpha[1] + y.beta[1]];
    let b = [x.beta[0] + y.alpha[0], x.beta[1] + y.alpha[1]];
    monomial_inner_product(a, b)
}

/// Exact Gram matrix of the bidegree-(p, q) monomials, in [`Bidegree::monomials`] order.
pub fn gram_matrix(bd: Bidegree) -> DMatrix<f64> {
    let mono = bd.monomials();
    DMatrix::from_fn(mono.len(), mono.len(), |i, j| {
        monomial_pair_inner_product(&mono[i], &mono[j])
    })
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// ∫_{S³} z^a z̄^b dV for the unnormalized surface measure (total volume 2π²).
pub fn monomial_inner_product(a: [u32; 2], b: [u32; 2]) -> f64 {
    if a != b {
        return 0.0;
    }
    2.0 * PI * PI * factorial(a[0]) * factorial(a[1]) / factorial(a[0] + a[1] + 1)
}

/// The alternative constant `2π·a!/(|a|+2)!` sometimes quoted for the same integral.
///
/// Kept for reporting only; it does not give Vol(S³) at a = 0.
pub fn quoted_monomial_norm_sqr(a: [u32; 2]) -> f64 {
    2.0 * PI * factorial(a[0]) * factorial(a[1]) / factorial(a[0] + a[1] + 2)
}

/// Sparse matrix `(row, col, value)` of the map z^α z̄^β ↦ 4 Σ_j α_j β_j z^(α−e_j) z̄^(β−e_j),
/// from bidegree (p, q) coefficients to bidegree (p−1, q−1) coefficients.
#[derive(Clone, Debug)]
pub struct LaplacianConstraint {
    pub source: Bidegree,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl LaplacianConstraint {
    pub fn apply(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for &(r, k, v) in &self.entries {
            out[r] += v * c[k];
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, k, v) in &self.entries {
            m[(r, k)] += v;
        }
        m
    }

    /// Output bidegree, or `None` when the map has no rows.
    pub fn target(&self) -> Option<Bidegree> {
        (self.source.p > 0 && self.source.q > 0).then(|| Bidegree::new(self.source.p - 1, self.source.q - 1))
    }

    /// Componentwise backward error max_i |(Mc)_i| / (|M||c|)_i, in floating point.
    ///
    /// Monomial coefficients of unit-norm harmonics span many orders of magnitude, so an
    /// absolute residual is dominated by the rounding of `c` itself.
    pub fn residual(&self, c: &[f64]) -> f64 {
        let mut num = vec![0.0; self.rows];
        let mut den = vec![0.0; self.rows];
        for &(r, k, v) in &self.entries {
            num[r] += v * c[k];
            den[r] += (v * c[k]).abs();
        }
        num.iter()
            .zip(&den)
            .filter(|(_, d)| **d > 0.0)
            .map(|(n, d)| n.abs() / d)
            .fold(0.0, f64::max)
    }

    /// L²(S³) norm of Δ_ℝ⁴ P for the polynomial P with coefficients `c`, in floating point.
    pub fn absolute_residual(&self, c: &[f64]) -> f64 {
        let Some(t) = self.target() else { return 0.0 };
        let r = nalgebra::DVector::from_vec(self.apply(c));
        (r.transpose() * gram_matrix(t) * &r)[(0, 0)].max(0.0).sqrt()
    }
}

pub fn laplacian_constraint(bd: Bidegree) -> LaplacianConstraint {
    let (p, q) = (bd.p, bd.q);
    let cols = bd.monomial_count();
    if p == 0 || q == 0 {
        return LaplacianConstraint {
            source: bd,
            rows: 0,
            cols,
            entries: Vec::new(),
        };
    }
    let target = Bidegree::new(p - 1, q - 1);
    let mut entries = Vec::new();
    for mo in bd.monomials() {
        let col = bd.index(mo.alpha[0], mo.beta[0]);
        let (a, b) = (mo.alpha, mo.beta);
        if a[0] > 0 && b[0] > 0 {
            entries.push((target.index(a[0] - 1, b[0] - 1), col, 4.0 * (a[0] * b[0]) as f64));
        }
        if a[1] > 0 && b[1] > 0 {
            entries.push((target.index(a[0], b[0]), col, 4.0 * (a[1] * b[1]) as f64));
        }
    }
    LaplacianConstraint {
        source: bd,
        rows: target.monomial_count(),
        cols,
        entries,
    }
}

/// L²(S³)-orthonormal basis of H_N^(p,q) as real coefficient vectors over
/// [`Bidegree::monomials`].
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicSpaceBasis {
    pub bidegree: Bidegree,
    pub vectors: Vec<Vec<f64>>,
}

impl HarmonicSpaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Gram matrix of the basis under the exact S³ inner product.
    pub fn gram(&self) -> DMatrix<f64> {
        let g = gram_matrix(self.bidegree);
        let d = self.dim();
        let v = DMatrix::from_fn(self.bidegree.monomial_count(), d, |i, k| self.vectors[k][i]);
        v.transpose() * g * v
    }
}

/// Builds the basis for (N, m).
pub fn build_basis_nm(n: u32, m: i32) -> Result<HarmonicSpaceBasis> {
    build_basis(Bidegree::from_nm(n, m)?)
}

/// Null space of the Laplacian constraint, orthonormalized against the exact Gram matrix.
///
/// The constraint and the Gram matrix both preserve `k = α1 − β1`, so the problem splits
/// into N+1 mutually orthogonal blocks. Each block of the constraint is bidiagonal with
/// a one-dimensional kernel, solved by back-substitution:
/// `c_{j+1} = −a₂b₂ / ((a₁+1)(b₁+1)) · c_j` along the block.
/// On S³ a block polynomial is z-phase · Q(|z1|²) with Q(t) = Σ c_j t^j (1−t)^(n−j) a Jacobi
/// polynomial P_n^(|k|, |m−k|)(1 − 2t), whose norm has a closed form free of cancellation.
pub fn build_basis(bd: Bidegree) -> Result<HarmonicSpaceBasis> {
    let (p, q) = (bd.p as i64, bd.q as i64);
    let mut vectors = Vec::with_capacity(bd.n() as usize + 1);
    for k in -q..=p {
        let b_lo = 0.max(-k);
        let b_hi = q.min(p - k);
        let cols: Vec<(u32, u32)> = (b_lo..=b_hi).map(|b1| ((b1 + k) as u32, b1 as u32)).collect();
        let mut raw = Vec::with_capacity(cols.len());
        raw.push(1.0f64);
        for &(a1, b1) in &cols[..cols.len() - 1] {
            let (a2, b2) = (bd.p - a1, bd.q - b1);
            let prev = *raw.last().expect("nonempty");
            raw.push(-prev * (a2 as f64 * b2 as f64) / ((a1 as f64 + 1.0) * (b1 as f64 + 1.0)));
        }
        let n = (cols.len() - 1) as u32;
        let alpha = k.unsigned_abs() as u32;
        let beta = (p - q - k).unsigned_abs() as u32;
        // c_0 = 1 is P_n^(α,β) divided by C(n+α, n).
        let lead = binomial(n + alpha, n);
        let norm_sqr = 2.0 * PI * PI * jacobi_weighted_norm_sqr(n, alpha, beta) / (lead * lead);
        let scale = 1.0 / norm_sqr.sqrt();
        let mut pivot = 0;
        for (j, x) in raw.iter().enumerate() {
            if x.abs() > raw[pivot].abs() * (1.0 + 1e-12) {
                pivot = j;
            }
        }
        let scale = scale * raw[pivot].signum();
        let mut c = vec![0.0; bd.monomial_count()];
        for (&(a1, b1), r) in cols.iter().zip(&raw) {
            c[bd.index(a1, b1)] = r * scale;
        }
        vectors.push(c);
    }
    Ok(HarmonicSpaceBasis { bidegree: bd, vectors })
}

fn binomial(n: u32, k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

/// ∫₀¹ t^α (1−t)^β P_n^(α,β)(1−2t)² dt = Γ(n+α+1)Γ(n+β+1) / ((2n+α+β+1) n! Γ(n+α+β+1)).
fn jacobi_weighted_norm_sqr(n: u32, alpha: u32, beta: u32) -> f64 {
    factorial(n + alpha) * factorial(n + beta)
        / ((2 * n + alpha + beta + 1) as f64 * factorial(n) * factorial(n + alpha + beta))
}

/// Exact checks of stored (floating point) basis vectors in rational arithmetic.
pub mod exact {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{Signed, ToPrimitive, Zero};

    fn rat(x: f64) -> BigRational {
        BigRational::from_float(x).expect("finite coefficient")
    }

    fn int_factorial(n: u32) -> BigInt {
        (1..=n).fold(BigInt::from(1), |acc, k| acc * k)
    }

    /// ∫ z^a z̄^b dV / (2π²) as an exact rational.
    fn reduced_inner_product(a: [u32; 2], b: [u32; 2]) -> BigRational {
        if a != b {
            return BigRational::zero();
        }
        BigRational::new(
            int_factorial(a[0]) * int_factorial(a[1]),
            int_factorial(a[0] + a[1] + 1),
        )
    }

    /// Largest entry of |Gram − I| for the stored vectors, with the Gram matrix evaluated exactly.
    ///
    /// Only the factor 2π² is applied in floating point.
    pub fn gram_defect(basis: &HarmonicSpaceBasis) -> f64 {
        let monos = basis.bidegree.monomials();
        let coeffs: Vec<Vec<BigRational>> = basis
            .vectors
            .iter()
            .map(|v| v.iter().map(|&x| rat(x)).collect())
            .collect();
        let mut pairs = Vec::new();
        for (i, x) in monos.iter().enumerate() {
            for (j, y) in monos.iter().enumerate() {
                let a = [x.alpha[0] + y.beta[0], x.alpha[1] + y.beta[1]];
                let b = [x.beta[0] + y.alpha[0], x.beta[1] + y.alpha[1]];
                if a == b {
                    pairs.push((i, j, reduced_inner_product(a, b)));
                }
            }
        }
        let mut worst = 0.0f64;
        for (k, ck) in coeffs.iter().enumerate() {
            for (l, cl) in coeffs.iter().enumerate() {
                let mut acc = BigRational::zero();
                for (i, j, g) in &pairs {
                    if !ck[*i].is_zero() && !cl[*j].is_zero() {
                        acc += &ck[*i] * &cl[*j] * g;
                    }
                }
                let value = 2.0 * PI * PI * acc.to_f64().expect("finite");
                let target = if k == l { 1.0 } else { 0.0 };
                worst = worst.max((value - target).abs());
            }
        }
        worst
    }

    /// Componentwise backward error max_i |(Mc)_i| / (|M||c|)_i of the constraint map,
    /// evaluated exactly for each stored vector; the worst over the basis.
    pub fn constraint_backward_error(basis: &HarmonicSpaceBasis) -> f64 {
        let con = laplacian_constraint(basis.bidegree);
        let mut worst = 0.0f64;
        for v in &basis.vectors {
            let c: Vec<BigRational> = v.iter().map(|&x| rat(x)).collect();
            let mut num = vec![BigRational::zero(); con.rows];
            let mut den = vec![BigRational::zero(); con.rows];
            for &(r, k, w) in &con.entries {
                let t = rat(w) * &c[k];
                den[r] += t.abs();
                num[r] += t;
            }
            for (n, d) in num.iter().zip(&den) {
                if !d.is_zero() {
                    worst = worst.max((n.abs() / d).to_f64().expect("finite"));
                }
            }
        }
        worst
    }
}

fn cache_path(dir: &Path, bd: Bidegree) -> PathBuf {
    dir.join(format!("basis_N{}_m{}_{}.bin", bd.n(), bd.m(), NORMALIZATION_TAG))
}

pub fn write_basis<W: Write>(basis: &HarmonicSpaceBasis, mut w: W) -> Result<()> {
    w.write_all(CACHE_MAGIC)?;
    w.write_u32::<LittleEndian>(CACHE_VERSION)?;
    w.write_u32::<LittleEndian>(basis.bidegree.p)?;
    w.write_u32::<LittleEndian>(basis.bidegree.q)?;
    w.write_u32::<LittleEndian>(NORMALIZATION_TAG.len() as u32)?;
    w.write_all(NORMALIZATION_TAG.as_bytes())?;
    w.write_u32::<LittleEndian>(basis.vectors.len() as u32)?;
    for v in &basis.vectors {
        w.write_u32::<LittleEndian>(v.len() as u32)?;
        for &x in v {
            w.write_f64::<LittleEndian>(x)?;
        }
    }
    Ok(())
}

pub fn read_basis<R: Read>(mut r: R, expected: Bidegree) -> Result<HarmonicSpaceBasis> {
    let bad = |what: &str| Error::Cache(format!("basis cache: {what}"));
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(bad("bad magic"));
    }
    if r.read_u32::<LittleEndian>()? != CACHE_VERSION {
        return Err(bad("unsupported version"));
    }
    let bd = Bidegree::new(r.read_u32::<LittleEndian>()?, r.read_u32::<LittleEndian>()?);
    if bd != expected {
        return Err(bad("bidegree mismatch"));
    }
    let tag_len = r.read_u32::<LittleEndian>()? as usize;
    let mut tag = vec![0u8; tag_len];
    r.read_exact(&mut tag)?;
    if tag != NORMALIZATION_TAG.as_bytes() {
        return Err(bad("normalization tag mismatch"));
    }
    let count = r.read_u32::<LittleEndian>()? as usize;
    if count != bd.n() as usize + 1 {
        return Err(bad("wrong vector count"));
    }
    let mut vectors = Vec::with_capacity(count);
    for _ in 0..count {
        let len = r.read_u32::<LittleEndian>()? as usize;
        if len != bd.monomial_count() {
            return Err(bad("wrong vector length"));
        }
        let mut v = Vec::with_capacity(len);
        for _ in 0..len {
            v.push(r.read_f64::<LittleEndian>()?);
        }
        vectors.push(v);
    }
    Ok(HarmonicSpaceBasis { bidegree: bd, vectors })
}

/// Loads the basis from `dir` if a valid cache file exists, else builds and stores it.
pub fn load_or_build(dir: &Path, bd: Bidegree) -> Result<HarmonicSpaceBasis> {
    let path = cache_path(dir, bd);
    if let Ok(f) = File::open(&path) {
        if let Ok(b) = read_basis(BufReader::new(f), bd) {
            return Ok(b);
        }
    }
    let basis = build_basis(bd)?;
    std::fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write_basis(&basis, &mut w)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, &path)?;
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use crate::quadrature::adaptive_simpson;

    #[test]
    fn inner_product_examples() {
        assert_relative_eq!(
            monomial_inner_product([0, 0], [0, 0]),
            2.0 * PI * PI,
            max_relative = 1e-15
        );
        assert_eq!(monomial_inner_product([1, 0], [0, 1]), 0.0);
        // ∫_{C²}|z1 z2|² e^{−|Z|²} dL factors into two radial integrals; the radial
        // part of the Gaussian integral contributes ½·Γ(|a|+2) = ½·3!.
        let radial = adaptive_simpson(|r: f64| 2.0 * PI * r.powi(3) * (-r * r).exp(), 0.0, 40.0, 1e-14);
        let oracle = radial * radial / (0.5 * 6.0);
        assert_relative_eq!(monomial_inner_product([1, 1], [1, 1]), oracle, max_relative = 1e-12);
    }

    #[test]
    fn quoted_constant_differs_at_the_constant_monomial() {
        assert_relative_eq!(quoted_monomial_norm_sqr([0, 0]), PI);
        assert!((quoted_monomial_norm_sqr([0, 0]) - 2.0 * PI * PI).abs() > 1.0);
    }

    #[test]
    fn monomials_with_equal_weight_pairs_are_not_orthogonal() {
        // ⟨|z1|², |z2|²⟩ = ∫|z1 z2|² = π²/3.
        let bd = Bidegree::new(1, 1);
        let g = gram_matrix(bd);
        assert_relative_eq!(g[(bd.index(1, 1), bd.index(0, 0))], PI * PI / 3.0, max_relative = 1e-15);
        assert_eq!(g[(bd.index(1, 0), bd.index(0, 0))], 0.0);
        assert!(g.clone().cholesky().is_some());
    }

    #[test]
    fn constraint_examples() {
        let c = laplacian_constraint(Bidegree::new(3, 0));
        assert_eq!((c.rows, c.cols, c.entries.len()), (0, 4, 0));
        let c = laplacian_constraint(Bidegree::new(1, 1));
        assert_eq!((c.rows, c.cols), (1, 4));
        let dense = c.to_dense();
        assert_eq!(dense.rank(1e-10), 1);
        let c = laplacian_constraint(Bidegree::new(2, 1));
        assert_eq!((c.rows, c.cols), (2, 6));
        let sv = c.to_dense().singular_values();
        assert_eq!(sv.iter().filter(|&&s| s > 1e-10).count(), 2);
    }

    #[test]
    fn constraint_is_the_euclidean_laplacian() {
        // Δ(|z1|²|z2|²) = 4(|z2|² + |z1|²) in bidegree (1,1).
        let bd = Bidegree::new(2, 2);
        let c = laplacian_constraint(bd);
        let mut v = vec![0.0; bd.monomial_count()];
        v[bd.index(1, 1)] = 1.0;
        let out = c.apply(&v);
        let t = Bidegree::new(1, 1);
        assert_eq!(out[t.index(0, 0)], 4.0);
        assert_eq!(out[t.index(1, 1)], 4.0);
        assert_eq!(out.iter().filter(|&&x| x != 0.0).count(), 2);
    }

    #[test]
    fn basis_examples() {
        let b = build_basis_nm(1, 1).unwrap();
        assert_eq!(b.dim(), 2);
        // Unit multiples of z2 and z1.
        let s = (1.0 / (PI * PI)).sqrt();
        assert_relative_eq!(b.vectors[0][0], s, max_relative = 1e-14);
        assert_relative_eq!(b.vectors[1][1], s, max_relative = 1e-14);
        assert!(matches!(build_basis_nm(2, 1), Err(Error::EmptySpace { .. })));
        let b = build_basis_nm(2, 0).unwrap();
        assert_eq!(b.dim(), 3);
        let con = laplacian_constraint(b.bidegree);
        for v in &b.vectors {
            assert!(con.residual(v) < 1e-12);
            assert!(con.absolute_residual(v) < 1e-12);
        }
    }

    #[test]
    fn dimension_law_small() {
        for n in 0..=8u32 {
            for m in -(n as i32) - 2..=n as i32 + 2 {
                let got = build_basis_nm(n, m).map(|b| b.dim()).unwrap_or(0);
                assert_eq!(got, dimension(n, m), "(N,m)=({n},{m})");
            }
        }
    }

    #[test]
    fn construction_is_deterministic() {
        assert_eq!(build_basis_nm(9, 3).unwrap(), build_basis_nm(9, 3).unwrap());
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let bd = Bidegree::from_nm(6, 2).unwrap();
        let a = load_or_build(dir.path(), bd).unwrap();
        let b = load_or_build(dir.path(), bd).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        write_basis(&a, &mut buf).unwrap();
        assert!(read_basis(&buf[..], Bidegree::new(3, 3)).is_err());
        buf[0] = b'X';
        assert!(read_basis(&buf[..], bd).is_err());
    }

    #[test]
    fn null_vectors_agree_with_dense_svd() {
        // Oracle: kernel of the dense constraint map, then Gram-orthogonal projection test.
        for (n, m) in [(2, 0), (4, 2), (5, -1), (6, 0)] {
            let b = build_basis_nm(n, m).unwrap();
            let dense = laplacian_constraint(b.bidegree).to_dense();
            let cols = dense.ncols();
            let mut padded = DMatrix::zeros(cols, cols);
            padded.view_mut((0, 0), (dense.nrows(), cols)).copy_from(&dense);
            let svd = padded.svd(false, true);
            let vt = svd.v_t.unwrap();
            let kernel: Vec<usize> = (0..cols).filter(|&i| svd.singular_values[i] < 1e-9).collect();
            assert_eq!(kernel.len(), b.dim());
            // Every basis vector lies in the span of the SVD kernel.
            for v in &b.vectors {
                let x = nalgebra::DVector::from_column_slice(v);
                let mut resid = x.clone();
                for &i in &kernel {
                    let row = vt.row(i).transpose();
                    resid -= &row * row.dot(&x);
                }
                assert!(resid.norm() < 1e-10 * x.norm());
            }
        }
    }

    #[test]
    fn closed_form_norm_matches_the_exact_gram() {
        for (n, m) in [(3, 1), (8, 2), (12, -4)] {
            let b = build_basis_nm(n, m).unwrap();
            assert!(exact::gram_defect(&b) < 1e-14);
            assert!(exact::constraint_backward_error(&b) < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn basis_is_orthonormal_and_harmonic(n in 0u32..16, j in 0u32..16) {
            let m = n as i32 - 2 * (j % (n + 1)) as i32;
            let b = build_basis_nm(n, m).unwrap();
            let g = b.gram();
            let dev = (g - DMatrix::identity(b.dim(), b.dim())).abs().max();
            prop_assert!(dev < 1e-10);
            let con = laplacian_constraint(b.bidegree);
            for v in &b.vectors {
                prop_assert!(con.residual(v) < 1e-12);
            }
        }
    }
}
