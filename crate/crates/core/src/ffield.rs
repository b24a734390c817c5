//! Prime-field arithmetic, small dense matrices, and sampling of linearly
//! general point configurations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Five 31-bit primes cycled across stochastic trials.
pub const DEFAULT_PRIMES: [u64; 5] = [
    2_147_483_647,
    2_147_483_629,
    2_147_483_587,
    2_147_483_579,
    2_147_483_563,
];

/// Rejection-sampling attempts per configuration before giving up.
pub const SAMPLE_RETRY_CAP: usize = 1000;

/// Deterministic primality test, exact for every `n < 2^32`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13] {
        if n % small == 0 {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 7, 61] {
        if a % n == 0 {
            continue;
        }
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// An element of a prime field, stored as its canonical residue.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fp(pub u32);

impl Fp {
    pub const ZERO: Fp = Fp(0);
    pub const ONE: Fp = Fp(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn value(self) -> u64 {
        self.0 as u64
    }
}

/// The field `F_p` for a runtime prime `p < 2^31`.
///
/// Residues are below `2^31`, so every product fits in a `u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 31 || !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(self) -> u64 {
        self.p
    }

    #[inline]
    pub fn elem(self, v: u64) -> Fp {
        Fp((v % self.p) as u32)
    }

    /// Embeds a signed integer.
    pub fn from_i64(self, v: i64) -> Fp {
        let r = v.rem_euclid(self.p as i64);
        Fp(r as u32)
    }

    #[inline]
    pub fn add(self, a: Fp, b: Fp) -> Fp {
        let s = a.0 as u64 + b.0 as u64;
        Fp(if s >= self.p { s - self.p } else { s } as u32)
    }

    #[inline]
    pub fn sub(self, a: Fp, b: Fp) -> Fp {
        if a.0 >= b.0 {
            Fp(a.0 - b.0)
        } else {
            Fp((a.0 as u64 + self.p - b.0 as u64) as u32)
        }
    }

    #[inline]
    pub fn neg(self, a: Fp) -> Fp {
        if a.0 == 0 {
            a
        } else {
            Fp((self.p - a.0 as u64) as u32)
        }
    }

    #[inline]
    pub fn mul(self, a: Fp, b: Fp) -> Fp {
        Fp(((a.0 as u64 * b.0 as u64) % self.p) as u32)
    }

    pub fn pow(self, a: Fp, mut e: u64) -> Fp {
        let mut base = a;
        let mut acc = Fp::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, a: Fp) -> Option<Fp> {
        if a.is_zero() {
            return None;
        }
        // extended Euclid on (a, p)
        let (mut t, mut new_t) = (0i64, 1i64);
        let (mut r, mut new_r) = (self.p as i64, a.0 as i64);
        while new_r != 0 {
            let q = r / new_r;
            (t, new_t) = (new_t, t - q * new_t);
            (r, new_r) = (new_r, r - q * new_r);
        }
        debug_assert_eq!(r, 1);
        Some(self.from_i64(t))
    }

    pub fn div(self, a: Fp, b: Fp) -> Option<Fp> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn random<R: Rng + ?Sized>(self, rng: &mut R) -> Fp {
        Fp(rng.gen_range(0..self.p) as u32)
    }

    pub fn random_nonzero<R: Rng + ?Sized>(self, rng: &mut R) -> Fp {
        Fp(rng.gen_range(1..self.p) as u32)
    }
}

/// Row-major dense matrix over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Fp>,
}

impl FpMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FpMatrix { rows, cols, data: vec![Fp::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Fp::ONE);
        }
        m
    }

    /// Builds a matrix from row vectors of residues already reduced mod p.
    pub fn from_rows(rows: &[Vec<Fp>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        FpMatrix { rows: nrows, cols: ncols, data: rows.concat() }
    }

    pub fn from_columns(cols: &[Vec<Fp>]) -> Self {
        let ncols = cols.len();
        let nrows = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(nrows, ncols);
        for (c, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), nrows, "ragged columns");
            for (r, &v) in col.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(field: PrimeField, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| field.random(rng)).collect();
        FpMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Fp {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Fp) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<Fp> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Submatrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> FpMatrix {
        let mut m = Self::zeros(self.rows, cols.len());
        for (new_c, &c) in cols.iter().enumerate() {
            for r in 0..self.rows {
                m.set(r, new_c, self.get(r, c));
            }
        }
        m
    }

    pub fn scale_column(&mut self, field: PrimeField, c: usize, s: Fp) {
        for r in 0..self.rows {
            let v = field.mul(self.get(r, c), s);
            self.set(r, c, v);
        }
    }

    pub fn mul(&self, field: PrimeField, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u64;
                for l in 0..self.cols {
                    acc = (acc + self.get(i, l).value() * other.get(l, j).value()) % field.modulus();
                }
                out.set(i, j, Fp(acc as u32));
            }
        }
        out
    }

    /// Determinant by Bareiss fraction-free elimination.
    pub fn det(&self, field: PrimeField) -> Result<Fp> {
        if self.rows != self.cols {
            return Err(Error::NonSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Fp::ONE);
        }
        let mut a = self.clone();
        let mut negate = false;
        let mut prev = Fp::ONE;
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                let Some(swap) = (k + 1..n).find(|&i| !a.get(i, k).is_zero()) else {
                    return Ok(Fp::ZERO);
                };
                for c in 0..n {
                    let (x, y) = (a.get(k, c), a.get(swap, c));
                    a.set(k, c, y);
                    a.set(swap, c, x);
                }
                negate = !negate;
            }
            let pivot = a.get(k, k);
            let prev_inv = field.inv(prev).expect("Bareiss pivots are nonzero");
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = field.sub(field.mul(a.get(i, j), pivot), field.mul(a.get(i, k), a.get(k, j)));
                    a.set(i, j, field.mul(t, prev_inv));
                }
                a.set(i, k, Fp::ZERO);
            }
            prev = pivot;
        }
        let d = a.get(n - 1, n - 1);
        Ok(if negate { field.neg(d) } else { d })
    }

    /// True when every maximal (`rows x rows`) minor is nonzero.
    pub fn all_maximal_minors_nonzero(&self, field: PrimeField) -> bool {
        let r = self.rows;
        if self.cols < r {
            return false;
        }
        combinations(self.cols, r)
            .into_iter()
            .all(|cols| !self.select_columns(&cols).det(field).expect("square").is_zero())
    }
}

/// All `k`-subsets of `0..n` as ascending index vectors, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            break;
        };
        idx[pos] += 1;
        for i in pos + 1..k {
            idx[i] = idx[i - 1] + 1;
        }
    }
    out
}

/// Samples `count` points of `P^{r-1}(F_p)` (as columns of an `r x count`
/// matrix) whose `r x r` minors are all nonzero.
pub fn sample_general_config<R: Rng + ?Sized>(
    field: PrimeField,
    r: usize,
    count: usize,
    rng: &mut R,
) -> Result<FpMatrix> {
    if count < r {
        return Err(Error::TooFewPoints { r, count });
    }
    for _ in 0..SAMPLE_RETRY_CAP {
        let m = FpMatrix::random(field, r, count, rng);
        if m.all_maximal_minors_nonzero(field) {
            return Ok(m);
        }
    }
    Err(Error::SamplingFailed { r, count, p: field.modulus() })
}

/// Independent random stream `stream` derived from a master seed.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f101() -> PrimeField {
        PrimeField::new(101).unwrap()
    }

    fn laplace_det(field: PrimeField, m: &FpMatrix) -> Fp {
        let n = m.rows();
        if n == 1 {
            return m.get(0, 0);
        }
        let mut acc = Fp::ZERO;
        for c in 0..n {
            let keep: Vec<usize> = (0..n).filter(|&x| x != c).collect();
            let minor_rows: Vec<Vec<Fp>> =
                (1..n).map(|r| keep.iter().map(|&k| m.get(r, k)).collect()).collect();
            let sub = laplace_det(field, &FpMatrix::from_rows(&minor_rows));
            let term = field.mul(m.get(0, c), sub);
            acc = if c % 2 == 0 { field.add(acc, term) } else { field.sub(acc, term) };
        }
        acc
    }

    #[test]
    fn default_primes_are_prime_and_below_2_31() {
        for p in DEFAULT_PRIMES {
            assert!(p < 1 << 31);
            assert!(PrimeField::new(p).is_ok());
        }
        assert!(PrimeField::new(2_147_483_646).is_err());
        assert!(PrimeField::new(1 << 31).is_err());
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..5000u64 {
            let slow = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime(n), slow, "n = {n}");
        }
    }

    #[test]
    fn inverses_exhaustive_small_primes() {
        for p in (2..=97).filter(|&p| is_prime(p)) {
            let f = PrimeField::new(p).unwrap();
            assert_eq!(f.inv(Fp::ZERO), None);
            for a in 1..p {
                let a = f.elem(a);
                assert_eq!(f.mul(a, f.inv(a).unwrap()), Fp::ONE, "p={p}");
            }
        }
    }

    #[test]
    fn det_identity_and_swap() {
        let f = f101();
        assert_eq!(FpMatrix::identity(3).det(f).unwrap(), Fp::ONE);
        let swap = FpMatrix::from_rows(&[vec![Fp(0), Fp(1)], vec![Fp(1), Fp(0)]]);
        assert_eq!(swap.det(f).unwrap(), Fp(100));
    }

    #[test]
    fn det_rejects_non_square() {
        let m = FpMatrix::zeros(2, 3);
        assert!(matches!(m.det(f101()), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn det_matches_laplace_expansion() {
        let f = f101();
        let mut rng = stream_rng(7, 0);
        for n in 1..=5 {
            for _ in 0..40 {
                let m = FpMatrix::random(f, n, n, &mut rng);
                assert_eq!(m.det(f).unwrap(), laplace_det(f, &m));
            }
        }
    }

    #[test]
    fn det_is_multiplicative() {
        let f = PrimeField::new(DEFAULT_PRIMES[1]).unwrap();
        let mut rng = stream_rng(11, 3);
        for n in 1..=6 {
            for _ in 0..20 {
                let a = FpMatrix::random(f, n, n, &mut rng);
                let b = FpMatrix::random(f, n, n, &mut rng);
                let lhs = a.mul(f, &b).det(f).unwrap();
                let rhs = f.mul(a.det(f).unwrap(), b.det(f).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn general_config_on_p1_has_nonzero_pairwise_minors() {
        let f = f101();
        let mut rng = stream_rng(1, 0);
        let m = sample_general_config(f, 2, 4, &mut rng).unwrap();
        for pair in combinations(4, 2) {
            assert!(!m.select_columns(&pair).det(f).unwrap().is_zero());
        }
    }

    #[test]
    fn general_config_fails_over_f2() {
        // P^2(F_2) has 7 points; five points with no three collinear do not exist.
        let f = PrimeField::new(2).unwrap();
        let mut rng = stream_rng(1, 0);
        assert!(matches!(sample_general_config(f, 3, 5, &mut rng), Err(Error::SamplingFailed { .. })));
    }

    #[test]
    fn square_config_is_invertible() {
        let f = f101();
        let mut rng = stream_rng(5, 2);
        let m = sample_general_config(f, 3, 3, &mut rng).unwrap();
        assert!(!m.det(f).unwrap().is_zero());
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(8, 4).len(), 70);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = stream_rng(42, 0);
        let mut b = stream_rng(42, 0);
        let mut c = stream_rng(42, 1);
        let xs: Vec<u64> = (0..4).map(|_| a.gen()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.gen()).collect();
        let zs: Vec<u64> = (0..4).map(|_| c.gen()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }
}
