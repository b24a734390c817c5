//! Sparse multivariate polynomials over `F_p` in degree-reverse-lexicographic
//! order.
//!
//! Exponents are packed one byte per variable into eight `u64` words, so a
//! ring has at most [`MAX_VARS`] variables and every exponent stays below
//! `128`. That headroom lets divisibility be tested word-wise without
//! unpacking.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::ffield::{Fp, PrimeField};

pub const MAX_VARS: usize = 64;
/// Largest total degree a monomial may reach.
pub const MAX_DEGREE: u32 = 127;

const WORDS: usize = MAX_VARS / 8;
const HIGH_BITS: u64 = 0x8080_8080_8080_8080;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    words: [u64; WORDS],
    deg: u32,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(i: usize) -> Self {
        let mut m = Monomial::one();
        m.set_exponent(i, 1);
        m
    }

    pub fn from_exponents(exps: &[u32]) -> Result<Self> {
        if exps.len() > MAX_VARS {
            return Err(Error::TooManyVariables { requested: exps.len(), max: MAX_VARS });
        }
        let deg: u32 = exps.iter().sum();
        if deg > MAX_DEGREE {
            return Err(Error::ResourceLimit(format!("monomial degree {deg} exceeds {MAX_DEGREE}")));
        }
        let mut m = Monomial::one();
        for (i, &e) in exps.iter().enumerate() {
            m.set_exponent(i, e);
        }
        Ok(m)
    }

    fn set_exponent(&mut self, i: usize, e: u32) {
        let (w, shift) = (i / 8, 8 * (i % 8));
        let old = (self.words[w] >> shift) & 0xff;
        self.words[w] = (self.words[w] & !(0xff << shift)) | ((e as u64) << shift);
        self.deg = self.deg - old as u32 + e;
    }

    #[inline]
    pub fn exponent(&self, i: usize) -> u32 {
        ((self.words[i / 8] >> (8 * (i % 8))) & 0xff) as u32
    }

    pub fn exponents(&self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|i| self.exponent(i)).collect()
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn is_one(&self) -> bool {
        self.deg == 0
    }

    /// Product. Callers keep total degrees within [`MAX_DEGREE`].
    #[inline]
    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert!(self.deg + other.deg <= MAX_DEGREE);
        let mut words = [0u64; WORDS];
        for (w, out) in words.iter_mut().enumerate() {
            *out = self.words[w] + other.words[w];
        }
        Monomial { words, deg: self.deg + other.deg }
    }

    /// Whether `self` divides `other`.
    #[inline]
    pub fn divides(&self, other: &Monomial) -> bool {
        if self.deg > other.deg {
            return false;
        }
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(&a, &b)| ((b | HIGH_BITS) - a) & HIGH_BITS == HIGH_BITS)
    }

    /// `other / self`, assuming `self` divides `other`.
    #[inline]
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        debug_assert!(self.divides(other));
        let mut words = [0u64; WORDS];
        for (w, out) in words.iter_mut().enumerate() {
            *out = other.words[w] - self.words[w];
        }
        Monomial { words, deg: other.deg - self.deg }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let mut out = Monomial::one();
        let mut deg = 0;
        for w in 0..WORDS {
            let (a, b) = (self.words[w], other.words[w]);
            if a == 0 && b == 0 {
                continue;
            }
            let mut word = 0u64;
            for byte in 0..8 {
                let shift = 8 * byte;
                let e = ((a >> shift) & 0xff).max((b >> shift) & 0xff);
                deg += e as u32;
                word |= e << shift;
            }
            out.words[w] = word;
        }
        out.deg = deg;
        out
    }

    /// No variable occurs in both.
    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.words.iter().zip(other.words.iter()).all(|(&a, &b)| {
            // bytes are < 128, so adding 0x7f sets the high bit iff the byte is nonzero
            let na = (a + 0x7f7f_7f7f_7f7f_7f7f) & HIGH_BITS;
            let nb = (b + 0x7f7f_7f7f_7f7f_7f7f) & HIGH_BITS;
            na & nb == 0
        })
    }

    pub fn is_pure_power_of(&self, var: usize) -> bool {
        self.deg > 0 && self.exponent(var) == self.deg
    }

    /// Index of the only variable, if the monomial is a pure power.
    pub fn pure_power_var(&self) -> Option<usize> {
        if self.deg == 0 {
            return None;
        }
        let w = self.words.iter().position(|&w| w != 0)?;
        let word = self.words[w];
        let byte = word.trailing_zeros() as usize / 8;
        let var = w * 8 + byte;
        (self.exponent(var) == self.deg).then_some(var)
    }
}

impl Ord for Monomial {
    /// Degree reverse lexicographic, with `x_0 > x_1 > ...`.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.deg.cmp(&other.deg) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for w in (0..WORDS).rev() {
            let x = self.words[w] ^ other.words[w];
            if x != 0 {
                let shift = 8 * ((63 - x.leading_zeros()) / 8);
                let a = (self.words[w] >> shift) & 0xff;
                let b = (other.words[w] >> shift) & 0xff;
                // smaller exponent in the last differing variable wins
                return b.cmp(&a);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nv = (0..MAX_VARS).rev().find(|&i| self.exponent(i) != 0).map_or(0, |i| i + 1);
        write!(f, "{:?}", self.exponents(nv))
    }
}

/// Sparse polynomial; terms are sorted strictly descending and carry
/// nonzero coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct FpPoly {
    field: PrimeField,
    nvars: usize,
    terms: Vec<(Monomial, Fp)>,
}

impl FpPoly {
    pub fn zero(field: PrimeField, nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        FpPoly { field, nvars, terms: Vec::new() }
    }

    pub fn constant(field: PrimeField, nvars: usize, c: Fp) -> Self {
        let mut p = Self::zero(field, nvars);
        if !c.is_zero() {
            p.terms.push((Monomial::one(), c));
        }
        p
    }

    pub fn var(field: PrimeField, nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut p = Self::zero(field, nvars);
        p.terms.push((Monomial::var(i), Fp::ONE));
        p
    }

    /// Collects arbitrary terms, combining duplicates and dropping zeros.
    pub fn from_terms<I>(field: PrimeField, nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Fp)>,
    {
        let mut acc: HashMap<Monomial, Fp> = HashMap::new();
        for (m, c) in terms {
            let e = acc.entry(m).or_insert(Fp::ZERO);
            *e = field.add(*e, c);
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let p = FpPoly { field, nvars, terms };
        debug_assert!(p.is_well_formed());
        p
    }

    /// Builds from `(exponent vector, coefficient)` pairs with signed coefficients.
    pub fn from_exponents(field: PrimeField, nvars: usize, terms: &[(Vec<u32>, i64)]) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            out.push((Monomial::from_exponents(e)?, field.from_i64(*c)));
        }
        Ok(Self::from_terms(field, nvars, out))
    }

    fn is_well_formed(&self) -> bool {
        self.terms.iter().all(|(_, c)| !c.is_zero())
            && self.terms.windows(2).all(|w| w[0].0 > w[1].0)
            && self.terms.iter().all(|(m, _)| (self.nvars..MAX_VARS).all(|i| m.exponent(i) == 0))
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Monomial, Fp)] {
        &self.terms
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.first().map(|(m, _)| m)
    }

    pub fn leading_coeff(&self) -> Option<Fp> {
        self.terms.first().map(|&(_, c)| c)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    /// Constant polynomial value, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Fp> {
        match self.terms.as_slice() {
            [] => Some(Fp::ZERO),
            [(m, c)] if m.is_one() => Some(*c),
            _ => None,
        }
    }

    pub fn scale(&self, c: Fp) -> FpPoly {
        if c.is_zero() {
            return Self::zero(self.field, self.nvars);
        }
        let f = self.field;
        FpPoly {
            field: f,
            nvars: self.nvars,
            terms: self.terms.iter().map(|&(m, a)| (m, f.mul(a, c))).collect(),
        }
    }

    pub fn neg(&self) -> FpPoly {
        self.scale(self.field.neg(Fp::ONE))
    }

    /// Divides by the leading coefficient; zero stays zero.
    pub fn monic(&self) -> FpPoly {
        match self.leading_coeff() {
            Some(c) if c != Fp::ONE => self.scale(self.field.inv(c).expect("nonzero")),
            _ => self.clone(),
        }
    }

    pub fn add(&self, other: &FpPoly) -> FpPoly {
        self.sub_mul_term(self.field.neg(Fp::ONE), &Monomial::one(), other)
    }

    pub fn sub(&self, other: &FpPoly) -> FpPoly {
        self.sub_mul_term(Fp::ONE, &Monomial::one(), other)
    }

    /// `self - c * m * g`, by a single merge pass.
    pub fn sub_mul_term(&self, c: Fp, m: &Monomial, g: &FpPoly) -> FpPoly {
        debug_assert_eq!(self.nvars, g.nvars);
        if c.is_zero() || g.is_zero() {
            return self.clone();
        }
        FpPoly { field: self.field, nvars: self.nvars, terms: merge_sub(self.field, &self.terms, c, m, &g.terms) }
    }

    /// Wraps terms already sorted strictly descending with nonzero coefficients.
    pub(crate) fn from_sorted(field: PrimeField, nvars: usize, terms: Vec<(Monomial, Fp)>) -> Self {
        let p = FpPoly { field, nvars, terms };
        debug_assert!(p.is_well_formed());
        p
    }

    pub fn mul_term(&self, c: Fp, m: &Monomial) -> FpPoly {
        let f = self.field;
        if c.is_zero() {
            return Self::zero(f, self.nvars);
        }
        FpPoly {
            field: f,
            nvars: self.nvars,
            terms: self.terms.iter().map(|&(t, a)| (t.mul(m), f.mul(a, c))).collect(),
        }
    }

    pub fn mul(&self, other: &FpPoly) -> FpPoly {
        debug_assert_eq!(self.nvars, other.nvars);
        assert!(
            self.total_degree() + other.total_degree() <= MAX_DEGREE,
            "product degree exceeds {MAX_DEGREE}"
        );
        let f = self.field;
        let p = f.modulus();
        let mut acc: HashMap<Monomial, u64> = HashMap::with_capacity(self.len() * other.len());
        for &(ma, ca) in &self.terms {
            for &(mb, cb) in &other.terms {
                let e = acc.entry(ma.mul(&mb)).or_insert(0);
                *e = (*e + ca.value() * cb.value()) % p;
            }
        }
        let mut terms: Vec<_> =
            acc.into_iter().filter(|&(_, c)| c != 0).map(|(m, c)| (m, Fp(c as u32))).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        FpPoly { field: f, nvars: self.nvars, terms }
    }

    pub fn eval(&self, point: &[Fp]) -> Fp {
        assert_eq!(point.len(), self.nvars, "point dimension");
        let f = self.field;
        self.terms.iter().fold(Fp::ZERO, |acc, (m, c)| {
            let mut v = *c;
            for (i, &x) in point.iter().enumerate() {
                let e = m.exponent(i);
                if e > 0 {
                    v = f.mul(v, f.pow(x, e as u64));
                }
            }
            f.add(acc, v)
        })
    }

    /// Renames variable `i` to `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> FpPoly {
        assert_eq!(perm.len(), self.nvars);
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = vec![0u32; self.nvars];
            for (i, &target) in perm.iter().enumerate() {
                e[target] = m.exponent(i);
            }
            (Monomial::from_exponents(&e).expect("same degree"), *c)
        });
        Self::from_terms(self.field, self.nvars, terms)
    }

    /// Renders with the given variable names, e.g. `3*y_4_1^2*u + 5`.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        DisplayPoly { poly: self, names }
    }
}

/// `a - c * m * b` on sorted term slices.
pub(crate) fn merge_sub(
    f: PrimeField,
    a: &[(Monomial, Fp)],
    c: Fp,
    m: &Monomial,
    b: &[(Monomial, Fp)],
) -> Vec<(Monomial, Fp)> {
    let neg_c = f.neg(c);
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let bm = m.mul(&b[j].0);
        match a[i].0.cmp(&bm) {
            Ordering::Greater => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Less => {
                out.push((bm, f.mul(neg_c, b[j].1)));
                j += 1;
            }
            Ordering::Equal => {
                let v = f.add(a[i].1, f.mul(neg_c, b[j].1));
                if !v.is_zero() {
                    out.push((bm, v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    for &(bm, bc) in &b[j..] {
        out.push((m.mul(&bm), f.mul(neg_c, bc)));
    }
    out
}

struct DisplayPoly<'a> {
    poly: &'a FpPoly,
    names: &'a [String],
}

impl fmt::Display for DisplayPoly<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.poly.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if *c != Fp::ONE || m.is_one() {
                factors.push(c.0.to_string());
            }
            for i in 0..self.poly.nvars {
                match m.exponent(i) {
                    0 => {}
                    1 => factors.push(self.names[i].clone()),
                    e => factors.push(format!("{}^{e}", self.names[i])),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars).map(|i| format!("x{i}")).collect();
        let shown = self.display_with(&names).to_string();
        write!(f, "{shown}")
    }
}
