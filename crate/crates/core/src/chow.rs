//! Intersection-theoretic oracle for the transversal bound.
//!
//! Classes live in the truncated ring `Z[H_1, ..., H_k] / (H_j^{R+1})` with
//! `R = r² − 1`. The product of the classes `[Λ̄_i]` over the datum augmented
//! by `I_0 = S ⊔ {0}` has top coefficient equal to the number of
//! `(r−1)`-weighted transversals of `Γ(𝓘)∖S`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Polynomial in `H_1..H_k` with every exponent at most `cap`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedPoly {
    nvars: usize,
    cap: u32,
    terms: BTreeMap<Vec<u32>, BigUint>,
}

impl TruncatedPoly {
    pub fn zero(nvars: usize, cap: u32) -> Self {
        TruncatedPoly { nvars, cap, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize, cap: u32) -> Self {
        Self::monomial(nvars, cap, vec![0; nvars])
    }

    /// A single monomial, or zero if some exponent exceeds the cap.
    pub fn monomial(nvars: usize, cap: u32, exps: Vec<u32>) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut p = Self::zero(nvars, cap);
        if exps.iter().all(|&e| e <= cap) {
            p.terms.insert(exps, BigUint::one());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigUint> {
        &self.terms
    }

    pub fn coefficient(&self, exps: &[u32]) -> BigUint {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: BigUint) {
        assert_eq!(exps.len(), self.nvars);
        if c.is_zero() || exps.iter().any(|&e| e > self.cap) {
            return;
        }
        *self.terms.entry(exps).or_default() += c;
    }

    /// Product with exponents above the cap dropped.
    pub fn mul(&self, other: &TruncatedPoly) -> TruncatedPoly {
        assert_eq!((self.nvars, self.cap), (other.nvars, other.cap));
        let mut out = Self::zero(self.nvars, self.cap);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let exps: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if exps.iter().all(|&e| e <= self.cap) {
                    *out.terms.entry(exps).or_default() += ca * cb;
                }
            }
        }
        out
    }
}

/// An instance with one extra constraint `I_0 = S ⊔ {0}`.
#[derive(Clone, Debug)]
pub struct AugmentedDatum {
    pub instance: Instance,
    pub s: Vec<usize>,
    /// `neighbourhoods[i] = J_i ⊆ {0, ..., k}` for `i ∈ {0, ..., n}`.
    pub neighbourhoods: Vec<BTreeSet<usize>>,
}

impl AugmentedDatum {
    pub fn new(inst: &Instance, s: &[usize]) -> Result<Self> {
        let set: BTreeSet<usize> = s.iter().copied().collect();
        if set.len() != s.len() || s.len() != inst.r() + 1 || s.iter().any(|&i| i == 0 || i > inst.n()) {
            return Err(Error::BadPruning { set: s.to_vec(), expected: inst.r() + 1 });
        }
        let mut neighbourhoods = vec![BTreeSet::new(); inst.n() + 1];
        neighbourhoods[0].insert(0);
        for &i in &set {
            neighbourhoods[i].insert(0);
        }
        for (j, c) in inst.constraints().iter().enumerate() {
            for &i in c {
                neighbourhoods[i].insert(j + 1);
            }
        }
        Ok(AugmentedDatum { instance: inst.clone(), s: set.into_iter().collect(), neighbourhoods })
    }

    pub fn in_i0(&self, i: usize) -> bool {
        i == 0 || self.s.contains(&i)
    }

    /// `R = r² − 1`.
    pub fn top_exponent(&self) -> u32 {
        let r = self.instance.r() as u32;
        r * r - 1
    }
}

/// The class `[Λ̄_i]` for `i ∈ {0, ..., n}`.
///
/// For `i ∈ I_0` this is `∏_{j ∈ J_i∖{0}} H_j^{r−1}`; otherwise the sum of
/// `∏ H_j^{a_j}` over `0 ≤ a_j ≤ r−1` with `Σ a_j = (r−1)(|J_i|−1)`.
pub fn lambda_class(d: &AugmentedDatum, i: usize) -> Result<TruncatedPoly> {
    let k = d.instance.k();
    let cap = d.top_exponent();
    let r1 = d.instance.r() as u32 - 1;
    let nbhd = &d.neighbourhoods[i];
    if nbhd.is_empty() {
        return Err(Error::EmptyNeighbourhood(i));
    }
    let vars: Vec<usize> = nbhd.iter().copied().filter(|&j| j != 0).collect();
    if d.in_i0(i) {
        let mut exps = vec![0; k];
        for &j in &vars {
            exps[j - 1] = r1;
        }
        return Ok(TruncatedPoly::monomial(k, cap, exps));
    }
    let total = r1 * (vars.len() as u32 - 1);
    let mut out = TruncatedPoly::zero(k, cap);
    let mut exps = vec![0; k];
    compositions(&vars, total, r1, &mut exps, &mut |e| out.add_term(e.to_vec(), BigUint::one()));
    Ok(out)
}

fn compositions(vars: &[usize], total: u32, bound: u32, exps: &mut [u32], emit: &mut impl FnMut(&[u32])) {
    match vars.split_first() {
        None => {
            if total == 0 {
                emit(exps);
            }
        }
        Some((&j, rest)) => {
            let room = bound * rest.len() as u32;
            for a in total.saturating_sub(room)..=bound.min(total) {
                exps[j - 1] = a;
                compositions(rest, total - a, bound, exps, emit);
            }
            exps[j - 1] = 0;
        }
    }
}

/// Coefficient of `∏_j H_j^R` in `∏_{i ∈ [n]_0} [Λ̄_i]`; zero when some
/// marking lies in no constraint.
pub fn intersection_number(inst: &Instance, s: &[usize]) -> Result<BigUint> {
    let d = AugmentedDatum::new(inst, s)?;
    if d.neighbourhoods.iter().any(BTreeSet::is_empty) {
        return Ok(BigUint::zero());
    }
    let k = inst.k();
    let cap = d.top_exponent();
    let mut product = TruncatedPoly::one(k, cap);
    // sparse classes first keeps intermediate products small
    let mut classes = (0..=inst.n()).map(|i| lambda_class(&d, i)).collect::<Result<Vec<_>>>()?;
    classes.sort_by_key(|c| c.terms().len());
    for c in &classes {
        product = product.mul(c);
        if product.is_zero() {
            break;
        }
    }
    Ok(product.coefficient(&vec![cap; k]))
}
