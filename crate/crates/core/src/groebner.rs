//! Buchberger's algorithm over `F_p` and zero-dimensional solution counting
//! through the staircase of standard monomials.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffield::Fp;
use crate::poly::{merge_sub, FpPoly, Monomial, MAX_DEGREE};

/// Degree reverse lexicographic order after renaming variable `i` to
/// `perm[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialOrder {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl MonomialOrder {
    pub fn degrevlex(nvars: usize) -> Self {
        let id: Vec<usize> = (0..nvars).collect();
        MonomialOrder { perm: id.clone(), inverse: id }
    }

    /// `perm[i]` is the rank of variable `i`; rank 0 is the largest variable.
    pub fn degrevlex_permuted(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut inverse = vec![usize::MAX; n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || inverse[p] != usize::MAX {
                return Err(Error::Parse(format!("not a permutation: {perm:?}")));
            }
            inverse[p] = i;
        }
        Ok(MonomialOrder { perm, inverse })
    }

    pub fn nvars(&self) -> usize {
        self.perm.len()
    }

    fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    fn to_internal(&self, f: &FpPoly) -> FpPoly {
        if self.is_identity() {
            f.clone()
        } else {
            f.permute_vars(&self.perm)
        }
    }

    fn to_external(&self, f: &FpPoly) -> FpPoly {
        if self.is_identity() {
            f.clone()
        } else {
            f.permute_vars(&self.inverse)
        }
    }
}

/// Caps that turn runaway computations into a clean error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest S-pair lcm degree processed.
    pub max_degree: u32,
    /// Largest number of pending pairs.
    pub max_pairs: usize,
    /// Largest number of polynomials ever added to the basis.
    pub max_basis: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_degree: 40, max_pairs: 200_000, max_basis: 20_000 }
    }
}

/// Reduced Gröbner basis: monic, sorted by ascending leading monomial, no
/// leading monomial divides another term of the basis.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    internal: Vec<FpPoly>,
    order: MonomialOrder,
}

impl GroebnerBasis {
    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    /// Basis polynomials in the caller's variable naming.
    pub fn polys(&self) -> Vec<FpPoly> {
        self.internal.iter().map(|g| self.order.to_external(g)).collect()
    }

    pub fn len(&self) -> usize {
        self.internal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.internal.is_empty()
    }

    /// Leading monomials in internal (ranked) variable positions.
    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.internal.iter().filter_map(|g| g.leading_monomial().copied()).collect()
    }

    pub fn reduce(&self, f: &FpPoly) -> FpPoly {
        let nf = reduce_internal(&self.order.to_internal(f), &self.internal);
        self.order.to_external(&nf)
    }

    pub fn contains(&self, f: &FpPoly) -> bool {
        self.reduce(f).is_zero()
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.internal.iter().any(|g| g.leading_monomial().is_some_and(Monomial::is_one))
    }
}

/// Remainder of multivariate division of `f` by `g` (in the given order):
/// no term of the result is divisible by a leading monomial of `g`.
pub fn normal_form(f: &FpPoly, g: &[FpPoly], order: &MonomialOrder) -> FpPoly {
    let divisors: Vec<FpPoly> =
        g.iter().filter(|p| !p.is_zero()).map(|p| order.to_internal(p).monic()).collect();
    order.to_external(&reduce_internal(&order.to_internal(f), &divisors))
}

/// Full reduction against monic divisors sharing the internal order.
fn reduce_internal(f: &FpPoly, divisors: &[FpPoly]) -> FpPoly {
    let field = f.field();
    let mut cur: Vec<(Monomial, Fp)> = f.terms().to_vec();
    let mut remainder: Vec<(Monomial, Fp)> = Vec::new();
    let mut pos = 0;
    while pos < cur.len() {
        let (m, c) = cur[pos];
        let divisor = divisors.iter().find(|g| g.leading_monomial().is_some_and(|lt| lt.divides(&m)));
        match divisor {
            Some(g) => {
                debug_assert_eq!(g.leading_coeff(), Some(Fp::ONE));
                let q = g.leading_monomial().expect("nonzero").quotient_of(&m);
                // the leading terms cancel exactly
                cur = merge_sub(field, &cur[pos + 1..], c, &q, &g.terms()[1..]);
                pos = 0;
            }
            None => {
                remainder.push((m, c));
                pos += 1;
            }
        }
    }
    FpPoly::from_sorted(field, f.nvars(), remainder)
}

fn s_polynomial(f: &FpPoly, g: &FpPoly) -> FpPoly {
    let (lf, lg) = (f.leading_monomial().expect("nonzero"), g.leading_monomial().expect("nonzero"));
    let l = lf.lcm(lg);
    let a = f.mul_term(Fp::ONE, &lf.quotient_of(&l));
    a.sub_mul_term(Fp::ONE, &lg.quotient_of(&l), g)
}

#[derive(Clone, Copy, Debug)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

/// Statistics of one basis computation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuchbergerStats {
    pub pairs_reduced: usize,
    pub zero_reductions: usize,
    pub basis_added: usize,
    pub max_pairs_pending: usize,
}

struct Engine<'a> {
    basis: Vec<FpPoly>,
    alive: Vec<bool>,
    pairs: Vec<Pair>,
    limits: &'a Limits,
    stats: BuchbergerStats,
}

impl Engine<'_> {
    fn alive_polys(&self) -> Vec<FpPoly> {
        self.basis.iter().zip(&self.alive).filter(|(_, &a)| a).map(|(g, _)| g.clone()).collect()
    }

    /// Gebauer–Möller installation of a new monic basis element.
    fn insert(&mut self, h: FpPoly) -> Result<()> {
        if self.basis.len() >= self.limits.max_basis {
            return Err(Error::ResourceLimit(format!("basis exceeded {} polynomials", self.limits.max_basis)));
        }
        let hi = self.basis.len();
        let lh = *h.leading_monomial().expect("nonzero");
        self.basis.push(h);
        self.alive.push(true);
        self.stats.basis_added += 1;

        let candidates: Vec<Pair> = (0..hi)
            .filter(|&g| self.alive[g])
            .map(|g| Pair { i: g, j: hi, lcm: lh.lcm(self.basis[g].leading_monomial().expect("nonzero")) })
            .collect();

        // chain criterion among the new pairs: drop (g1,h) when another new pair
        // has a strictly smaller lcm dividing it
        let mut kept: Vec<Pair> = Vec::new();
        for (idx, p) in candidates.iter().enumerate() {
            let lg = self.basis[p.i].leading_monomial().expect("nonzero");
            if lg.is_coprime(&lh) {
                kept.push(*p);
                continue;
            }
            let dominated_later = candidates[idx + 1..].iter().any(|q| q.lcm.divides(&p.lcm));
            let dominated_kept = kept.iter().any(|q| q.lcm.divides(&p.lcm));
            if !dominated_later && !dominated_kept {
                kept.push(*p);
            }
        }
        // coprime leading monomials: S-polynomial reduces to zero
        kept.retain(|p| !self.basis[p.i].leading_monomial().expect("nonzero").is_coprime(&lh));

        // chain criterion on old pairs
        let basis = &self.basis;
        self.pairs.retain(|p| {
            if !lh.divides(&p.lcm) {
                return true;
            }
            let li = lh.lcm(basis[p.i].leading_monomial().expect("nonzero"));
            let lj = lh.lcm(basis[p.j].leading_monomial().expect("nonzero"));
            li == p.lcm || lj == p.lcm
        });
        self.pairs.extend(kept);
        self.stats.max_pairs_pending = self.stats.max_pairs_pending.max(self.pairs.len());
        if self.pairs.len() > self.limits.max_pairs {
            return Err(Error::ResourceLimit(format!("more than {} pending pairs", self.limits.max_pairs)));
        }

        for g in 0..hi {
            if self.alive[g] && lh.divides(self.basis[g].leading_monomial().expect("nonzero")) {
                self.alive[g] = false;
            }
        }
        Ok(())
    }

    fn pop_pair(&mut self) -> Option<Pair> {
        let best = self
            .pairs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.lcm.cmp(&b.lcm).then(a.j.cmp(&b.j)).then(a.i.cmp(&b.i)))
            .map(|(k, _)| k)?;
        Some(self.pairs.swap_remove(best))
    }
}

/// Reduced Gröbner basis with default [`Limits`].
pub fn buchberger(gens: &[FpPoly], order: &MonomialOrder) -> Result<GroebnerBasis> {
    buchberger_with_limits(gens, order, &Limits::default()).map(|(gb, _)| gb)
}

/// Reduced Gröbner basis of the ideal generated by `gens`.
///
/// Pairs are selected by the normal strategy (smallest lcm first), and the
/// coprime-leading-monomial and chain criteria discard redundant pairs.
pub fn buchberger_with_limits(
    gens: &[FpPoly],
    order: &MonomialOrder,
    limits: &Limits,
) -> Result<(GroebnerBasis, BuchbergerStats)> {
    assert!(limits.max_degree <= MAX_DEGREE, "degree cap above monomial capacity");
    let mut inputs: Vec<FpPoly> =
        gens.iter().filter(|g| !g.is_zero()).map(|g| order.to_internal(g).monic()).collect();
    inputs.sort_by(|a, b| a.leading_monomial().cmp(&b.leading_monomial()));
    for g in &inputs {
        if g.total_degree() > limits.max_degree {
            return Err(Error::ResourceLimit(format!(
                "generator degree {} exceeds cap {}",
                g.total_degree(),
                limits.max_degree
            )));
        }
    }

    let mut eng = Engine { basis: Vec::new(), alive: Vec::new(), pairs: Vec::new(), limits, stats: Default::default() };
    for g in inputs {
        let h = reduce_internal(&g, &eng.alive_polys());
        if !h.is_zero() {
            eng.insert(h.monic())?;
        }
    }

    while let Some(pair) = eng.pop_pair() {
        if pair.lcm.degree() > limits.max_degree {
            return Err(Error::ResourceLimit(format!(
                "S-pair degree {} exceeds cap {}",
                pair.lcm.degree(),
                limits.max_degree
            )));
        }
        eng.stats.pairs_reduced += 1;
        let s = s_polynomial(&eng.basis[pair.i], &eng.basis[pair.j]);
        let h = reduce_internal(&s, &eng.alive_polys());
        if h.is_zero() {
            eng.stats.zero_reductions += 1;
            continue;
        }
        if h.leading_monomial().is_some_and(Monomial::is_one) {
            // unit ideal
            let one = h.monic();
            return Ok((GroebnerBasis { internal: vec![one], order: order.clone() }, eng.stats));
        }
        eng.insert(h.monic())?;
    }

    let minimal = eng.alive_polys();
    let mut reduced = Vec::with_capacity(minimal.len());
    for (k, g) in minimal.iter().enumerate() {
        let others: Vec<FpPoly> =
            minimal.iter().enumerate().filter(|&(l, _)| l != k).map(|(_, p)| p.clone()).collect();
        let (lm, lc) = g.terms()[0];
        let tail = FpPoly::from_sorted(g.field(), g.nvars(), g.terms()[1..].to_vec());
        let tail_nf = reduce_internal(&tail, &others);
        let mut terms = vec![(lm, lc)];
        terms.extend_from_slice(tail_nf.terms());
        reduced.push(FpPoly::from_sorted(g.field(), g.nvars(), terms).monic());
    }
    reduced.sort_by(|a, b| a.leading_monomial().cmp(&b.leading_monomial()));
    Ok((GroebnerBasis { internal: reduced, order: order.clone() }, eng.stats))
}

/// Whether every S-polynomial of `g` reduces to zero modulo `g`.
pub fn is_groebner_basis(g: &[FpPoly], order: &MonomialOrder) -> bool {
    let polys: Vec<FpPoly> = g.iter().filter(|p| !p.is_zero()).map(|p| order.to_internal(p).monic()).collect();
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            if !reduce_internal(&s_polynomial(&polys[i], &polys[j]), &polys).is_zero() {
                return false;
            }
        }
    }
    true
}

/// Dimension of `F_p[x]/I` as a vector space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientDimension {
    Finite(u64),
    Infinite,
}

impl fmt::Display for QuotientDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuotientDimension::Finite(d) => write!(f, "{d}"),
            QuotientDimension::Infinite => write!(f, "infinite"),
        }
    }
}

/// Number of standard monomials of a reduced basis.
pub fn quotient_dimension(gb: &GroebnerBasis) -> QuotientDimension {
    let nvars = gb.order.nvars();
    let leads = gb.leading_monomials();
    if leads.iter().any(Monomial::is_one) {
        return QuotientDimension::Finite(0);
    }
    let mut bounds = vec![u32::MAX; nvars];
    for m in &leads {
        if let Some(v) = m.pure_power_var() {
            bounds[v] = bounds[v].min(m.degree());
        }
    }
    if bounds.iter().any(|&b| b == u32::MAX) {
        return QuotientDimension::Infinite;
    }
    let mut exps = vec![0u32; nvars];
    QuotientDimension::Finite(count_staircase(0, &mut exps, &bounds, &leads))
}

fn count_staircase(var: usize, exps: &mut [u32], bounds: &[u32], leads: &[Monomial]) -> u64 {
    if var == exps.len() {
        return 1;
    }
    let mut total = 0;
    for e in 0..bounds[var] {
        exps[var] = e;
        let m = Monomial::from_exponents(exps).expect("bounded by leading monomials");
        if leads.iter().any(|l| l.divides(&m)) {
            break;
        }
        total += count_staircase(var + 1, exps, bounds, leads);
    }
    exps[var] = 0;
    total
}
