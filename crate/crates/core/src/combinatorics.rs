//! Configuration graphs, prunings, matchings, weighted transversals and the
//! surplus condition.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffield::combinations;
use crate::instance::Instance;

/// Bipartite graph between markings (left) and constraint indices (right).
///
/// Left vertices are marking labels, right vertices are 1-based constraint
/// indices; `(i, j)` is an edge iff `i ∈ I_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigGraph {
    left: Vec<usize>,
    right: Vec<usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl ConfigGraph {
    /// Graph from explicit vertex lists; edges touching unknown vertices are dropped.
    pub fn new(left: Vec<usize>, right: Vec<usize>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let l: BTreeSet<_> = left.iter().copied().collect();
        let r: BTreeSet<_> = right.iter().copied().collect();
        let edges = edges.into_iter().filter(|(i, j)| l.contains(i) && r.contains(j)).collect();
        ConfigGraph { left, right, edges }
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_balanced(&self) -> bool {
        self.left.len() == self.right.len()
    }

    pub fn degree(&self, label: usize) -> usize {
        self.edges.iter().filter(|(i, _)| *i == label).count()
    }

    /// Left positions adjacent to each right vertex, in right-vertex order.
    fn right_adjacency(&self) -> Vec<Vec<usize>> {
        let pos: HashMap<usize, usize> = self.left.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        self.right
            .iter()
            .map(|&j| self.edges.iter().filter(|(_, jj)| *jj == j).map(|(i, _)| pos[i]).collect())
            .collect()
    }

    fn check_balanced(&self) -> Result<()> {
        if self.is_balanced() {
            Ok(())
        } else {
            Err(Error::Unbalanced { left: self.left.len(), right: self.right.len() })
        }
    }

    /// Deletes the left vertices in `s` and their edges.
    ///
    /// `s` must consist of distinct left labels, exactly as many as the
    /// excess of left over right vertices (`r + 1` for a full graph), so the
    /// result is balanced.
    pub fn prune(&self, s: &[usize]) -> Result<ConfigGraph> {
        let expected = self.left.len().saturating_sub(self.right.len());
        let set: BTreeSet<usize> = s.iter().copied().collect();
        if set.len() != s.len() || s.len() != expected || !set.iter().all(|i| self.left.contains(i)) {
            return Err(Error::BadPruning { set: s.to_vec(), expected });
        }
        Ok(ConfigGraph {
            left: self.left.iter().copied().filter(|i| !set.contains(i)).collect(),
            right: self.right.clone(),
            edges: self.edges.iter().copied().filter(|(i, _)| !set.contains(i)).collect(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }
}

/// The full configuration graph `Γ(𝓘)`.
pub fn build_graph(inst: &Instance) -> ConfigGraph {
    let edges = inst
        .constraints()
        .iter()
        .enumerate()
        .flat_map(|(j, c)| c.iter().map(move |&i| (i, j + 1)))
        .collect();
    ConfigGraph { left: (1..=inst.n()).collect(), right: (1..=inst.k()).collect(), edges }
}

/// Perfect matching test by augmenting paths.
pub fn has_perfect_matching(g: &ConfigGraph) -> Result<bool> {
    g.check_balanced()?;
    let adj = g.right_adjacency();
    let mut owner: Vec<Option<usize>> = vec![None; g.left.len()];

    fn augment(j: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &p in &adj[j] {
            if seen[p] {
                continue;
            }
            seen[p] = true;
            if owner[p].is_none_or(|o| augment(o, adj, owner, seen)) {
                owner[p] = Some(j);
                return true;
            }
        }
        false
    }

    for j in 0..adj.len() {
        let mut seen = vec![false; g.left.len()];
        if !augment(j, &adj, &mut owner, &mut seen) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Counts `m`-weighted transversals: nonnegative edge weights summing to
/// `m` at every vertex.
///
/// Dynamic program over right vertices whose state is the vector of
/// residual left capacities, packed in radix `m + 1`.
pub fn count_weighted_transversals(g: &ConfigGraph, m: u32) -> Result<BigUint> {
    g.check_balanced()?;
    if m == 0 {
        return Err(Error::ZeroLevel);
    }
    let nl = g.left.len();
    let base = u128::from(m) + 1;
    if (nl as f64) * (base as f64).log2() > 127.0 {
        return Err(Error::ResourceLimit(format!("{nl} left vertices at level {m}")));
    }
    let adj = g.right_adjacency();
    let place: Vec<u128> = (0..nl).map(|p| base.pow(p as u32)).collect();
    let digit = |state: u128, p: usize| ((state / place[p]) % base) as u32;

    // a left vertex must be saturated once its last right neighbour is processed
    let mut last: Vec<Option<usize>> = vec![None; nl];
    for (j, ns) in adj.iter().enumerate() {
        for &p in ns {
            last[p] = Some(j);
        }
    }
    if last.iter().any(Option::is_none) {
        return Ok(BigUint::zero());
    }

    let full: u128 = (0..nl).map(|p| u128::from(m) * place[p]).sum();
    let mut states: HashMap<u128, BigUint> = HashMap::from([(full, BigUint::one())]);
    for (j, ns) in adj.iter().enumerate() {
        let finishing: Vec<usize> = (0..nl).filter(|&p| last[p] == Some(j)).collect();
        let mut next: HashMap<u128, BigUint> = HashMap::new();
        for (state, ways) in &states {
            distribute(m, ns, *state, &place, &digit, &mut |s| {
                if finishing.iter().all(|&p| digit(s, p) == 0) {
                    *next.entry(s).or_default() += ways;
                }
            });
        }
        states = next;
        if states.is_empty() {
            break;
        }
    }
    Ok(states.remove(&0).unwrap_or_default())
}

/// Calls `emit` with every state reachable by removing a total of `m` units
/// from the positions `ns` of `state`.
fn distribute(
    m: u32,
    ns: &[usize],
    state: u128,
    place: &[u128],
    digit: &impl Fn(u128, usize) -> u32,
    emit: &mut impl FnMut(u128),
) {
    match ns.split_first() {
        None => {
            if m == 0 {
                emit(state);
            }
        }
        Some((&p, rest)) => {
            let cap = digit(state, p).min(m);
            for w in 0..=cap {
                distribute(m - w, rest, state - u128::from(w) * place[p], place, digit, emit);
            }
        }
    }
}

/// An edge weighting of a graph at a declared level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transversal {
    pub level: u32,
    /// Positive weights only; absent edges carry weight 0.
    pub weights: BTreeMap<(usize, usize), u32>,
}

impl Transversal {
    /// Whether every vertex of `g` has weighted degree `level` and only
    /// edges of `g` carry weight.
    pub fn is_valid_for(&self, g: &ConfigGraph) -> bool {
        if !self.weights.keys().all(|e| g.edges.contains(e)) {
            return false;
        }
        let mut left: HashMap<usize, u32> = HashMap::new();
        let mut right: HashMap<usize, u32> = HashMap::new();
        for (&(i, j), &w) in &self.weights {
            *left.entry(i).or_default() += w;
            *right.entry(j).or_default() += w;
        }
        g.left.iter().all(|i| left.get(i).copied().unwrap_or(0) == self.level)
            && g.right.iter().all(|j| right.get(j).copied().unwrap_or(0) == self.level)
    }

    /// Edgewise sum; the level is the sum of levels.
    pub fn add(&self, other: &Transversal) -> Transversal {
        let mut weights = self.weights.clone();
        for (&e, &w) in &other.weights {
            *weights.entry(e).or_default() += w;
        }
        Transversal { level: self.level + other.level, weights }
    }
}

/// Lists every `m`-weighted transversal by backtracking over edges.
pub fn enumerate_weighted_transversals(g: &ConfigGraph, m: u32) -> Result<Vec<Transversal>> {
    g.check_balanced()?;
    if m == 0 {
        return Err(Error::ZeroLevel);
    }
    let edges: Vec<(usize, usize)> = g.edges.iter().copied().collect();
    let mut left: HashMap<usize, u32> = g.left.iter().map(|&i| (i, m)).collect();
    let mut right: HashMap<usize, u32> = g.right.iter().map(|&j| (j, m)).collect();
    let mut current = vec![0u32; edges.len()];
    let mut out = Vec::new();

    fn rec(
        t: usize,
        edges: &[(usize, usize)],
        left: &mut HashMap<usize, u32>,
        right: &mut HashMap<usize, u32>,
        current: &mut [u32],
        m: u32,
        out: &mut Vec<Transversal>,
    ) {
        if t == edges.len() {
            if left.values().all(|&c| c == 0) && right.values().all(|&c| c == 0) {
                let weights = edges.iter().zip(current.iter()).filter(|(_, &w)| w > 0).map(|(&e, &w)| (e, w)).collect();
                out.push(Transversal { level: m, weights });
            }
            return;
        }
        let (i, j) = edges[t];
        let cap = left[&i].min(right[&j]);
        for w in 0..=cap {
            current[t] = w;
            *left.get_mut(&i).expect("left vertex") -= w;
            *right.get_mut(&j).expect("right vertex") -= w;
            rec(t + 1, edges, left, right, current, m, out);
            *left.get_mut(&i).expect("left vertex") += w;
            *right.get_mut(&j).expect("right vertex") += w;
        }
        current[t] = 0;
    }

    rec(0, &edges, &mut left, &mut right, &mut current, m, &mut out);
    Ok(out)
}

/// `min_J |∪_{j∈J} I_j| − |J|` over nonempty `J`, by exhaustive enumeration
/// (exponential in `k`).
pub fn surplus(inst: &Instance) -> Result<i64> {
    let k = inst.k();
    if k == 0 {
        return Err(Error::NoConstraints);
    }
    if k > 30 {
        return Err(Error::ResourceLimit(format!("surplus over 2^{k} subsets")));
    }
    // Gray-code walk: toggle one constraint per step, keep multiplicities.
    let mut mult = vec![0u32; inst.n() + 1];
    let mut union = 0i64;
    let mut size = 0i64;
    let mut best = i64::MAX;
    let mut gray = 0u64;
    for step in 1u64..(1u64 << k) {
        let bit = step.trailing_zeros() as usize;
        gray ^= 1 << bit;
        let adding = gray & (1 << bit) != 0;
        for &i in &inst.constraints()[bit] {
            if adding {
                mult[i] += 1;
                if mult[i] == 1 {
                    union += 1;
                }
            } else {
                mult[i] -= 1;
                if mult[i] == 0 {
                    union -= 1;
                }
            }
        }
        size += if adding { 1 } else { -1 };
        best = best.min(union - size);
    }
    Ok(best)
}

/// Whether every pruning `Γ(𝓘)∖S` with `|S| = r + 1` has a perfect matching.
pub fn surplus_condition_via_matchings(inst: &Instance) -> bool {
    let g = build_graph(inst);
    combinations(inst.n(), inst.r() + 1).into_iter().all(|s| {
        let s: Vec<usize> = s.into_iter().map(|i| i + 1).collect();
        g.prune(&s).and_then(|p| has_perfect_matching(&p)).unwrap_or(false)
    })
}
