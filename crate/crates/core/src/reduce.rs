//! Dimension reduction: a marking lying in every constraint can be removed,
//! lowering both `r` and `n` by one without changing the count.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::instance::Instance;

/// One removal: `relabel[i - 1]` is the new label of old marking `i`
/// (`None` for the removed one).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub removed: usize,
    pub relabel: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrail {
    pub original: Instance,
    pub steps: Vec<ReductionStep>,
    #[serde(rename = "final")]
    pub reduced: Instance,
}

impl ReductionTrail {
    pub fn is_trivial(&self) -> bool {
        self.steps.is_empty()
    }

    /// Labels of the original instance that were removed, in removal order.
    pub fn removed_original_labels(&self) -> Vec<usize> {
        // step t works in labels of the t-th intermediate instance; pull them back
        let mut out = Vec::new();
        for (t, step) in self.steps.iter().enumerate() {
            let mut label = step.removed;
            for earlier in self.steps[..t].iter().rev() {
                label = earlier.relabel.iter().position(|&x| x == Some(label)).expect("label survives") + 1;
            }
            out.push(label);
        }
        out
    }
}

/// `∩_j I_j`; every marking when there are no constraints.
pub fn common_markings(inst: &Instance) -> BTreeSet<usize> {
    let mut iter = inst.constraints().iter();
    let Some(first) = iter.next() else {
        return (1..=inst.n()).collect();
    };
    let mut common: BTreeSet<usize> = first.iter().copied().collect();
    for c in iter {
        common.retain(|i| c.contains(i));
    }
    common
}

/// Removes the largest common marking when `r ≥ 3`; `None` if no step applies.
pub fn reduce_once(inst: &Instance) -> Option<(Instance, ReductionStep)> {
    if inst.r() < 3 || inst.k() == 0 {
        return None;
    }
    let removed = *common_markings(inst).last()?;
    let relabel: Vec<Option<usize>> = (1..=inst.n())
        .map(|i| match i.cmp(&removed) {
            std::cmp::Ordering::Less => Some(i),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(i - 1),
        })
        .collect();
    let constraints = inst
        .constraints()
        .iter()
        .map(|c| c.iter().filter_map(|&i| relabel[i - 1]).collect())
        .collect();
    let reduced = Instance::from_parts(inst.r() - 1, inst.n() - 1, constraints);
    Some((reduced, ReductionStep { removed, relabel }))
}

/// Applies [`reduce_once`] until it no longer applies.
pub fn fully_reduce(inst: &Instance) -> ReductionTrail {
    let mut steps = Vec::new();
    let mut current = inst.clone();
    while let Some((next, step)) = reduce_once(&current) {
        steps.push(step);
        current = next;
    }
    ReductionTrail { original: inst.clone(), steps, reduced: current }
}

/// Adds the fresh marking `n + 1` to every constraint, raising `r` and `n`.
pub fn append_common_marking(inst: &Instance) -> Instance {
    let fresh = inst.n() + 1;
    let constraints = inst
        .constraints()
        .iter()
        .map(|c| c.iter().copied().chain(std::iter::once(fresh)).collect())
        .collect();
    Instance::from_parts(inst.r() + 1, fresh, constraints)
}
