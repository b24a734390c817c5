//! Upper bounds by weighted transversals of pruned configuration graphs.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{build_graph, count_weighted_transversals};
use crate::error::Result;
use crate::ffield::combinations;
use crate::instance::Instance;
use crate::reduce::{fully_reduce, ReductionTrail};

/// `|T_{r-1}(Γ(𝓘)∖S)|`.
pub fn bound_for_s(inst: &Instance, s: &[usize]) -> Result<BigUint> {
    let pruned = build_graph(inst).prune(s)?;
    count_weighted_transversals(&pruned, (inst.r() - 1) as u32)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundRow {
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    #[serde(with = "crate::bigjson")]
    pub bound: BigUint,
}

/// Bounds over every pruning of the (possibly reduced) instance.
///
/// When `reduced_first` is set, rows and `argmin_s` use the labels of
/// `reduced.reduced`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundTable {
    #[serde(with = "crate::bigjson")]
    pub best: BigUint,
    #[serde(rename = "argmin_S")]
    pub argmin_s: Vec<usize>,
    #[serde(with = "crate::bigjson::vec")]
    pub distinct_bounds: Vec<BigUint>,
    pub reduced_first: bool,
    pub reduced: ReductionTrail,
    pub rows: Vec<BoundRow>,
}

impl BoundTable {
    /// The instance whose prunings were enumerated.
    pub fn bounded_instance(&self) -> &Instance {
        &self.reduced.reduced
    }
}

/// Enumerates all `C(n, r+1)` prunings in parallel; rows are in
/// lexicographic order of `S` and ties for the minimum go to the first.
pub fn best_bound(inst: &Instance, reduce_first: bool) -> Result<BoundTable> {
    let trail = if reduce_first {
        fully_reduce(inst)
    } else {
        ReductionTrail { original: inst.clone(), steps: Vec::new(), reduced: inst.clone() }
    };
    let target = &trail.reduced;
    let g = build_graph(target);
    let level = (target.r() - 1) as u32;
    let rows: Vec<BoundRow> = combinations(target.n(), target.r() + 1)
        .into_par_iter()
        .map(|s| {
            let s: Vec<usize> = s.into_iter().map(|i| i + 1).collect();
            let bound = count_weighted_transversals(&g.prune(&s)?, level)?;
            Ok(BoundRow { s, bound })
        })
        .collect::<Result<_>>()?;
    let best_row = rows.iter().min_by(|a, b| a.bound.cmp(&b.bound)).expect("at least one pruning");
    let mut distinct: Vec<BigUint> = rows.iter().map(|r| r.bound.clone()).collect();
    distinct.sort();
    distinct.dedup();
    Ok(BoundTable {
        best: best_row.bound.clone(),
        argmin_s: best_row.s.clone(),
        distinct_bounds: distinct,
        reduced_first: reduce_first,
        reduced: trail,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::surplus;
    use crate::reduce::append_common_marking;
    use crate::{parse_instance, Format};
    use proptest::prelude::*;

    fn compact(s: &str, r: usize) -> Instance {
        parse_instance(s, Format::Compact, Some(r)).unwrap()
    }

    fn big(v: &[u32]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn single_prunings() {
        let example = compact("12345,34567,56781,78123", 3);
        assert_eq!(bound_for_s(&example, &[1, 3, 5, 7]).unwrap(), BigUint::from(3u32));
        let r2 = compact("1234,3456,1256", 2);
        assert_eq!(bound_for_s(&r2, &[4, 5, 6]).unwrap(), BigUint::from(2u32));
        assert!(bound_for_s(&r2, &[4, 5]).is_err());
        // marking 5 is isolated after pruning
        let isolated = Instance::new(2, 5, vec![vec![1, 2, 3, 4], vec![1, 2, 3, 4]]).unwrap();
        assert_eq!(bound_for_s(&isolated, &[1, 2, 3]).unwrap(), BigUint::from(0u32));
    }

    #[test]
    fn table_rows() {
        let row1 = best_bound(&compact("12345,23456", 3), false).unwrap();
        assert_eq!(row1.distinct_bounds, big(&[1, 3]));
        assert_eq!(row1.best, BigUint::from(1u32));
        let row1 = best_bound(&compact("12345,23456", 3), true).unwrap();
        assert_eq!(row1.bounded_instance(), &compact("1234,2345", 2));
        assert_eq!(row1.distinct_bounds, big(&[1, 2]));
        assert_eq!(row1.best, BigUint::from(1u32));

        let row3 = best_bound(&compact("12345,34567,56781,78123", 3), true).unwrap();
        assert_eq!(row3.distinct_bounds, big(&[3, 6, 10, 14, 15, 20, 42]));
        assert_eq!(row3.rows.len(), 70);

        let row2 = compact("12347,34567,12567", 3);
        let direct = best_bound(&row2, false).unwrap();
        assert_eq!(direct.best, BigUint::from(3u32));
        let reduced = best_bound(&row2, true).unwrap();
        assert_eq!(reduced.best, BigUint::from(2u32));
        assert_eq!(reduced.bounded_instance(), &compact("1234,3456,1256", 2));
        assert!(reduced.rows.iter().any(|r| r.s == [4, 5, 6] && r.bound == BigUint::from(2u32)));
    }

    #[test]
    fn json_shape() {
        let t = best_bound(&compact("12345,23456", 3), false).unwrap();
        let v: serde_json::Value = serde_json::to_value(&t).unwrap();
        assert_eq!(v["best"], 1);
        assert_eq!(v["distinct_bounds"], serde_json::json!([1, 3]));
        assert!(v["argmin_S"].is_array());
        let back: BoundTable = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        (2usize..=3, 1usize..=3).prop_flat_map(|(r, k)| {
            let n = k + r + 1;
            proptest::collection::vec(proptest::sample::subsequence((1..=n).collect::<Vec<_>>(), r + 2), k)
                .prop_map(move |cs| Instance::new(r, n, cs).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn surplus_failure_forces_zero(inst in arb_instance()) {
            let t = best_bound(&inst, false).unwrap();
            if surplus(&inst).unwrap() < inst.r() as i64 + 1 {
                prop_assert_eq!(t.best, BigUint::from(0u32));
            } else {
                prop_assert!(t.rows.iter().all(|r| r.bound > BigUint::from(0u32)));
            }
        }

        #[test]
        fn reduction_never_loosens_against_prunings_with_the_fresh_marking(inst in arb_instance()) {
            let lifted = append_common_marking(&inst);
            let fresh = lifted.n();
            let reduced = best_bound(&lifted, true).unwrap();
            let direct = best_bound(&lifted, false).unwrap();
            let with_fresh = direct.rows.iter().filter(|r| r.s.contains(&fresh)).map(|r| &r.bound).min().unwrap();
            prop_assert!(&reduced.best <= with_fresh);
        }
    }
}
