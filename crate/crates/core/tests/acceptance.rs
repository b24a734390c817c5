//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use confcount::bounds::best_bound;
use confcount::chow::intersection_number;
use confcount::combinatorics::{
    build_graph, count_weighted_transversals, has_perfect_matching, surplus, surplus_condition_via_matchings,
    ConfigGraph,
};
use confcount::engine::{stochastic_count, verify_reduction, CountOptions, CountReport, CountStatus, Guard};
use confcount::ffield::{combinations, Fp, PrimeField};
use confcount::groebner::{buchberger, is_groebner_basis, quotient_dimension, MonomialOrder, QuotientDimension};
use confcount::poly::FpPoly;
use confcount::{parse_instance, Format, Instance};

const ROW1: &str = "12345,23456";
const ROW2: &str = "12347,34567,12567";
const ROW3: &str = "12345,34567,56781,78123";
const ROW4: &str = "12345,12367,14578,14689,34569";

type Outcome = Result<String, String>;

fn compact(s: &str, r: usize) -> Instance {
    parse_instance(s, Format::Compact, Some(r)).expect("curated instance parses")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn big(v: u32) -> BigUint {
    BigUint::from(v)
}

fn all_prunings(inst: &Instance) -> Vec<Vec<usize>> {
    combinations(inst.n(), inst.r() + 1).into_iter().map(|s| s.into_iter().map(|i| i + 1).collect()).collect()
}

fn random_instance(rng: &mut ChaCha8Rng, r: usize, k: usize) -> Instance {
    let n = k + r + 1;
    let constraints = (0..k)
        .map(|_| {
            let mut c: Vec<usize> = sample(rng, n, r + 2).into_iter().map(|i| i + 1).collect();
            c.sort_unstable();
            c
        })
        .collect();
    Instance::new(r, n, constraints).expect("random instance is valid")
}

fn random_graph(rng: &mut ChaCha8Rng, side: usize, density: f64) -> ConfigGraph {
    let mut edges = Vec::new();
    for i in 1..=side {
        for j in 1..=side {
            if rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    ConfigGraph::new((1..=side).collect(), (1..=side).collect(), edges)
}

/// Exhaustive edge-by-edge weighting count, independent of the DP.
fn naive_transversals(g: &ConfigGraph, m: u32) -> u64 {
    let edges: Vec<(usize, usize)> = g.edges().iter().copied().collect();
    let side = g.left().len();
    fn go(t: usize, edges: &[(usize, usize)], left: &mut [u32], right: &mut [u32]) -> u64 {
        if t == edges.len() {
            return u64::from(left.iter().chain(right.iter()).all(|&c| c == 0));
        }
        let (i, j) = edges[t];
        let mut total = 0;
        for w in 0..=left[i - 1].min(right[j - 1]) {
            left[i - 1] -= w;
            right[j - 1] -= w;
            total += go(t + 1, edges, left, right);
            left[i - 1] += w;
            right[j - 1] += w;
        }
        total
    }
    go(0, &edges, &mut vec![m; side], &mut vec![m; side])
}

struct Counts {
    row1: CountReport,
    row2: CountReport,
    row3: CountReport,
}

fn criterion_1(counts: &Counts) -> Outcome {
    for (name, rep, expected) in [("row 1", &counts.row1, 1), ("row 2", &counts.row2, 2), ("row 3", &counts.row3, 3)] {
        ensure(rep.status == CountStatus::Ok && rep.count == Some(expected), || {
            format!("{name}: status {:?}, count {:?}, expected {expected}", rep.status, rep.count)
        })?;
        let (votes, total) = rep.agreement;
        ensure(votes * 5 >= 3 * total, || format!("{name}: agreement {votes}/{total}"))?;
    }
    let row4 = stochastic_count(&compact(ROW4, 3), &CountOptions::default()).map_err(|e| e.to_string())?;
    let row4_note = match (row4.status, row4.count) {
        (CountStatus::Ok, Some(4)) => format!("row 4 = 4 ({}/{})", row4.agreement.0, row4.agreement.1),
        (CountStatus::ResourceLimit, _) => "row 4 hit the resource limit (permitted)".to_string(),
        (status, count) => return Err(format!("row 4: status {status:?}, count {count:?}")),
    };
    Ok(format!(
        "d = 1, 2, 3 with agreement {}/{}, {}/{}, {}/{}; {row4_note}",
        counts.row1.agreement.0,
        counts.row1.agreement.1,
        counts.row2.agreement.0,
        counts.row2.agreement.1,
        counts.row3.agreement.0,
        counts.row3.agreement.1
    ))
}

fn criterion_2() -> Outcome {
    let cases: [(&str, Option<&[u32]>, u32); 4] = [
        (ROW1, Some(&[1, 3]), 1),
        (ROW2, Some(&[3, 6]), 3),
        (ROW3, Some(&[3, 6, 10, 14, 15, 20, 42]), 3),
        (ROW4, None, 6),
    ];
    let mut slowest = Duration::ZERO;
    for (row, distinct, best) in cases {
        let start = Instant::now();
        let table = best_bound(&compact(row, 3), false).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        if let Some(d) = distinct {
            let expected: Vec<BigUint> = d.iter().map(|&x| big(x)).collect();
            ensure(table.distinct_bounds == expected, || format!("{row}: distinct {:?}", table.distinct_bounds))?;
        }
        ensure(table.best == big(best), || format!("{row}: best {}", table.best))?;
    }
    ensure(slowest < Duration::from_secs(60), || format!("slowest table took {slowest:?}"))?;
    Ok(format!("all four rows match; slowest {slowest:.2?}"))
}

fn criterion_3() -> Outcome {
    let inst = compact(ROW3, 3);
    let pruned = build_graph(&inst).prune(&[1, 3, 5, 7]).map_err(|e| e.to_string())?;
    let t2 = count_weighted_transversals(&pruned, 2).map_err(|e| e.to_string())?;
    let t1 = count_weighted_transversals(&pruned, 1).map_err(|e| e.to_string())?;
    let chow = intersection_number(&inst, &[1, 3, 5, 7]).map_err(|e| e.to_string())?;
    ensure(t2 == big(3) && t1 == big(2) && chow == big(3), || format!("T_2 = {t2}, T_1 = {t1}, chow = {chow}"))?;
    Ok("T_2 = 3, perfect matchings = 2, intersection number = 3".into())
}

fn criterion_4() -> Outcome {
    let rep = verify_reduction(&compact(ROW2, 3), &CountOptions::default()).map_err(|e| e.to_string())?;
    ensure(rep.consistent && rep.unreduced.count == Some(2) && rep.reduced.count == Some(2), || {
        format!("unreduced {:?}, reduced {:?}", rep.unreduced.count, rep.reduced.count)
    })?;
    Ok("d(r=3) = d(r=2) = 2".into())
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    let start = Instant::now();
    for t in 0..60 {
        let r = 2 + t % 2;
        let k = 1 + (t / 2) % 4;
        let inst = random_instance(&mut rng, r, k);
        for s in all_prunings(&inst) {
            let chow = intersection_number(&inst, &s).map_err(|e| e.to_string())?;
            let dp = count_weighted_transversals(&build_graph(&inst).prune(&s).map_err(|e| e.to_string())?, r as u32 - 1)
                .map_err(|e| e.to_string())?;
            ensure(chow == dp, || format!("{inst} S={s:?}: chow {chow} vs dp {dp}"))?;
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!("60 instances, {checked} prunings agree in {elapsed:.2?}"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut naive_checked = 0;
    for t in 0..240 {
        let density = 0.25 + 0.5 * rng.gen::<f64>();
        let g = random_graph(&mut rng, 1 + t % 6, density);
        let counts: Vec<BigUint> =
            (1..=3).map(|m| count_weighted_transversals(&g, m).map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
        for m in 0..2 {
            ensure(counts[m] <= counts[m + 1], || format!("|T_{}| > |T_{}| on {}", m + 1, m + 2, g.to_json()))?;
        }
        let empty: BTreeSet<bool> = counts.iter().map(|c| *c == BigUint::default()).collect();
        ensure(empty.len() == 1, || format!("emptiness differs across levels on {}", g.to_json()))?;
        let pm = has_perfect_matching(&g).map_err(|e| e.to_string())?;
        ensure(pm == (counts[0] != BigUint::default()), || format!("matching test disagrees on {}", g.to_json()))?;
        if g.num_edges() <= 12 {
            for m in 1..=3u32 {
                let naive = naive_transversals(&g, m);
                ensure(counts[m as usize - 1] == BigUint::from(naive), || {
                    format!("DP {} vs naive {naive} at m={m} on {}", counts[m as usize - 1], g.to_json())
                })?;
            }
            naive_checked += 1;
        }
    }
    Ok(format!("240 graphs; DP = naive enumeration on {naive_checked} graphs with <= 12 edges"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut holding = 0;
    for t in 0..120 {
        let r = 2 + t % 2;
        let max_k = 8 - r;
        let k = 1 + rng.gen_range(0..max_k);
        let inst = random_instance(&mut rng, r, k);
        let by_surplus = surplus(&inst).map_err(|e| e.to_string())? == r as i64 + 1;
        let by_matchings = surplus_condition_via_matchings(&inst);
        ensure(by_surplus == by_matchings, || format!("{inst}: surplus {by_surplus} vs matchings {by_matchings}"))?;
        holding += usize::from(by_surplus);
    }
    Ok(format!("120 instances agree ({holding} satisfy the condition)"))
}

fn eval_count(polys: &[FpPoly], field: PrimeField, nvars: usize) -> u64 {
    let p = field.modulus();
    let mut count = 0;
    let mut point = vec![Fp::ZERO; nvars];
    for code in 0..p.pow(nvars as u32) {
        let mut c = code;
        for x in point.iter_mut() {
            *x = field.elem(c % p);
            c /= p;
        }
        if polys.iter().all(|f| f.eval(&point).is_zero()) {
            count += 1;
        }
    }
    count
}

fn random_poly(rng: &mut ChaCha8Rng, field: PrimeField, nvars: usize, vars: &[usize], degree: u32) -> FpPoly {
    let mut f = FpPoly::zero(field, nvars);
    for _ in 0..4 {
        let mut term = FpPoly::constant(field, nvars, field.random(rng));
        for _ in 0..rng.gen_range(0..=degree) {
            term = term.mul(&FpPoly::var(field, nvars, vars[rng.gen_range(0..vars.len())]));
        }
        f = f.add(&term);
    }
    f
}

/// Triangular system with `roots` distinct rational solutions, hidden by a
/// random affine change of coordinates and a random recombination.
fn planted_system(rng: &mut ChaCha8Rng, field: PrimeField, nvars: usize, roots: usize) -> Vec<FpPoly> {
    let var = |i| FpPoly::var(field, nvars, i);
    let mut gens = Vec::new();
    let mut f0 = FpPoly::constant(field, nvars, Fp::ONE);
    let chosen = sample(rng, field.modulus() as usize, roots);
    for a in chosen {
        f0 = f0.mul(&var(0).sub(&FpPoly::constant(field, nvars, field.elem(a as u64))));
    }
    gens.push(f0);
    for i in 1..nvars {
        let earlier: Vec<usize> = (0..i).collect();
        gens.push(var(i).sub(&random_poly(rng, field, nvars, &earlier, 2)));
    }
    // x -> A x + b with A unit lower triangular times a random permutation
    let mut images: Vec<FpPoly> = (0..nvars)
        .map(|i| {
            let mut img = var(i).add(&FpPoly::constant(field, nvars, field.random(rng)));
            for j in 0..i {
                img = img.add(&var(j).scale(field.random(rng)));
            }
            img
        })
        .collect();
    for i in (1..nvars).rev() {
        images.swap(i, rng.gen_range(0..=i));
    }
    let substitute = |f: &FpPoly| {
        let mut out = FpPoly::zero(field, nvars);
        for (m, c) in f.terms() {
            let mut term = FpPoly::constant(field, nvars, *c);
            for (i, img) in images.iter().enumerate() {
                for _ in 0..m.exponent(i) {
                    term = term.mul(img);
                }
            }
            out = out.add(&term);
        }
        out
    };
    let mut gens: Vec<FpPoly> = gens.iter().map(substitute).collect();
    for i in 1..gens.len() {
        let mult = random_poly(rng, field, nvars, &(0..nvars).collect::<Vec<_>>(), 1);
        let extra = gens[i].mul(&mult);
        gens[0] = gens[0].add(&extra);
    }
    gens
}

fn criterion_8() -> Outcome {
    let order = |n| MonomialOrder::degrevlex(n);
    let dim = |gens: &[FpPoly], n| buchberger(gens, &order(n)).map(|gb| quotient_dimension(&gb)).map_err(|e| e.to_string());

    let f101 = PrimeField::new(101).map_err(|e| e.to_string())?;
    let sq = FpPoly::from_exponents(f101, 2, &[(vec![2, 0], 1), (vec![0, 0], -1)]).map_err(|e| e.to_string())?;
    let sq2 = FpPoly::from_exponents(f101, 2, &[(vec![0, 2], 1), (vec![0, 0], -1)]).map_err(|e| e.to_string())?;
    ensure(dim(&[sq, sq2], 2)? == QuotientDimension::Finite(4), || "{x²−1, y²−1} is not 4".into())?;

    let f7 = PrimeField::new(7).map_err(|e| e.to_string())?;
    let circle =
        FpPoly::from_exponents(f7, 2, &[(vec![2, 0], 1), (vec![0, 2], 1), (vec![0, 0], -1)]).map_err(|e| e.to_string())?;
    let diag = FpPoly::from_exponents(f7, 2, &[(vec![1, 0], 1), (vec![0, 1], -1)]).map_err(|e| e.to_string())?;
    let gens = [circle, diag];
    let brute = eval_count(&gens, f7, 2);
    ensure(dim(&gens, 2)? == QuotientDimension::Finite(2) && brute == 2, || format!("circle ∩ diagonal: brute {brute}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let primes = [5u64, 7, 11, 13, 17, 19, 23, 29, 31];
    let mut systems = 0;
    for t in 0..60 {
        let field = PrimeField::new(primes[t % primes.len()]).map_err(|e| e.to_string())?;
        let nvars = 1 + t % 3;
        let roots = 1 + rng.gen_range(0..4.min(field.modulus() as usize));
        let gens = planted_system(&mut rng, field, nvars, roots);
        let gb = buchberger(&gens, &order(nvars)).map_err(|e| e.to_string())?;
        ensure(is_groebner_basis(&gb.polys(), &order(nvars)), || format!("system {t}: not a Groebner basis"))?;
        let brute = eval_count(&gens, field, nvars);
        let d = quotient_dimension(&gb);
        ensure(d == QuotientDimension::Finite(brute) && brute == roots as u64, || {
            format!("system {t} over F_{}: dimension {d}, brute {brute}, planted {roots}", field.modulus())
        })?;
        systems += 1;

        // dense random square systems: rational points never exceed the dimension
        let all: Vec<usize> = (0..nvars).collect();
        let dense: Vec<FpPoly> = (0..nvars).map(|_| random_poly(&mut rng, field, nvars, &all, 2)).collect();
        let gb = buchberger(&dense, &order(nvars)).map_err(|e| e.to_string())?;
        if let QuotientDimension::Finite(d) = quotient_dimension(&gb) {
            let brute = eval_count(&dense, field, nvars);
            ensure(brute <= d, || format!("dense system {t}: {brute} points but dimension {d}"))?;
            ensure(gb.is_unit_ideal() == (d == 0), || format!("dense system {t}: unit ideal mismatch"))?;
        }
        systems += 1;
    }
    Ok(format!("curated cases exact; {systems} random systems over p <= 31 consistent with exhaustive search"))
}

fn criterion_9(counts: &Counts) -> Outcome {
    let opts = CountOptions::default();
    let mut reports: Vec<CountReport> = vec![counts.row1.clone(), counts.row2.clone(), counts.row3.clone()];
    for (s, r) in [("1234,3456,1256", 2), ("1234,1235", 2), ("12345", 3)] {
        reports.push(stochastic_count(&compact(s, r), &opts).map_err(|e| e.to_string())?);
    }
    for rep in &reports {
        let count = rep.count.ok_or_else(|| format!("{}: no count", rep.instance))?;
        ensure(BigUint::from(count) <= *rep.best_bound(), || format!("{}: {count} exceeds bound", rep.instance))?;
        ensure(!rep.guards.contains(&Guard::BoundExceeded), || "bound guard fired".into())?;
    }
    let failing = [("1234,1234", 2), ("12345,12345", 3), ("1234,1234,1256", 2)];
    for (s, r) in failing {
        let inst = compact(s, r);
        let rep = stochastic_count(&inst, &opts).map_err(|e| e.to_string())?;
        ensure(rep.count == Some(0) && rep.trials.is_empty() && rep.short_circuit.is_some(), || {
            format!("{s}: count {:?} after {} trials", rep.count, rep.trials.len())
        })?;
    }
    Ok(format!("{} counted instances within bounds; {} surplus failures short-circuit to 0", reports.len(), failing.len()))
}

fn main() {
    let opts = CountOptions::default();
    let count = |s: &str| stochastic_count(&compact(s, 3), &opts).expect("count runs");
    let start = Instant::now();
    let counts = Counts { row1: count(ROW1), row2: count(ROW2), row3: count(ROW3) };
    println!("table counts computed in {:.2?}", start.elapsed());

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 table reproduction", Box::new(|| criterion_1(&counts))),
        ("2 bound tables", Box::new(criterion_2)),
        ("3 worked example", Box::new(criterion_3)),
        ("4 dimension reduction", Box::new(criterion_4)),
        ("5 oracle equivalence", Box::new(criterion_5)),
        ("6 matching properties", Box::new(criterion_6)),
        ("7 surplus equivalence", Box::new(criterion_7)),
        ("8 groebner engine", Box::new(criterion_8)),
        ("9 guard enforcement", Box::new(|| criterion_9(&counts))),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{:.2?}]", start.elapsed()),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {name}: {why} [{:.2?}]", start.elapsed());
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
