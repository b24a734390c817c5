//! Polynomial systems whose solution count is a configuration count.
//!
//! Markings `1..=r+1` are pinned to the standard frame `e_1, ..., e_r,
//! (1, ..., 1)`. Every other marking gets `r` coordinate unknowns and one
//! random affine normalization. For each constraint `I_j`, a generic target
//! configuration is sampled and its anchored determinant ratios `λ_d` are
//! imposed on the unknown configuration. Rabinowitsch variables keep the
//! denominator minors (or, in `full` mode, every maximal minor) away from
//! zero.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffield::{combinations, sample_general_config, Fp, FpMatrix, PrimeField};
use crate::instance::Instance;
use crate::poly::{FpPoly, MAX_DEGREE, MAX_VARS};

/// Which minors are forced to be nonzero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Saturation {
    /// The denominator minors of every imposed ratio.
    #[default]
    Denominators,
    /// Every maximal minor of every constraint's point matrix.
    Full,
}

impl std::str::FromStr for Saturation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "denominators" => Ok(Saturation::Denominators),
            "full" => Ok(Saturation::Full),
            other => Err(Error::Parse(format!("unknown saturation mode {other:?}"))),
        }
    }
}

/// How the saturating minors enter the system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rabinowitsch {
    /// One variable `u` with `u * D - 1`, `D` the product of all saturating minors.
    Single,
    /// One variable `u_t` per saturating minor `m_t`, with `u_t * m_t - 1`.
    #[default]
    PerFactor,
}

impl std::str::FromStr for Rabinowitsch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Rabinowitsch::Single),
            "per-factor" | "per_factor" => Ok(Rabinowitsch::PerFactor),
            other => Err(Error::Parse(format!("unknown Rabinowitsch form {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemOptions {
    pub saturation: Saturation,
    pub rabinowitsch: Rabinowitsch,
}

/// Column positions (into the ascending label list of a constraint) of the
/// four minors behind one ratio `λ_d = m(â,ĉ)·m(b̂,d̂) / (m(â,d̂)·m(b̂,ĉ))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioMinors {
    /// Label `d`.
    pub d: usize,
    pub num: [Vec<usize>; 2],
    pub den: [Vec<usize>; 2],
}

/// Minors for every ratio of a constraint with the given ascending labels.
///
/// The anchor `(a, b, c)` is the three smallest labels and `d` runs over the
/// rest; `m(x̂, ŷ)` keeps every column except `x` and `y`, in ascending order.
pub fn ratio_minors(labels: &[usize]) -> Vec<RatioMinors> {
    assert!(labels.len() >= 4, "need at least four labels");
    let without = |x: usize, y: usize| -> Vec<usize> { (0..labels.len()).filter(|&t| t != x && t != y).collect() };
    (3..labels.len())
        .map(|d| RatioMinors {
            d: labels[d],
            num: [without(0, 2), without(1, d)],
            den: [without(0, d), without(1, 2)],
        })
        .collect()
}

/// The ratios `λ_d` of a configuration whose columns carry `labels`
/// (ascending), as `(d, λ_d)` pairs.
pub fn invariants_of(field: PrimeField, config: &FpMatrix, labels: &[usize]) -> Result<Vec<(usize, Fp)>> {
    assert_eq!(config.cols(), labels.len(), "one column per label");
    assert_eq!(config.rows() + 2, labels.len(), "need r+2 points");
    let det = |cols: &[usize]| config.select_columns(cols).det(field);
    ratio_minors(labels)
        .into_iter()
        .map(|rm| {
            let num = field.mul(det(&rm.num[0])?, det(&rm.num[1])?);
            let den = field.mul(det(&rm.den[0])?, det(&rm.den[1])?);
            let lambda = field.div(num, den).ok_or(Error::DegenerateMinor)?;
            if lambda.is_zero() {
                return Err(Error::DegenerateMinor);
            }
            Ok((rm.d, lambda))
        })
        .collect()
}

/// Sampled target for one constraint.
#[derive(Clone, Debug)]
pub struct Target {
    pub labels: Vec<usize>,
    pub config: FpMatrix,
    pub invariants: Vec<(usize, Fp)>,
}

#[derive(Clone, Debug)]
enum PointSource {
    Fixed(Vec<Fp>),
    /// First coordinate variable.
    Unknown(usize),
}

/// Square polynomial system for one stochastic trial.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    field: PrimeField,
    r: usize,
    options: SystemOptions,
    unknown_markings: Vec<usize>,
    coord_names: Vec<String>,
    normalizations: Vec<FpPoly>,
    invariant_equations: Vec<FpPoly>,
    saturating: Vec<FpPoly>,
    targets: Vec<Target>,
}

impl ConstraintSystem {
    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn options(&self) -> SystemOptions {
        self.options
    }

    /// The rigidified markings `1..=r+1`.
    pub fn frame_markings(&self) -> Vec<usize> {
        (1..=self.r + 1).collect()
    }

    pub fn unknown_markings(&self) -> &[usize] {
        &self.unknown_markings
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn num_coordinates(&self) -> usize {
        self.coord_names.len()
    }

    pub fn num_rabinowitsch(&self) -> usize {
        match self.options.rabinowitsch {
            Rabinowitsch::Single => 1,
            Rabinowitsch::PerFactor => self.saturating.len(),
        }
    }

    pub fn num_variables(&self) -> usize {
        self.num_coordinates() + self.num_rabinowitsch()
    }

    pub fn num_equations(&self) -> usize {
        self.normalizations.len() + self.invariant_equations.len() + self.num_rabinowitsch()
    }

    /// Variable names: `y_i_l` for coordinate `l` of marking `i`, then `u`
    /// (single form) or `u_1, u_2, ...` (per-factor form).
    pub fn variable_names(&self) -> Vec<String> {
        let mut names = self.coord_names.clone();
        match self.options.rabinowitsch {
            Rabinowitsch::Single => names.push("u".into()),
            Rabinowitsch::PerFactor => names.extend((1..=self.saturating.len()).map(|t| format!("u_{t}"))),
        }
        names
    }

    /// Minors kept away from zero, in the coordinate ring.
    pub fn saturating_minors(&self) -> &[FpPoly] {
        &self.saturating
    }

    /// Normalizations, then ratio equations (by constraint, then `d`).
    pub fn base_equations(&self) -> Vec<FpPoly> {
        self.normalizations.iter().chain(&self.invariant_equations).cloned().collect()
    }

    /// All equations in the full ring of [`Self::num_variables`] variables.
    pub fn equations(&self) -> Result<Vec<FpPoly>> {
        let nv = self.num_variables();
        if nv > MAX_VARS {
            return Err(Error::TooManyVariables { requested: nv, max: MAX_VARS });
        }
        let f = self.field;
        let lift = |p: &FpPoly| FpPoly::from_terms(f, nv, p.terms().iter().copied());
        let mut eqs: Vec<FpPoly> = self.base_equations().iter().map(lift).collect();
        let minus_one = FpPoly::constant(f, nv, f.neg(Fp::ONE));
        match self.options.rabinowitsch {
            Rabinowitsch::Single => {
                let degree: u32 = self.saturating.iter().map(FpPoly::total_degree).sum();
                if degree + 1 > MAX_DEGREE {
                    return Err(Error::ResourceLimit(format!("saturating product has degree {degree}")));
                }
                let mut d = FpPoly::constant(f, nv, Fp::ONE);
                for m in &self.saturating {
                    d = d.mul(&lift(m));
                }
                let u = FpPoly::var(f, nv, self.num_coordinates());
                eqs.push(u.mul(&d).add(&minus_one));
            }
            Rabinowitsch::PerFactor => {
                for (t, m) in self.saturating.iter().enumerate() {
                    let u = FpPoly::var(f, nv, self.num_coordinates() + t);
                    eqs.push(u.mul(&lift(m)).add(&minus_one));
                }
            }
        }
        Ok(eqs)
    }

    /// Extends coordinate values by the Rabinowitsch values `1/D` (or
    /// `1/m_t`); `None` when a saturating minor vanishes.
    pub fn complete_point(&self, coords: &[Fp]) -> Option<Vec<Fp>> {
        assert_eq!(coords.len(), self.num_coordinates());
        let f = self.field;
        let values: Vec<Fp> = self.saturating.iter().map(|m| m.eval(coords)).collect();
        let mut point = coords.to_vec();
        match self.options.rabinowitsch {
            Rabinowitsch::Single => {
                let d = values.iter().fold(Fp::ONE, |acc, &v| f.mul(acc, v));
                point.push(f.inv(d)?);
            }
            Rabinowitsch::PerFactor => {
                for v in values {
                    point.push(f.inv(v)?);
                }
            }
        }
        Some(point)
    }

    /// Coordinates of marking `i` at a coordinate assignment.
    pub fn point_of(&self, marking: usize, coords: &[Fp]) -> Vec<Fp> {
        match self.source(marking) {
            PointSource::Fixed(v) => v,
            PointSource::Unknown(base) => coords[base..base + self.r].to_vec(),
        }
    }

    fn source(&self, marking: usize) -> PointSource {
        point_source(self.r, &self.unknown_markings, marking)
    }

    /// Plain-text dump: comment header, then one equation per line.
    pub fn dump(&self) -> Result<String> {
        let names = self.variable_names();
        let mut out = String::new();
        writeln!(out, "# prime {}", self.field.modulus()).expect("string write");
        writeln!(out, "# variables {}", names.join(" ")).expect("string write");
        for eq in self.equations()? {
            writeln!(out, "{}", eq.display_with(&names)).expect("string write");
        }
        Ok(out)
    }
}

fn point_source(r: usize, unknown: &[usize], marking: usize) -> PointSource {
    if marking <= r {
        let mut e = vec![Fp::ZERO; r];
        e[marking - 1] = Fp::ONE;
        PointSource::Fixed(e)
    } else if marking == r + 1 {
        PointSource::Fixed(vec![Fp::ONE; r])
    } else {
        let pos = unknown.binary_search(&marking).expect("unknown marking");
        PointSource::Unknown(pos * r)
    }
}

/// Signed permutations of `0..n` (Leibniz expansion terms).
fn signed_permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    fn rec(k: usize, perm: &mut Vec<usize>, odd: bool, out: &mut Vec<(Vec<usize>, bool)>) {
        if k == perm.len() {
            out.push((perm.clone(), odd));
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            rec(k + 1, perm, if i == k { odd } else { !odd }, out);
            perm.swap(k, i);
        }
    }
    rec(0, &mut perm, false, &mut out);
    out
}

/// Symbolic determinant of the square matrix whose columns are `cols`.
fn symbolic_det(field: PrimeField, nvars: usize, cols: &[Vec<FpPoly>], perms: &[(Vec<usize>, bool)]) -> FpPoly {
    let mut det = FpPoly::zero(field, nvars);
    for (perm, odd) in perms {
        let mut term = FpPoly::constant(field, nvars, Fp::ONE);
        for (row, &col) in perm.iter().enumerate() {
            term = term.mul(&cols[col][row]);
            if term.is_zero() {
                break;
            }
        }
        det = if *odd { det.sub(&term) } else { det.add(&term) };
    }
    det
}

/// Builds the square system for `inst` with freshly sampled targets.
pub fn build_system<R: Rng + ?Sized>(
    inst: &Instance,
    field: PrimeField,
    rng: &mut R,
    options: SystemOptions,
) -> Result<ConstraintSystem> {
    let r = inst.r();
    let mut targets = Vec::with_capacity(inst.k());
    for labels in inst.constraints() {
        let config = sample_general_config(field, r, r + 2, rng)?;
        let invariants = invariants_of(field, &config, labels)?;
        targets.push(Target { labels: labels.clone(), config, invariants });
    }
    let unknown: Vec<usize> = (r + 2..=inst.n()).collect();
    let normal_coeffs: Vec<Fp> = (0..unknown.len() * r).map(|_| field.random_nonzero(rng)).collect();
    build_system_with_targets(inst, field, targets, &normal_coeffs, options)
}

/// Builds the system for prescribed targets and normalization coefficients
/// (`normal_coeffs[pos * r + l]` for the `pos`-th unknown marking).
pub fn build_system_with_targets(
    inst: &Instance,
    field: PrimeField,
    targets: Vec<Target>,
    normal_coeffs: &[Fp],
    options: SystemOptions,
) -> Result<ConstraintSystem> {
    inst.validate().map_err(Error::Invalid)?;
    let r = inst.r();
    let unknown: Vec<usize> = (r + 2..=inst.n()).collect();
    let ncoords = unknown.len() * r;
    if ncoords > MAX_VARS {
        return Err(Error::TooManyVariables { requested: ncoords, max: MAX_VARS });
    }
    assert_eq!(targets.len(), inst.k());
    assert_eq!(normal_coeffs.len(), ncoords);

    let coord_names: Vec<String> =
        unknown.iter().flat_map(|i| (1..=r).map(move |l| format!("y_{i}_{l}"))).collect();

    let column = |marking: usize| -> Vec<FpPoly> {
        match point_source(r, &unknown, marking) {
            PointSource::Fixed(v) => v.into_iter().map(|c| FpPoly::constant(field, ncoords, c)).collect(),
            PointSource::Unknown(base) => (0..r).map(|l| FpPoly::var(field, ncoords, base + l)).collect(),
        }
    };

    let normalizations: Vec<FpPoly> = (0..unknown.len())
        .map(|pos| {
            let terms = (0..r).map(|l| (crate::poly::Monomial::var(pos * r + l), normal_coeffs[pos * r + l]));
            FpPoly::from_terms(field, ncoords, terms).sub(&FpPoly::constant(field, ncoords, Fp::ONE))
        })
        .collect();

    let perms = signed_permutations(r);
    let mut invariant_equations = Vec::new();
    let mut saturating = Vec::new();
    let mut seen: HashSet<Vec<(crate::poly::Monomial, Fp)>> = HashSet::new();
    let mut push_factor = |m: FpPoly, saturating: &mut Vec<FpPoly>| -> Result<()> {
        if let Some(c) = m.as_constant() {
            // minors of frame points only
            return if c.is_zero() { Err(Error::DegenerateMinor) } else { Ok(()) };
        }
        if seen.insert(m.monic().terms().to_vec()) {
            saturating.push(m);
        }
        Ok(())
    };

    for (labels, target) in inst.constraints().iter().zip(&targets) {
        assert_eq!(&target.labels, labels, "targets follow constraint order");
        let cols: Vec<Vec<FpPoly>> = labels.iter().map(|&i| column(i)).collect();
        let minor = |idx: &[usize]| -> FpPoly {
            let chosen: Vec<Vec<FpPoly>> = idx.iter().map(|&t| cols[t].clone()).collect();
            symbolic_det(field, ncoords, &chosen, &perms)
        };
        for (rm, &(d, lambda)) in ratio_minors(labels).iter().zip(&target.invariants) {
            debug_assert_eq!(rm.d, d);
            let (n0, n1) = (minor(&rm.num[0]), minor(&rm.num[1]));
            let (d0, d1) = (minor(&rm.den[0]), minor(&rm.den[1]));
            let eq = n0.mul(&n1).sub(&d0.mul(&d1).scale(lambda));
            invariant_equations.push(eq);
            if options.saturation == Saturation::Denominators {
                push_factor(d0, &mut saturating)?;
                push_factor(d1, &mut saturating)?;
            }
        }
        if options.saturation == Saturation::Full {
            for idx in combinations(labels.len(), r) {
                push_factor(minor(&idx), &mut saturating)?;
            }
        }
    }

    Ok(ConstraintSystem {
        field,
        r,
        options,
        unknown_markings: unknown,
        coord_names,
        normalizations,
        invariant_equations,
        saturating,
        targets,
    })
}
