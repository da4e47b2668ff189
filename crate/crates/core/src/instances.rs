//! Binary linear multi-objective problems, their solutions and outcomes.
//!
//! All objectives are maximized. A problem is
//!
//! ```text
//! vmax (c_1 x, ..., c_k x)   s.t.   A x <= b,  x in {0,1}^n
//! ```
//!
//! The multi-objective multidimensional knapsack problem (MOMKP) is the special
//! case with nonnegative integral `c`, `A` and positive `b`; files in the
//! `momkp-v1` format are always validated against it.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{ChuteError, Result};

/// Identifier written in the `format` field of instance files.
pub const INSTANCE_FORMAT: &str = "momkp-v1";

/// Relative slack used by every `lhs <= rhs` feasibility test.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Tolerance on `sum(lambda) == 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Simplex samples with a component below this are redrawn.
pub const MIN_SAMPLED_WEIGHT: f64 = 1e-9;

#[inline]
pub(crate) fn fits(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + FEASIBILITY_TOL * rhs.abs().max(1.0)
}

/// A binary linear multi-objective problem.
#[derive(Clone, Debug, PartialEq)]
pub struct MomipInstance {
    name: String,
    objectives: Vec<Vec<f64>>,
    constraints: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl MomipInstance {
    /// Builds an instance after checking matrix shapes. No sign checks are made;
    /// see [`MomipInstance::validate_momkp`].
    pub fn new(
        name: impl Into<String>,
        objectives: Vec<Vec<f64>>,
        constraints: Vec<Vec<f64>>,
        rhs: Vec<f64>,
    ) -> Result<Self> {
        let k = objectives.len();
        let m = constraints.len();
        if k < 2 {
            return Err(ChuteError::dimension(format!("need at least 2 objectives, got {k}")));
        }
        if m < 1 {
            return Err(ChuteError::dimension("need at least 1 constraint"));
        }
        let n = objectives[0].len();
        if n < 1 {
            return Err(ChuteError::dimension("need at least 1 variable"));
        }
        for (l, row) in objectives.iter().enumerate() {
            if row.len() != n {
                return Err(ChuteError::dimension(format!(
                    "objectives[{l}] has {} coefficients, expected {n}",
                    row.len()
                )));
            }
        }
        for (p, row) in constraints.iter().enumerate() {
            if row.len() != n {
                return Err(ChuteError::dimension(format!(
                    "constraints[{p}] has {} coefficients, expected {n}",
                    row.len()
                )));
            }
        }
        if rhs.len() != m {
            return Err(ChuteError::dimension(format!(
                "rhs has {} entries, expected {m}",
                rhs.len()
            )));
        }
        let all = objectives.iter().chain(constraints.iter()).flatten().chain(rhs.iter());
        if let Some(bad) = all.into_iter().find(|v| !v.is_finite()) {
            return Err(ChuteError::Domain(format!("non-finite coefficient {bad}")));
        }
        Ok(Self {
            name: name.into(),
            objectives,
            constraints,
            rhs,
        })
    }

    /// Checks the MOMKP domain: integral nonnegative coefficients and positive rhs.
    pub fn validate_momkp(&self) -> Result<()> {
        let check = |what: &str, i: usize, j: usize, v: f64| -> Result<()> {
            if v < 0.0 {
                return Err(ChuteError::Domain(format!("{what}[{i}][{j}] = {v} is negative")));
            }
            if v.fract() != 0.0 {
                return Err(ChuteError::Domain(format!("{what}[{i}][{j}] = {v} is not integral")));
            }
            Ok(())
        };
        for (l, row) in self.objectives.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                check("objectives", l, j, v)?;
            }
        }
        for (p, row) in self.constraints.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                check("constraints", p, j, v)?;
            }
        }
        for (p, &b) in self.rhs.iter().enumerate() {
            if b <= 0.0 || b.fract() != 0.0 {
                return Err(ChuteError::Domain(format!(
                    "rhs[{p}] = {b} must be a positive integer"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of objectives.
    pub fn k(&self) -> usize {
        self.objectives.len()
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.objectives[0].len()
    }

    /// Number of constraints.
    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn objectives(&self) -> &[Vec<f64>] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[Vec<f64>] {
        &self.constraints
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    fn check_len(&self, x: &Solution) -> Result<()> {
        if x.len() != self.n() {
            return Err(ChuteError::dimension(format!(
                "solution has {} variables, instance has {}",
                x.len(),
                self.n()
            )));
        }
        Ok(())
    }

    /// `f(x)`.
    pub fn evaluate_outcome(&self, x: &Solution) -> Result<Outcome> {
        self.check_len(x)?;
        let values = self
            .objectives
            .iter()
            .map(|row| dot(row, x.bits()))
            .collect();
        Ok(Outcome::from_vec(values))
    }

    /// True iff every constraint `a_p x <= b_p` holds.
    pub fn is_feasible(&self, x: &Solution) -> Result<bool> {
        self.check_len(x)?;
        Ok(self
            .constraints
            .iter()
            .zip(&self.rhs)
            .all(|(row, &b)| fits(dot(row, x.bits()), b)))
    }

    /// Serializes to the `momkp-v1` JSON format, keys in canonical order.
    pub fn to_json(&self) -> String {
        let file = InstanceFileOut {
            format: INSTANCE_FORMAT,
            name: &self.name,
            k: self.k(),
            n: self.n(),
            m: self.m(),
            objectives: wrap(&self.objectives),
            constraints: wrap(&self.constraints),
            rhs: self.rhs.iter().copied().map(Num).collect(),
        };
        serde_json::to_string(&file).expect("instance serialization cannot fail")
    }

    /// Hex SHA-256 of [`MomipInstance::to_json`]; identifies the data, not the name alone.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

fn dot(row: &[f64], bits: &[u8]) -> f64 {
    row.iter()
        .zip(bits)
        .filter(|(_, &b)| b == 1)
        .map(|(&c, _)| c)
        .sum()
}

/// Parses a `momkp-v1` instance file and validates it as a MOMKP.
pub fn parse_instance(text: &str) -> Result<MomipInstance> {
    let file: InstanceFileIn = serde_json::from_str(text).map_err(|e| ChuteError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.format != INSTANCE_FORMAT {
        return Err(ChuteError::Parse {
            line: 0,
            column: 0,
            message: format!("field `format`: expected \"{INSTANCE_FORMAT}\", got {:?}", file.format),
        });
    }
    let unwrap = |rows: Vec<Vec<Num>>| -> Vec<Vec<f64>> {
        rows.into_iter()
            .map(|r| r.into_iter().map(|v| v.0).collect())
            .collect()
    };
    let objectives = unwrap(file.objectives);
    let constraints = unwrap(file.constraints);
    let rhs: Vec<f64> = file.rhs.into_iter().map(|v| v.0).collect();
    if objectives.len() != file.k {
        return Err(ChuteError::dimension(format!(
            "field `k` = {} but {} objective rows given",
            file.k,
            objectives.len()
        )));
    }
    if constraints.len() != file.m {
        return Err(ChuteError::dimension(format!(
            "field `m` = {} but {} constraint rows given",
            file.m,
            constraints.len()
        )));
    }
    if objectives.first().map(Vec::len) != Some(file.n) {
        return Err(ChuteError::dimension(format!(
            "field `n` = {} does not match objectives[0]",
            file.n
        )));
    }
    let inst = MomipInstance::new(file.name, objectives, constraints, rhs)?;
    inst.validate_momkp()?;
    Ok(inst)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFileIn {
    format: String,
    name: String,
    k: usize,
    n: usize,
    m: usize,
    objectives: Vec<Vec<Num>>,
    constraints: Vec<Vec<Num>>,
    rhs: Vec<Num>,
}

#[derive(Serialize)]
struct InstanceFileOut<'a> {
    format: &'a str,
    name: &'a str,
    k: usize,
    n: usize,
    m: usize,
    objectives: Vec<Vec<Num>>,
    constraints: Vec<Vec<Num>>,
    rhs: Vec<Num>,
}

fn wrap(rows: &[Vec<f64>]) -> Vec<Vec<Num>> {
    rows.iter()
        .map(|r| r.iter().copied().map(Num).collect())
        .collect()
}

/// A number that serializes as a JSON integer when it is integral.
#[derive(Clone, Copy, Debug)]
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.fract() == 0.0 && self.0.abs() < 9.0e15 {
            s.serialize_i64(self.0 as i64)
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(Num)
    }
}

/// Parameters of the synthetic MOMKP generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Inclusive integer range for every `c` and `a` coefficient.
    pub coeff_range: (u32, u32),
    /// Capacity tightness: `b_p = ceil(alpha * sum_j a_pj)`.
    pub tightness: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            k: 2,
            n: 20,
            m: 2,
            seed: 1,
            coeff_range: (1, 100),
            tightness: 0.5,
        }
    }
}

/// Draws a synthetic MOMKP instance. Deterministic in `cfg.seed`.
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<MomipInstance> {
    if cfg.k < 2 || cfg.n < 1 || cfg.m < 1 {
        return Err(ChuteError::parameter("need k >= 2, n >= 1, m >= 1"));
    }
    let (lo, hi) = cfg.coeff_range;
    if lo > hi {
        return Err(ChuteError::parameter(format!("empty coefficient range [{lo}, {hi}]")));
    }
    if !(cfg.tightness > 0.0 && cfg.tightness < 1.0) {
        return Err(ChuteError::parameter(format!(
            "tightness must lie in (0, 1), got {}",
            cfg.tightness
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draw_rows = |rows: usize| -> Vec<Vec<f64>> {
        (0..rows)
            .map(|_| (0..cfg.n).map(|_| rng.random_range(lo..=hi) as f64).collect())
            .collect()
    };
    let objectives = draw_rows(cfg.k);
    let constraints = draw_rows(cfg.m);
    let rhs = constraints
        .iter()
        .map(|row| (cfg.tightness * row.iter().sum::<f64>()).ceil().max(1.0))
        .collect();
    let name = format!("synthetic-k{}-n{}-m{}-s{}", cfg.k, cfg.n, cfg.m, cfg.seed);
    MomipInstance::new(name, objectives, constraints, rhs)
}

/// A 0-1 assignment to the decision variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Solution {
    bits: Vec<u8>,
}

impl Solution {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(ChuteError::Domain(format!("solution bit {b} is not 0 or 1")));
        }
        Ok(Self { bits })
    }

    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![0; n] }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Tie-break order between equal-value solutions: the vector read as the
    /// binary number `sum_j x_j 2^j`, so `(1,0) < (0,1)`.
    pub fn tie_cmp(&self, other: &Self) -> Ordering {
        self.bits.iter().rev().cmp(other.bits.iter().rev())
    }
}

impl TryFrom<Vec<u8>> for Solution {
    type Error = ChuteError;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Solution::new(bits)
    }
}

impl From<Solution> for Vec<u8> {
    fn from(s: Solution) -> Self {
        s.bits
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// The image `f(x)` of a solution in objective space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Outcome {
    values: Vec<f64>,
}

impl Outcome {
    pub fn from_vec(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `self >= other` componentwise and `self != other`. Lengths must match.
    pub(crate) fn dominates_unchecked(&self, other: &Outcome) -> bool {
        debug_assert_eq!(self.len(), other.len());
        let mut strictly = false;
        for (a, b) in self.values.iter().zip(&other.values) {
            if a < b {
                return false;
            }
            if a > b {
                strictly = true;
            }
        }
        strictly
    }
}

/// Pareto domination for maximization: `a >= b` componentwise and `a != b`.
pub fn dominates(a: &Outcome, b: &Outcome) -> Result<bool> {
    if a.len() != b.len() {
        return Err(ChuteError::dimension(format!(
            "outcomes of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.dominates_unchecked(b))
}

/// Weights of the Chebyshev scalarization: a point of the open unit simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    /// Requires every weight `> 0` and `|sum - 1| <= 1e-12`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(ChuteError::dimension("a weight vector needs at least 2 components"));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(ChuteError::Domain(format!("weight {w} is not strictly positive")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(ChuteError::Domain(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Accepts user input whose sum is within `tol` of 1 and rescales it onto the simplex.
    pub fn normalized(raw: Vec<f64>, tol: f64) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        if !((sum - 1.0).abs() <= tol) {
            return Err(ChuteError::Domain(format!("weights sum to {sum}, not 1")));
        }
        Self::new(raw.into_iter().map(|w| w / sum).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, l: usize) -> f64 {
        self.weights[l]
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = ChuteError;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        WeightVector::new(weights)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.weights
    }
}

/// Samples `count` weight vectors uniformly from the open `k`-simplex
/// (sorted-uniform gaps), redrawing any sample with a component below
/// [`MIN_SAMPLED_WEIGHT`].
pub fn sample_weight_vectors(k: usize, count: usize, seed: u64) -> Result<Vec<WeightVector>> {
    if k < 2 {
        return Err(ChuteError::parameter(format!("k must be >= 2, got {k}")));
    }
    if count < 1 {
        return Err(ChuteError::parameter("count must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut cuts = vec![0.0; k + 1];
    while out.len() < count {
        cuts[0] = 0.0;
        cuts[k] = 1.0;
        for c in &mut cuts[1..k] {
            *c = rng.random::<f64>();
        }
        cuts[1..k].sort_by(f64::total_cmp);
        let gaps: Vec<f64> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
        if gaps.iter().any(|&g| g < MIN_SAMPLED_WEIGHT) {
            continue;
        }
        out.push(WeightVector::new(gaps)?);
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// k=2, n=2, m=1: objectives [[4,1],[1,4]], constraint x1 + x2 <= 1.
    pub fn toy() -> MomipInstance {
        MomipInstance::new(
            "TOY",
            vec![vec![4.0, 1.0], vec![1.0, 4.0]],
            vec![vec![1.0, 1.0]],
            vec![1.0],
        )
        .unwrap()
    }

    pub fn sol(bits: &[u8]) -> Solution {
        Solution::new(bits.to_vec()).unwrap()
    }

    pub fn out(values: &[f64]) -> Outcome {
        Outcome::from_vec(values.to_vec())
    }
}
