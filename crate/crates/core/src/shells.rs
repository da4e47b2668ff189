//! Lower and upper shells, the bound vectors they induce, interval
//! representations, gaps and shell merges.

use serde::{Deserialize, Serialize};

use crate::error::{ChuteError, Result};
use crate::instances::{Outcome, Solution, WeightVector};
use crate::scalarization::{ChebyshevParams, ReferencePoint};

/// Tolerance for crossed bounds in [`interval_representation`].
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellKind {
    /// Feasible solutions.
    Lower,
    /// Exact optima of relaxed Chebyshev problems.
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MemberProvenance {
    Incumbent,
    RelaxationOptimal { mu: Vec<f64>, lambda: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellMember {
    pub solution: Solution,
    pub outcome: Outcome,
    pub provenance: MemberProvenance,
}

/// A finite set of solutions with their outcomes. Solutions are unique.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    kind: ShellKind,
    members: Vec<ShellMember>,
}

impl Shell {
    pub fn new(kind: ShellKind) -> Self {
        Self {
            kind,
            members: Vec::new(),
        }
    }

    /// Builds a shell, dropping repeated solutions (first occurrence wins).
    pub fn from_members(kind: ShellKind, members: impl IntoIterator<Item = ShellMember>) -> Result<Self> {
        let mut shell = Self::new(kind);
        for m in members {
            shell.insert(m)?;
        }
        Ok(shell)
    }

    /// Adds `member` unless its solution is already present. Returns whether it was added.
    pub fn insert(&mut self, member: ShellMember) -> Result<bool> {
        if let Some(first) = self.members.first() {
            if first.outcome.len() != member.outcome.len() || first.solution.len() != member.solution.len() {
                return Err(ChuteError::dimension("shell members must share k and n"));
            }
        }
        if self.members.iter().any(|m| m.solution == member.solution) {
            return Ok(false);
        }
        self.members.push(member);
        Ok(true)
    }

    pub fn kind(&self) -> ShellKind {
        self.kind
    }

    pub fn members(&self) -> &[ShellMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    Lower,
    Upper,
}

/// Where one bound component came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSource {
    /// Index into the shell's members.
    Member(usize),
    Floor,
    DefaultYStar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundVector {
    pub side: BoundSide,
    pub values: Vec<f64>,
    pub sources: Vec<BoundSource>,
}

impl BoundVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `L_l = max(floor_l, y*_l - s_inc / (lambda_l + rho))` with `s_inc` the
/// smallest Chebyshev value over the lower shell.
///
/// Any optimum `x` of the scalarized problem has value at most `s_inc`, and
/// its value is at least `(lambda_l + rho)(y*_l - f_l(x))` since the other
/// augmentation terms are nonnegative when `y* >= f(x)`.
pub fn lower_bounds(s_l: &Shell, params: &ChebyshevParams, floor: &[f64]) -> Result<BoundVector> {
    if s_l.kind() != ShellKind::Lower {
        return Err(ChuteError::ShellKind("lower bounds need a lower shell".into()));
    }
    let k = params.k();
    if floor.len() != k {
        return Err(ChuteError::dimension(format!("floor has {} components, expected {k}", floor.len())));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, m) in s_l.members().iter().enumerate() {
        if m.outcome.len() != k {
            return Err(ChuteError::dimension("shell member outcome length differs from k"));
        }
        let v = params.value_of(m.outcome.values());
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    let (idx, s_inc) = best.ok_or_else(|| ChuteError::State("lower shell is empty".into()))?;
    let y = params.y_star().values();
    let mut values = Vec::with_capacity(k);
    let mut sources = Vec::with_capacity(k);
    for l in 0..k {
        let raw = y[l] - s_inc / (params.lambda().get(l) + params.rho());
        if raw >= floor[l] {
            values.push(raw);
            sources.push(BoundSource::Member(idx));
        } else {
            values.push(floor[l]);
            sources.push(BoundSource::Floor);
        }
    }
    Ok(BoundVector {
        side: BoundSide::Lower,
        values,
        sources,
    })
}

/// True iff `L_lbar <= f_lbar` and `L_l >= f_l` for every other `l`. Exact comparisons.
pub fn eligible_for_upper(outcome: &Outcome, l_bar: usize, lower: &BoundVector) -> Result<bool> {
    if outcome.len() != lower.len() {
        return Err(ChuteError::dimension(format!(
            "outcome has {} components, bounds have {}",
            outcome.len(),
            lower.len()
        )));
    }
    if l_bar >= lower.len() {
        return Err(ChuteError::dimension(format!("objective index {l_bar} out of range")));
    }
    let f = outcome.values();
    Ok(f.iter().zip(&lower.values).enumerate().all(|(l, (&fl, &ll))| {
        if l == l_bar {
            ll <= fl
        } else {
            ll >= fl
        }
    }))
}

/// `U_lbar` = smallest `f_lbar` over members eligible for `lbar`, never above
/// `y*_lbar`; `y*_lbar` when no member is eligible.
pub fn upper_bounds(s_u: &Shell, lower: &BoundVector, y_star: &ReferencePoint) -> Result<BoundVector> {
    if s_u.kind() != ShellKind::Upper {
        return Err(ChuteError::ShellKind("upper bounds need an upper shell".into()));
    }
    let k = lower.len();
    if y_star.len() != k {
        return Err(ChuteError::dimension("y* and L differ in length"));
    }
    let mut values = y_star.values().to_vec();
    let mut sources = vec![BoundSource::DefaultYStar; k];
    for (i, m) in s_u.members().iter().enumerate() {
        for l_bar in 0..k {
            if eligible_for_upper(&m.outcome, l_bar, lower)? {
                let v = m.outcome.values()[l_bar];
                if v < values[l_bar] {
                    values[l_bar] = v;
                    sources[l_bar] = BoundSource::Member(i);
                }
            }
        }
    }
    Ok(BoundVector {
        side: BoundSide::Upper,
        values,
        sources,
    })
}

/// `lambda`, the intervals `[L_l, U_l]` and the gap in percent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalRepresentation {
    pub lambda: WeightVector,
    pub intervals: Vec<[f64; 2]>,
    pub gap: Vec<f64>,
}

impl IntervalRepresentation {
    pub fn lower(&self) -> Vec<f64> {
        self.intervals.iter().map(|i| i[0]).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.intervals.iter().map(|i| i[1]).collect()
    }
}

pub fn interval_representation(
    lower: &BoundVector,
    upper: &BoundVector,
    lambda: &WeightVector,
) -> Result<IntervalRepresentation> {
    if lower.len() != upper.len() || lower.len() != lambda.len() {
        return Err(ChuteError::dimension("L, U and lambda must have equal length"));
    }
    for (l, (lo, hi)) in lower.values.iter().zip(&upper.values).enumerate() {
        if *lo > hi + BOUND_TOL {
            return Err(ChuteError::Consistency(format!(
                "bounds crossed for objective {}: L = {lo} > U = {hi}",
                l + 1
            )));
        }
    }
    Ok(IntervalRepresentation {
        lambda: lambda.clone(),
        intervals: lower.values.iter().zip(&upper.values).map(|(&a, &b)| [a, b]).collect(),
        gap: gap_vector(&lower.values, &upper.values)?,
    })
}

/// `100 (U_l - L_l) / U_l`, clamped below at 0 for bounds equal within tolerance.
pub fn gap_vector(lower: &[f64], upper: &[f64]) -> Result<Vec<f64>> {
    if lower.len() != upper.len() {
        return Err(ChuteError::dimension("L and U differ in length"));
    }
    lower
        .iter()
        .zip(upper)
        .map(|(&lo, &hi)| {
            if hi > 0.0 {
                Ok((100.0 * (hi - lo) / hi).max(0.0))
            } else {
                Err(ChuteError::Domain(format!("gap undefined for U = {hi}")))
            }
        })
        .collect()
}

fn merge(shells: &[Shell], kind: ShellKind, keep: impl Fn(&Outcome, &Outcome) -> bool) -> Result<Shell> {
    if let Some(bad) = shells.iter().find(|s| s.kind() != kind) {
        return Err(ChuteError::ShellKind(format!(
            "cannot merge a {:?} shell into {:?} shells",
            bad.kind(),
            kind
        )));
    }
    let pooled = Shell::from_members(kind, shells.iter().flat_map(|s| s.members().iter().cloned()))?;
    let members = pooled.members();
    let kept = members
        .iter()
        .filter(|m| members.iter().all(|o| keep(&m.outcome, &o.outcome)))
        .cloned();
    Shell::from_members(kind, kept)
}

/// Union of lower shells without dominated members.
pub fn merge_lower(shells: &[Shell]) -> Result<Shell> {
    merge(shells, ShellKind::Lower, |m, o| !o.dominates_unchecked(m))
}

/// Union of upper shells without dominating members.
pub fn merge_upper(shells: &[Shell]) -> Result<Shell> {
    merge(shells, ShellKind::Upper, |m, o| !m.dominates_unchecked(o))
}
