//! Surrogate relaxations and the quasi-subgradient dual search.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bnb::{Region, ScalarSolver, SolveStatus, SolveTask};
use crate::error::{ChuteError, Result};
use crate::instances::{fits, MomipInstance, Solution};
use crate::scalarization::ChebyshevParams;

/// Improvement threshold of the dual search (absolute).
pub const DUAL_IMPROVEMENT_TOL: f64 = 1e-9;

/// Surrogate multipliers `mu >= 0`, `mu != 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Multipliers {
    mu: Vec<f64>,
}

impl Multipliers {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(ChuteError::parameter("multipliers must not be empty"));
        }
        if mu.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ChuteError::parameter("multipliers must be finite and nonnegative"));
        }
        if mu.iter().all(|v| *v == 0.0) {
            return Err(ChuteError::parameter("multipliers must not all be zero"));
        }
        Ok(Self { mu })
    }

    /// `(1, ..., 1)`.
    pub fn ones(m: usize) -> Result<Self> {
        Self::new(vec![1.0; m])
    }

    /// `(1, ..., 1) / ||(1, ..., 1)||`.
    pub fn unit_uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / (m as f64).sqrt(); m])
    }

    pub fn values(&self) -> &[f64] {
        &self.mu
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.mu.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl TryFrom<Vec<f64>> for Multipliers {
    type Error = ChuteError;

    fn try_from(mu: Vec<f64>) -> Result<Self> {
        Self::new(mu)
    }
}

impl From<Multipliers> for Vec<f64> {
    fn from(m: Multipliers) -> Self {
        m.mu
    }
}

/// The instance with its `m` constraints replaced by `sum_p mu_p a_p x <= sum_p mu_p b_p`.
#[derive(Clone, Debug)]
pub struct SurrogateInstance<'a> {
    base: &'a MomipInstance,
    mu: Multipliers,
    row: Vec<f64>,
    rhs: f64,
}

impl<'a> SurrogateInstance<'a> {
    pub fn base(&self) -> &'a MomipInstance {
        self.base
    }

    pub fn mu(&self) -> &Multipliers {
        &self.mu
    }

    pub fn row(&self) -> &[f64] {
        &self.row
    }

    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    pub fn is_feasible(&self, x: &Solution) -> Result<bool> {
        if x.len() != self.row.len() {
            return Err(ChuteError::dimension(format!(
                "solution has {} variables, instance has {}",
                x.len(),
                self.row.len()
            )));
        }
        let lhs: f64 = self.row.iter().zip(x.bits()).map(|(a, &b)| a * f64::from(b)).sum();
        Ok(fits(lhs, self.rhs))
    }
}

pub fn make_surrogate<'a>(inst: &'a MomipInstance, mu: &Multipliers) -> Result<SurrogateInstance<'a>> {
    if mu.len() != inst.m() {
        return Err(ChuteError::dimension(format!(
            "{} multipliers for {} constraints",
            mu.len(),
            inst.m()
        )));
    }
    let mut row = vec![0.0; inst.n()];
    for (&w, a) in mu.values().iter().zip(inst.constraints()) {
        for (r, &v) in row.iter_mut().zip(a) {
            *r += w * v;
        }
    }
    let rhs = mu.values().iter().zip(inst.rhs()).map(|(w, b)| w * b).sum();
    Ok(SurrogateInstance {
        base: inst,
        mu: mu.clone(),
        row,
        rhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Stall,
    Time,
    Exact,
}

/// Settings of the dual search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualConfig {
    /// Stop once the number of consecutive non-improving iterations exceeds this.
    pub stall_limit: u32,
    /// Seconds.
    pub time_limit: f64,
    /// Optional deadline for each relaxation solve; a timed-out solve
    /// contributes its best bound as the dual value.
    pub iteration_deadline: Option<f64>,
    pub alpha0: f64,
}

impl DualConfig {
    pub fn new(stall_limit: u32, time_limit: f64) -> Self {
        Self {
            stall_limit,
            time_limit,
            iteration_deadline: None,
            alpha0: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.stall_limit == 0 {
            return Err(ChuteError::parameter("stall limit N must be at least 1"));
        }
        if !(self.time_limit > 0.0) {
            return Err(ChuteError::parameter("dual time limit must be positive"));
        }
        if self.iteration_deadline.is_some_and(|d| !(d > 0.0)) {
            return Err(ChuteError::parameter("iteration deadline must be positive"));
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(ChuteError::parameter("alpha0 must be positive"));
        }
        Ok(())
    }
}

/// One dual iteration. `alpha` is the step taken after evaluating `mu`
/// (0 on the final iteration); `halved` marks a rejected all-zero projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualIteration {
    pub t: u32,
    pub mu: Vec<f64>,
    pub s_mu: f64,
    pub alpha: f64,
    pub improved: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub halved: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualTrace {
    pub iterations: Vec<DualIteration>,
    pub best_mu: Multipliers,
    pub best_value: f64,
    pub stop_reason: StopReason,
    /// Seconds.
    pub elapsed: f64,
}

impl DualTrace {
    /// One JSON object per iteration, newline-terminated.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for it in &self.iterations {
            out.push_str(&serde_json::to_string(it).expect("iteration serializes"));
            out.push('\n');
        }
        out
    }
}

/// Searches for surrogate multipliers with a large relaxation value
/// `s(mu) = min ChebRLX(X'_0(mu), lambda)`.
///
/// Starts from the unit uniform vector and moves along the normalized
/// constraint violation of the relaxation optimum with step
/// `alpha0 / (1 + t)`, projecting onto the nonnegative orthant and back onto
/// the unit sphere. Stops when the relaxation optimum is feasible for the
/// original problem (the bound is then exact), when the stall count exceeds
/// `stall_limit`, or once `time_limit` has elapsed.
pub fn suboptimal_multipliers<S: ScalarSolver + ?Sized>(
    inst: &MomipInstance,
    params: &ChebyshevParams,
    config: &DualConfig,
    solver: &S,
) -> Result<DualTrace> {
    config.validate()?;
    let start = Instant::now();
    let mut mu = Multipliers::unit_uniform(inst.m())?;
    let mut best_mu = mu.clone();
    let mut best_value = f64::NEG_INFINITY;
    let mut stall: u32 = 0;
    let mut alpha_scale = 1.0;
    let mut iterations = Vec::new();

    for t in 0u32.. {
        let sur = make_surrogate(inst, &mu)?;
        let task = SolveTask::new(
            Region::Surrogate(&sur),
            params,
            config.iteration_deadline.unwrap_or(f64::INFINITY),
        );
        let report = solver
            .solve_chebyshev(&task)
            .map_err(|e| e.at_stage(format!("dual iteration {t}")))?;
        let (s_mu, x) = match (report.status, report.incumbent) {
            (SolveStatus::Optimal, Some(x)) => (report.objective, Some(x)),
            (SolveStatus::TimeLimit, x) => (report.best_bound, x),
            _ => {
                return Err(ChuteError::State(format!(
                    "surrogate relaxation infeasible at dual iteration {t}"
                )))
            }
        };

        let improved = s_mu > best_value + DUAL_IMPROVEMENT_TOL;
        if improved {
            best_value = s_mu;
            best_mu = mu.clone();
            stall = 0;
        } else {
            stall += 1;
        }

        let exact = report.status == SolveStatus::Optimal
            && x.as_ref().map(|x| inst.is_feasible(x)).transpose()?.unwrap_or(false);
        let stop = if exact {
            Some(StopReason::Exact)
        } else if stall > config.stall_limit {
            Some(StopReason::Stall)
        } else if start.elapsed().as_secs_f64() > config.time_limit {
            Some(StopReason::Time)
        } else {
            None
        };
        if let Some(stop_reason) = stop {
            iterations.push(DualIteration {
                t,
                mu: mu.values().to_vec(),
                s_mu,
                alpha: 0.0,
                improved,
                halved: false,
            });
            return Ok(DualTrace {
                iterations,
                best_mu,
                best_value,
                stop_reason,
                elapsed: start.elapsed().as_secs_f64(),
            });
        }

        // A timed-out solve without incumbent gives no direction; shrink the step and retry.
        let direction = match &x {
            Some(x) => violation(inst, x),
            None => vec![0.0; inst.m()],
        };
        let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        let alpha = config.alpha0 * alpha_scale / (1.0 + f64::from(t));
        let mut halved = false;
        let candidate: Vec<f64> = if norm > 0.0 {
            mu.values()
                .iter()
                .zip(&direction)
                .map(|(m, d)| (m + alpha * d / norm).max(0.0))
                .collect()
        } else {
            vec![0.0; inst.m()]
        };
        let c_norm = candidate.iter().map(|v| v * v).sum::<f64>().sqrt();
        iterations.push(DualIteration {
            t,
            mu: mu.values().to_vec(),
            s_mu,
            alpha,
            improved,
            halved: false,
        });
        if c_norm > 0.0 {
            mu = Multipliers::new(candidate.into_iter().map(|v| v / c_norm).collect())?;
        } else {
            alpha_scale *= 0.5;
            halved = true;
        }
        if halved {
            iterations.last_mut().expect("just pushed").halved = true;
        }
    }
    unreachable!("the dual loop only exits by returning")
}

/// `d_p = a_p x - b_p`.
fn violation(inst: &MomipInstance, x: &Solution) -> Vec<f64> {
    inst.constraints()
        .iter()
        .zip(inst.rhs())
        .map(|(a, b)| a.iter().zip(x.bits()).map(|(v, &xb)| v * f64::from(xb)).sum::<f64>() - b)
        .collect()
}
