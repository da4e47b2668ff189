//! Deadline-aware branch-and-bound over binary feasible sets.
//!
//! The solver plays the role of a MIP solver: it minimizes the augmented
//! Chebyshev function (or maximizes a single objective) and, when the budget
//! runs out, reports the incumbent together with a valid best bound.
//!
//! Node bounds come from fractional knapsacks. For each objective `l` an upper
//! bound `UB_l` on `f_l` over the subtree is the minimum of the fractional
//! knapsack values over every constraint row and over the aggregated row
//! `sum_p a_p x <= sum_p b_p`. Since the scalarizing function is
//! nonincreasing in every outcome component, evaluating it at `UB` bounds the
//! subtree from below.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{ChuteError, Result};
use crate::instances::{fits, MomipInstance, Outcome, Solution, FEASIBILITY_TOL};
use crate::scalarization::{chebyshev_value, ChebyshevParams};
use crate::surrogate::SurrogateInstance;

/// Largest `n` accepted by [`brute_force_chebyshev`].
pub const MAX_BRUTE_FORCE_N: usize = 25;

/// The clock is read once every this many nodes.
const DEADLINE_CHECK_INTERVAL: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// The wall-clock deadline or the node budget ran out first.
    TimeLimit,
    Infeasible,
}

/// Variable order and branch direction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchPolicy {
    /// Variables by `sum_l c_lj / sum_p a_pj` descending (index breaks ties),
    /// the `x_j = 1` branch first.
    #[default]
    BangForBuckOneFirst,
}

/// Outcome of one solve.
///
/// For minimization `best_bound <= objective`; for [`ScalarSolver::maximize_objective`]
/// the signs flip and `best_bound >= objective`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub incumbent: Option<Solution>,
    pub outcome: Option<Outcome>,
    pub objective: f64,
    pub best_bound: f64,
    /// Seconds.
    pub elapsed: f64,
    pub nodes: u64,
    pub policy: BranchPolicy,
}

/// The feasible set a task is solved over.
#[derive(Clone, Copy, Debug)]
pub enum Region<'a> {
    Original(&'a MomipInstance),
    Surrogate(&'a SurrogateInstance<'a>),
}

impl<'a> Region<'a> {
    pub fn instance(&self) -> &'a MomipInstance {
        match *self {
            Region::Original(inst) => inst,
            Region::Surrogate(s) => s.base(),
        }
    }
}

/// One scalarized solve.
#[derive(Clone, Debug)]
pub struct SolveTask<'a> {
    pub region: Region<'a>,
    pub params: &'a ChebyshevParams,
    /// Seconds; `f64::INFINITY` for no deadline.
    pub deadline: f64,
    /// Optional node budget. Exhausting it reports [`SolveStatus::TimeLimit`]
    /// and, unlike the clock, is reproducible.
    pub node_limit: Option<u64>,
    pub policy: BranchPolicy,
}

impl<'a> SolveTask<'a> {
    pub fn new(region: Region<'a>, params: &'a ChebyshevParams, deadline: f64) -> Self {
        Self {
            region,
            params,
            deadline,
            node_limit: None,
            policy: BranchPolicy::default(),
        }
    }

    pub fn with_node_limit(mut self, limit: Option<u64>) -> Self {
        self.node_limit = limit;
        self
    }
}

/// The single-objective MIP solver contract the engine relies on.
pub trait ScalarSolver {
    /// Minimizes the augmented Chebyshev function over the task's region.
    fn solve_chebyshev(&self, task: &SolveTask<'_>) -> Result<SolveReport>;

    /// Maximizes objective `l` (0-based) over the original feasible set.
    fn maximize_objective(&self, inst: &MomipInstance, l: usize, deadline: f64)
        -> Result<SolveReport>;
}

/// Depth-first branch-and-bound, see the module docs.
#[derive(Clone, Copy, Debug, Default)]
pub struct BranchAndBound;

impl ScalarSolver for BranchAndBound {
    fn solve_chebyshev(&self, task: &SolveTask<'_>) -> Result<SolveReport> {
        let inst = task.region.instance();
        if task.params.k() != inst.k() {
            return Err(ChuteError::dimension(format!(
                "parameters for k = {}, instance has k = {}",
                task.params.k(),
                inst.k()
            )));
        }
        let problem = Problem::from_region(task.region)?;
        let params = task.params;
        let scalar = |f: &[f64]| params.value_of(f);
        let all: Vec<usize> = (0..inst.k()).collect();
        let raw = problem.search(&scalar, &all, task.deadline, task.node_limit, task.policy)?;
        let mut report = raw.into_report(inst, task.policy, |x| {
            let outcome = inst.evaluate_outcome(x)?;
            let value = chebyshev_value(&outcome, params)?;
            Ok((outcome, value))
        })?;
        if report.status == SolveStatus::Optimal {
            report.best_bound = report.objective;
        }
        Ok(report)
    }

    fn maximize_objective(
        &self,
        inst: &MomipInstance,
        l: usize,
        deadline: f64,
    ) -> Result<SolveReport> {
        if l >= inst.k() {
            return Err(ChuteError::parameter(format!(
                "objective index {l} out of range for k = {}",
                inst.k()
            )));
        }
        let problem = Problem::from_region(Region::Original(inst))?;
        let scalar = move |f: &[f64]| -f[l];
        let policy = BranchPolicy::default();
        let raw = problem.search(&scalar, &[l], deadline, None, policy)?;
        let mut report = raw.into_report(inst, policy, |x| {
            let outcome = inst.evaluate_outcome(x)?;
            let value = -outcome.values()[l];
            Ok((outcome, value))
        })?;
        if report.status != SolveStatus::Infeasible {
            report.objective = -report.objective;
            report.best_bound = if report.status == SolveStatus::Optimal {
                report.objective
            } else {
                -report.best_bound
            };
        }
        Ok(report)
    }
}

/// Internal minimization problem: `min phi(f(x))` s.t. `rows x <= rhs`.
struct Problem<'a> {
    objectives: &'a [Vec<f64>],
    rows: Vec<&'a [f64]>,
    rhs: Vec<f64>,
    /// Sum of all rows when there is more than one.
    aggregate: Option<(Vec<f64>, f64)>,
}

impl<'a> Problem<'a> {
    fn from_region(region: Region<'a>) -> Result<Self> {
        let (objectives, rows, rhs): (&[Vec<f64>], Vec<&[f64]>, Vec<f64>) = match region {
            Region::Original(inst) => (
                inst.objectives(),
                inst.constraints().iter().map(Vec::as_slice).collect(),
                inst.rhs().to_vec(),
            ),
            Region::Surrogate(s) => (s.base().objectives(), vec![s.row()], vec![s.rhs()]),
        };
        if rows.iter().flat_map(|r| r.iter()).any(|&a| a < 0.0) {
            return Err(ChuteError::parameter(
                "branch-and-bound requires nonnegative constraint coefficients",
            ));
        }
        let aggregate = (rows.len() > 1).then(|| {
            let n = objectives[0].len();
            let row = (0..n).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
            (row, rhs.iter().sum())
        });
        Ok(Self {
            objectives,
            rows,
            rhs,
            aggregate,
        })
    }

    fn n(&self) -> usize {
        self.objectives[0].len()
    }

    fn branching_order(&self, policy: BranchPolicy) -> Vec<usize> {
        match policy {
            BranchPolicy::BangForBuckOneFirst => {
                let ratio = |j: usize| {
                    let c: f64 = self.objectives.iter().map(|r| r[j]).sum();
                    let a: f64 = self.rows.iter().map(|r| r[j]).sum();
                    if a > 0.0 {
                        c / a
                    } else if c > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                };
                let mut order: Vec<usize> = (0..self.n()).collect();
                order.sort_by(|&i, &j| ratio(j).total_cmp(&ratio(i)).then(i.cmp(&j)));
                order
            }
        }
    }

    fn search(
        &self,
        scalar: &dyn Fn(&[f64]) -> f64,
        bound_objectives: &[usize],
        deadline: f64,
        node_limit: Option<u64>,
        policy: BranchPolicy,
    ) -> Result<RawOutcome> {
        if !(deadline > 0.0) {
            return Err(ChuteError::parameter(format!("deadline must be positive, got {deadline}")));
        }
        let start = Instant::now();
        let stop_at = Duration::try_from_secs_f64(deadline)
            .ok()
            .and_then(|d| start.checked_add(d));

        let n = self.n();
        let k = self.objectives.len();
        if !self.rhs.iter().all(|&b| fits(0.0, b)) {
            return Ok(RawOutcome {
                status: SolveStatus::Infeasible,
                incumbent: None,
                best_bound: f64::INFINITY,
                nodes: 0,
                elapsed: start.elapsed(),
            });
        }

        let order = self.branching_order(policy);
        let mut position = vec![0usize; n];
        for (pos, &j) in order.iter().enumerate() {
            position[j] = pos;
        }
        let relax = Relaxation::new(self, bound_objectives);

        let root = Node {
            depth: 0,
            bits: vec![0; n],
            objective: vec![0.0; k],
            used: vec![0.0; self.rows.len()],
            bound: 0.0,
        };
        let mut root = root;
        root.bound = scalar(&relax.upper_bounds(&root, &position));

        let mut incumbent = root.bits.clone();
        let mut inc_value = scalar(&root.objective);
        let mut stack = vec![root];
        let mut nodes: u64 = 0;
        let mut timed_out = false;

        while let Some(node) = stack.pop() {
            let expired = node_limit.is_some_and(|lim| nodes >= lim)
                || (nodes.is_multiple_of(DEADLINE_CHECK_INTERVAL)
                    && stop_at.is_some_and(|t| Instant::now() >= t));
            if expired {
                stack.push(node);
                timed_out = true;
                break;
            }
            nodes += 1;

            if prunable(node.bound, inc_value, &node.bits, &incumbent) {
                continue;
            }
            // Completion with every free variable at 0 is feasible because A >= 0.
            let value = scalar(&node.objective);
            if improves(value, &node.bits, inc_value, &incumbent) {
                inc_value = value;
                incumbent.clone_from(&node.bits);
            }
            if node.depth == n || prunable(node.bound, inc_value, &node.bits, &incumbent) {
                continue;
            }

            let j = order[node.depth];
            let mut zero = Node {
                depth: node.depth + 1,
                bits: node.bits.clone(),
                objective: node.objective.clone(),
                used: node.used.clone(),
                bound: 0.0,
            };
            zero.bound = scalar(&relax.upper_bounds(&zero, &position));

            let one_fits = self
                .rows
                .iter()
                .zip(&self.rhs)
                .zip(&node.used)
                .all(|((row, &b), &u)| fits(u + row[j], b));
            let one = one_fits.then(|| {
                let mut one = node;
                one.depth += 1;
                one.bits[j] = 1;
                for (o, row) in one.objective.iter_mut().zip(self.objectives) {
                    *o += row[j];
                }
                for (u, row) in one.used.iter_mut().zip(&self.rows) {
                    *u += row[j];
                }
                one.bound = scalar(&relax.upper_bounds(&one, &position));
                one
            });

            if !prunable(zero.bound, inc_value, &zero.bits, &incumbent) {
                stack.push(zero);
            }
            if let Some(one) = one {
                if !prunable(one.bound, inc_value, &one.bits, &incumbent) {
                    stack.push(one);
                }
            }
        }

        let open = stack.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
        // Open nodes kept only for tie-breaking cannot improve the value.
        let (status, best_bound) = if timed_out && open < inc_value - tie_tol(inc_value) {
            (SolveStatus::TimeLimit, open.min(inc_value))
        } else {
            (SolveStatus::Optimal, inc_value)
        };
        Ok(RawOutcome {
            status,
            incumbent: Some(incumbent),
            best_bound,
            nodes,
            elapsed: start.elapsed(),
        })
    }
}

/// Tolerance under which two scalarized values count as tied.
#[inline]
fn tie_tol(v: f64) -> f64 {
    1e-12 * v.abs().max(1.0)
}

/// True if `a` comes strictly before `b` in the tie-break order.
#[inline]
fn tie_less(a: &[u8], b: &[u8]) -> bool {
    a.iter().rev().cmp(b.iter().rev()) == Ordering::Less
}

#[inline]
fn improves(value: f64, bits: &[u8], inc_value: f64, incumbent: &[u8]) -> bool {
    let tol = tie_tol(inc_value);
    value < inc_value - tol || (value <= inc_value + tol && tie_less(bits, incumbent))
}

/// A node is dropped when its bound cannot beat the incumbent, or can only tie
/// it while every solution below it loses the tie-break (the node's own
/// zero completion is the smallest key in its subtree).
#[inline]
fn prunable(bound: f64, inc_value: f64, bits: &[u8], incumbent: &[u8]) -> bool {
    let tol = tie_tol(inc_value);
    bound > inc_value + tol || (bound >= inc_value - tol && !tie_less(bits, incumbent))
}

struct Node {
    /// Variables `order[..depth]` are fixed.
    depth: usize,
    bits: Vec<u8>,
    objective: Vec<f64>,
    used: Vec<f64>,
    bound: f64,
}

/// Precomputed fractional-knapsack item orders, one per (row, objective).
struct Relaxation<'p> {
    problem: &'p Problem<'p>,
    objectives: Vec<usize>,
    /// `items[r][i]` lists variables with positive coefficient in objective
    /// `objectives[i]`, by value/weight for row `r` descending. Row index
    /// `rows.len()` is the aggregate row when present.
    items: Vec<Vec<Vec<usize>>>,
}

impl<'p> Relaxation<'p> {
    fn new(problem: &'p Problem<'p>, objectives: &[usize]) -> Self {
        let mut weight_rows: Vec<&[f64]> = problem.rows.clone();
        if let Some((row, _)) = &problem.aggregate {
            weight_rows.push(row);
        }
        let items = weight_rows
            .iter()
            .map(|w| {
                objectives
                    .iter()
                    .map(|&l| {
                        let c = &problem.objectives[l];
                        let mut list: Vec<usize> = (0..c.len()).filter(|&j| c[j] > 0.0).collect();
                        let key = |j: usize| if w[j] > 0.0 { c[j] / w[j] } else { f64::INFINITY };
                        list.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
                        list
                    })
                    .collect()
            })
            .collect();
        Self {
            problem,
            objectives: objectives.to_vec(),
            items,
        }
    }

    /// Upper bounds on each objective over the node's subtree. Objectives not
    /// in `self.objectives` keep their fixed value.
    fn upper_bounds(&self, node: &Node, position: &[usize]) -> Vec<f64> {
        let p = self.problem;
        let mut ub = node.objective.clone();
        let aggregate_used: f64 = node.used.iter().sum();
        for (i, &l) in self.objectives.iter().enumerate() {
            let c = &p.objectives[l];
            let mut best = f64::INFINITY;
            for (r, lists) in self.items.iter().enumerate() {
                let (w, b, used): (&[f64], f64, f64) = if r < p.rows.len() {
                    (p.rows[r], p.rhs[r], node.used[r])
                } else {
                    let (row, rhs) = p.aggregate.as_ref().expect("aggregate row");
                    (row, *rhs, aggregate_used)
                };
                let mut cap = b + FEASIBILITY_TOL * b.abs().max(1.0) - used;
                let mut gain = 0.0;
                for &j in &lists[i] {
                    if position[j] < node.depth {
                        continue;
                    }
                    if w[j] <= cap {
                        gain += c[j];
                        cap -= w[j];
                    } else {
                        gain += c[j] * (cap.max(0.0) / w[j]);
                        break;
                    }
                }
                best = best.min(gain);
            }
            ub[l] = node.objective[l] + best;
        }
        ub
    }
}

struct RawOutcome {
    status: SolveStatus,
    incumbent: Option<Vec<u8>>,
    best_bound: f64,
    nodes: u64,
    elapsed: Duration,
}

impl RawOutcome {
    /// Re-evaluates the incumbent from scratch so that reports do not depend
    /// on the summation order used during the search.
    fn into_report(
        self,
        _inst: &MomipInstance,
        policy: BranchPolicy,
        evaluate: impl Fn(&Solution) -> Result<(Outcome, f64)>,
    ) -> Result<SolveReport> {
        let elapsed = self.elapsed.as_secs_f64();
        match self.incumbent {
            None => Ok(SolveReport {
                status: SolveStatus::Infeasible,
                incumbent: None,
                outcome: None,
                objective: f64::INFINITY,
                best_bound: f64::INFINITY,
                elapsed,
                nodes: self.nodes,
                policy,
            }),
            Some(bits) => {
                let x = Solution::new(bits)?;
                let (outcome, objective) = evaluate(&x)?;
                Ok(SolveReport {
                    status: self.status,
                    incumbent: Some(x),
                    outcome: Some(outcome),
                    objective,
                    best_bound: self.best_bound.min(objective),
                    elapsed,
                    nodes: self.nodes,
                    policy,
                })
            }
        }
    }
}

/// Exhaustive minimization of the Chebyshev function, the test oracle.
///
/// Enumerates all `2^n` vectors in increasing binary order (`x_1` least
/// significant), so among tied solutions the first one found wins; this is
/// the same tie-break order the branch-and-bound uses.
pub fn brute_force_chebyshev(inst: &MomipInstance, params: &ChebyshevParams) -> Result<SolveReport> {
    let n = inst.n();
    if n > MAX_BRUTE_FORCE_N {
        return Err(ChuteError::Guard(format!(
            "n = {n} exceeds the enumeration limit {MAX_BRUTE_FORCE_N}"
        )));
    }
    if params.k() != inst.k() {
        return Err(ChuteError::dimension("parameter and instance dimensions differ"));
    }
    let start = Instant::now();
    let (k, m) = (inst.k(), inst.m());
    let mut bits = vec![0u8; n];
    let mut f = vec![0.0; k];
    let mut used = vec![0.0; m];
    let feasible = |used: &[f64]| used.iter().zip(inst.rhs()).all(|(&u, &b)| fits(u, b));

    let mut best: Option<(u64, f64)> = feasible(&used).then(|| (0, params.value_of(&f)));
    for mask in 1u64..(1u64 << n) {
        let t = mask.trailing_zeros() as usize;
        for j in 0..=t {
            let sign = if j < t { -1.0 } else { 1.0 };
            bits[j] = u8::from(j == t);
            for (fl, row) in f.iter_mut().zip(inst.objectives()) {
                *fl += sign * row[j];
            }
            for (u, row) in used.iter_mut().zip(inst.constraints()) {
                *u += sign * row[j];
            }
        }
        if !feasible(&used) {
            continue;
        }
        let v = params.value_of(&f);
        match best {
            Some((_, bv)) if v >= bv - tie_tol(bv) => {}
            _ => best = Some((mask, v)),
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    let nodes = 1u64 << n;
    let Some((mask, _)) = best else {
        return Ok(SolveReport {
            status: SolveStatus::Infeasible,
            incumbent: None,
            outcome: None,
            objective: f64::INFINITY,
            best_bound: f64::INFINITY,
            elapsed,
            nodes,
            policy: BranchPolicy::default(),
        });
    };
    let x = Solution::new((0..n).map(|j| ((mask >> j) & 1) as u8).collect())?;
    let outcome = inst.evaluate_outcome(&x)?;
    let objective = chebyshev_value(&outcome, params)?;
    Ok(SolveReport {
        status: SolveStatus::Optimal,
        incumbent: Some(x),
        outcome: Some(outcome),
        objective,
        best_bound: objective,
        elapsed,
        nodes,
        policy: BranchPolicy::default(),
    })
}
