//! The probing loop that builds upper shells and the full interval
//! computation for one weight vector (variants `chute1` and `chute2`).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bnb::{Region, ScalarSolver, SolveReport, SolveStatus, SolveTask};
use crate::error::{ChuteError, Result};
use crate::instances::{MomipInstance, Outcome, Solution, WeightVector};
use crate::scalarization::{ChebyshevParams, ReferencePoint, DEFAULT_RHO};
use crate::shells::{
    eligible_for_upper, interval_representation, lower_bounds, upper_bounds, BoundVector,
    IntervalRepresentation, MemberProvenance, Shell, ShellKind, ShellMember,
};
use crate::surrogate::{make_surrogate, suboptimal_multipliers, DualConfig, DualTrace, Multipliers, StopReason};

/// Probing vectors keep every component at least this large.
pub const PROBE_EPS: f64 = 1e-12;

/// The sequence of probing vectors for one target objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSchedule {
    pub l_bar: usize,
    pub base: Vec<f64>,
    pub delta: f64,
    pub gamma: f64,
    pub probes: Vec<Vec<f64>>,
}

impl ProbeSchedule {
    /// Moves `lambda_lbar` up by `delta = (1 - lambda_lbar) / gamma` per step
    /// and every other component down by `delta / (k - 1)`, stopping before
    /// any component would drop below [`PROBE_EPS`] or `lambda_lbar` would
    /// reach 1.
    pub fn new(l_bar: usize, lambda: &WeightVector, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(ChuteError::parameter(format!("gamma must be positive, got {gamma}")));
        }
        let k = lambda.len();
        if l_bar >= k {
            return Err(ChuteError::dimension(format!("objective index {l_bar} out of range")));
        }
        let base = lambda.weights().to_vec();
        let delta = (1.0 - base[l_bar]) / gamma;
        let side = delta / (k - 1) as f64;
        let max_probes = gamma.ceil() as usize;
        let mut probes = Vec::new();
        let mut current = base.clone();
        current[l_bar] += delta;
        while current[l_bar] < 1.0 - PROBE_EPS && probes.len() < max_probes {
            let crosses = (0..k).any(|l| l != l_bar && current[l] - side < PROBE_EPS);
            if crosses {
                break;
            }
            for (l, c) in current.iter_mut().enumerate() {
                if l != l_bar {
                    *c -= side;
                }
            }
            probes.push(current.clone());
            current[l_bar] += delta;
        }
        Ok(Self {
            l_bar,
            base,
            delta,
            gamma,
            probes,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `mu = (1, ..., 1)`.
    #[default]
    Chute1,
    /// `mu` from the dual search, once per weight vector.
    Chute2,
}

impl std::str::FromStr for Variant {
    type Err = ChuteError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chute1" => Ok(Variant::Chute1),
            "chute2" => Ok(Variant::Chute2),
            other => Err(ChuteError::parameter(format!("unknown variant {other:?}"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Chute1 => "chute1",
            Variant::Chute2 => "chute2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChuteConfig {
    pub variant: Variant,
    /// Incumbent deadline in seconds.
    pub tl: f64,
    pub gamma: f64,
    pub rho: f64,
    /// Dual search settings, used by `chute2` only.
    pub dual: DualConfig,
    /// Optional node budget for the incumbent solve.
    pub incumbent_node_limit: Option<u64>,
    /// Optional wall-clock budget per target objective for the probing loop.
    pub shell_deadline: Option<f64>,
    /// Optional deadline per relaxation solve. Probes that time out are
    /// discarded because only exact relaxation optima are valid shell members.
    pub probe_deadline: Option<f64>,
    /// Lower-bound floor; zeros when absent.
    pub floor: Option<Vec<f64>>,
    /// Run the `k` probing loops on separate threads.
    pub parallel: bool,
}

impl Default for ChuteConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Chute1,
            tl: 5.0,
            gamma: 10.0,
            rho: DEFAULT_RHO,
            dual: DualConfig::new(20, 2.0),
            incumbent_node_limit: None,
            shell_deadline: None,
            probe_deadline: None,
            floor: None,
            parallel: true,
        }
    }
}

impl ChuteConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(ChuteError::parameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("T^L", self.tl)?;
        positive("gamma", self.gamma)?;
        if !self.gamma.is_finite() {
            return Err(ChuteError::parameter("gamma must be finite"));
        }
        positive("rho", self.rho)?;
        positive("T^S", self.dual.time_limit)?;
        if self.dual.stall_limit == 0 {
            return Err(ChuteError::parameter("N must be at least 1"));
        }
        if let Some(d) = self.shell_deadline {
            positive("shell deadline", d)?;
        }
        if let Some(d) = self.probe_deadline {
            positive("probe deadline", d)?;
        }
        Ok(())
    }
}

/// One relaxation solve of the probing loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub l_bar: usize,
    pub lambda: Vec<f64>,
    pub status: SolveStatus,
    pub solution: Option<Solution>,
    pub outcome: Option<Outcome>,
    pub eligible: bool,
}

/// Result of the probing loop for one target objective.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperSearch {
    pub shell: Shell,
    /// `f_lbar` of the first eligible member, `y*_lbar` when none.
    pub u: f64,
    pub probes: Vec<ProbeRecord>,
    /// Seconds.
    pub elapsed: f64,
}

/// Probes `ChebRLX(X'_0(mu), lambda')` along the schedule for `l_bar` until a
/// relaxation optimum satisfies the eligibility test against `lower`.
#[allow(clippy::too_many_arguments)]
pub fn find_upper_shell<S: ScalarSolver + ?Sized>(
    l_bar: usize,
    lambda: &WeightVector,
    y_star: &ReferencePoint,
    lower: &BoundVector,
    gamma: f64,
    mu: &Multipliers,
    rho: f64,
    inst: &MomipInstance,
    solver: &S,
    shell_deadline: Option<f64>,
    probe_deadline: Option<f64>,
) -> Result<UpperSearch> {
    let start = Instant::now();
    let schedule = ProbeSchedule::new(l_bar, lambda, gamma)?;
    let surrogate = make_surrogate(inst, mu)?;
    let mut shell = Shell::new(ShellKind::Upper);
    let mut u = y_star.values()[l_bar];
    let mut probes = Vec::new();
    for probe in schedule.probes {
        if shell_deadline.is_some_and(|d| start.elapsed().as_secs_f64() > d) {
            break;
        }
        let params = ChebyshevParams::new(WeightVector::new(probe.clone())?, y_star.clone(), rho)?;
        let task = SolveTask::new(
            Region::Surrogate(&surrogate),
            &params,
            probe_deadline.unwrap_or(f64::INFINITY),
        );
        let report = solver.solve_chebyshev(&task)?;
        let exact = report.status == SolveStatus::Optimal;
        let eligible = match (&report.outcome, exact) {
            (Some(f), true) => eligible_for_upper(f, l_bar, lower)?,
            _ => false,
        };
        probes.push(ProbeRecord {
            l_bar,
            lambda: probe.clone(),
            status: report.status,
            solution: report.incumbent.clone(),
            outcome: report.outcome.clone(),
            eligible,
        });
        if let (true, Some(x), Some(f)) = (exact, report.incumbent, report.outcome) {
            let value = f.values()[l_bar];
            shell.insert(ShellMember {
                solution: x,
                outcome: f,
                provenance: MemberProvenance::RelaxationOptimal {
                    mu: mu.values().to_vec(),
                    lambda: probe,
                },
            })?;
            if eligible {
                u = value;
                break;
            }
        }
    }
    Ok(UpperSearch {
        shell,
        u,
        probes,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Incumbent, lower shell and lower bounds for one weight vector.
#[derive(Clone, Debug)]
pub struct LowerStage {
    pub params: ChebyshevParams,
    pub incumbent: SolveReport,
    pub s_l: Shell,
    pub lower: BoundVector,
    /// Seconds.
    pub incumbent_s: f64,
}

pub fn lower_stage<S: ScalarSolver + ?Sized>(
    inst: &MomipInstance,
    lambda: &WeightVector,
    y_star: &ReferencePoint,
    config: &ChuteConfig,
    solver: &S,
) -> Result<LowerStage> {
    check_scope(inst)?;
    config.validate()?;
    let params = ChebyshevParams::new(lambda.clone(), y_star.clone(), config.rho)?;
    let start = Instant::now();
    let task = SolveTask::new(Region::Original(inst), &params, config.tl).with_node_limit(config.incumbent_node_limit);
    let incumbent = solver
        .solve_chebyshev(&task)
        .map_err(|e| e.at_stage("incumbent"))?;
    let incumbent_s = start.elapsed().as_secs_f64();
    let (Some(x), Some(f)) = (incumbent.incumbent.clone(), incumbent.outcome.clone()) else {
        return Err(ChuteError::State(format!("no feasible incumbent for {}", inst.name())).at_stage("incumbent"));
    };
    let s_l = Shell::from_members(
        ShellKind::Lower,
        [ShellMember {
            solution: x,
            outcome: f,
            provenance: MemberProvenance::Incumbent,
        }],
    )?;
    let floor = config.floor.clone().unwrap_or_else(|| vec![0.0; inst.k()]);
    let lower = lower_bounds(&s_l, &params, &floor).map_err(|e| e.at_stage("lower bounds"))?;
    Ok(LowerStage {
        params,
        incumbent,
        s_l,
        lower,
        incumbent_s,
    })
}

/// Surrogate multipliers for the probing loop.
#[derive(Clone, Debug)]
pub struct MultiplierStage {
    pub mu: Multipliers,
    pub trace: Option<DualTrace>,
    /// Seconds.
    pub dual_s: f64,
}

pub fn multiplier_stage<S: ScalarSolver + ?Sized>(
    inst: &MomipInstance,
    lower: &LowerStage,
    config: &ChuteConfig,
    solver: &S,
) -> Result<MultiplierStage> {
    match config.variant {
        Variant::Chute1 => Ok(MultiplierStage {
            mu: Multipliers::ones(inst.m())?,
            trace: None,
            dual_s: 0.0,
        }),
        Variant::Chute2 => {
            let start = Instant::now();
            let trace = suboptimal_multipliers(inst, &lower.params, &config.dual, solver)
                .map_err(|e| e.at_stage("dual search"))?;
            Ok(MultiplierStage {
                mu: trace.best_mu.clone(),
                trace: Some(trace),
                dual_s: start.elapsed().as_secs_f64(),
            })
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub incumbent_s: f64,
    pub dual_s: f64,
    pub shells_s: Vec<f64>,
}

impl Timings {
    /// Time to derive the upper shell including the dual search.
    pub fn upper_total_s(&self) -> f64 {
        self.dual_s + self.shells_s.iter().sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellSizes {
    pub lower: usize,
    pub upper: usize,
    pub per_objective: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncumbentSummary {
    pub status: SolveStatus,
    pub objective: f64,
    pub best_bound: f64,
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSummary {
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub best_value: f64,
}

/// Everything one run produces. Serializes to the result JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChuteResult {
    pub instance: String,
    pub instance_fingerprint: String,
    pub lambda: WeightVector,
    pub variant: Variant,
    pub gamma: f64,
    pub rho: f64,
    pub y_star: ReferencePoint,
    #[serde(rename = "L")]
    pub lower: Vec<f64>,
    #[serde(rename = "U")]
    pub upper: Vec<f64>,
    pub gap: Vec<f64>,
    /// `U_l` as returned by the probing loop for objective `l` alone.
    pub probe_upper: Vec<f64>,
    pub lower_bounds: BoundVector,
    pub upper_bounds: BoundVector,
    pub shell_sizes: ShellSizes,
    pub timings: Timings,
    pub incumbent: IncumbentSummary,
    pub mu: Vec<f64>,
    pub dual: Option<DualSummary>,
    pub probes: Vec<ProbeRecord>,
    pub s_l: Shell,
    pub s_u: Shell,
}

impl ChuteResult {
    pub fn representation(&self) -> Result<IntervalRepresentation> {
        interval_representation(&self.lower_bounds, &self.upper_bounds, &self.lambda)
    }

    /// Zeros every wall-clock field so that repeated runs serialize identically.
    pub fn mask_timings(&mut self) {
        self.timings.incumbent_s = 0.0;
        self.timings.dual_s = 0.0;
        self.timings.shells_s.iter_mut().for_each(|t| *t = 0.0);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Runs the probing loops and assembles the interval representation.
pub fn upper_stage<S: ScalarSolver + Sync + ?Sized>(
    inst: &MomipInstance,
    lower: &LowerStage,
    multipliers: &MultiplierStage,
    config: &ChuteConfig,
    solver: &S,
) -> Result<ChuteResult> {
    check_scope(inst)?;
    config.validate()?;
    let k = inst.k();
    let lambda = lower.params.lambda();
    let y_star = lower.params.y_star();
    let run = |l: usize| {
        find_upper_shell(
            l,
            lambda,
            y_star,
            &lower.lower,
            config.gamma,
            &multipliers.mu,
            config.rho,
            inst,
            solver,
            config.shell_deadline,
            config.probe_deadline,
        )
        .map_err(|e| e.at_stage(format!("upper shell for objective {}", l + 1)))
    };
    let searches: Vec<Result<UpperSearch>> = if config.parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..k).map(|l| scope.spawn(move || run(l))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("probing loop panicked"))
                .collect()
        })
    } else {
        (0..k).map(run).collect()
    };
    let searches = searches.into_iter().collect::<Result<Vec<_>>>()?;

    let mut s_u = Shell::new(ShellKind::Upper);
    for s in &searches {
        for m in s.shell.members() {
            s_u.insert(m.clone())?;
        }
    }
    let upper = upper_bounds(&s_u, &lower.lower, y_star).map_err(|e| e.at_stage("upper bounds"))?;
    let rep = interval_representation(&lower.lower, &upper, lambda).map_err(|e| e.at_stage("interval"))?;

    Ok(ChuteResult {
        instance: inst.name().to_string(),
        instance_fingerprint: inst.fingerprint(),
        lambda: lambda.clone(),
        variant: config.variant,
        gamma: config.gamma,
        rho: config.rho,
        y_star: y_star.clone(),
        lower: rep.lower(),
        upper: rep.upper(),
        gap: rep.gap,
        probe_upper: searches.iter().map(|s| s.u).collect(),
        lower_bounds: lower.lower.clone(),
        upper_bounds: upper,
        shell_sizes: ShellSizes {
            lower: lower.s_l.len(),
            upper: s_u.len(),
            per_objective: searches.iter().map(|s| s.shell.len()).collect(),
        },
        timings: Timings {
            incumbent_s: lower.incumbent_s,
            dual_s: multipliers.dual_s,
            shells_s: searches.iter().map(|s| s.elapsed).collect(),
        },
        incumbent: IncumbentSummary {
            status: lower.incumbent.status,
            objective: lower.incumbent.objective,
            best_bound: lower.incumbent.best_bound,
            nodes: lower.incumbent.nodes,
        },
        mu: multipliers.mu.values().to_vec(),
        dual: multipliers.trace.as_ref().map(|t| DualSummary {
            stop_reason: t.stop_reason,
            iterations: t.iterations.len(),
            best_value: t.best_value,
        }),
        probes: searches.into_iter().flat_map(|s| s.probes).collect(),
        s_l: lower.s_l.clone(),
        s_u,
    })
}

/// The whole pipeline for one weight vector.
pub fn chute<S: ScalarSolver + Sync + ?Sized>(
    inst: &MomipInstance,
    lambda: &WeightVector,
    y_star: &ReferencePoint,
    config: &ChuteConfig,
    solver: &S,
) -> Result<ChuteResult> {
    let lower = lower_stage(inst, lambda, y_star, config, solver)?;
    let mu = multiplier_stage(inst, &lower, config, solver)?;
    upper_stage(inst, &lower, &mu, config, solver)
}

fn check_scope(inst: &MomipInstance) -> Result<()> {
    if matches!(inst.k(), 2 | 3) {
        Ok(())
    } else {
        Err(ChuteError::Scope(format!("k = {} objectives; only 2 or 3 are supported", inst.k())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnb::{brute_force_chebyshev, BranchAndBound};
    use crate::instances::fixtures::*;
    use crate::instances::{dominates, generate_instance, sample_weight_vectors, GeneratorConfig};
    use crate::scalarization::estimate_reference_point;
    use proptest::prelude::*;

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn schedule_k2_first_probe() {
        let s = ProbeSchedule::new(0, &w(&[0.5, 0.5]), 10.0).unwrap();
        assert!((s.delta - 0.05).abs() < 1e-15);
        assert!(close(&s.probes[0], &[0.55, 0.45]));
        assert_eq!(s.probes.len(), 9);
        assert!(s.probes.len() <= 10);
    }

    #[test]
    fn schedule_k3_hand_trace() {
        let s = ProbeSchedule::new(0, &w(&[0.1, 0.1, 0.8]), 10.0).unwrap();
        assert!((s.delta - 0.09).abs() < 1e-15);
        assert_eq!(s.probes.len(), 2);
        assert!(close(&s.probes[0], &[0.19, 0.055, 0.755]));
        assert!(close(&s.probes[1], &[0.28, 0.01, 0.71]));
    }

    #[test]
    fn schedule_rejects_bad_gamma() {
        for g in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(ProbeSchedule::new(0, &w(&[0.5, 0.5]), g).is_err());
        }
    }

    proptest! {
        #[test]
        fn schedule_invariants(
            raw in proptest::collection::vec(0.01f64..1.0, 2..=3),
            l in 0usize..3,
            gamma in 0.5f64..60.0,
            extra in 0.0f64..30.0,
        ) {
            let sum: f64 = raw.iter().sum();
            let lambda = WeightVector::normalized(raw.iter().map(|x| x / sum).collect(), 1e-9).unwrap();
            let l_bar = l % lambda.len();
            let s = ProbeSchedule::new(l_bar, &lambda, gamma).unwrap();
            prop_assert!(s.probes.len() <= gamma.ceil() as usize);
            let mut prev = lambda.get(l_bar);
            for p in &s.probes {
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                prop_assert!(p.iter().all(|v| *v > 0.0));
                prop_assert!(p[l_bar] > prev);
                prop_assert!((p[l_bar] - prev - s.delta).abs() <= 1e-12);
                prop_assert!(p.as_slice() != lambda.weights());
                prev = p[l_bar];
            }
            let denser = ProbeSchedule::new(l_bar, &lambda, gamma + extra).unwrap();
            prop_assert!(denser.probes.len() + 1 >= s.probes.len());
        }
    }

    fn exact_y(inst: &MomipInstance) -> ReferencePoint {
        estimate_reference_point(inst, 60.0, 1.0, &BranchAndBound).unwrap()
    }

    #[test]
    fn toy_chute1_sandwich() {
        let inst = toy();
        let y = exact_y(&inst);
        let lambda = w(&[0.5, 0.5]);
        let cfg = ChuteConfig::default();
        let r = chute(&inst, &lambda, &y, &cfg, &BranchAndBound).unwrap();
        let p = ChebyshevParams::new(lambda, y, cfg.rho).unwrap();
        let opt = brute_force_chebyshev(&inst, &p).unwrap();
        assert_eq!(r.incumbent.status, SolveStatus::Optimal);
        assert_eq!(r.s_l.members()[0].solution, opt.incumbent.unwrap());
        let f = opt.outcome.unwrap();
        for l in 0..2 {
            assert!(r.lower[l] <= f.values()[l] && f.values()[l] <= r.upper[l]);
        }
        assert_eq!(r.shell_sizes.lower, 1);
        assert_eq!(r.timings.shells_s.len(), 2);
    }

    #[test]
    fn rejects_out_of_scope_k() {
        let inst = generate_instance(&GeneratorConfig { k: 4, n: 6, ..Default::default() }).unwrap();
        let y = ReferencePoint::supplied(vec![1e4; 4]).unwrap();
        let err = chute(&inst, &w(&[0.25; 4]), &y, &ChuteConfig::default(), &BranchAndBound).unwrap_err();
        assert!(matches!(err, ChuteError::Scope(_)));
        assert!(err.is_input_error());
    }

    #[test]
    fn single_constraint_chute2_matches_chute1() {
        let inst = generate_instance(&GeneratorConfig { k: 2, n: 14, m: 1, seed: 4, ..Default::default() }).unwrap();
        let y = exact_y(&inst);
        let lambda = w(&[0.3, 0.7]);
        let c1 = ChuteConfig::default();
        let c2 = ChuteConfig { variant: Variant::Chute2, ..ChuteConfig::default() };
        let r1 = chute(&inst, &lambda, &y, &c1, &BranchAndBound).unwrap();
        let r2 = chute(&inst, &lambda, &y, &c2, &BranchAndBound).unwrap();
        let stop = r2.dual.as_ref().unwrap().stop_reason;
        assert!(matches!(stop, StopReason::Stall | StopReason::Exact));
        assert_eq!(r1.lower, r2.lower);
        assert_eq!(r1.upper, r2.upper);
        assert_eq!(r1.gap, r2.gap);
    }

    #[test]
    fn no_eligible_probe_defaults_to_reference_point() {
        // A lower bound above every outcome makes nothing eligible.
        let inst = toy();
        let y = exact_y(&inst);
        let lower = BoundVector {
            side: crate::shells::BoundSide::Lower,
            values: vec![4.9, 4.9],
            sources: vec![crate::shells::BoundSource::Floor; 2],
        };
        let s = find_upper_shell(
            0,
            &w(&[0.5, 0.5]),
            &y,
            &lower,
            10.0,
            &Multipliers::ones(1).unwrap(),
            0.001,
            &inst,
            &BranchAndBound,
            None,
            None,
        )
        .unwrap();
        assert_eq!(s.u, y.values()[0]);
        assert!(s.probes.iter().all(|p| !p.eligible));
        assert_eq!(s.probes.len(), 9);
    }

    #[test]
    fn engine_sandwich_and_shell_validity_on_random_instances() {
        for seed in 0..30u64 {
            let k = 2 + (seed % 2) as usize;
            let n = 6 + (seed % 7) as usize;
            let m = 1 + (seed % 3) as usize;
            let inst = generate_instance(&GeneratorConfig { k, n, m, seed, coeff_range: (1, 40), tightness: 0.4 })
                .unwrap();
            let y = exact_y(&inst);
            let feasible: Vec<Outcome> = (0u32..(1 << n))
                .map(|mask| Solution::new((0..n).map(|j| ((mask >> j) & 1) as u8).collect()).unwrap())
                .filter(|x| inst.is_feasible(x).unwrap())
                .map(|x| inst.evaluate_outcome(&x).unwrap())
                .collect();
            for lambda in sample_weight_vectors(k, 3, seed).unwrap() {
                for variant in [Variant::Chute1, Variant::Chute2] {
                    let cfg = ChuteConfig {
                        variant,
                        incumbent_node_limit: (seed % 3 == 0).then_some(3),
                        ..ChuteConfig::default()
                    };
                    let r = chute(&inst, &lambda, &y, &cfg, &BranchAndBound).unwrap();
                    let p = ChebyshevParams::new(lambda.clone(), y.clone(), cfg.rho).unwrap();
                    let opt = brute_force_chebyshev(&inst, &p).unwrap().outcome.unwrap();
                    for l in 0..k {
                        assert!(r.lower[l] <= opt.values()[l] + 1e-9, "seed {seed} L");
                        assert!(opt.values()[l] <= r.upper[l] + 1e-9, "seed {seed} U");
                    }
                    for member in r.s_u.members() {
                        assert!(feasible.iter().all(|f| !dominates(f, &member.outcome).unwrap()));
                    }
                }
            }
        }
    }

    #[test]
    fn masked_results_replay_identically() {
        let inst = generate_instance(&GeneratorConfig { k: 3, n: 12, m: 2, seed: 8, ..Default::default() }).unwrap();
        let y = exact_y(&inst);
        let lambda = w(&[0.2, 0.5, 0.3]);
        let cfg = ChuteConfig { variant: Variant::Chute2, ..ChuteConfig::default() };
        let run = || {
            let mut r = chute(&inst, &lambda, &y, &cfg, &BranchAndBound).unwrap();
            r.mask_timings();
            r.to_json()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn config_validation() {
        let bad = ChuteConfig { gamma: 0.0, ..ChuteConfig::default() };
        assert!(bad.validate().is_err());
        let bad = ChuteConfig { tl: -1.0, ..ChuteConfig::default() };
        assert!(bad.validate().is_err());
        assert!(ChuteConfig::default().validate().is_ok());
        assert_eq!("chute2".parse::<Variant>().unwrap(), Variant::Chute2);
        assert!("chute3".parse::<Variant>().is_err());
    }
}
