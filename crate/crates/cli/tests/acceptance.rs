//! Acceptance run: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use chute_cli::experiment::{run_experiment, ExperimentConfig, ExperimentReport, LambdaSource};
use chute_cli::tables::{experiment_tables, fmt2, marked_gap_row};
use chute_core::{
    brute_force_chebyshev, chute, dominates, estimate_reference_point, gap_vector, generate_instance,
    lower_bounds, make_surrogate, merge_lower, merge_upper, sample_weight_vectors, suboptimal_multipliers,
    upper_bounds, BoundVector, BranchAndBound, ChebyshevParams, ChuteConfig, ChuteResult, DualConfig,
    GeneratorConfig, MemberProvenance, MomipInstance, Multipliers, Outcome, ProbeSchedule, ReferencePoint,
    Region, ScalarSolver, Shell, ShellKind, ShellMember, Solution, SolveStatus, SolveTask, Variant, WeightVector,
};

/// Absolute tolerance of every bound comparison.
const BOUND_TOL: f64 = 1e-9;
/// Tolerance on reproduced reference gaps, in percentage points.
const GAP_TOL: f64 = 0.01;
/// Tolerance on weight vector sums and positivity.
const SIMPLEX_TOL: f64 = 1e-12;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn instance(k: usize, n: usize, m: usize, seed: u64) -> MomipInstance {
    generate_instance(&GeneratorConfig {
        k,
        n,
        m,
        seed,
        ..GeneratorConfig::default()
    })
    .expect("generator")
}

fn random_instance(seed: u64) -> MomipInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(2..=3);
    let n = rng.random_range(4..=14);
    let m = rng.random_range(1..=5);
    let mut inst = instance(k, n, m, seed);
    if rng.random_bool(0.2) {
        inst = generate_instance(&GeneratorConfig {
            k,
            n,
            m,
            seed,
            coeff_range: (1, 9),
            tightness: 0.3,
        })
        .expect("generator");
    }
    inst
}

fn y_star(inst: &MomipInstance) -> ReferencePoint {
    estimate_reference_point(inst, 30.0, 1.0, &BranchAndBound).expect("reference point")
}

fn params(lambda: &WeightVector, y: &ReferencePoint) -> ChebyshevParams {
    ChebyshevParams::new(lambda.clone(), y.clone(), chute_core::DEFAULT_RHO).expect("params")
}

fn exact(inst: &MomipInstance, p: &ChebyshevParams) -> (Outcome, f64) {
    let r = brute_force_chebyshev(inst, p).expect("oracle");
    (r.outcome.expect("feasible"), r.objective)
}

/// All feasible outcomes by enumeration.
fn feasible_outcomes(inst: &MomipInstance) -> Vec<Outcome> {
    let n = inst.n();
    (0u32..1 << n)
        .filter_map(|mask| {
            let x = Solution::new((0..n).map(|j| ((mask >> j) & 1) as u8).collect()).unwrap();
            inst.is_feasible(&x)
                .unwrap()
                .then(|| inst.evaluate_outcome(&x).unwrap())
        })
        .collect()
}

struct Sweep {
    runs: Vec<(MomipInstance, ChuteResult)>,
    incumbent_time_limit: usize,
}

fn sweep() -> Sweep {
    let runs: Vec<(MomipInstance, ChuteResult, bool)> = (0..200u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let inst = random_instance(1000 + seed);
            let y = y_star(&inst);
            let lambdas = sample_weight_vectors(inst.k(), 3, seed).unwrap();
            let mut out = Vec::new();
            for (i, lambda) in lambdas.iter().enumerate() {
                for variant in [Variant::Chute1, Variant::Chute2] {
                    let config = ChuteConfig {
                        variant,
                        gamma: [10.0, 30.0, 7.5][i % 3],
                        incumbent_node_limit: (seed % 4 == 0).then_some(1 + seed % 7),
                        parallel: false,
                        ..ChuteConfig::default()
                    };
                    let r = chute(&inst, lambda, &y, &config, &BranchAndBound).expect("chute");
                    let limited = r.incumbent.status == SolveStatus::TimeLimit;
                    out.push((inst.clone(), r, limited));
                }
            }
            out
        })
        .collect();
    let incumbent_time_limit = runs.iter().filter(|r| r.2).count();
    Sweep {
        runs: runs.into_iter().map(|(i, r, _)| (i, r)).collect(),
        incumbent_time_limit,
    }
}

fn sandwich(sweep: &Sweep) -> Check {
    let instances = sweep.runs.len() / 6;
    for (inst, r) in &sweep.runs {
        let (f, _) = exact(inst, &params(&r.lambda, &r.y_star));
        for l in 0..inst.k() {
            let v = f.values()[l];
            ensure(r.lower[l] <= v + BOUND_TOL && v <= r.upper[l] + BOUND_TOL, || {
                format!(
                    "{} {} lambda {:?}: L_{l} = {}, f = {v}, U_{l} = {}",
                    inst.name(),
                    r.variant,
                    r.lambda.weights(),
                    r.lower[l],
                    r.upper[l]
                )
            })?;
        }
    }
    Ok(format!(
        "{instances} instances, {} runs (chute1 and chute2), {} with a node-limited incumbent",
        sweep.runs.len(),
        sweep.incumbent_time_limit
    ))
}

/// Reference bi-criteria rows: L, U for gamma 10/30/50, and the
/// gap table with `+` for an improvement and `-` for a deterioration.
const BI_L: [[f64; 2]; 5] = [
    [114253.29, 130251.56],
    [116707.61, 129508.69],
    [125690.15, 122399.79],
    [122075.81, 126638.06],
    [122514.80, 126139.05],
];
const BI_U: [[[f64; 2]; 3]; 5] = [
    [[120964.0, 131117.0], [120466.0, 131117.0], [120093.0, 131117.0]],
    [[121666.0, 131117.0], [121666.0, 131117.0], [121441.0, 131117.0]],
    [[127790.0, 126078.0], [127635.0, 125842.0], [127646.0, 125642.0]],
    [[125252.0, 128990.0], [124924.0, 128990.0], [124852.0, 128990.0]],
    [[125502.0, 128779.0], [125335.0, 128665.0], [125307.0, 128710.0]],
];
const BI_GAP: [[&str; 6]; 5] = [
    ["5.55", "0.66", "5.16+", "0.66", "4.86+", "0.66"],
    ["4.08", "1.23", "4.08", "1.23", "3.90+", "1.23"],
    ["1.64", "2.92", "1.52+", "2.74+", "1.53-", "2.58+"],
    ["2.54", "1.82", "2.28+", "1.82", "2.22+", "1.82"],
    ["2.38", "2.05", "2.25+", "1.96+", "2.23+", "2.00-"],
];

/// Reference tri-criteria rows. U is shared across rows except the third
/// component of row 1, which changes with gamma.
const TRI_L: [[f64; 3]; 5] = [
    [111876.06, 111861.18, 109288.07],
    [110262.24, 103915.65, 114504.59],
    [110549.31, 114387.77, 107363.36],
    [105139.63, 113934.39, 110819.31],
    [112514.84, 0.00, 113292.80],
];
const TRI_U3_FIRST: [f64; 3] = [117516.0, 117398.0, 117362.0];
const TRI_GAP: [[&str; 9]; 5] = [
    ["6.29", "6.29", "7.00", "6.29", "6.29", "6.91+", "6.29", "6.29", "6.88+"],
    ["7.64", "12.94", "3.06", "7.64", "12.94", "3.06", "7.64", "12.94", "3.06"],
    ["7.40", "4.17", "9.11", "7.40", "4.17", "9.11", "7.40", "4.17", "9.11"],
    ["11.93", "4.55", "6.18", "11.93", "4.55", "6.18", "11.93", "4.55", "6.18"],
    ["5.75", "100.00", "4.09", "5.75", "100.00", "4.09", "5.75", "100.00", "4.09"],
];

fn gap_regression() -> Check {
    for (row, (l, us)) in BI_L.iter().zip(&BI_U).enumerate() {
        let g = gap_vector(l, &us[0]).map_err(|e| e.to_string())?;
        let want: Vec<f64> = BI_GAP[row][..2].iter().map(|s| s.parse().unwrap()).collect();
        for c in 0..2 {
            ensure((g[c] - want[c]).abs() <= GAP_TOL, || {
                format!("row {} component {}: {} vs {}", row + 1, c + 1, g[c], want[c])
            })?;
        }
        if row == 0 {
            ensure(fmt2(g[0]) == "5.55" && fmt2(g[1]) == "0.66", || format!("row 1 = {g:?}"))?;
        }
        let gaps: Vec<Option<Vec<f64>>> = us.iter().map(|u| gap_vector(l, u).ok()).collect();
        let marked = marked_gap_row(2, &gaps);
        ensure(marked == BI_GAP[row], || format!("row {} marked {:?}", row + 1, marked))?;
    }
    for (row, l) in TRI_L.iter().enumerate() {
        let gaps: Vec<Option<Vec<f64>>> = (0..3)
            .map(|g| {
                let u3 = if row == 0 { TRI_U3_FIRST[g] } else { 118122.0 };
                let u1 = if g == 0 { 119379.88 } else { 119379.8835 };
                gap_vector(l, &[u1, 119365.0, u3]).ok()
            })
            .collect();
        let marked = marked_gap_row(3, &gaps);
        ensure(marked == TRI_GAP[row], || format!("tri-criteria row {} marked {:?}", row + 1, marked))?;
    }
    Ok("5 bi-criteria and 5 tri-criteria rows x 3 gammas with markers, degenerate row gives 100.00".into())
}

fn weak_duality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut improved = 0;
    for t in 0..100u64 {
        let k = rng.random_range(2..=3);
        let n = rng.random_range(5..=14);
        let m = rng.random_range(2..=5);
        let inst = instance(k, n, m, 5000 + t);
        let y = y_star(&inst);
        let lambda = sample_weight_vectors(k, 1, t).unwrap().remove(0);
        let p = params(&lambda, &y);
        let (_, s_star) = exact(&inst, &p);
        let mu = Multipliers::new((0..m).map(|_| rng.random_range(0.01..2.0)).collect()).unwrap();
        let s_mu = surrogate_optimum(&inst, &mu, &p);
        ensure(s_mu <= s_star + BOUND_TOL, || format!("triple {t}: s(mu) = {s_mu} > s* = {s_star}"))?;
        let surrogate = make_surrogate(&inst, &mu).unwrap();
        let task = SolveTask::new(Region::Surrogate(&surrogate), &p, 60.0);
        let bnb = BranchAndBound.solve_chebyshev(&task).unwrap();
        ensure(
            bnb.status == SolveStatus::Optimal && (bnb.objective - s_mu).abs() <= BOUND_TOL,
            || format!("triple {t}: relaxation solve {} vs oracle {s_mu}", bnb.objective),
        )?;
        let s0 = surrogate_optimum(&inst, &Multipliers::unit_uniform(m).unwrap(), &p);
        let trace = suboptimal_multipliers(&inst, &p, &DualConfig::new(5, 2.0), &BranchAndBound).unwrap();
        ensure(trace.best_value >= s0 - BOUND_TOL, || {
            format!("triple {t}: dual search best {} below s(mu0) = {s0}", trace.best_value)
        })?;
        ensure(trace.best_value <= s_star + BOUND_TOL, || {
            format!("triple {t}: dual search best {} above s* = {s_star}", trace.best_value)
        })?;
        if trace.best_value > s0 + BOUND_TOL {
            improved += 1;
        }
    }
    Ok(format!("100 triples; dual search improved on mu0 in {improved}"))
}

/// Optimum over the single aggregated constraint, by enumeration.
fn surrogate_optimum(inst: &MomipInstance, mu: &Multipliers, p: &ChebyshevParams) -> f64 {
    let s = make_surrogate(inst, mu).unwrap();
    let relaxed = MomipInstance::new(
        "relaxed",
        inst.objectives().to_vec(),
        vec![s.row().to_vec()],
        vec![s.rhs()],
    )
    .unwrap();
    exact(&relaxed, p).1
}

fn upper_shell_validity() -> Check {
    let checked: Vec<Result<usize, String>> = (0..60u64)
        .into_par_iter()
        .map(|t| {
            let k = 2 + (t % 2) as usize;
            let inst = instance(k, 8 + (t % 8) as usize, 1 + (t % 4) as usize, 7000 + t);
            let y = y_star(&inst);
            let all = feasible_outcomes(&inst);
            let mut members = 0;
            for (i, lambda) in sample_weight_vectors(k, 2, t).unwrap().iter().enumerate() {
                let variant = if i == 0 { Variant::Chute1 } else { Variant::Chute2 };
                let config = ChuteConfig {
                    variant,
                    gamma: 20.0,
                    parallel: false,
                    ..ChuteConfig::default()
                };
                let r = chute(&inst, lambda, &y, &config, &BranchAndBound).map_err(|e| e.to_string())?;
                for m in r.s_u.members() {
                    members += 1;
                    if let Some(d) = all.iter().find(|f| dominates(f, &m.outcome).unwrap()) {
                        return Err(format!("{}: {:?} dominated by {:?}", inst.name(), m.outcome, d));
                    }
                }
            }
            Ok(members)
        })
        .collect();
    let members: usize = checked.into_iter().collect::<Result<Vec<_>, _>>()?.iter().sum();
    Ok(format!("60 instances with n <= 15, {members} upper shell members checked"))
}

fn probe_invariants(sweep: &Sweep) -> Check {
    let mut probes = 0;
    for (_, r) in &sweep.runs {
        let cap = r.gamma.ceil() as usize;
        for l_bar in 0..r.lambda.len() {
            let mine: Vec<_> = r.probes.iter().filter(|p| p.l_bar == l_bar).collect();
            ensure(mine.len() <= cap, || format!("{} probes for gamma {}", mine.len(), r.gamma))?;
            for p in mine {
                probes += 1;
                let sum: f64 = p.lambda.iter().sum();
                ensure((sum - 1.0).abs() <= SIMPLEX_TOL, || format!("probe {:?} sums to {sum}", p.lambda))?;
                ensure(p.lambda.iter().all(|v| *v > 0.0), || format!("probe {:?}", p.lambda))?;
                ensure(p.lambda != r.lambda.weights(), || format!("base lambda {:?} probed", p.lambda))?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let k = rng.random_range(2..=3);
        let lambda = sample_weight_vectors(k, 1, rng.random()).unwrap().remove(0);
        let gamma = rng.random_range(0.5..80.0);
        let l_bar = rng.random_range(0..k);
        let s = ProbeSchedule::new(l_bar, &lambda, gamma).map_err(|e| e.to_string())?;
        ensure(s.probes.len() <= gamma.ceil() as usize, || format!("{} probes, gamma {gamma}", s.probes.len()))?;
        for p in &s.probes {
            probes += 1;
            ensure((p.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL, || format!("{p:?}"))?;
            ensure(p.iter().all(|v| *v > 0.0) && p.as_slice() != lambda.weights(), || format!("{p:?}"))?;
        }
    }
    Ok(format!("{probes} probes from engine traces and 2000 random schedules"))
}

fn member(inst: &MomipInstance, x: Vec<u8>, upper: bool) -> ShellMember {
    let solution = Solution::new(x).unwrap();
    let outcome = inst.evaluate_outcome(&solution).unwrap();
    ShellMember {
        solution,
        outcome,
        provenance: if upper {
            MemberProvenance::RelaxationOptimal {
                mu: vec![1.0],
                lambda: vec![0.5; inst.k()],
            }
        } else {
            MemberProvenance::Incumbent
        },
    }
}

fn clean(s: &Shell, kind: ShellKind) -> bool {
    s.members().iter().all(|a| {
        s.members().iter().all(|b| match kind {
            ShellKind::Lower => !dominates(&a.outcome, &b.outcome).unwrap(),
            ShellKind::Upper => !dominates(&b.outcome, &a.outcome).unwrap(),
        })
    })
}

fn monotonicity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for t in 0..300u64 {
        let k = rng.random_range(2..=3);
        let n = rng.random_range(4..=12);
        let inst = instance(k, n, rng.random_range(1..=3), 9000 + t);
        let y = y_star(&inst);
        let lambda = sample_weight_vectors(k, 1, t).unwrap().remove(0);
        let p = params(&lambda, &y);
        let floor = vec![0.0; k];
        let feasible: Vec<Vec<u8>> = (0u32..1 << n)
            .map(|mask| (0..n).map(|j| ((mask >> j) & 1) as u8).collect::<Vec<u8>>())
            .filter(|x| inst.is_feasible(&Solution::new(x.clone()).unwrap()).unwrap())
            .collect();
        let mut s_l = Shell::new(ShellKind::Lower);
        let mut prev: Option<BoundVector> = None;
        let mut shells_l = Vec::new();
        for _ in 0..6 {
            let x = feasible[rng.random_range(0..feasible.len())].clone();
            s_l.insert(member(&inst, x, false)).unwrap();
            shells_l.push(Shell::from_members(ShellKind::Lower, s_l.members().last().cloned()).unwrap());
            let l = lower_bounds(&s_l, &p, &floor).unwrap();
            if let Some(prev) = &prev {
                ensure(l.values.iter().zip(&prev.values).all(|(a, b)| a >= b), || {
                    format!("L fell from {:?} to {:?}", prev.values, l.values)
                })?;
            }
            prev = Some(l);
        }
        let lower = prev.unwrap();
        let mut s_u = Shell::new(ShellKind::Upper);
        let mut prev_u: Option<Vec<f64>> = None;
        let mut shells_u = Vec::new();
        for _ in 0..6 {
            let x: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
            s_u.insert(member(&inst, x, true)).unwrap();
            shells_u.push(Shell::from_members(ShellKind::Upper, s_u.members().last().cloned()).unwrap());
            let u = upper_bounds(&s_u, &lower, &y).unwrap().values;
            if let Some(prev) = &prev_u {
                ensure(u.iter().zip(prev).all(|(a, b)| a <= b), || format!("U rose from {prev:?} to {u:?}"))?;
            }
            prev_u = Some(u);
        }
        for (shells, kind) in [(&shells_l, ShellKind::Lower), (&shells_u, ShellKind::Upper)] {
            let merge = |s: &[Shell]| match kind {
                ShellKind::Lower => merge_lower(s).unwrap(),
                ShellKind::Upper => merge_upper(s).unwrap(),
            };
            let once = merge(shells);
            let twice = merge(&[once.clone(), once.clone()]);
            ensure(once == twice && merge(std::slice::from_ref(&once)) == once, || format!("{kind:?} merge not idempotent"))?;
            ensure(clean(&once, kind), || format!("{kind:?} merge keeps dominated pairs"))?;
        }
    }
    Ok("300 random shell sequences: L monotone, U monotone, merges idempotent and clean".into())
}

fn solver_contract() -> Check {
    let results: Vec<Result<(usize, usize), String>> = (0..150u64)
        .into_par_iter()
        .map(|t| {
            let inst = random_instance(20_000 + t);
            let y = y_star(&inst);
            let lambda = sample_weight_vectors(inst.k(), 1, t).unwrap().remove(0);
            let p = params(&lambda, &y);
            let (_, oracle) = exact(&inst, &p);
            let (mut optimal, mut limited) = (0, 0);
            for limit in [None, Some(1), Some(3), Some(10), Some(40)] {
                let task = SolveTask::new(Region::Original(&inst), &p, 60.0).with_node_limit(limit);
                let r = BranchAndBound.solve_chebyshev(&task).map_err(|e| e.to_string())?;
                match r.status {
                    SolveStatus::Optimal => {
                        optimal += 1;
                        ensure((r.objective - oracle).abs() <= BOUND_TOL, || {
                            format!("{}: optimal {} vs oracle {oracle}", inst.name(), r.objective)
                        })?;
                    }
                    SolveStatus::TimeLimit => {
                        limited += 1;
                        ensure(r.best_bound <= oracle + BOUND_TOL && oracle <= r.objective + BOUND_TOL, || {
                            format!("{}: {} <= {oracle} <= {} fails", inst.name(), r.best_bound, r.objective)
                        })?;
                        ensure((r.objective - oracle).abs() > BOUND_TOL || r.best_bound < oracle - BOUND_TOL, || {
                            format!("{}: time_limit although optimality is proven", inst.name())
                        })?;
                    }
                    SolveStatus::Infeasible => return Err(format!("{}: reported infeasible", inst.name())),
                }
            }
            Ok((optimal, limited))
        })
        .collect();
    let (mut optimal, mut limited) = (0, 0);
    for r in results {
        let (o, l) = r?;
        optimal += o;
        limited += l;
    }
    let replay = |threads| {
        let report = small_experiment(threads, true);
        experiment_tables(&report)
    };
    let (a, b) = (replay(1), replay(4));
    ensure(a == b, || "experiment tables differ between replays".into())?;
    Ok(format!(
        "{optimal} optimal and {limited} node-limited solves agree with the oracle; {} experiment tables byte-identical on replay",
        a.len()
    ))
}

fn small_experiment(threads: usize, mask: bool) -> ExperimentReport {
    let config = ExperimentConfig {
        instances: vec![instance(2, 12, 3, 41), instance(3, 11, 2, 42)],
        lambdas: LambdaSource::Sampled { count: 5, seed: 1 },
        gammas: vec![10.0, 30.0, 50.0],
        variants: vec![Variant::Chute1, Variant::Chute2],
        base: ChuteConfig::default(),
        ty: 30.0,
        epsilon: 1.0,
        y_star: None,
        threads: Some(threads),
        mask_timings: mask,
    };
    run_experiment(&config, &BranchAndBound).expect("experiment")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn reporting_schema() -> Check {
    let report = small_experiment(2, false);
    ensure(report.cells.len() == 60, || format!("{} cells", report.cells.len()))?;
    let tables = experiment_tables(&report);
    let get = |name: &str| {
        tables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| csv_rows(t))
            .ok_or_else(|| format!("missing {name}"))
    };
    for inst in &report.instances {
        let k = inst.k;
        for v in ["chute1", "chute2"] {
            for g in ["10", "30", "50"] {
                let (h, rows) = get(&format!("{}_{v}_g{g}.csv", inst.name))?;
                let mut want: Vec<String> = (1..=k).map(|l| format!("lambda_{l}")).collect();
                want.extend((1..=k).map(|l| format!("U_{l}")));
                want.extend((1..=k).map(|l| format!("gap_{l}")));
                want.extend(["su_size".to_string(), "time_su".to_string()]);
                ensure(h == want, || format!("{v} header {h:?}"))?;
                for r in &rows {
                    let t = r.last().unwrap();
                    if v == "chute2" {
                        let (total, dual) = t
                            .strip_suffix(')')
                            .and_then(|t| t.split_once(" ("))
                            .ok_or_else(|| format!("chute2 time cell {t:?}"))?;
                        let (total, dual): (f64, f64) = (total.parse().unwrap(), dual.parse().unwrap());
                        ensure(dual <= total, || format!("dual {dual} > total {total}"))?;
                    } else {
                        ensure(t.parse::<f64>().is_ok(), || format!("chute1 time cell {t:?}"))?;
                    }
                }
            }
            let (h, _) = get(&format!("{}_{v}_gap.csv", inst.name))?;
            ensure(h.len() == 1 + 3 * k, || format!("gap table header {h:?}"))?;
            let (h, _) = get(&format!("{}_{v}_U.csv", inst.name))?;
            ensure(h.len() == 1 + 3 * k, || format!("U table header {h:?}"))?;
            get(&format!("{}_{v}_su.csv", inst.name))?;
        }
    }
    let (h, rows) = get("averages.csv")?;
    ensure(h == ["instance", "gamma", "avg_time_su_chute1", "avg_time_su_chute2"], || format!("{h:?}"))?;
    ensure(rows.len() == 6 && rows.iter().all(|r| r[3].contains(" (")), || format!("{rows:?}"))?;
    Ok(format!("{} tables; per-variant tables have 3k + 2 columns; averages table has 6 rows", tables.len()))
}

fn run(name: &str, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(msg) => {
            println!("PASS {name} ({secs:.1}s): {msg}");
            true
        }
        Err(msg) => {
            println!("FAIL {name} ({secs:.1}s): {msg}");
            false
        }
    }
}

fn main() {
    let mut sweep_data = None;
    let mut ok = true;
    ok &= run("sandwich", || {
        let s = sweep();
        let r = sandwich(&s);
        sweep_data = Some(s);
        r
    });
    ok &= run("gap-regression", gap_regression);
    ok &= run("weak-duality", weak_duality);
    ok &= run("upper-shell-validity", upper_shell_validity);
    ok &= run("probe-invariants", || match &sweep_data {
        Some(s) => probe_invariants(s),
        None => Err("no engine traces; the sandwich sweep failed".into()),
    });
    ok &= run("monotonicity", monotonicity);
    ok &= run("solver-contract", solver_contract);
    ok &= run("reporting-schema", reporting_schema);
    if !ok {
        std::process::exit(1);
    }
}
