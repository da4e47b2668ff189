use serde::Serialize;

use chute_core::{
    brute_force_chebyshev, estimate_reference_point, generate_instance, lower_stage, multiplier_stage,
    upper_stage, BranchAndBound, ChebyshevParams, ChuteResult, GeneratorConfig, MomipInstance, Outcome,
    ReferencePoint, Solution, SolveStatus, WeightVector,
};

use crate::args::{
    Cli, Command, ExperimentArgs, FrontArgs, Format, GenerateArgs, OracleArgs, ServeArgs, SolveArgs,
};
use crate::error::CliError;
use crate::experiment::{run_experiment, ExperimentConfig};
use crate::front::{build_front, load_results};
use crate::io::{atomic_write, emit, load_instance};
use crate::tables::{experiment_tables, result_table};

/// Absolute tolerance of `oracle --check`.
pub const CHECK_TOL: f64 = 1e-9;

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(a) => solve(&a),
        Command::Experiment(a) => experiment(&a),
        Command::Oracle(a) => oracle(&a),
        Command::Front(a) => front(&a),
        Command::Generate(a) => generate(&a),
        Command::Serve(a) => serve(&a),
    }
}

fn reference_point(
    inst: &MomipInstance,
    supplied: Option<Vec<f64>>,
    ty: f64,
    epsilon: f64,
) -> Result<ReferencePoint, CliError> {
    let y = match supplied {
        Some(v) => {
            if v.len() != inst.k() {
                return Err(CliError::input(format!(
                    "--y-star has {} components, instance has k = {}",
                    v.len(),
                    inst.k()
                )));
            }
            ReferencePoint::supplied(v)?
        }
        None => estimate_reference_point(inst, ty, epsilon, &BranchAndBound)?,
    };
    Ok(y)
}

fn to_json<T: Serialize>(items: &[T]) -> String {
    let text = match items {
        [one] => serde_json::to_string_pretty(one),
        many => serde_json::to_string_pretty(many),
    };
    text.expect("serializable") + "\n"
}

/// Every (lambda, variant, gamma) combination; the incumbent is shared across
/// variants and gammas and the multipliers across gammas.
pub fn solve_results(
    inst: &MomipInstance,
    args: &SolveArgs,
) -> Result<(Vec<ChuteResult>, Vec<String>), CliError> {
    let lambdas = args.lambda.source()?.resolve(inst.k())?;
    let base = args.run.config();
    for &g in &args.run.gamma {
        let mut c = base.clone();
        c.gamma = g;
        c.validate()?;
    }
    let y_star = reference_point(inst, args.run.y_star()?, args.run.ty(), args.run.epsilon)?;
    let mut results = Vec::new();
    let mut trace = Vec::new();
    for lambda in &lambdas {
        let lower = lower_stage(inst, lambda, &y_star, &base, &BranchAndBound)?;
        for &variant in &args.run.variant {
            let mut vc = base.clone();
            vc.variant = variant;
            let mu = multiplier_stage(inst, &lower, &vc, &BranchAndBound)?;
            if let Some(t) = &mu.trace {
                trace.push(t.to_json_lines());
            }
            for &gamma in &args.run.gamma {
                let mut gc = vc.clone();
                gc.gamma = gamma;
                let mut r = upper_stage(inst, &lower, &mu, &gc, &BranchAndBound)?;
                if args.run.mask_timings {
                    r.mask_timings();
                }
                results.push(r);
            }
        }
    }
    Ok((results, trace))
}

fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let inst = load_instance(&args.instance)?;
    let (results, trace) = solve_results(&inst, args)?;
    if let Some(path) = &args.trace {
        atomic_write(path, trace.concat().as_bytes())?;
    }
    let text = match args.format {
        Format::Json => to_json(&results),
        Format::Csv => result_table(&results),
    };
    emit(args.out.as_deref(), &text)
}

pub fn experiment_config(args: &ExperimentArgs) -> Result<ExperimentConfig, CliError> {
    let instances = args
        .instance
        .iter()
        .map(|p| load_instance(p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentConfig {
        instances,
        lambdas: args.lambda.source()?,
        gammas: args.run.gamma.clone(),
        variants: args.run.variant.clone(),
        base: args.run.config(),
        ty: args.run.ty(),
        epsilon: args.run.epsilon,
        y_star: args.run.y_star()?,
        threads: args.threads,
        mask_timings: args.run.mask_timings,
    })
}

fn experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let config = experiment_config(args)?;
    let report = run_experiment(&config, &BranchAndBound)?;
    for (name, text) in experiment_tables(&report) {
        atomic_write(&args.out.join(name), text.as_bytes())?;
    }
    if args.format == Format::Json {
        let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
        atomic_write(&args.out.join("results.json"), text.as_bytes())?;
    }
    let failed = report.cells.iter().filter(|c| c.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} cells failed; see the error column of cells.csv", report.cells.len());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct OracleRecord {
    pub lambda: WeightVector,
    pub y_star: ReferencePoint,
    pub rho: f64,
    pub status: SolveStatus,
    pub solution: Option<Solution>,
    pub outcome: Option<Outcome>,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct CheckRecord {
    pub lambda: WeightVector,
    pub variant: String,
    pub gamma: f64,
    pub outcome: Vec<f64>,
    #[serde(rename = "L")]
    pub lower: Vec<f64>,
    #[serde(rename = "U")]
    pub upper: Vec<f64>,
    pub ok: bool,
}

/// Compares a result with the exact Pareto outcome for its weight vector.
pub fn check_result(inst: &MomipInstance, r: &ChuteResult) -> Result<CheckRecord, CliError> {
    if r.instance_fingerprint != inst.fingerprint() {
        return Err(CliError::input(format!(
            "result for {} does not belong to instance {}",
            r.instance,
            inst.name()
        )));
    }
    let params = ChebyshevParams::new(r.lambda.clone(), r.y_star.clone(), r.rho)?;
    let exact = brute_force_chebyshev(inst, &params)?;
    let f = exact
        .outcome
        .ok_or_else(|| CliError::Solver(format!("instance {} is infeasible", inst.name())))?;
    let f = f.values().to_vec();
    let ok = f
        .iter()
        .zip(&r.lower)
        .zip(&r.upper)
        .all(|((v, lo), hi)| lo - CHECK_TOL <= *v && *v <= hi + CHECK_TOL);
    Ok(CheckRecord {
        lambda: r.lambda.clone(),
        variant: r.variant.to_string(),
        gamma: r.gamma,
        outcome: f,
        lower: r.lower.clone(),
        upper: r.upper.clone(),
        ok,
    })
}

fn oracle(args: &OracleArgs) -> Result<(), CliError> {
    let inst = load_instance(&args.instance)?;
    if let Some(path) = &args.check {
        let results = load_results(path)?;
        let checks = results
            .iter()
            .map(|r| check_result(&inst, r))
            .collect::<Result<Vec<_>, _>>()?;
        emit(args.out.as_deref(), &to_json(&checks))?;
        let bad = checks.iter().filter(|c| !c.ok).count();
        if bad > 0 {
            return Err(CliError::CheckFailed(format!("{bad} of {} results violate L <= f <= U", checks.len())));
        }
        return Ok(());
    }
    let lambdas = args.lambda.source()?.resolve(inst.k())?;
    let y_star = reference_point(&inst, args.y_star.as_deref().map(|s| crate::args::parse_vector(s, "--y-star")).transpose()?, args.ty, args.epsilon)?;
    let records = lambdas
        .into_iter()
        .map(|lambda| {
            let params = ChebyshevParams::new(lambda.clone(), y_star.clone(), args.rho)?;
            let exact = brute_force_chebyshev(&inst, &params)?;
            Ok(OracleRecord {
                lambda,
                y_star: y_star.clone(),
                rho: args.rho,
                status: exact.status,
                solution: exact.incumbent,
                outcome: exact.outcome,
                value: exact.objective,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    emit(args.out.as_deref(), &to_json(&records))
}

fn front(args: &FrontArgs) -> Result<(), CliError> {
    let mut results = Vec::new();
    for p in &args.results {
        results.extend(load_results(p)?);
    }
    let front = build_front(&results)?;
    let text = match args.format {
        Format::Csv => front.to_csv(),
        Format::Json => serde_json::to_string_pretty(&front).expect("serializable") + "\n",
    };
    emit(args.out.as_deref(), &text)
}

fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let inst = generate_instance(&GeneratorConfig {
        k: args.k,
        n: args.n,
        m: args.m,
        seed: args.seed,
        coeff_range: (args.coeff_min, args.coeff_max),
        tightness: args.tightness,
    })?;
    emit(args.out.as_deref(), &(inst.to_json() + "\n"))
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let config = chute_nav::ServerConfig {
        data_dir: args.data.clone(),
        max_tl: args.max_tl,
        queue_capacity: args.queue,
        ..chute_nav::ServerConfig::default()
    };
    let addr = format!("{}:{}", args.bind, args.port);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Solver(format!("runtime: {e}")))?;
    runtime
        .block_on(chute_nav::serve(&addr, config))
        .map_err(|e| CliError::Solver(format!("server: {e}")))
}
