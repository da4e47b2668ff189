//! Experiment sweeps over instances, weight vectors, variants and gammas.

use serde::Serialize;

use chute_core::{
    estimate_reference_point, lower_stage, multiplier_stage, sample_weight_vectors, upper_stage, ChuteConfig,
    ChuteError, ChuteResult, MomipInstance, ReferencePoint, ScalarSolver, Variant, WeightVector,
};

use crate::error::CliError;

/// Where the weight vectors come from.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaSource {
    Explicit(Vec<Vec<f64>>),
    Sampled { count: usize, seed: u64 },
}

impl LambdaSource {
    pub fn resolve(&self, k: usize) -> Result<Vec<WeightVector>, ChuteError> {
        match self {
            LambdaSource::Explicit(list) => list
                .iter()
                .map(|w| {
                    if w.len() != k {
                        return Err(ChuteError::Dimension(format!(
                            "lambda has {} components, instance has k = {k}",
                            w.len()
                        )));
                    }
                    WeightVector::new(w.clone())
                })
                .collect(),
            LambdaSource::Sampled { count, seed } => sample_weight_vectors(k, *count, *seed),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub instances: Vec<MomipInstance>,
    pub lambdas: LambdaSource,
    pub gammas: Vec<f64>,
    pub variants: Vec<Variant>,
    /// Template for every cell; `variant` and `gamma` are overwritten.
    pub base: ChuteConfig,
    /// Deadline for estimating `y*`.
    pub ty: f64,
    pub epsilon: f64,
    /// Supplied `y*`, used for every instance instead of estimating it.
    pub y_star: Option<Vec<f64>>,
    pub threads: Option<usize>,
    pub mask_timings: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.instances.is_empty() {
            return Err(CliError::input("no instances given"));
        }
        if self.gammas.is_empty() || self.variants.is_empty() {
            return Err(CliError::input("need at least one gamma and one variant"));
        }
        for &g in &self.gammas {
            let mut c = self.base.clone();
            c.gamma = g;
            c.validate()?;
        }
        for inst in &self.instances {
            self.lambdas.resolve(inst.k())?;
        }
        if self.threads == Some(0) {
            return Err(CliError::input("thread count must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceSummary {
    pub name: String,
    pub k: usize,
    pub fingerprint: String,
    pub y_star: Option<ReferencePoint>,
    pub lambdas: Vec<WeightVector>,
    pub error: Option<String>,
}

/// One (instance, variant, gamma, lambda) run. Exactly one of `result` and
/// `error` is set.
#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub instance: String,
    pub variant: Variant,
    pub gamma: f64,
    /// 1-based index of the weight vector.
    pub no: usize,
    pub lambda: WeightVector,
    pub result: Option<ChuteResult>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub instances: Vec<InstanceSummary>,
    pub variants: Vec<Variant>,
    pub gammas: Vec<f64>,
    /// Sorted by instance order, variant, gamma order, then `no`.
    pub cells: Vec<Cell>,
}

struct Job<'a> {
    inst_idx: usize,
    inst: &'a MomipInstance,
    no: usize,
    lambda: WeightVector,
    y_star: ReferencePoint,
}

/// Runs every cell. Failures are recorded in their cells; only invalid
/// configuration is an error.
pub fn run_experiment<S: ScalarSolver + Sync>(
    config: &ExperimentConfig,
    solver: &S,
) -> Result<ExperimentReport, CliError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Solver(format!("thread pool: {e}")))?;

    let mut summaries = Vec::new();
    let mut jobs = Vec::new();
    let mut cells = Vec::new();
    for (inst_idx, inst) in config.instances.iter().enumerate() {
        let lambdas = config.lambdas.resolve(inst.k())?;
        let y_star = match &config.y_star {
            Some(v) => ReferencePoint::supplied(v.clone()),
            None => pool.install(|| estimate_reference_point(inst, config.ty, config.epsilon, solver)),
        };
        let error = y_star.as_ref().err().map(|e| format!("reference point: {e}"));
        if let Some(msg) = &error {
            for (i, lambda) in lambdas.iter().enumerate() {
                for &variant in &config.variants {
                    for &gamma in &config.gammas {
                        cells.push((
                            inst_idx,
                            Cell {
                                instance: inst.name().to_string(),
                                variant,
                                gamma,
                                no: i + 1,
                                lambda: lambda.clone(),
                                result: None,
                                error: Some(msg.clone()),
                            },
                        ));
                    }
                }
            }
        }
        if let Ok(y) = &y_star {
            for (i, lambda) in lambdas.iter().enumerate() {
                jobs.push(Job {
                    inst_idx,
                    inst,
                    no: i + 1,
                    lambda: lambda.clone(),
                    y_star: y.clone(),
                });
            }
        }
        summaries.push(InstanceSummary {
            name: inst.name().to_string(),
            k: inst.k(),
            fingerprint: inst.fingerprint(),
            y_star: y_star.ok(),
            lambdas,
            error,
        });
    }

    let per_job: Vec<Vec<(usize, Cell)>> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter().map(|job| run_job(job, config, solver)).collect()
    });
    cells.extend(per_job.into_iter().flatten());

    let variant_pos = |v: Variant| config.variants.iter().position(|&x| x == v).unwrap_or(usize::MAX);
    let gamma_pos = |g: f64| config.gammas.iter().position(|&x| x == g).unwrap_or(usize::MAX);
    cells.sort_by_key(|(i, c)| (*i, variant_pos(c.variant), gamma_pos(c.gamma), c.no));
    Ok(ExperimentReport {
        instances: summaries,
        variants: config.variants.clone(),
        gammas: config.gammas.clone(),
        cells: cells.into_iter().map(|(_, c)| c).collect(),
    })
}

/// The incumbent and lower bounds are shared by all variants and gammas of a
/// weight vector, and the multipliers by all gammas of a variant.
fn run_job<S: ScalarSolver + Sync>(job: &Job<'_>, config: &ExperimentConfig, solver: &S) -> Vec<(usize, Cell)> {
    let cell = |variant: Variant, gamma: f64, outcome: Result<ChuteResult, String>| {
        let (result, error) = match outcome {
            Ok(mut r) => {
                if config.mask_timings {
                    r.mask_timings();
                }
                (Some(r), None)
            }
            Err(e) => (None, Some(e)),
        };
        (
            job.inst_idx,
            Cell {
                instance: job.inst.name().to_string(),
                variant,
                gamma,
                no: job.no,
                lambda: job.lambda.clone(),
                result,
                error,
            },
        )
    };
    let mut out = Vec::new();
    let mut base = config.base.clone();
    base.parallel = false;
    let lower = lower_stage(job.inst, &job.lambda, &job.y_star, &base, solver);
    for &variant in &config.variants {
        let mut vc = base.clone();
        vc.variant = variant;
        let mu = match &lower {
            Ok(lower) => multiplier_stage(job.inst, lower, &vc, solver)
                .map(|mu| (lower, mu))
                .map_err(|e| e.to_string()),
            Err(e) => Err(e.to_string()),
        };
        for &gamma in &config.gammas {
            let mut gc = vc.clone();
            gc.gamma = gamma;
            let outcome = match &mu {
                Ok((lower, mu)) => upper_stage(job.inst, lower, mu, &gc, solver).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            out.push(cell(variant, gamma, outcome));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chute_core::{generate_instance, BranchAndBound, GeneratorConfig};

    fn config(instances: Vec<MomipInstance>) -> ExperimentConfig {
        ExperimentConfig {
            instances,
            lambdas: LambdaSource::Sampled { count: 5, seed: 3 },
            gammas: vec![10.0, 30.0, 50.0],
            variants: vec![Variant::Chute1, Variant::Chute2],
            base: ChuteConfig::default(),
            ty: 5.0,
            epsilon: 1.0,
            y_star: None,
            threads: Some(2),
            mask_timings: true,
        }
    }

    fn inst(seed: u64) -> MomipInstance {
        generate_instance(&GeneratorConfig {
            n: 10,
            seed,
            ..GeneratorConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn sixty_cells_in_order() {
        let report = run_experiment(&config(vec![inst(1), inst(2)]), &BranchAndBound).unwrap();
        assert_eq!(report.cells.len(), 60);
        assert!(report.cells.iter().all(|c| c.result.is_some() && c.error.is_none()));
        assert_eq!(report.cells[0].no, 1);
        assert_eq!(report.cells[4].no, 5);
        assert_eq!(report.cells[5].gamma, 30.0);
        assert_eq!(report.cells[15].variant, Variant::Chute2);
        assert_eq!(report.cells[30].instance, inst(2).name());
    }

    #[test]
    fn bad_y_star_is_recorded_per_cell() {
        let mut c = config(vec![inst(1)]);
        c.y_star = Some(vec![1.0, 1.0, 1.0]);
        c.lambdas = LambdaSource::Sampled { count: 2, seed: 1 };
        let report = run_experiment(&c, &BranchAndBound).unwrap();
        assert_eq!(report.cells.len(), 12);
        assert!(report.cells.iter().all(|c| c.result.is_none() && c.error.is_some()));
    }

    #[test]
    fn explicit_lambda_dimension_is_checked() {
        let mut c = config(vec![inst(1)]);
        c.lambdas = LambdaSource::Explicit(vec![vec![0.2, 0.3, 0.5]]);
        let err = run_experiment(&c, &BranchAndBound).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_INPUT);
    }
}
