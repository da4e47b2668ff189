//! Augmented Chebyshev scalarization and the reference point `y*`.

use serde::{Deserialize, Serialize};

use crate::bnb::{ScalarSolver, SolveStatus};
use crate::error::{ChuteError, Result};
use crate::instances::{MomipInstance, Outcome, WeightVector};

/// Default augmentation coefficient.
pub const DEFAULT_RHO: f64 = 0.001;

/// Default `epsilon` added to exact single-objective maxima. One unit is the
/// smallest step that keeps `y*` strictly above integral outcomes.
pub const DEFAULT_EPSILON: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefProvenance {
    /// Proven maximum plus epsilon.
    ExactPlusEpsilon,
    /// Solver best bound after the deadline.
    BestBound,
    /// Given by the caller.
    Supplied,
}

/// Reference point `y*`, an upper bound on every feasible outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    values: Vec<f64>,
    provenance: Vec<RefProvenance>,
}

impl ReferencePoint {
    pub fn new(values: Vec<f64>, provenance: Vec<RefProvenance>) -> Result<Self> {
        if values.len() != provenance.len() {
            return Err(ChuteError::dimension("one provenance tag per component is required"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ChuteError::Domain("reference point must be finite".into()));
        }
        Ok(Self { values, provenance })
    }

    /// A caller-supplied reference point. The caller is responsible for it
    /// bounding every feasible outcome.
    pub fn supplied(values: Vec<f64>) -> Result<Self> {
        let provenance = vec![RefProvenance::Supplied; values.len()];
        Self::new(values, provenance)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> &[RefProvenance] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `lambda`, `y*` and `rho` of one scalarization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevParams {
    lambda: WeightVector,
    y_star: ReferencePoint,
    rho: f64,
}

impl ChebyshevParams {
    pub fn new(lambda: WeightVector, y_star: ReferencePoint, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(ChuteError::parameter(format!("rho must be positive, got {rho}")));
        }
        Self::build(lambda, y_star, rho)
    }

    /// rho = 0, for oracle cross-checks against hand computations.
    #[cfg(test)]
    pub(crate) fn unaugmented(lambda: WeightVector, y_star: ReferencePoint) -> Self {
        Self::build(lambda, y_star, 0.0).unwrap()
    }

    fn build(lambda: WeightVector, y_star: ReferencePoint, rho: f64) -> Result<Self> {
        if lambda.len() != y_star.len() {
            return Err(ChuteError::dimension(format!(
                "lambda has {} components, y* has {}",
                lambda.len(),
                y_star.len()
            )));
        }
        Ok(Self { lambda, y_star, rho })
    }

    pub fn lambda(&self) -> &WeightVector {
        &self.lambda
    }

    pub fn y_star(&self) -> &ReferencePoint {
        &self.y_star
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn k(&self) -> usize {
        self.lambda.len()
    }

    /// Same `y*` and `rho`, different weights.
    pub fn with_lambda(&self, lambda: WeightVector) -> Result<Self> {
        Self::build(lambda, self.y_star.clone(), self.rho)
    }

    /// `max_l lambda_l (y*_l - f_l) + rho * sum_l (y*_l - f_l)`.
    pub(crate) fn value_of(&self, f: &[f64]) -> f64 {
        let y = self.y_star.values();
        let mut worst = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for ((&w, &yl), &fl) in self.lambda.weights().iter().zip(y).zip(f) {
            let d = yl - fl;
            worst = worst.max(w * d);
            sum += d;
        }
        worst + self.rho * sum
    }
}

/// Value of the augmented Chebyshev function at `outcome` (lower is better).
pub fn chebyshev_value(outcome: &Outcome, params: &ChebyshevParams) -> Result<f64> {
    if outcome.len() != params.k() {
        return Err(ChuteError::dimension(format!(
            "outcome has {} components, parameters have {}",
            outcome.len(),
            params.k()
        )));
    }
    Ok(params.value_of(outcome.values()))
}

/// Maximizes each objective separately under `deadline` seconds and derives `y*`.
///
/// Proven maxima get `+ epsilon`; otherwise the solver's best bound is used
/// as is. The `k` runs execute on scoped threads.
pub fn estimate_reference_point<S: ScalarSolver + Sync>(
    inst: &MomipInstance,
    deadline: f64,
    epsilon: f64,
    solver: &S,
) -> Result<ReferencePoint> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(ChuteError::parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(deadline > 0.0) {
        return Err(ChuteError::parameter(format!("deadline must be positive, got {deadline}")));
    }
    let reports: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..inst.k())
            .map(|l| scope.spawn(move || solver.maximize_objective(inst, l, deadline)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("objective maximization panicked"))
            .collect()
    });
    let mut values = Vec::with_capacity(inst.k());
    let mut provenance = Vec::with_capacity(inst.k());
    for (l, report) in reports.into_iter().enumerate() {
        let report = report.map_err(|e| e.at_stage(format!("maximize objective {l}")))?;
        match report.status {
            SolveStatus::Optimal => {
                values.push(report.objective + epsilon);
                provenance.push(RefProvenance::ExactPlusEpsilon);
            }
            SolveStatus::TimeLimit => {
                values.push(report.best_bound);
                provenance.push(RefProvenance::BestBound);
            }
            SolveStatus::Infeasible => {
                return Err(ChuteError::State(format!(
                    "instance {} has no feasible solution",
                    inst.name()
                )));
            }
        }
    }
    ReferencePoint::new(values, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnb::BranchAndBound;
    use crate::instances::fixtures::*;
    use proptest::prelude::*;

    fn toy_params(rho: Option<f64>) -> ChebyshevParams {
        let lambda = WeightVector::new(vec![0.5, 0.5]).unwrap();
        let y = ReferencePoint::supplied(vec![5.0, 5.0]).unwrap();
        match rho {
            Some(r) => ChebyshevParams::new(lambda, y, r).unwrap(),
            None => ChebyshevParams::unaugmented(lambda, y),
        }
    }

    #[test]
    fn value_at_reference_point_is_zero() {
        let p = toy_params(Some(0.3));
        assert_eq!(chebyshev_value(&out(&[5.0, 5.0]), &p).unwrap(), 0.0);
    }

    #[test]
    fn toy_values_by_hand() {
        assert_eq!(chebyshev_value(&out(&[4.0, 1.0]), &toy_params(None)).unwrap(), 2.0);
        let v = chebyshev_value(&out(&[4.0, 1.0]), &toy_params(Some(0.001))).unwrap();
        assert!((v - 2.005).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let lambda = WeightVector::new(vec![0.5, 0.5]).unwrap();
        let y = ReferencePoint::supplied(vec![5.0, 5.0]).unwrap();
        assert!(ChebyshevParams::new(lambda.clone(), y.clone(), 0.0).is_err());
        let y3 = ReferencePoint::supplied(vec![5.0, 5.0, 5.0]).unwrap();
        assert!(matches!(
            ChebyshevParams::new(lambda, y3, 0.001),
            Err(ChuteError::Dimension(_))
        ));
        assert!(chebyshev_value(&out(&[1.0]), &toy_params(Some(0.1))).is_err());
    }

    #[test]
    fn toy_reference_point() {
        let y = estimate_reference_point(&toy(), 10.0, 1.0, &BranchAndBound).unwrap();
        assert_eq!(y.values(), &[5.0, 5.0]);
        assert!(y.provenance().iter().all(|p| *p == RefProvenance::ExactPlusEpsilon));
    }

    #[test]
    fn tiny_deadline_falls_back_to_best_bound() {
        let inst = crate::instances::generate_instance(&crate::instances::GeneratorConfig {
            n: 40,
            ..Default::default()
        })
        .unwrap();
        let exact = estimate_reference_point(&inst, 60.0, 1.0, &BranchAndBound).unwrap();
        let rushed = estimate_reference_point(&inst, 1e-9, 1.0, &BranchAndBound).unwrap();
        for l in 0..inst.k() {
            assert_eq!(rushed.provenance()[l], RefProvenance::BestBound);
            assert!(rushed.values()[l] >= exact.values()[l] - 1.0);
        }
    }

    proptest! {
        #[test]
        fn strictly_decreasing_in_each_component(
            f in proptest::collection::vec(0.0f64..100.0, 3),
            w in proptest::collection::vec(0.05f64..1.0, 3),
            l in 0usize..3,
            bump in 0.01f64..10.0,
        ) {
            let s: f64 = w.iter().sum();
            let lambda = WeightVector::normalized(w.iter().map(|x| x / s).collect(), 1e-9).unwrap();
            let y = ReferencePoint::supplied(vec![120.0; 3]).unwrap();
            let p = ChebyshevParams::new(lambda, y, 0.001).unwrap();
            let mut g = f.clone();
            g[l] += bump;
            let before = chebyshev_value(&Outcome::from_vec(f.clone()), &p).unwrap();
            let after = chebyshev_value(&Outcome::from_vec(g), &p).unwrap();
            prop_assert!(after < before);

            // The linearized form: the smallest s above every row.
            let y = p.y_star().values();
            let aug: f64 = y.iter().zip(&f).map(|(a, b)| a - b).sum::<f64>() * p.rho();
            let rows = (0..3).map(|i| p.lambda().get(i) * (y[i] - f[i]) + aug);
            let s_min = rows.fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((s_min - before).abs() <= 1e-9);
        }
    }
}
