//! Navigation sessions: accumulated shells, history and the reuse rule.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use chute_core::{
    chute, interval_representation, merge_lower, merge_upper, upper_bounds, BoundSource, BranchAndBound,
    ChuteConfig, ChuteError, DualConfig, IntervalRepresentation, MomipInstance, ReferencePoint, Shell, ShellKind,
    ShellMember, SolveStatus, Timings, Variant, WeightVector, DEFAULT_RHO,
};

/// Run settings of one navigation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub variant: Variant,
    pub gamma: f64,
    pub tl: f64,
    pub ts: f64,
    pub n_stall: u32,
    pub rho: f64,
    pub node_limit: Option<u64>,
    pub shell_deadline: Option<f64>,
    pub probe_deadline: Option<f64>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            variant: Variant::Chute1,
            gamma: 10.0,
            tl: 5.0,
            ts: 2.0,
            n_stall: 20,
            rho: DEFAULT_RHO,
            node_limit: None,
            shell_deadline: None,
            probe_deadline: None,
        }
    }
}

/// Per-request changes to the session defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub variant: Option<Variant>,
    pub gamma: Option<f64>,
    pub tl: Option<f64>,
    pub ts: Option<f64>,
    pub n_stall: Option<u32>,
    pub rho: Option<f64>,
    pub node_limit: Option<u64>,
    pub shell_deadline: Option<f64>,
    pub probe_deadline: Option<f64>,
}

/// Server-side ceilings on run budgets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    /// Seconds; bounds the incumbent, dual search and each probing loop.
    pub max_tl: f64,
    pub max_gamma: f64,
}

impl RunSettings {
    pub fn apply(&self, o: &Overrides) -> Self {
        Self {
            variant: o.variant.unwrap_or(self.variant),
            gamma: o.gamma.unwrap_or(self.gamma),
            tl: o.tl.unwrap_or(self.tl),
            ts: o.ts.unwrap_or(self.ts),
            n_stall: o.n_stall.unwrap_or(self.n_stall),
            rho: o.rho.unwrap_or(self.rho),
            node_limit: o.node_limit.or(self.node_limit),
            shell_deadline: o.shell_deadline.or(self.shell_deadline),
            probe_deadline: o.probe_deadline.or(self.probe_deadline),
        }
    }

    /// Clamps every budget to the caps. The probing loops get a deadline of
    /// `max_tl` when none is set.
    pub fn capped(&self, caps: &Caps) -> Self {
        let cap = |v: f64| v.min(caps.max_tl);
        Self {
            tl: cap(self.tl),
            ts: cap(self.ts),
            gamma: self.gamma.min(caps.max_gamma),
            shell_deadline: Some(self.shell_deadline.map_or(caps.max_tl, cap)),
            probe_deadline: self.probe_deadline.map(cap),
            ..self.clone()
        }
    }

    pub fn chute_config(&self) -> ChuteConfig {
        ChuteConfig {
            variant: self.variant,
            tl: self.tl,
            gamma: self.gamma,
            rho: self.rho,
            dual: DualConfig::new(self.n_stall, self.ts),
            incumbent_node_limit: self.node_limit,
            shell_deadline: self.shell_deadline,
            probe_deadline: self.probe_deadline,
            floor: None,
            parallel: true,
        }
    }
}

/// Outcome of one navigation, as returned by the API and stored in the log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NavigationRecord {
    /// 1-based position in the session history.
    pub seq: usize,
    pub lambda: WeightVector,
    pub settings: RunSettings,
    #[serde(rename = "L")]
    pub lower: Vec<f64>,
    #[serde(rename = "U")]
    pub upper: Vec<f64>,
    pub gap: Vec<f64>,
    pub representation: IntervalRepresentation,
    /// Upper bounds from this run's shell alone.
    pub fresh_upper: Vec<f64>,
    /// Stored upper shell members that tightened at least one component.
    pub reused_members: usize,
    pub incumbent_status: SolveStatus,
    pub timings: Timings,
    /// Shells of this run; merged into the session afterwards.
    pub delta_lower: Shell,
    pub delta_upper: Shell,
    /// Unix seconds.
    pub submitted_at: f64,
    pub finished_at: f64,
}

/// Runs the interval algorithm and tightens `U` with the stored upper shell:
/// `U` is computed over the union of the stored and fresh shells against the
/// fresh `L`, so it never exceeds the fresh `U`.
pub fn navigate(
    inst: &MomipInstance,
    y_star: &ReferencePoint,
    stored_upper: &Shell,
    lambda: &WeightVector,
    settings: &RunSettings,
    seq: usize,
    submitted_at: f64,
) -> Result<NavigationRecord, ChuteError> {
    let config = settings.chute_config();
    config.validate()?;
    let fresh = chute(inst, lambda, y_star, &config, &BranchAndBound)?;
    let fresh_len = fresh.s_u.len();
    let mut union = fresh.s_u.clone();
    for m in stored_upper.members() {
        union.insert(m.clone())?;
    }
    let bounds = upper_bounds(&union, &fresh.lower_bounds, y_star)?;
    let mut reused = Vec::new();
    for (l, src) in bounds.sources.iter().enumerate() {
        if let BoundSource::Member(i) = src {
            if *i >= fresh_len && bounds.values[l] < fresh.upper[l] && !reused.contains(i) {
                reused.push(*i);
            }
        }
    }
    let mut tightened = bounds.clone();
    for (v, f) in tightened.values.iter_mut().zip(&fresh.upper) {
        *v = v.min(*f);
    }
    let rep = interval_representation(&fresh.lower_bounds, &tightened, lambda)?;
    Ok(NavigationRecord {
        seq,
        lambda: lambda.clone(),
        settings: settings.clone(),
        lower: rep.lower(),
        upper: rep.upper(),
        gap: rep.gap.clone(),
        representation: rep,
        fresh_upper: fresh.upper.clone(),
        reused_members: reused.len(),
        incumbent_status: fresh.incumbent.status,
        timings: fresh.timings.clone(),
        delta_lower: fresh.s_l,
        delta_upper: fresh.s_u,
        submitted_at,
        finished_at: now(),
    })
}

pub fn now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[derive(Clone, Debug)]
pub struct Session {
    pub id: Uuid,
    pub instance: Arc<MomipInstance>,
    pub y_star: ReferencePoint,
    pub defaults: RunSettings,
    pub created_at: f64,
    pub s_l: Shell,
    pub s_u: Shell,
    pub history: Vec<NavigationRecord>,
}

/// Point of the history drawn on the front plot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryMarker {
    pub seq: usize,
    pub lambda: WeightVector,
    #[serde(rename = "L")]
    pub lower: Vec<f64>,
    #[serde(rename = "U")]
    pub upper: Vec<f64>,
    pub gap: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontView {
    pub session: Uuid,
    pub instance: String,
    pub k: usize,
    pub y_star: Vec<f64>,
    pub lower: Vec<ShellMember>,
    pub upper: Vec<ShellMember>,
    pub markers: Vec<HistoryMarker>,
}

impl Session {
    pub fn new(
        id: Uuid,
        instance: Arc<MomipInstance>,
        y_star: ReferencePoint,
        defaults: RunSettings,
        created_at: f64,
    ) -> Self {
        Self {
            id,
            instance,
            y_star,
            defaults,
            created_at,
            s_l: Shell::new(ShellKind::Lower),
            s_u: Shell::new(ShellKind::Upper),
            history: Vec::new(),
        }
    }

    /// Merges the record's shells and appends it to the history.
    pub fn apply(&mut self, record: NavigationRecord) -> Result<(), ChuteError> {
        let s_l = merge_lower(&[self.s_l.clone(), record.delta_lower.clone()])?;
        let s_u = merge_upper(&[self.s_u.clone(), record.delta_upper.clone()])?;
        self.s_l = s_l;
        self.s_u = s_u;
        self.history.push(record);
        Ok(())
    }

    pub fn front(&self) -> FrontView {
        FrontView {
            session: self.id,
            instance: self.instance.name().to_string(),
            k: self.instance.k(),
            y_star: self.y_star.values().to_vec(),
            lower: self.s_l.members().to_vec(),
            upper: self.s_u.members().to_vec(),
            markers: self
                .history
                .iter()
                .map(|r| HistoryMarker {
                    seq: r.seq,
                    lambda: r.lambda.clone(),
                    lower: r.lower.clone(),
                    upper: r.upper.clone(),
                    gap: r.gap.clone(),
                })
                .collect(),
        }
    }
}
