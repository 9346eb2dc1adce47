use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{InitScheme, OptimizerConfig, DEFAULT_DT, DEFAULT_NOISE_AMPLITUDE};
use crate::sector::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Scaling,
    FieldSweep,
    IterationScaling,
    P1Table,
    GapScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeKind {
    #[serde(rename = "r")]
    Random,
    #[serde(rename = "l")]
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything an experiment depends on. Results are a pure function of
/// this value: restart seeds are derived from `base_seed` and the task's
/// grid coordinates, never from the worker count or scheduling order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n_sites: Vec<u32>,
    pub p_exponents: Vec<u32>,
    /// Transverse fields. Ignored by `p1-table` (always `h = 0`) and
    /// `gap-scaling` (which scans `gap_window`).
    pub fields: Vec<f64>,
    /// Circuit depths. Empty means `1..=P*` for `scaling`; ignored by
    /// `iteration-scaling` (always `P*`) and the analytic kinds.
    pub depths: Vec<usize>,
    pub schemes: Vec<SchemeKind>,
    pub dt: f64,
    pub noise_amplitude: f64,
    pub n_restarts: usize,
    pub base_seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub optimizer: OptimizerConfig,
    /// Field interval scanned for the minimal gap; defaults to `[1.5, 2.5]`
    /// for p = 2 and `[1.0, 1.6]` otherwise.
    pub gap_window: Option<[f64; 2]>,
    /// Grid points in the gap scan before refinement.
    pub gap_points: usize,
}

pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_BASE_SEED: u64 = 1;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Scaling,
            n_sites: vec![8],
            p_exponents: vec![2],
            fields: vec![(5f64.sqrt() - 1.0) / 2.0],
            depths: Vec::new(),
            schemes: vec![SchemeKind::Random],
            dt: DEFAULT_DT,
            noise_amplitude: DEFAULT_NOISE_AMPLITUDE,
            n_restarts: DEFAULT_RESTARTS,
            base_seed: DEFAULT_BASE_SEED,
            workers: 0,
            out: None,
            format: OutputFormat::Csv,
            optimizer: OptimizerConfig::default(),
            gap_window: None,
            gap_points: 41,
        }
    }
}

impl ExperimentConfig {
    /// Defaults with grids suited to each kind.
    pub fn for_kind(kind: ExperimentKind) -> Self {
        let base = Self { kind, ..Self::default() };
        match kind {
            ExperimentKind::Scaling => base,
            ExperimentKind::FieldSweep => Self {
                n_sites: vec![16],
                p_exponents: vec![3],
                fields: (0..=8).map(|i| 0.25 * i as f64).collect(),
                depths: vec![5],
                schemes: vec![SchemeKind::Random, SchemeKind::Linear],
                ..base
            },
            ExperimentKind::IterationScaling => Self { n_sites: vec![8, 12, 16, 20], ..base },
            ExperimentKind::P1Table => Self { n_sites: vec![3, 5, 7, 9], p_exponents: vec![2, 3, 5], ..base },
            ExperimentKind::GapScaling => Self { n_sites: vec![64, 128, 256, 512], ..base },
        }
    }

    pub fn scheme(&self, kind: SchemeKind) -> InitScheme {
        match kind {
            SchemeKind::Random => InitScheme::Random,
            SchemeKind::Linear => InitScheme::Linear { dt: self.dt, noise_amplitude: self.noise_amplitude },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_sites.is_empty() {
            return bad("n_sites grid is empty".into());
        }
        if self.p_exponents.is_empty() {
            return bad("p_exponents grid is empty".into());
        }
        if self.n_restarts == 0 {
            return bad("n_restarts must be >= 1".into());
        }
        self.optimizer.validate()?;
        self.scheme(SchemeKind::Linear).validate()?;
        let needs_fields = matches!(
            self.kind,
            ExperimentKind::Scaling | ExperimentKind::FieldSweep | ExperimentKind::IterationScaling
        );
        if needs_fields && self.fields.is_empty() {
            return bad("fields grid is empty".into());
        }
        if needs_fields && self.schemes.is_empty() {
            return bad("no initialisation scheme selected".into());
        }
        if self.kind == ExperimentKind::FieldSweep && self.depths.is_empty() {
            return bad("depths grid is empty".into());
        }
        if self.depths.contains(&0) {
            return bad("depths must be >= 1".into());
        }
        for &n in &self.n_sites {
            for &p in &self.p_exponents {
                let fields: &[f64] = if needs_fields { &self.fields } else { &[0.0] };
                for &h in fields {
                    ProblemSpec::new(n, p, h).map_err(|e| Error::InvalidConfig(e.to_string()))?;
                }
            }
        }
        if self.kind == ExperimentKind::GapScaling {
            if self.gap_points < 3 {
                return bad("gap_points must be >= 3".into());
            }
            if let Some([a, b]) = self.gap_window {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return bad(format!("gap_window must be an increasing interval, got [{a}, {b}]"));
                }
            }
        }
        if let Some(out) = &self.out {
            let parent = out.parent().filter(|p| !p.as_os_str().is_empty());
            if let Some(dir) = parent {
                if !dir.is_dir() {
                    return bad(format!("output directory {} does not exist", dir.display()));
                }
            }
        }
        Ok(())
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
    }
}
