//! Experiment configuration: a TOML document with a fixed key schema.
//!
//! Unknown keys are hard errors — silent config drift is the main
//! reproducibility hazard in batch pipelines. The seed is mandatory; every
//! stochastic artifact inherits it (the CLI `--seed` flag overrides).

use serde::{Deserialize, Serialize};

use crate::binspace::BinGrid;
use crate::measurement::LossTable;
use crate::source::{CircuitProgram, MultiRingSource, RingSpec};
use crate::tomography::ReconstructionOptions;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed for every stochastic step.
    pub seed: u64,
    pub grid: GridConfig,
    pub source: SourceConfig,
    pub measurement: MeasurementConfig,
    #[serde(default)]
    pub tomography: TomographyConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dimension: usize,
    pub spacing_ghz: f64,
    #[serde(default = "default_guard_bins")]
    pub guard_bins: usize,
    #[serde(default = "default_signal_anchor")]
    pub signal_anchor_ghz: f64,
    #[serde(default = "default_idler_anchor")]
    pub idler_anchor_ghz: f64,
}

fn default_guard_bins() -> usize {
    12
}
fn default_signal_anchor() -> f64 {
    193_400.0
}
fn default_idler_anchor() -> f64 {
    192_900.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(default = "default_brightness")]
    pub brightness_mhz_per_mw2: f64,
    #[serde(default = "default_crosstalk")]
    pub crosstalk_coupling: f64,
    /// Per-ring overrides; defaults to device rings on the grid bins.
    #[serde(default)]
    pub rings: Vec<RingConfig>,
    pub program: ProgramConfig,
    #[serde(default)]
    pub indistinguishability: IndistinguishabilityConfig,
}

fn default_brightness() -> f64 {
    0.63
}
fn default_crosstalk() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    #[serde(default = "default_q_signal")]
    pub q_signal: f64,
    #[serde(default = "default_q_idler")]
    pub q_idler: f64,
    #[serde(default)]
    pub detune_ghz: f64,
    #[serde(default = "default_true")]
    pub enabled: bool,
}

fn default_q_signal() -> f64 {
    5.7e4
}
fn default_q_idler() -> f64 {
    7.8e4
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramConfig {
    pub pump_power_mw: Vec<f64>,
    pub ps_phase_rad: Vec<f64>,
    #[serde(default)]
    pub mz_split: Option<Vec<f64>>,
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
    #[serde(default)]
    pub ring_on: Option<Vec<bool>>,
}

/// How the indistinguishability matrix is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "mode")]
pub enum IndistinguishabilityConfig {
    /// Compute pairwise overlaps from the rings' joint spectral amplitudes.
    #[default]
    FromJsa,
    /// All pairwise overlaps equal to `value`.
    Uniform { value: f64 },
    /// Perfectly indistinguishable sources.
    Perfect,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementConfig {
    /// Uniform loss fraction, or a per-bin table under `loss_table`.
    #[serde(default = "default_loss")]
    pub loss: f64,
    #[serde(default)]
    pub loss_table: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_integration")]
    pub integration_s: f64,
    /// Pair rate override; when absent the rate follows from the source
    /// brightness and pump powers.
    #[serde(default)]
    pub rate_hz: Option<f64>,
}

fn default_loss() -> f64 {
    0.05
}
fn default_integration() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographyConfig {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub param_bound: f64,
    pub rate_bounds: (f64, f64),
    pub refine_sweeps: usize,
    pub convergence_cost: f64,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        let d = ReconstructionOptions::default();
        Self {
            particles: d.particles,
            iterations: d.iterations,
            inertia: d.inertia,
            cognitive: d.cognitive,
            social: d.social,
            param_bound: d.param_bound,
            rate_bounds: d.rate_bounds,
            refine_sweeps: d.refine_sweeps,
            convergence_cost: d.convergence_cost,
        }
    }
}

/// CGLMP evaluation mode for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CglmpMode {
    /// Canonical offsets in the frame of the named target pattern.
    Adapted,
    /// Canonical offsets, unadapted.
    Canonical,
    /// Numerical maximization over the four offsets.
    Optimized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub cglmp: CglmpMode,
    pub resamples: usize,
    /// Target pattern for `report` runs (Phi1..Phi6).
    pub target: Option<String>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            cglmp: CglmpMode::Adapted,
            resamples: 200,
            target: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.grid.dimension;
        if !(2..=4).contains(&d) {
            return Err(Error::Config(format!(
                "grid.dimension must be 2, 3, or 4, got {d}"
            )));
        }
        if !self.grid.spacing_ghz.is_finite() || self.grid.spacing_ghz <= 0.0 {
            return Err(Error::Config("grid.spacing_ghz must be positive".into()));
        }
        if !self.source.rings.is_empty() && self.source.rings.len() != d {
            return Err(Error::Config(format!(
                "source.rings lists {} rings but grid.dimension is {d}",
                self.source.rings.len()
            )));
        }
        let p = &self.source.program;
        if p.pump_power_mw.len() != d {
            return Err(Error::Config(format!(
                "source.program.pump_power_mw needs {d} entries"
            )));
        }
        if p.ps_phase_rad.len() != d - 1 {
            return Err(Error::Config(format!(
                "source.program.ps_phase_rad needs {} entries",
                d - 1
            )));
        }
        if let Some(eta) = &p.eta {
            if eta.len() != d {
                return Err(Error::Config(format!("source.program.eta needs {d} entries")));
            }
        }
        if let Some(mz) = &p.mz_split {
            if mz.len() != 3 {
                return Err(Error::Config(
                    "source.program.mz_split is the three-splitter tree".into(),
                ));
            }
        }
        if let Some(ring_on) = &p.ring_on {
            if ring_on.len() != d {
                return Err(Error::Config(format!(
                    "source.program.ring_on needs {d} entries"
                )));
            }
        }
        if let IndistinguishabilityConfig::Uniform { value } = self.source.indistinguishability {
            if value.abs() > 1.0 {
                return Err(Error::Config(format!(
                    "indistinguishability value {value} outside [-1, 1]"
                )));
            }
        }
        if let Some(table) = &self.measurement.loss_table {
            LossTable::PerBin(table.clone()).validate(d).map_err(|e| {
                Error::Config(format!("measurement.loss_table: {e}"))
            })?;
        } else {
            LossTable::Uniform(self.measurement.loss)
                .validate(d)
                .map_err(|e| Error::Config(format!("measurement.loss: {e}")))?;
        }
        if let Some(t) = &self.metrics.target {
            crate::binspace::BellPattern::from_name(t)
                .map_err(|e| Error::Config(format!("metrics.target: {e}")))?;
        }
        Ok(())
    }

    pub fn bin_grid(&self) -> Result<BinGrid> {
        BinGrid::new(
            self.grid.dimension,
            self.grid.spacing_ghz,
            self.grid.signal_anchor_ghz,
            self.grid.idler_anchor_ghz,
            self.grid.guard_bins,
            false,
        )
    }

    /// Build the ring set: explicit ring blocks when given, device defaults
    /// on the grid bins otherwise.
    pub fn rings(&self) -> Result<Vec<RingSpec>> {
        let grid = self.bin_grid()?;
        let d = self.grid.dimension;
        let mut rings = Vec::with_capacity(d);
        for k in 0..d {
            let signal = grid.signal_frequency_ghz(k as f64)?;
            let idler = grid.idler_frequency_ghz(k as f64)?;
            let ring = if self.source.rings.is_empty() {
                RingSpec::device_default(signal, idler)
            } else {
                let rc = &self.source.rings[k];
                let mut ring = RingSpec::new(rc.q_signal, rc.q_idler, signal, idler)?;
                ring.detune_ghz = rc.detune_ghz;
                ring.enabled = rc.enabled;
                ring
            };
            rings.push(ring);
        }
        Ok(rings)
    }

    pub fn multi_ring_source(&self) -> Result<MultiRingSource> {
        let mut source = MultiRingSource::new(self.rings()?, self.source.crosstalk_coupling)?;
        source.brightness_mhz_per_mw2 = self.source.brightness_mhz_per_mw2;
        Ok(source)
    }

    pub fn circuit_program(&self) -> CircuitProgram {
        let d = self.grid.dimension;
        let p = &self.source.program;
        CircuitProgram {
            pump_power_mw: p.pump_power_mw.clone(),
            ps_phase_rad: p.ps_phase_rad.clone(),
            mz_split: p.mz_split.clone().unwrap_or_else(|| vec![0.5; 3]),
            eta: p.eta.clone().unwrap_or_else(|| vec![1.0; d]),
            ring_on: p.ring_on.clone().unwrap_or_else(|| vec![true; d]),
        }
    }

    pub fn loss_table(&self) -> LossTable {
        match &self.measurement.loss_table {
            Some(table) => LossTable::PerBin(table.clone()),
            None => LossTable::Uniform(self.measurement.loss),
        }
    }

    pub fn reconstruction_options(&self, seed: u64) -> ReconstructionOptions {
        let t = &self.tomography;
        ReconstructionOptions {
            particles: t.particles,
            iterations: t.iterations,
            inertia: t.inertia,
            cognitive: t.cognitive,
            social: t.social,
            seed,
            param_bound: t.param_bound,
            rate_bounds: t.rate_bounds,
            refine_sweeps: t.refine_sweeps,
            convergence_cost: t.convergence_cost,
        }
    }
}

/// A ready-to-edit config for one of the programmed target patterns.
pub fn example_config(pattern: crate::binspace::BellPattern) -> ExperimentConfig {
    let d = pattern.dimension();
    let signs = pattern.signs();
    // realize the sign pattern through doubled path phases
    let mut ps = Vec::with_capacity(d - 1);
    for k in 1..d {
        ps.push(if signs[k] * signs[0] > 0.0 {
            0.0
        } else {
            std::f64::consts::FRAC_PI_2
        });
    }
    ExperimentConfig {
        seed: 7,
        grid: GridConfig {
            dimension: d,
            spacing_ghz: 15.0,
            guard_bins: default_guard_bins(),
            signal_anchor_ghz: default_signal_anchor(),
            idler_anchor_ghz: default_idler_anchor(),
        },
        source: SourceConfig {
            brightness_mhz_per_mw2: default_brightness(),
            crosstalk_coupling: 0.0,
            rings: Vec::new(),
            program: ProgramConfig {
                pump_power_mw: vec![25.0; d],
                ps_phase_rad: ps,
                mz_split: None,
                eta: None,
                ring_on: None,
            },
            indistinguishability: IndistinguishabilityConfig::Uniform { value: 0.87 },
        },
        measurement: MeasurementConfig {
            loss: default_loss(),
            loss_table: None,
            integration_s: default_integration(),
            rate_hz: Some(2e5),
        },
        tomography: TomographyConfig::default(),
        metrics: MetricsConfig {
            cglmp: CglmpMode::Adapted,
            resamples: 200,
            target: Some(pattern.name().to_string()),
        },
    }
}
