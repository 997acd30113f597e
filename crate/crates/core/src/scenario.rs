//! TOML scenario files. Angles are given in degrees and altitudes in km;
//! everything else is SI. Missing keys take the defaults below, unknown keys
//! are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fl::{
    gaussian_blobs, idx::load_idx_dataset, partition_data, train_test_split, AggregationWeighting, Dataset, PartitionMode,
    SoftmaxRegression, SyntheticSpec, TrainingConfig,
};
use crate::link::{LinkBudget, PayloadSpec};
use crate::orbital::{ConstellationSpec, GroundStation, PhysicalConstants, WindowSolver};
use crate::scheduler::Admission;
use crate::seed::{derive_seed, Stream};
use crate::sim::{SimSetup, Workload};

const PAPER_DEFAULT: &str = include_str!("../scenarios/paper_default.toml");
const FIG3: &str = include_str!("../scenarios/fig3.toml");

/// Scenarios shipped with the crate, by name.
pub const BUNDLED: &[(&str, &str)] = &[("paper_default", PAPER_DEFAULT), ("fig3", FIG3)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub constellation: ConstellationConfig,
    pub ground_station: GroundStationConfig,
    pub constants: ConstantsConfig,
    pub link: LinkConfig,
    pub training: TrainingSection,
    pub dataset: DatasetConfig,
    pub simulation: SimulationConfig,
    /// Directory that relative dataset paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "default".into(),
            seed: 0,
            constellation: Default::default(),
            ground_station: Default::default(),
            constants: Default::default(),
            link: Default::default(),
            training: Default::default(),
            dataset: Default::default(),
            simulation: Default::default(),
            base_dir: PathBuf::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstellationConfig {
    pub num_orbits: usize,
    pub sats_per_orbit: usize,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    /// Right-ascension span across the orbits.
    pub raan_spread_deg: f64,
    /// Walker phasing factor `F`; the in-plane offset per orbit is `360·F/(L·K)` degrees.
    pub phasing_f: f64,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        Self {
            num_orbits: 5,
            sats_per_orbit: 8,
            altitude_km: 1500.0,
            inclination_deg: 80.0,
            raan_spread_deg: 180.0,
            phasing_f: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundStationConfig {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub min_elevation_deg: f64,
}

impl Default for GroundStationConfig {
    fn default() -> Self {
        // Rolla, MO
        Self { latitude_deg: 37.9514, longitude_deg: -91.7713, min_elevation_deg: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsConfig {
    pub gm: f64,
    pub earth_radius_m: f64,
    pub earth_rotation_rate: f64,
    pub light_speed: f64,
    pub boltzmann: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        let c = PhysicalConstants::<f64>::default();
        Self {
            gm: c.gm,
            earth_radius_m: c.earth_radius,
            earth_rotation_rate: c.earth_rotation_rate,
            light_speed: c.light_speed,
            boltzmann: c.boltzmann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateModeConfig {
    FixedRate,
    Shannon,
}

impl std::str::FromStr for RateModeConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-rate" => Ok(Self::FixedRate),
            "shannon" => Ok(Self::Shannon),
            other => Err(Error::Invalid(format!("unknown rate mode `{other}` (fixed-rate | shannon)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub tx_power_sat_dbm: f64,
    pub tx_power_gs_dbm: f64,
    pub gain_sat_dbi: f64,
    pub gain_gs_dbi: f64,
    pub carrier_freq_hz: f64,
    pub noise_temp_k: f64,
    /// Total ground-link bandwidth `B` (Hz).
    pub total_bandwidth_hz: f64,
    /// Resource blocks `N`; one per orbit when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_resource_blocks: Option<usize>,
    pub isl_bandwidth_hz: f64,
    pub isl_spectral_efficiency: f64,
    pub rate_mode: RateModeConfig,
    pub fixed_rate_bps: f64,
    /// Model size: bits per parameter sample times number of samples.
    pub sample_bits: u64,
    pub num_samples: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        let b = LinkBudget::<f64>::default();
        let p = PayloadSpec::default();
        Self {
            tx_power_sat_dbm: b.tx_power_sat,
            tx_power_gs_dbm: b.tx_power_gs,
            gain_sat_dbi: b.gain_sat,
            gain_gs_dbi: b.gain_gs,
            carrier_freq_hz: b.carrier_freq,
            noise_temp_k: b.noise_temp,
            total_bandwidth_hz: b.total_bandwidth,
            num_resource_blocks: None,
            isl_bandwidth_hz: b.isl_bandwidth,
            isl_spectral_efficiency: b.isl_spectral_efficiency,
            rate_mode: RateModeConfig::FixedRate,
            fixed_rate_bps: 16e6,
            sample_bits: p.sample_bits,
            num_samples: p.num_samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingConfig {
    SampleCount,
    InverseClassFrequency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub local_epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub cycles_per_sample: f64,
    pub cpu_freq_hz: f64,
    pub aggregation: WeightingConfig,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let t = TrainingConfig::<f64>::default();
        Self {
            local_epochs: t.local_epochs,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            cycles_per_sample: t.cycles_per_sample,
            cpu_freq_hz: t.cpu_freq,
            aggregation: WeightingConfig::SampleCount,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    Synthetic,
    Idx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionConfig {
    Iid,
    NonIid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub source: DataSource,
    pub num_samples: usize,
    pub dim: usize,
    pub num_classes: usize,
    pub separation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub images: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    pub test_fraction: f64,
    pub partition: PartitionConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            source: DataSource::Synthetic,
            num_samples: 4000,
            dim: 16,
            num_classes: 10,
            separation: 1.5,
            images: None,
            labels: None,
            test_fraction: 0.1,
            partition: PartitionConfig::NonIid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdmissionConfig {
    ContactTime,
    StrictTotal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub horizon_s: f64,
    pub max_rounds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_accuracy: Option<f64>,
    pub scan_step_s: f64,
    pub tolerance_s: f64,
    pub lookahead_s: f64,
    pub admission: AdmissionConfig,
    pub aloha_max_backoff: u32,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            horizon_s: 3.0 * 86_400.0,
            max_rounds: 100,
            target_accuracy: None,
            scan_step_s: 10.0,
            tolerance_s: 0.01,
            lookahead_s: 86_400.0,
            admission: AdmissionConfig::ContactTime,
            aloha_max_backoff: 8,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| invalid(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| invalid(format!("scenario serialization: {e}")))
    }

    pub fn constellation(&self) -> ConstellationSpec<f64> {
        let c = &self.constellation;
        let mut spec = ConstellationSpec::walker_delta(
            c.num_orbits,
            c.sats_per_orbit,
            c.altitude_km * 1e3,
            c.inclination_deg.to_radians(),
        );
        spec.raan_spread = c.raan_spread_deg.to_radians();
        spec.phasing_offset = std::f64::consts::TAU * c.phasing_f / (c.num_orbits * c.sats_per_orbit).max(1) as f64;
        spec
    }

    pub fn ground_station(&self) -> GroundStation<f64> {
        let g = &self.ground_station;
        GroundStation {
            latitude: g.latitude_deg.to_radians(),
            longitude: g.longitude_deg.to_radians(),
            min_elevation: g.min_elevation_deg.to_radians(),
        }
    }

    pub fn constants(&self) -> PhysicalConstants<f64> {
        let c = &self.constants;
        PhysicalConstants {
            gm: c.gm,
            earth_radius: c.earth_radius_m,
            earth_rotation_rate: c.earth_rotation_rate,
            light_speed: c.light_speed,
            boltzmann: c.boltzmann,
        }
    }

    pub fn budget(&self) -> LinkBudget<f64> {
        let l = &self.link;
        let c = self.constants();
        LinkBudget {
            tx_power_sat: l.tx_power_sat_dbm,
            tx_power_gs: l.tx_power_gs_dbm,
            gain_sat: l.gain_sat_dbi,
            gain_gs: l.gain_gs_dbi,
            carrier_freq: l.carrier_freq_hz,
            noise_temp: l.noise_temp_k,
            total_bandwidth: l.total_bandwidth_hz,
            num_resource_blocks: l.num_resource_blocks.unwrap_or(self.constellation.num_orbits),
            isl_bandwidth: l.isl_bandwidth_hz,
            isl_spectral_efficiency: l.isl_spectral_efficiency,
            fixed_rate: match l.rate_mode {
                RateModeConfig::FixedRate => Some(l.fixed_rate_bps),
                RateModeConfig::Shannon => None,
            },
            boltzmann: c.boltzmann,
            light_speed: c.light_speed,
        }
    }

    pub fn payload(&self) -> PayloadSpec {
        PayloadSpec { sample_bits: self.link.sample_bits, num_samples: self.link.num_samples }
    }

    pub fn training(&self) -> TrainingConfig<f64> {
        let t = &self.training;
        TrainingConfig {
            local_epochs: t.local_epochs,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            cycles_per_sample: t.cycles_per_sample,
            cpu_freq: t.cpu_freq_hz,
            seed: self.seed,
        }
    }

    pub fn partition_mode(&self) -> PartitionMode {
        match self.dataset.partition {
            PartitionConfig::Iid => PartitionMode::Iid,
            PartitionConfig::NonIid => PartitionMode::NonIid,
        }
    }

    /// Checks every component invariant and names the first one violated.
    pub fn validate(&self) -> Result<()> {
        let c = &self.constellation;
        if c.num_orbits < 1 {
            return Err(invalid("constellation.num_orbits (L) must be >= 1"));
        }
        if c.sats_per_orbit < 1 {
            return Err(invalid("constellation.sats_per_orbit (K) must be >= 1"));
        }
        if !c.phasing_f.is_finite() {
            return Err(invalid("constellation.phasing_f must be finite"));
        }
        self.constellation().validate()?;
        self.ground_station().validate()?;
        self.constants().validate()?;
        if self.link.num_resource_blocks == Some(0) {
            return Err(invalid("link.num_resource_blocks (N) must be >= 1"));
        }
        if self.link.rate_mode == RateModeConfig::FixedRate && !(self.link.fixed_rate_bps > 0.0) {
            return Err(invalid("link.fixed_rate_bps must be > 0"));
        }
        self.budget().validate()?;
        self.payload().validate()?;
        self.training().validate()?;
        let d = &self.dataset;
        if !(d.test_fraction > 0.0 && d.test_fraction < 1.0) {
            return Err(invalid("dataset.test_fraction must lie in (0, 1)"));
        }
        match d.source {
            DataSource::Synthetic => {
                if d.num_samples == 0 || d.dim == 0 || d.num_classes == 0 {
                    return Err(invalid("dataset.num_samples, dim and num_classes must be >= 1"));
                }
                if !(d.separation.is_finite() && d.separation >= 0.0) {
                    return Err(invalid("dataset.separation must be finite and >= 0"));
                }
                let train = d.num_samples - (d.num_samples as f64 * d.test_fraction).round() as usize;
                if train < c.num_orbits * c.sats_per_orbit {
                    return Err(invalid("dataset has fewer training samples than satellites"));
                }
            }
            DataSource::Idx => {
                if d.images.is_none() || d.labels.is_none() {
                    return Err(invalid("dataset.source = \"idx\" needs dataset.images and dataset.labels"));
                }
                if d.num_classes == 0 {
                    return Err(invalid("dataset.num_classes must be >= 1"));
                }
            }
        }
        let s = &self.simulation;
        if !(s.horizon_s > 0.0 && s.horizon_s.is_finite()) {
            return Err(invalid("simulation.horizon_s must be > 0"));
        }
        if !(s.lookahead_s > 0.0) {
            return Err(invalid("simulation.lookahead_s must be > 0"));
        }
        if !(s.scan_step_s > 0.0 && s.tolerance_s > 0.0) {
            return Err(invalid("simulation.scan_step_s and tolerance_s must be > 0"));
        }
        if s.target_accuracy.is_some_and(|a| !(0.0..=1.0).contains(&a)) {
            return Err(invalid("simulation.target_accuracy must lie in [0, 1]"));
        }
        if s.aloha_max_backoff < 1 {
            return Err(invalid("simulation.aloha_max_backoff must be >= 1"));
        }
        Ok(())
    }

    pub fn setup(&self) -> Result<SimSetup> {
        self.validate()?;
        let s = &self.simulation;
        Ok(SimSetup {
            constellation: self.constellation(),
            ground_station: self.ground_station(),
            constants: self.constants(),
            budget: self.budget(),
            payload: self.payload(),
            training: self.training(),
            solver: WindowSolver { scan_step: s.scan_step_s, tolerance: s.tolerance_s },
            horizon: s.horizon_s,
            max_rounds: s.max_rounds,
            target_accuracy: s.target_accuracy,
            seed: self.seed,
            admission: match s.admission {
                AdmissionConfig::ContactTime => Admission::ContactTime,
                AdmissionConfig::StrictTotal => Admission::StrictTotal,
            },
            lookahead: s.lookahead_s,
            weighting: match self.training.aggregation {
                WeightingConfig::SampleCount => AggregationWeighting::SampleCount,
                WeightingConfig::InverseClassFrequency => AggregationWeighting::InverseClassFrequency,
            },
            aloha_max_backoff: s.aloha_max_backoff,
        })
    }

    /// The full dataset before the train/test split.
    pub fn dataset(&self) -> Result<Dataset<f64>> {
        let d = &self.dataset;
        match d.source {
            DataSource::Synthetic => gaussian_blobs(
                &SyntheticSpec {
                    num_samples: d.num_samples,
                    dim: d.dim,
                    num_classes: d.num_classes,
                    separation: d.separation,
                },
                derive_seed(self.seed, Stream::Dataset, 0, 0),
            ),
            DataSource::Idx => {
                let resolve = |p: &Option<PathBuf>| {
                    let p = p.as_ref().expect("validated");
                    if p.is_relative() { self.base_dir.join(p) } else { p.clone() }
                };
                load_idx_dataset(&resolve(&d.images), &resolve(&d.labels), d.num_classes)
            }
        }
    }

    /// Seeded dataset, test split and per-satellite partition.
    pub fn workload(&self) -> Result<Workload> {
        self.validate()?;
        let data = self.dataset()?;
        let (train, test) =
            train_test_split(&data, self.dataset.test_fraction, derive_seed(self.seed, Stream::TestSplit, 0, 0))?;
        let shards = partition_data(
            &train,
            &self.constellation(),
            self.partition_mode(),
            derive_seed(self.seed, Stream::Partition, 0, 0),
        )?;
        Ok(Workload {
            objective: SoftmaxRegression::new(data.dim, data.num_classes),
            shards,
            test,
        })
    }
}

/// Reads a scenario file. A path that does not exist but names a bundled
/// scenario (`paper_default`, `fig3.toml`, ...) loads the bundled copy.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let (text, base) = match fs::read_to_string(path) {
        Ok(text) => (text, path.parent().map(Path::to_path_buf).unwrap_or_default()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let bundled = BUNDLED
                .iter()
                .find(|(name, _)| *name == stem && path.parent().is_none_or(|p| p.as_os_str().is_empty()));
            match bundled {
                Some((_, text)) => (text.to_string(), PathBuf::new()),
                None => return Err(Error::Io(format!("{}: {e}", path.display()))),
            }
        }
        Err(e) => return Err(Error::Io(format!("{}: {e}", path.display()))),
    };
    let mut s = Scenario::from_toml(&text)?;
    s.base_dir = base;
    Ok(s)
}

/// A bundled scenario by name.
pub fn bundled(name: &str) -> Result<Scenario> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| invalid(format!("no bundled scenario named `{name}`")))?;
    Scenario::from_toml(text)
}
