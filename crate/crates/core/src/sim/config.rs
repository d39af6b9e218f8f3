use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bp::{BpConfig, FactorMode};
use crate::error::{config_err, Result};
use crate::matching::NodeOrder;
use crate::objective::{PhyParams, PowerGrid};
use crate::topology::Placement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Three fixed helpers, users dropped around them.
    #[default]
    Helper,
    /// Devices dropped over a square; idle devices act as caching nodes.
    D2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SchedulerKind {
    #[default]
    #[serde(rename = "bp-matching")]
    BpMatching,
    #[serde(rename = "bp-raw")]
    BpRaw,
    #[serde(rename = "approx-bp-matching")]
    ApproxBpMatching,
    #[serde(rename = "exhaustive")]
    Exhaustive,
    #[serde(rename = "cluster1")]
    Cluster1,
    #[serde(rename = "cluster2")]
    Cluster2,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 6] = [
        SchedulerKind::BpMatching,
        SchedulerKind::BpRaw,
        SchedulerKind::ApproxBpMatching,
        SchedulerKind::Exhaustive,
        SchedulerKind::Cluster1,
        SchedulerKind::Cluster2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::BpMatching => "bp-matching",
            SchedulerKind::BpRaw => "bp-raw",
            SchedulerKind::ApproxBpMatching => "approx-bp-matching",
            SchedulerKind::Exhaustive => "exhaustive",
            SchedulerKind::Cluster1 => "cluster1",
            SchedulerKind::Cluster2 => "cluster2",
        }
    }

    pub fn is_clustered(self) -> bool {
        matches!(self, SchedulerKind::Cluster1 | SchedulerKind::Cluster2)
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            config_err(format!("unknown scheduler {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    pub scenario: Scenario,
    /// Scenario JSON to load instead of generating a topology.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Keep only the first users (then re-prune), bounding oracle cost.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_users: Option<usize>,
    /// Helper scenario: users per m².
    pub user_intensity: f64,
    /// D2D scenario: square side in meters.
    pub side: f64,
    /// D2D scenario: devices per m².
    pub device_intensity: f64,
    /// D2D scenario: probability that a device requests content.
    pub activity: f64,
    pub file_count: usize,
    pub zipf_exponent: f64,
    pub cache_capacity: usize,
    pub placement: Placement,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Helper,
            file: None,
            max_users: None,
            user_intensity: 1e-4,
            side: 600.0,
            device_intensity: 4e-4,
            activity: 0.2,
            file_count: 100,
            zipf_exponent: 0.8,
            cache_capacity: 10,
            placement: Placement::PopularityWeighted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyConfig {
    pub bandwidth_hz: f64,
    pub chunk_bits: f64,
    pub slot_seconds: f64,
    /// `d_s` in meters; the helper coverage radius in the helper scenario.
    pub signal_range: f64,
    /// `d_i` in meters. The helper scenario always uses three times `signal_range`.
    pub interference_range: f64,
    pub path_loss_exponent: f64,
    pub noise_power: f64,
    pub q_max: f64,
    /// Number of uniform levels `P_l = l q_max / L`.
    pub power_levels: usize,
}

impl Default for PhyConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 10e6,
            chunk_bits: 20_000.0,
            slot_seconds: 0.01,
            signal_range: 100.0,
            interference_range: 300.0,
            path_loss_exponent: 3.0,
            noise_power: 1e-8,
            q_max: 2.0,
            power_levels: 4,
        }
    }
}

impl PhyConfig {
    pub fn params(&self) -> PhyParams {
        PhyParams {
            bandwidth_hz: self.bandwidth_hz,
            noise_power: self.noise_power,
            slot_seconds: self.slot_seconds,
            chunk_bits: self.chunk_bits,
        }
    }

    pub fn grid(&self) -> Result<PowerGrid> {
        PowerGrid::uniform(self.q_max, self.power_levels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpSettings {
    pub iterations: usize,
    pub delta: f64,
    pub enumeration_cap: u64,
    /// Nodes enumerated exactly per user by the approximate scheduler.
    pub neighborhood: usize,
}

impl Default for BpSettings {
    fn default() -> Self {
        let d = BpConfig::default();
        Self { iterations: d.iterations, delta: d.delta, enumeration_cap: 1_000_000, neighborhood: 1 }
    }
}

impl BpSettings {
    pub fn exact(&self) -> BpConfig {
        BpConfig {
            iterations: self.iterations,
            delta: self.delta,
            mode: FactorMode::Exact { cap: self.enumeration_cap as u128 },
        }
    }

    pub fn approximate(&self) -> BpConfig {
        BpConfig {
            iterations: self.iterations,
            delta: self.delta,
            mode: FactorMode::Approximate { neighborhood: self.neighborhood },
        }
    }
}

/// Optional debugging artifacts for one slot each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DumpConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel_slot: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginals_slot: Option<u64>,
}

/// Full description of one simulation run. Every field has a default, so a config
/// file only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub slots: u64,
    pub scheduler: SchedulerKind,
    /// Lyapunov tradeoff weight on transmit power.
    pub v: f64,
    /// Arrivals per user and slot are uniform on `0..=a_max` chunks.
    pub a_max: u64,
    /// Delay thresholds in slots for failure accounting.
    pub delay_thresholds: Vec<u64>,
    pub matching_order: NodeOrder,
    /// Grid cells per side for the clustering schedulers.
    pub cells_per_side: usize,
    pub oracle_cap: u64,
    /// Also solve every slot exhaustively on the same state and report the ratio.
    pub shadow_oracle: bool,
    /// A run is unstable when the mean queue over the last tenth of the horizon
    /// exceeds this multiple of the middle tenth (plus one chunk of slack).
    pub divergence_ratio: f64,
    pub topology: TopologyConfig,
    pub phy: PhyConfig,
    pub bp: BpSettings,
    pub dump: DumpConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            slots: 1000,
            scheduler: SchedulerKind::BpMatching,
            v: 1.0,
            a_max: 3,
            delay_thresholds: vec![5, 10, 20],
            matching_order: NodeOrder::Ascending,
            cells_per_side: 3,
            oracle_cap: 10_000_000,
            shadow_oracle: false,
            divergence_ratio: 1.5,
            topology: TopologyConfig::default(),
            phy: PhyConfig::default(),
            bp: BpSettings::default(),
            dump: DumpConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        // scenario files are resolved relative to the config file
        if let (Some(file), Some(dir)) = (&cfg.topology.file, path.parent()) {
            if file.is_relative() {
                cfg.topology.file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    /// Applies `key=value` where `key` is a dotted path such as `phy.bandwidth_hz`
    /// and `value` uses TOML syntax; bare words are taken as strings.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| config_err(format!("override {assignment:?} is not key=value")))?;
        let (key, raw) = (key.trim(), raw.trim());
        let value: Value = match toml::from_str::<toml::Table>(&format!("value = {raw}")) {
            Ok(mut t) => serde_json::to_value(t.remove("value").expect("parsed key"))?,
            Err(_) => Value::String(raw.to_string()),
        };
        let mut tree = serde_json::to_value(&*self)?;
        let mut slot = &mut tree;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let obj = slot
                .as_object_mut()
                .ok_or_else(|| config_err(format!("override key {key:?}: {part:?} is not a table")))?;
            if i + 1 == parts.len() {
                obj.insert(part.to_string(), value.clone());
                break;
            }
            slot = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
        }
        let cfg: Self = serde_json::from_value(tree).map_err(|e| config_err(format!("override {key:?}: {e}")))?;
        cfg.validate()?;
        *self = cfg;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.phy;
        let positive = [
            ("phy.bandwidth_hz", p.bandwidth_hz),
            ("phy.chunk_bits", p.chunk_bits),
            ("phy.slot_seconds", p.slot_seconds),
            ("phy.signal_range", p.signal_range),
            ("phy.interference_range", p.interference_range),
            ("phy.path_loss_exponent", p.path_loss_exponent),
            ("phy.noise_power", p.noise_power),
            ("phy.q_max", p.q_max),
            ("divergence_ratio", self.divergence_ratio),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(config_err(format!("{name} must be a positive number, got {x}")));
            }
        }
        if p.interference_range <= p.signal_range {
            return Err(config_err("phy.interference_range must exceed phy.signal_range"));
        }
        if p.power_levels == 0 {
            return Err(config_err("phy.power_levels must be at least 1"));
        }
        if self.slots == 0 {
            return Err(config_err("slots must be at least 1"));
        }
        if !(self.v >= 0.0 && self.v.is_finite()) {
            return Err(config_err(format!("v must be finite and >= 0, got {}", self.v)));
        }
        if self.cells_per_side == 0 {
            return Err(config_err("cells_per_side must be at least 1"));
        }
        if self.shadow_oracle && self.scheduler.is_clustered() {
            return Err(config_err("the shadow oracle compares full-band schedules; clustered schedulers are not comparable"));
        }
        self.bp.exact().validate()?;
        self.bp.approximate().validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_reference_setup() {
        let c = SimConfig::default();
        assert_eq!(c.phy.bandwidth_hz, 10e6);
        assert_eq!(c.phy.chunk_bits, 20_000.0);
        assert_eq!(c.phy.slot_seconds, 0.01);
        assert_eq!((c.phy.signal_range, c.phy.interference_range), (100.0, 300.0));
        assert_eq!(c.phy.path_loss_exponent, 3.0);
        assert_eq!(c.phy.noise_power, 1e-8);
        assert_eq!(c.phy.q_max, 2.0);
        assert_eq!((c.v, c.a_max, c.phy.power_levels), (1.0, 3, 4));
        c.validate().unwrap();
    }

    #[test]
    fn toml_roundtrip_and_partial_files() {
        let c = SimConfig::default();
        let back = SimConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, c);

        let c = SimConfig::from_toml_str("scheduler = \"cluster1\"\n[topology]\nscenario = \"d2d\"\nside = 300.0\n").unwrap();
        assert_eq!(c.scheduler, SchedulerKind::Cluster1);
        assert_eq!(c.topology.scenario, Scenario::D2d);
        assert_eq!(c.topology.side, 300.0);
        assert_eq!(c.slots, 1000);
        assert!(SimConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn overrides() {
        let mut c = SimConfig::default();
        c.set("phy.bandwidth_hz=4e6").unwrap();
        c.set("scheduler = exhaustive").unwrap();
        c.set("delay_thresholds=[3, 7]").unwrap();
        c.set("topology.max_users=6").unwrap();
        c.set("matching_order={kind=\"shuffled\", seed=9}").unwrap();
        assert_eq!(c.phy.bandwidth_hz, 4e6);
        assert_eq!(c.scheduler, SchedulerKind::Exhaustive);
        assert_eq!(c.delay_thresholds, vec![3, 7]);
        assert_eq!(c.topology.max_users, Some(6));
        assert_eq!(c.matching_order, NodeOrder::Shuffled { seed: 9 });
        assert!(c.set("phy.q_max=-1").is_err());
        assert!(c.set("nope").is_err());
        assert!(c.set("phy.unknown=1").is_err());
        assert_eq!(c.phy.q_max, 2.0);
    }

    #[test]
    fn scheduler_names() {
        for k in SchedulerKind::ALL {
            assert_eq!(k.name().parse::<SchedulerKind>().unwrap(), k);
            assert_eq!(serde_json::to_value(k).unwrap(), Value::String(k.name().into()));
        }
        assert!("bp".parse::<SchedulerKind>().is_err());
    }
}
