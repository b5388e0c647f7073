//! Scenario ingestion: a strict JSON schema with explicit units in every
//! field name, sweep-axis expansion, and resolution into simulator inputs.
//!
//! A scenario names the active pair `a`/`b`, any number of listeners and
//! (for the locate stage) extra anchors, per-node clock parameters, the
//! protocol timing, noise, an RNG seed and optional sweep axes. Geometry
//! comes either from `nodes` (positions in meters) or from `tofs_ns`
//! (flight times stated directly, which keeps estimator checks independent
//! of the speed-of-light constant). Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::estimators::{EstimatorError, RatioSource};
use crate::geometry::{ground_truth, GroundTruth, Position};
use crate::localization::LocalizationError;
use crate::protocol::{
    ExchangeClocks, NoiseModel, NoiseSpec, ProtocolError, ProtocolTiming, Variant,
};
use crate::ratio::Ratio;
use crate::timebase::{ClockModel, TickDuration, FS_PER_NANOSECOND, FS_PER_PICOSECOND};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Localization(#[from] LocalizationError),
    #[error("cannot write results: {0}")]
    Output(#[from] std::io::Error),
}

fn invalid(field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

// ── Raw schema ────────────────────────────────────────────────────────────

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
pub enum VariantTag {
    #[serde(rename = "SS")]
    Ss,
    #[serde(rename = "DS")]
    Ds,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
pub enum RatioSourceTag {
    #[serde(rename = "CFO")]
    Cfo,
    #[serde(rename = "DS_SYMMETRY")]
    DsSymmetry,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub variant: VariantTag,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ratio_source")]
    pub ratio_source: RatioSourceTag,
    #[serde(default)]
    pub nodes: Option<NodesSection>,
    #[serde(default)]
    pub tofs_ns: Option<TofsSection>,
    pub clocks: ClocksSection,
    pub timing: TimingSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub quantization: QuantizationConfig,
    #[serde(default = "default_dimensions")]
    pub dimensions: u8,
}

fn default_ratio_source() -> RatioSourceTag {
    RatioSourceTag::Cfo
}

fn default_dimensions() -> u8 {
    2
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodesSection {
    pub a: NodeEntry,
    pub b: NodeEntry,
    pub listeners: Vec<IdNodeEntry>,
    #[serde(default)]
    pub extra_anchors: Vec<IdNodeEntry>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub pos_m: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdNodeEntry {
    pub id: String,
    pub pos_m: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TofsSection {
    pub ab_ns: f64,
    pub listeners: Vec<TofListenerEntry>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TofListenerEntry {
    pub id: String,
    pub at_ns: f64,
    pub bt_ns: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClocksSection {
    pub a: ClockEntry,
    pub b: ClockEntry,
    #[serde(default)]
    pub listeners: Vec<ClockEntry>,
    #[serde(default)]
    pub extra_anchors: Vec<ClockEntry>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockEntry {
    #[serde(default)]
    pub drift_ppm: f64,
    #[serde(default)]
    pub offset_ns: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSection {
    pub delay_b_ns: f64,
    #[serde(default)]
    pub delay_a_ns: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default)]
    pub cfo_sigma: f64,
    #[serde(default)]
    pub rx_timestamp_sigma_ps: f64,
}

/// `"off"` (default), `"hardware"` (the 15.65 ps UWB timestamp grid) or
/// `{"tick_ps": <size>}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum QuantizationConfig {
    Mode(String),
    Tick { tick_ps: f64 },
}

impl Default for QuantizationConfig {
    fn default() -> Self {
        QuantizationConfig::Mode("off".to_string())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepAxisConfig {
    path: String,
    #[serde(default)]
    values: Option<Vec<serde_json::Number>>,
    #[serde(default)]
    range: Option<RangeSpec>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RangeSpec {
    start: f64,
    stop: f64,
    step: f64,
}

// ── Resolved configuration ────────────────────────────────────────────────

/// One listener of a resolved sweep point.
#[derive(Clone, Debug)]
pub struct ResolvedListener {
    pub id: String,
    pub clock: ClockModel,
    pub loc: ListenerLoc,
}

#[derive(Clone, Copy, Debug)]
pub enum ListenerLoc {
    Position(Position),
    Tofs { at: TickDuration, bt: TickDuration },
}

/// An extra anchor used by the locate stage; it takes the responder role in
/// its exchange with the primary initiator.
#[derive(Clone, Debug)]
pub struct ResolvedAnchor {
    pub id: String,
    pub position: Position,
    pub clock: ClockModel,
}

/// Simulator-ready view of one sweep point.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub name: Option<String>,
    pub variant: Variant,
    pub seed: u64,
    pub ratio_source: RatioSource,
    pub timing: ProtocolTiming,
    pub noise: NoiseModel,
    pub quantized: bool,
    pub pos_a: Option<Position>,
    pub pos_b: Option<Position>,
    pub direct_ab_tof: Option<TickDuration>,
    pub clock_a: ClockModel,
    pub clock_b: ClockModel,
    pub listeners: Vec<ResolvedListener>,
    pub extra_anchors: Vec<ResolvedAnchor>,
    pub three_d: bool,
}

impl Resolved {
    pub fn clocks_for(&self, listener: &ResolvedListener) -> ExchangeClocks {
        ExchangeClocks {
            a: self.clock_a.clone(),
            b: self.clock_b.clone(),
            t: listener.clock.clone(),
        }
    }

    /// Ground truth of the primary pair as seen by one listener.
    pub fn truth_for(&self, listener: &ResolvedListener) -> Result<GroundTruth, ScenarioError> {
        match (listener.loc, self.pos_a, self.pos_b, self.direct_ab_tof) {
            (ListenerLoc::Position(t), Some(a), Some(b), _) => Ok(ground_truth(a, b, t)),
            (ListenerLoc::Tofs { at, bt }, _, _, Some(ab)) => {
                GroundTruth::from_tofs(ab, at, bt).map_err(|e| ScenarioError::Validation {
                    field: format!("tofs_ns.listeners.{}", listener.id),
                    message: e.to_string(),
                })
            }
            _ => unreachable!("validated geometry mode"),
        }
    }

    /// True when neither noise nor timestamp quantization perturbs the
    /// exchange, i.e. the analytic error bounds apply.
    pub fn noise_free(&self) -> bool {
        self.noise.is_none() && !self.quantized
    }
}

fn ticks_from_f64(value: f64, unit_fs: i128, field: &str) -> Result<TickDuration, ScenarioError> {
    let rational = Ratio::from_f64(value).ok_or_else(|| invalid(field, "must be finite"))?;
    Ok(TickDuration::from_fs(
        (rational * Ratio::from_int(unit_fs)).round_to_i128(),
    ))
}

fn clock_from_entry(
    id: &str,
    entry: &ClockEntry,
    quantization: Option<TickDuration>,
    field: &str,
) -> Result<ClockModel, ScenarioError> {
    let offset = ticks_from_f64(entry.offset_ns, FS_PER_NANOSECOND, field)?;
    let clock = ClockModel::from_ppm(id, entry.drift_ppm, offset)
        .map_err(|e| invalid(field, e.to_string()))?;
    match quantization {
        None => Ok(clock),
        Some(tick) => clock
            .with_quantization(tick)
            .map_err(|e| invalid("quantization", e.to_string())),
    }
}

fn position_from(pos_m: &[f64], dimensions: u8, field: &str) -> Result<Position, ScenarioError> {
    if pos_m.len() != dimensions as usize {
        return Err(invalid(
            field,
            format!("expected {dimensions} coordinates, got {}", pos_m.len()),
        ));
    }
    if pos_m.iter().any(|c| !c.is_finite()) {
        return Err(invalid(field, "coordinates must be finite"));
    }
    Ok(match dimensions {
        2 => Position::new(pos_m[0], pos_m[1]),
        _ => Position::new_3d(pos_m[0], pos_m[1], pos_m[2]),
    })
}

impl ScenarioConfig {
    pub fn resolve(&self) -> Result<Resolved, ScenarioError> {
        if self.dimensions != 2 && self.dimensions != 3 {
            return Err(invalid("dimensions", "must be 2 or 3"));
        }
        let variant = match self.variant {
            VariantTag::Ss => Variant::Ss,
            VariantTag::Ds => Variant::Ds,
        };
        let ratio_source = match self.ratio_source {
            RatioSourceTag::Cfo => RatioSource::Cfo,
            RatioSourceTag::DsSymmetry => RatioSource::DsSymmetry,
        };
        if ratio_source == RatioSource::DsSymmetry && variant == Variant::Ss {
            return Err(invalid(
                "ratio_source",
                "DS_SYMMETRY requires the DS variant",
            ));
        }

        // Timing.
        let delay_b = ticks_from_f64(self.timing.delay_b_ns, FS_PER_NANOSECOND, "timing.delay_b_ns")?;
        if delay_b <= TickDuration::ZERO {
            return Err(invalid("timing.delay_b_ns", "must be positive"));
        }
        let timing = match (variant, self.timing.delay_a_ns) {
            (Variant::Ds, None) => {
                return Err(invalid("timing.delay_a_ns", "required for the DS variant"));
            }
            (Variant::Ds, Some(ns)) => {
                let delay_a = ticks_from_f64(ns, FS_PER_NANOSECOND, "timing.delay_a_ns")?;
                if delay_a <= TickDuration::ZERO {
                    return Err(invalid("timing.delay_a_ns", "must be positive"));
                }
                ProtocolTiming::double_sided(delay_b, delay_a)
            }
            (Variant::Ss, Some(_)) => {
                return Err(invalid(
                    "timing.delay_a_ns",
                    "not allowed for the SS variant",
                ));
            }
            (Variant::Ss, None) => ProtocolTiming::single_sided(delay_b),
        };

        // Noise.
        if !(self.noise.cfo_sigma.is_finite() && self.noise.cfo_sigma >= 0.0) {
            return Err(invalid("noise.cfo_sigma", "must be finite and non-negative"));
        }
        if !(self.noise.rx_timestamp_sigma_ps.is_finite() && self.noise.rx_timestamp_sigma_ps >= 0.0)
        {
            return Err(invalid(
                "noise.rx_timestamp_sigma_ps",
                "must be finite and non-negative",
            ));
        }
        let noise = NoiseModel {
            cfo: NoiseSpec::gaussian(self.noise.cfo_sigma),
            rx_timestamp: NoiseSpec::gaussian(self.noise.rx_timestamp_sigma_ps * 1000.0),
        };

        // Quantization.
        let quantization = match &self.quantization {
            QuantizationConfig::Mode(mode) if mode == "off" => None,
            QuantizationConfig::Mode(mode) if mode == "hardware" => {
                Some(TickDuration::from_fs(15_650)) // 15.65 ps
            }
            QuantizationConfig::Mode(other) => {
                return Err(invalid(
                    "quantization",
                    format!("unknown mode {other:?}, expected \"off\", \"hardware\" or {{\"tick_ps\": ..}}"),
                ));
            }
            QuantizationConfig::Tick { tick_ps } => {
                let tick = ticks_from_f64(*tick_ps, FS_PER_PICOSECOND, "quantization.tick_ps")?;
                if tick <= TickDuration::ZERO {
                    return Err(invalid("quantization.tick_ps", "must be positive"));
                }
                Some(tick)
            }
        };

        let clock_a = clock_from_entry("a", &self.clocks.a, quantization, "clocks.a")?;
        let clock_b = clock_from_entry("b", &self.clocks.b, quantization, "clocks.b")?;

        // Geometry: exactly one of `nodes` and `tofs_ns`.
        let (pos_a, pos_b, direct_ab_tof, listeners, extra_anchors) =
            match (&self.nodes, &self.tofs_ns) {
                (Some(_), Some(_)) => {
                    return Err(invalid("nodes", "specify either nodes or tofs_ns, not both"));
                }
                (None, None) => {
                    return Err(invalid("nodes", "one of nodes or tofs_ns is required"));
                }
                (Some(nodes), None) => {
                    let pos_a = position_from(&nodes.a.pos_m, self.dimensions, "nodes.a.pos_m")?;
                    let pos_b = position_from(&nodes.b.pos_m, self.dimensions, "nodes.b.pos_m")?;
                    if nodes.listeners.is_empty() {
                        return Err(invalid("nodes.listeners", "at least one listener required"));
                    }
                    let listener_clocks =
                        self.listener_clocks(nodes.listeners.len(), quantization)?;
                    let listeners = nodes
                        .listeners
                        .iter()
                        .zip(listener_clocks)
                        .enumerate()
                        .map(|(i, (entry, clock))| {
                            let field = format!("nodes.listeners.{i}.pos_m");
                            Ok(ResolvedListener {
                                id: entry.id.clone(),
                                clock,
                                loc: ListenerLoc::Position(position_from(
                                    &entry.pos_m,
                                    self.dimensions,
                                    &field,
                                )?),
                            })
                        })
                        .collect::<Result<Vec<_>, ScenarioError>>()?;

                    if !self.clocks.extra_anchors.is_empty()
                        && self.clocks.extra_anchors.len() != nodes.extra_anchors.len()
                    {
                        return Err(invalid(
                            "clocks.extra_anchors",
                            "length must match nodes.extra_anchors",
                        ));
                    }
                    let extra_anchors = nodes
                        .extra_anchors
                        .iter()
                        .enumerate()
                        .map(|(i, entry)| {
                            let clock_entry = self
                                .clocks
                                .extra_anchors
                                .get(i)
                                .copied()
                                .unwrap_or_default();
                            let field = format!("nodes.extra_anchors.{i}");
                            Ok(ResolvedAnchor {
                                id: entry.id.clone(),
                                position: position_from(
                                    &entry.pos_m,
                                    self.dimensions,
                                    &format!("{field}.pos_m"),
                                )?,
                                clock: clock_from_entry(
                                    &entry.id,
                                    &clock_entry,
                                    quantization,
                                    &field,
                                )?,
                            })
                        })
                        .collect::<Result<Vec<_>, ScenarioError>>()?;
                    (Some(pos_a), Some(pos_b), None, listeners, extra_anchors)
                }
                (None, Some(tofs)) => {
                    if tofs.listeners.is_empty() {
                        return Err(invalid("tofs_ns.listeners", "at least one listener required"));
                    }
                    let ab = ticks_from_f64(tofs.ab_ns, FS_PER_NANOSECOND, "tofs_ns.ab_ns")?;
                    if ab < TickDuration::ZERO {
                        return Err(invalid("tofs_ns.ab_ns", "must be non-negative"));
                    }
                    let listener_clocks =
                        self.listener_clocks(tofs.listeners.len(), quantization)?;
                    let listeners = tofs
                        .listeners
                        .iter()
                        .zip(listener_clocks)
                        .enumerate()
                        .map(|(i, (entry, clock))| {
                            let field = format!("tofs_ns.listeners.{i}");
                            let at =
                                ticks_from_f64(entry.at_ns, FS_PER_NANOSECOND, &field)?;
                            let bt =
                                ticks_from_f64(entry.bt_ns, FS_PER_NANOSECOND, &field)?;
                            // Validates the triangle bound up front.
                            GroundTruth::from_tofs(ab, at, bt)
                                .map_err(|e| invalid(&field, e.to_string()))?;
                            Ok(ResolvedListener {
                                id: entry.id.clone(),
                                clock,
                                loc: ListenerLoc::Tofs { at, bt },
                            })
                        })
                        .collect::<Result<Vec<_>, ScenarioError>>()?;
                    (None, None, Some(ab), listeners, Vec::new())
                }
            };

        Ok(Resolved {
            name: self.name.clone(),
            variant,
            seed: self.seed,
            ratio_source,
            timing,
            noise,
            quantized: quantization.is_some(),
            pos_a,
            pos_b,
            direct_ab_tof,
            clock_a,
            clock_b,
            listeners,
            extra_anchors,
            three_d: self.dimensions == 3,
        })
    }

    fn listener_clocks(
        &self,
        count: usize,
        quantization: Option<TickDuration>,
    ) -> Result<Vec<ClockModel>, ScenarioError> {
        if !self.clocks.listeners.is_empty() && self.clocks.listeners.len() != count {
            return Err(invalid(
                "clocks.listeners",
                format!(
                    "length {} must match the {count} configured listeners",
                    self.clocks.listeners.len()
                ),
            ));
        }
        (0..count)
            .map(|i| {
                let entry = self.clocks.listeners.get(i).copied().unwrap_or_default();
                clock_from_entry(
                    &format!("t{i}"),
                    &entry,
                    quantization,
                    &format!("clocks.listeners.{i}"),
                )
            })
            .collect()
    }
}

// ── Scenario = base document + sweep axes ─────────────────────────────────

/// One sweep axis: a dotted parameter path into the scenario document and
/// the values it takes.
#[derive(Clone, Debug)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<serde_json::Number>,
}

/// A loaded scenario: the validated base document and its sweep axes.
#[derive(Clone, Debug)]
pub struct Scenario {
    base: Value,
    pub config: ScenarioConfig,
    pub sweep: Vec<SweepAxis>,
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let mut document: Value = serde_json::from_str(text)?;
        let sweep_value = document
            .as_object_mut()
            .ok_or_else(|| invalid("scenario", "top level must be an object"))?
            .remove("sweep");

        let sweep = match sweep_value {
            None | Some(Value::Null) => Vec::new(),
            Some(v) => {
                let axes: Vec<SweepAxisConfig> = serde_json::from_value(v)?;
                axes.into_iter()
                    .map(expand_axis)
                    .collect::<Result<Vec<_>, _>>()?
            }
        };

        let config: ScenarioConfig = serde_json::from_value(document.clone())?;
        config.resolve()?; // surface validation errors at load time

        // Every axis must reference an existing numeric parameter.
        for axis in &sweep {
            let mut probe = document.clone();
            set_path(&mut probe, &axis.path, &axis.values[0])?;
        }

        Ok(Scenario {
            base: document,
            config,
            sweep,
        })
    }

    pub fn sweep_point_count(&self) -> usize {
        self.sweep.iter().map(|a| a.values.len()).product::<usize>().max(1)
    }

    /// The value each axis takes at a row-major sweep index (first axis
    /// slowest).
    pub fn sweep_values_at(&self, index: usize) -> Vec<serde_json::Number> {
        let mut values = Vec::with_capacity(self.sweep.len());
        let mut remainder = index;
        let mut stride = self.sweep_point_count();
        for axis in &self.sweep {
            stride /= axis.values.len();
            let i = remainder / stride;
            remainder %= stride;
            values.push(axis.values[i].clone());
        }
        values
    }

    /// Materializes the sweep point: applies the axis overrides, re-parses
    /// under the strict schema, and resolves.
    pub fn resolved_at(
        &self,
        index: usize,
        seed_override: Option<u64>,
    ) -> Result<Resolved, ScenarioError> {
        let mut document = self.base.clone();
        for (axis, value) in self.sweep.iter().zip(self.sweep_values_at(index)) {
            set_path(&mut document, &axis.path, &value)?;
        }
        let config: ScenarioConfig = serde_json::from_value(document)?;
        let mut resolved = config.resolve()?;
        if let Some(seed) = seed_override {
            resolved.seed = seed;
        }
        Ok(resolved)
    }
}

/// Loads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_json_str(&text)
}

fn expand_axis(axis: SweepAxisConfig) -> Result<SweepAxis, ScenarioError> {
    let field = format!("sweep.{}", axis.path);
    let values = match (axis.values, axis.range) {
        (Some(values), None) => values,
        (None, Some(range)) => {
            if !(range.step.is_finite() && range.step != 0.0) {
                return Err(invalid(&field, "range.step must be finite and non-zero"));
            }
            if (range.stop - range.start) / range.step < -1e-9 {
                return Err(invalid(&field, "range.step points away from stop"));
            }
            let count = ((range.stop - range.start) / range.step + 1e-9).floor() as usize + 1;
            (0..count)
                .map(|i| {
                    let v = range.start + range.step * i as f64;
                    // Integral values stay integers so that integer-typed
                    // parameters (e.g. seed) remain sweepable by range.
                    if v.fract() == 0.0 && v.abs() < 9e15 {
                        Ok(serde_json::Number::from(v as i64))
                    } else {
                        serde_json::Number::from_f64(v)
                            .ok_or_else(|| invalid(&field, "range produced a non-finite value"))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        _ => {
            return Err(invalid(&field, "exactly one of values or range is required"));
        }
    };
    if values.is_empty() {
        return Err(invalid(&field, "values must not be empty"));
    }
    Ok(SweepAxis {
        path: axis.path,
        values,
    })
}

/// Replaces the number at a dotted path (`clocks.a.drift_ppm`,
/// `nodes.listeners.0.pos_m.1`, `seed`). The path must already exist.
fn set_path(document: &mut Value, path: &str, value: &serde_json::Number) -> Result<(), ScenarioError> {
    let mut cursor = document;
    let field = || format!("sweep.{path}");
    for segment in path.split('.') {
        cursor = match cursor {
            Value::Object(map) => map.get_mut(segment).ok_or_else(|| {
                invalid(&field(), format!("no parameter named {segment:?} on this path"))
            })?,
            Value::Array(items) => {
                let index: usize = segment.parse().map_err(|_| {
                    invalid(&field(), format!("expected an array index, got {segment:?}"))
                })?;
                items.get_mut(index).ok_or_else(|| {
                    invalid(&field(), format!("index {index} out of bounds"))
                })?
            }
            _ => {
                return Err(invalid(
                    &field(),
                    "path descends into a non-container value",
                ));
            }
        };
    }
    if !cursor.is_number() {
        return Err(invalid(&field(), "sweep target must be a number"));
    }
    *cursor = Value::Number(value.clone());
    Ok(())
}
