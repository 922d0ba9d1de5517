//! Scenario configuration files.
//!
//! A config is TOML with a `[scenario]` header, one parameter block named after
//! the scenario kind, an optional `[time]` grid, an optional `[output]`
//! directory and an optional `[sweep]` table of parameter lists. Sweeps take
//! the Cartesian product of all non-empty lists in key order.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use matterwave::paramp::ThreeModeParams;
use matterwave::spinor::{FwmScenario, Gauge};
use nalgebra::Complex;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::holo::HoloParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Fwm,
    Pamp,
    Holo,
}

impl Kind {
    pub fn block(self) -> &'static str {
        match self {
            Kind::Fwm => "fwm",
            Kind::Pamp => "pamp",
            Kind::Holo => "holo",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: ScenarioSection,
    #[serde(default)]
    output: OutputSection,
    time: Option<TimeSection>,
    fwm: Option<toml::Table>,
    pamp: Option<toml::Table>,
    holo: Option<toml::Table>,
    #[serde(default)]
    sweep: BTreeMap<String, Vec<toml::Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    kind: Kind,
    name: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
}

/// Uniform grid of `steps + 1` points on `[start, end]` (or `[start, end_over_pi * pi]`).
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default)]
    pub start: f64,
    pub end: Option<f64>,
    pub end_over_pi: Option<f64>,
    pub steps: usize,
}

impl TimeSection {
    pub fn points(&self) -> CliResult<Vec<f64>> {
        let end = match (self.end, self.end_over_pi) {
            (Some(e), None) => e,
            (None, Some(e)) => e * PI,
            _ => {
                return Err(CliError::config(
                    "time.end",
                    "give exactly one of `end` and `end_over_pi`",
                ))
            }
        };
        if self.steps == 0 {
            return Err(CliError::config("time.steps", "must be at least 1"));
        }
        if !(end > self.start) || !end.is_finite() || !self.start.is_finite() {
            return Err(CliError::config(
                "time.end",
                "must be finite and exceed `start`",
            ));
        }
        let span = end - self.start;
        Ok((0..=self.steps)
            .map(|k| self.start + span * k as f64 / self.steps as f64)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeName {
    #[default]
    Keep,
    Drop,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FwmParams {
    pub n1: u32,
    pub n2: u32,
    pub m: u32,
    #[serde(default = "one")]
    pub c2: f64,
    #[serde(default)]
    pub kinetic: f64,
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub gauge: GaugeName,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PampParams {
    pub chi: f64,
    pub delta: f64,
    #[serde(default = "one")]
    pub omega_r: f64,
    /// Coherent probe amplitude (side modes start in vacuum).
    #[serde(default)]
    pub probe_re: f64,
    #[serde(default)]
    pub probe_im: f64,
}

fn one() -> f64 {
    1.0
}

/// One fully specified computation.
#[derive(Debug, Clone)]
pub enum JobSpec {
    Fwm(FwmScenario<f64>),
    Pamp {
        params: ThreeModeParams<f64>,
        probe: Complex<f64>,
        omega_r_t: Vec<f64>,
    },
    Holo(Box<HoloParams>),
}

#[derive(Debug, Clone)]
pub struct Job {
    /// Output file stem, `<scenario>__<key=value>__...__` for sweeps.
    pub stem: String,
    /// Swept parameter values in key order.
    pub params: Vec<(String, String)>,
    pub spec: JobSpec,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub kind: Kind,
    pub name: String,
    pub output_dir: Option<PathBuf>,
    pub jobs: Vec<Job>,
}

fn field_of(message: &str) -> Option<&str> {
    if !message.contains("field `") {
        return None;
    }
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

/// Key of the `key = value` line containing byte `at`.
fn key_at(text: &str, at: usize) -> Option<&str> {
    let start = text[..at.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next()?;
    let (key, _) = line.split_once('=')?;
    Some(key.trim()).filter(|k| !k.is_empty())
}

fn typed<T: DeserializeOwned>(block: &str, table: toml::Table) -> CliResult<T> {
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| {
            let message = e.message().to_string();
            let key = field_of(&message)
                .map(|f| format!("{block}.{f}"))
                .unwrap_or_else(|| block.to_string());
            CliError::config(key, message)
        })
}

fn module_error(block: &str, err: matterwave::Error) -> CliError {
    match err {
        matterwave::Error::InvalidParameter { name, reason } => {
            CliError::config(format!("{block}.{name}"), reason)
        }
        other => CliError::config(block, other.to_string()),
    }
}

fn display_value(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn build_spec(kind: Kind, block: toml::Table, time: Option<TimeSection>) -> CliResult<JobSpec> {
    let need_time =
        || time.ok_or_else(|| CliError::config("time", "section required for this scenario kind"));
    match kind {
        Kind::Fwm => {
            let p: FwmParams = typed("fwm", block)?;
            let grid = need_time()?.points()?;
            let scn = FwmScenario {
                n1: p.n1,
                n2: p.n2,
                m: p.m,
                c2: p.c2,
                kinetic: p.kinetic,
                c0: p.c0,
                gauge: match p.gauge {
                    GaugeName::Keep => Gauge::KeepConstants,
                    GaugeName::Drop => Gauge::DropConstants,
                },
                time_grid: grid,
            };
            scn.validate().map_err(|e| module_error("fwm", e))?;
            if p.c2 == 0.0 {
                return Err(CliError::config(
                    "fwm.c2",
                    "must be non-zero; time is measured in units of 2 c2 t",
                ));
            }
            Ok(JobSpec::Fwm(scn))
        }
        Kind::Pamp => {
            let p: PampParams = typed("pamp", block)?;
            let params = ThreeModeParams::new(p.chi, p.delta, p.omega_r)
                .map_err(|e| module_error("pamp", e))?;
            let probe = Complex::new(p.probe_re, p.probe_im);
            if !probe.re.is_finite() || !probe.im.is_finite() {
                return Err(CliError::config(
                    "pamp.probe_re",
                    "probe amplitude must be finite",
                ));
            }
            let omega_r_t = need_time()?.points()?;
            if omega_r_t[0] < 0.0 {
                return Err(CliError::config("time.start", "must not be negative"));
            }
            Ok(JobSpec::Pamp {
                params,
                probe,
                omega_r_t,
            })
        }
        Kind::Holo => {
            if time.is_some() {
                return Err(CliError::config("time", "not used by holo scenarios"));
            }
            let p: HoloParams = typed("holo", block)?;
            p.validate()?;
            Ok(JobSpec::Holo(Box::new(p)))
        }
    }
}

/// Parses and validates a config, expanding sweeps into jobs.
pub fn parse(text: &str) -> CliResult<ScenarioConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let key = field_of(&message)
            .or_else(|| e.span().and_then(|s| key_at(text, s.start)))
            .unwrap_or("config");
        CliError::config(key.to_string(), message)
    })?;
    let kind = raw.scenario.kind;
    let name = raw.scenario.name.trim().to_string();
    if name.is_empty()
        || !name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        return Err(CliError::config(
            "scenario.name",
            "use letters, digits, `-` and `_` only",
        ));
    }
    let mut blocks = [("fwm", raw.fwm), ("pamp", raw.pamp), ("holo", raw.holo)];
    let mut base = None;
    for (label, block) in blocks.iter_mut() {
        match (block.take(), *label == kind.block()) {
            (Some(b), true) => base = Some(b),
            (Some(_), false) => {
                return Err(CliError::config(
                    *label,
                    format!("block not used by kind `{}`", kind.block()),
                ));
            }
            (None, _) => {}
        }
    }
    let base = base.ok_or_else(|| CliError::config(kind.block(), "parameter block missing"))?;

    let axes: Vec<(String, Vec<toml::Value>)> = raw
        .sweep
        .into_iter()
        .filter(|(_, v)| !v.is_empty())
        .collect();
    let mut combos: Vec<Vec<(String, toml::Value)>> = vec![Vec::new()];
    for (key, values) in &axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut next = c.clone();
                    next.push((key.clone(), v.clone()));
                    next
                })
            })
            .collect();
    }

    let mut jobs = Vec::with_capacity(combos.len());
    for combo in combos {
        let mut block = base.clone();
        for (k, v) in &combo {
            block.insert(k.clone(), v.clone());
        }
        let spec = build_spec(kind, block, raw.time).map_err(|e| match (e, combo.is_empty()) {
            (CliError::Config { key, message }, false) => {
                let at: Vec<String> = combo
                    .iter()
                    .map(|(k, v)| format!("{k}={}", display_value(v)))
                    .collect();
                CliError::config(key, format!("{message} (sweep point {})", at.join(", ")))
            }
            (e, _) => e,
        })?;
        let params: Vec<(String, String)> = combo
            .iter()
            .map(|(k, v)| (k.clone(), display_value(v)))
            .collect();
        let stem = if params.is_empty() {
            name.clone()
        } else {
            let parts: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("{name}__{}__", parts.join("__"))
        };
        jobs.push(Job { stem, params, spec });
    }
    Ok(ScenarioConfig {
        kind,
        name,
        output_dir: raw.output.dir,
        jobs,
    })
}

pub fn load(path: &Path) -> CliResult<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FWM: &str = r#"
[scenario]
kind = "fwm"
name = "demo"

[fwm]
n1 = 10
n2 = 10
m = 0

[time]
end_over_pi = 2.0
steps = 100
"#;

    fn key_of(err: CliError) -> String {
        match err {
            CliError::Config { key, .. } => key,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_run_without_sweep() {
        let c = parse(FWM).unwrap();
        assert_eq!(c.jobs.len(), 1);
        assert_eq!(c.jobs[0].stem, "demo");
        let c = parse(&format!("{FWM}\n[sweep]\nm = []\n")).unwrap();
        assert_eq!(c.jobs.len(), 1);
    }

    #[test]
    fn sweep_is_a_cartesian_product_in_key_order() {
        let c = parse(&format!("{FWM}\n[sweep]\nn2 = [10, 20]\nm = [0, 5]\n")).unwrap();
        let stems: Vec<&str> = c.jobs.iter().map(|j| j.stem.as_str()).collect();
        assert_eq!(
            stems,
            [
                "demo__m=0__n2=10__",
                "demo__m=0__n2=20__",
                "demo__m=5__n2=10__",
                "demo__m=5__n2=20__"
            ]
        );
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(
            key_of(parse(&FWM.replace("m = 0", "m = 0\nbogus = 1")).unwrap_err()),
            "fwm.bogus"
        );
        assert_eq!(
            key_of(parse(&FWM.replace("m = 0", "m = 11")).unwrap_err()),
            "fwm.m"
        );
        assert_eq!(
            key_of(parse(&FWM.replace("n1 = 10\n", "")).unwrap_err()),
            "fwm.n1"
        );
        assert_eq!(
            key_of(parse(&FWM.replace("steps = 100", "steps = 0")).unwrap_err()),
            "time.steps"
        );
        assert_eq!(
            key_of(parse(&format!("{FWM}\n[sweep]\nm = [0, 50]\n")).unwrap_err()),
            "fwm.m"
        );
        assert_eq!(
            key_of(parse(&format!("{FWM}\n[extra]\nx = 1\n")).unwrap_err()),
            "extra"
        );
        assert_eq!(
            key_of(parse(&FWM.replace("\"fwm\"", "\"pamp\"")).unwrap_err()),
            "fwm"
        );
        assert_eq!(
            key_of(parse(&FWM.replace("\"fwm\"\nname", "\"maser\"\nname")).unwrap_err()),
            "kind"
        );
    }

    #[test]
    fn pamp_time_is_in_recoil_units() {
        let text = r#"
[scenario]
kind = "pamp"
name = "amp"

[pamp]
chi = 0.5
delta = 1.0
probe_re = 2.0

[time]
end = 1.0
steps = 4
"#;
        let c = parse(text).unwrap();
        match &c.jobs[0].spec {
            JobSpec::Pamp {
                omega_r_t, probe, ..
            } => {
                assert_eq!(omega_r_t, &[0.0, 0.25, 0.5, 0.75, 1.0]);
                assert_eq!(probe.re, 2.0);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            key_of(parse(&text.replace("end = 1.0", "start = -1.0\nend = 1.0")).unwrap_err()),
            "time.start"
        );
    }
}
