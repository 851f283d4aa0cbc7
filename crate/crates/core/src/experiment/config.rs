use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::fatou_bieberbach::{desk_schedule, enclose_standard, EpsSchedule, DEFAULT_EXPONENT_CAP};
use crate::kobayashi::SearchBudget;
use crate::obstacle::{CRule, Shell, ShellUnion};

pub const SCHEMA_VERSION: u32 = 1;

/// A real given either as a JSON number or as a decimal string.
fn real<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(x) => Ok(x),
        Repr::Text(s) => s.trim().parse::<f64>().map_err(|e| serde::de::Error::custom(format!("bad decimal {s:?}: {e}"))),
    }
}

fn reals<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    struct Wrap(#[serde(deserialize_with = "real")] f64);
    Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
}

fn opt_reals<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<f64>>, D::Error> {
    reals(d).map(Some)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightRule {
    /// `C_N = n 2^{3N+1}`.
    Hyperbolic,
    Explicit,
}

/// The standard contact obstacle used by the lemma and norm suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObstacleConfig {
    pub c_rule: HeightRule,
    /// Number of shells kept.
    pub shells: usize,
    /// Required for the explicit rule; filled in from the rule otherwise.
    #[serde(deserialize_with = "opt_reals", skip_serializing_if = "Option::is_none")]
    pub heights: Option<Vec<f64>>,
}

impl Default for ObstacleConfig {
    fn default() -> Self {
        ObstacleConfig { c_rule: HeightRule::Hyperbolic, shells: 8, heights: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `a_i = 2 4^{i-1}`, `b_i = 4^i`, `c_i = 1`.
    Desk,
    /// The contact obstacle thickened by `widen` and dilated so that `a_1 = 2`.
    EnclosedStandard,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpsConfig {
    #[serde(deserialize_with = "real")]
    pub first: f64,
    #[serde(deserialize_with = "real")]
    pub ratio: f64,
}

impl Default for EpsConfig {
    fn default() -> Self {
        EpsConfig { first: 0.25, ratio: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PushoutConfig {
    pub schedule: ScheduleKind,
    /// Ambient dimension for the desk and explicit schedules.
    pub dim: usize,
    #[serde(deserialize_with = "opt_reals", skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(deserialize_with = "opt_reals", skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(deserialize_with = "opt_reals", skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(deserialize_with = "real")]
    pub widen: f64,
    pub eps: EpsConfig,
    pub exponent_cap: u64,
    pub samples_per_shell: usize,
    pub identity_samples: usize,
    pub escape_samples: usize,
    pub omega_samples: usize,
    /// Max-norm radius of the random points tested for membership.
    #[serde(deserialize_with = "real")]
    pub omega_radius: f64,
    pub pullback_samples: usize,
}

impl Default for PushoutConfig {
    fn default() -> Self {
        PushoutConfig {
            schedule: ScheduleKind::Desk,
            dim: 2,
            a: None,
            b: None,
            c: None,
            widen: 0.1,
            eps: EpsConfig::default(),
            exponent_cap: DEFAULT_EXPONENT_CAP,
            samples_per_shell: 1000,
            identity_samples: 10_000,
            escape_samples: 1000,
            omega_samples: 100,
            omega_radius: 0.25,
            pullback_samples: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaConfig {
    pub n_values: Vec<usize>,
    pub n0_values: Vec<u32>,
    pub disks: usize,
    pub degree: usize,
    pub piece_budget: usize,
    pub contrapositive_restarts: usize,
    pub horizontality_disks: usize,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            n_values: vec![1, 2],
            n0_values: vec![1, 2, 3],
            disks: 500,
            degree: 3,
            piece_budget: 4_000,
            contrapositive_restarts: 200,
            horizontality_disks: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KobayashiConfig {
    pub search: SearchBudget,
    pub consistency_directions: usize,
    /// Restarts for each direction of the consistency sweep.
    pub consistency_restarts: usize,
    pub triangle_triples: usize,
    pub chow_pairs: usize,
}

impl Default for KobayashiConfig {
    fn default() -> Self {
        KobayashiConfig {
            search: SearchBudget::default(),
            consistency_directions: 100,
            consistency_restarts: 4,
            triangle_triples: 20,
            chow_pairs: 100,
        }
    }
}

/// Validated experiment configuration. All schedules are stored expanded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub n: usize,
    #[serde(default = "six")]
    pub i_max: usize,
    #[serde(default = "six")]
    pub k_max: usize,
    #[serde(default)]
    pub obstacle: ObstacleConfig,
    #[serde(default)]
    pub pushout: PushoutConfig,
    #[serde(default)]
    pub lemma: LemmaConfig,
    #[serde(default)]
    pub kobayashi: KobayashiConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_margin", deserialize_with = "real")]
    pub margin: f64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn six() -> usize {
    6
}

fn default_seed() -> u64 {
    20_260_601
}

fn default_margin() -> f64 {
    1e-6
}

fn field(name: &str, message: impl Into<String>) -> Error {
    Error::ConfigField { field: name.into(), message: message.into() }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(field(name, format!("must be positive and finite, got {v}")))
    }
}

fn at_least_one(name: &str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(field(name, "must be at least 1"))
    }
}

impl ExperimentConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::ConfigSyntax { line: e.line(), column: e.column(), message: e.to_string() })?;
        raw.normalized()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fills in every rule-derived list and checks all invariants.
    pub fn normalized(mut self) -> Result<Self> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field("schema_version", format!("unsupported version {}", self.schema_version)));
        }
        at_least_one("n", self.n)?;
        at_least_one("i_max", self.i_max)?;
        at_least_one("k_max", self.k_max)?;
        positive("margin", self.margin)?;

        let o = &mut self.obstacle;
        at_least_one("obstacle.shells", o.shells)?;
        match o.c_rule {
            HeightRule::Hyperbolic => {
                let h: Vec<f64> = (1..=o.shells).map(|i| CRule::Hyperbolic.height(self.n, i)).collect::<Result<_>>()?;
                // a normalized config lists the rule's own heights
                if o.heights.as_ref().is_some_and(|given| *given != h) {
                    return Err(field("obstacle.heights", "only allowed with the explicit rule"));
                }
                o.heights = Some(h);
            }
            HeightRule::Explicit => {
                let h = o.heights.as_ref().ok_or_else(|| field("obstacle.heights", "required by the explicit rule"))?;
                if h.len() != o.shells {
                    return Err(field("obstacle.heights", format!("expected {} entries, got {}", o.shells, h.len())));
                }
                for (i, &x) in h.iter().enumerate() {
                    positive(&format!("obstacle.heights[{}]", i + 1), x)?;
                }
            }
        }

        let p = &mut self.pushout;
        EpsSchedule::Geometric { first: p.eps.first, ratio: p.eps.ratio }
            .validate()
            .map_err(|e| field("pushout.eps", e.to_string()))?;
        for (name, v) in [
            ("pushout.samples_per_shell", p.samples_per_shell),
            ("pushout.identity_samples", p.identity_samples),
            ("pushout.escape_samples", p.escape_samples),
            ("pushout.omega_samples", p.omega_samples),
            ("pushout.pullback_samples", p.pullback_samples),
        ] {
            at_least_one(name, v)?;
        }
        if p.exponent_cap == 0 {
            return Err(field("pushout.exponent_cap", "must be at least 1"));
        }
        positive("pushout.omega_radius", p.omega_radius)?;
        let union = match p.schedule {
            ScheduleKind::Desk => {
                if p.dim < 2 {
                    return Err(field("pushout.dim", "must be at least 2"));
                }
                desk_schedule(p.dim, self.i_max)?
            }
            ScheduleKind::EnclosedStandard => {
                let rule = CRule::Explicit(self.obstacle.heights.clone().expect("filled above"));
                if self.i_max > self.obstacle.shells {
                    return Err(field("i_max", "exceeds obstacle.shells for the enclosed standard schedule"));
                }
                p.dim = 2 * self.n + 1;
                enclose_standard(self.n, self.i_max, &rule, p.widen).map_err(|e| field("pushout.widen", e.to_string()))?.0
            }
            ScheduleKind::Explicit => {
                let get = |v: &Option<Vec<f64>>, name: &str| {
                    v.clone().ok_or_else(|| field(name, "required by the explicit schedule"))
                };
                let (a, b, c) = (get(&p.a, "pushout.a")?, get(&p.b, "pushout.b")?, get(&p.c, "pushout.c")?);
                if p.dim < 2 {
                    return Err(field("pushout.dim", "must be at least 2"));
                }
                explicit_schedule(&a, &b, &c, self.i_max, p.dim)?
            }
        };
        let sh = union.shells();
        if p.schedule != ScheduleKind::Explicit {
            // a normalized config lists the generated schedule
            let generated = [
                sh.iter().map(|s| s.inner.to_f64()).collect::<Vec<_>>(),
                sh.iter().map(|s| s.outer.to_f64()).collect(),
                sh.iter().map(|s| s.height.to_f64()).collect(),
            ];
            for ((name, given), gen) in [("pushout.a", &p.a), ("pushout.b", &p.b), ("pushout.c", &p.c)].into_iter().zip(&generated) {
                if given.as_ref().is_some_and(|g| g != gen) {
                    return Err(field(name, "explicit lists need schedule \"explicit\""));
                }
            }
        }
        p.a = Some(sh.iter().map(|s| s.inner.to_f64()).collect());
        p.b = Some(sh.iter().map(|s| s.outer.to_f64()).collect());
        p.c = Some(sh.iter().map(|s| s.height.to_f64()).collect());

        let l = &self.lemma;
        if l.n_values.is_empty() || l.n_values.contains(&0) {
            return Err(field("lemma.n_values", "need at least one value, all at least 1"));
        }
        if l.n0_values.is_empty() || l.n0_values.iter().any(|&v| v == 0 || v as usize + 1 > self.obstacle.shells) {
            return Err(field("lemma.n0_values", "values must lie in 1..obstacle.shells"));
        }
        for (name, v) in [
            ("lemma.disks", l.disks),
            ("lemma.degree", l.degree),
            ("lemma.piece_budget", l.piece_budget),
            ("lemma.contrapositive_restarts", l.contrapositive_restarts),
            ("lemma.horizontality_disks", l.horizontality_disks),
        ] {
            at_least_one(name, v)?;
        }
        let k = &self.kobayashi;
        k.search.validate()?;
        for (name, v) in [
            ("kobayashi.consistency_directions", k.consistency_directions),
            ("kobayashi.consistency_restarts", k.consistency_restarts),
            ("kobayashi.triangle_triples", k.triangle_triples),
            ("kobayashi.chow_pairs", k.chow_pairs),
        ] {
            at_least_one(name, v)?;
        }
        Ok(self)
    }

    /// Shell union of the push-out schedule.
    pub fn pushout_union(&self) -> Result<ShellUnion> {
        let p = &self.pushout;
        let get = |v: &Option<Vec<f64>>| v.clone().ok_or_else(|| Error::Precondition("config is not normalized".into()));
        explicit_schedule(&get(&p.a)?, &get(&p.b)?, &get(&p.c)?, self.i_max, p.dim)
    }

    pub fn eps_schedule(&self) -> EpsSchedule {
        EpsSchedule::Geometric { first: self.pushout.eps.first, ratio: self.pushout.eps.ratio }
    }

    /// Height rule for the contact obstacle in `C^{2n'+1}`.
    pub fn height_rule(&self) -> CRule {
        match self.obstacle.c_rule {
            HeightRule::Hyperbolic => CRule::Hyperbolic,
            HeightRule::Explicit => CRule::Explicit(self.obstacle.heights.clone().unwrap_or_default()),
        }
    }
}

/// Strictly interleaved shells `a_1 < b_1 < a_2 < ...` with `a_1 > 1`.
fn explicit_schedule(a: &[f64], b: &[f64], c: &[f64], i_max: usize, dim: usize) -> Result<ShellUnion> {
    for (name, v) in [("pushout.a", a), ("pushout.b", b), ("pushout.c", c)] {
        if v.len() != i_max {
            return Err(field(name, format!("expected i_max = {i_max} entries, got {}", v.len())));
        }
        if let Some(i) = v.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidSchedule { index: i + 1, message: format!("{name} must be positive and finite") });
        }
    }
    if !(a[0] > 1.0) {
        return Err(Error::InvalidSchedule { index: 1, message: format!("a_1 must exceed 1, got {}", a[0]) });
    }
    for i in 0..i_max {
        if !(a[i] < b[i]) {
            return Err(Error::InvalidSchedule { index: i + 1, message: format!("need a_{0} < b_{0}", i + 1) });
        }
        if i > 0 && !(b[i - 1] < a[i]) {
            return Err(Error::InvalidSchedule {
                index: i + 1,
                message: format!("need b_{} < a_{}, got {} >= {}", i, i + 1, b[i - 1], a[i]),
            });
        }
    }
    let shells = (0..i_max).map(|i| Shell::from_f64(a[i], b[i], c[i])).collect();
    ShellUnion::vertical(shells, dim)
}

/// Reads and validates a config file.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_the_defaults() {
        let c = ExperimentConfig::from_json(r#"{"n": 1}"#).unwrap();
        assert_eq!((c.schema_version, c.i_max, c.k_max), (1, 6, 6));
        assert_eq!(c.eps_schedule().eps(1), 0.25);
        assert_eq!(c.eps_schedule().eps(3), 0.0625);
        assert_eq!(c.obstacle.heights.as_ref().unwrap()[..2], [16.0, 128.0]);
        assert_eq!(c.pushout.a.as_ref().unwrap()[..2], [2.0, 8.0]);
        let again = ExperimentConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn decimal_strings_are_accepted() {
        let c = ExperimentConfig::from_json(r#"{"n": 1, "margin": "0.000001", "pushout": {"eps": {"first": "0.2"}}}"#)
            .unwrap();
        assert_eq!(c.margin, 1e-6);
        assert_eq!(c.pushout.eps.first, 0.2);
    }

    #[test]
    fn non_interleaved_schedule_names_the_index() {
        let text = r#"{"n": 1, "i_max": 3, "pushout": {"schedule": "explicit",
            "a": [2, 3, 20], "b": [4, 10, 40], "c": [1, 1, 1]}}"#;
        match ExperimentConfig::from_json(text) {
            Err(Error::InvalidSchedule { index, .. }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_a_position() {
        match ExperimentConfig::from_json("{\"n\": 1,\n \"i_max\": }") {
            Err(Error::ConfigSyntax { line, column, .. }) => assert_eq!((line, column), (2, 11)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(ExperimentConfig::from_json(r#"{"n": 1, "nn": 2}"#), Err(Error::ConfigSyntax { .. })));
        match ExperimentConfig::from_json(r#"{"n": 0}"#) {
            Err(Error::ConfigField { field, .. }) => assert_eq!(field, "n"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn explicit_heights_are_checked() {
        let ok = r#"{"n": 1, "obstacle": {"c_rule": "explicit", "shells": 2, "heights": ["16", "128"]},
            "lemma": {"n0_values": [1]}}"#;
        assert!(ExperimentConfig::from_json(ok).is_ok());
        let short = r#"{"n": 1, "obstacle": {"c_rule": "explicit", "shells": 3, "heights": [16]}}"#;
        assert!(matches!(ExperimentConfig::from_json(short), Err(Error::ConfigField { .. })));
    }
}
