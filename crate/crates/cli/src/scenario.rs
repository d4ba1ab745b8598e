//! Scenario files: a state, four strengths and optionally angles, biases,
//! a seed and explicit observables.

use std::fs;
use std::path::Path;

use bellbound::linalg::Mat3;
use bellbound::model::{bell_diagonal, singlet, state_from_fano, werner, FanoState, Observable, Scenario, StrengthQuad};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Agreement required between explicit observables and the other keys.
const CONSISTENCY_TOL: f64 = 1e-9;
/// Angles recomputed from 12-digit directions can move by more than the
/// directions themselves near 0 and π.
const ANGLE_CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Singlet,
    Werner { w: f64 },
    BellDiagonal { t: [f64; 3] },
    Fano { a: [f64; 3], b: [f64; 3], t: [[f64; 3]; 3] },
}

impl StateSpec {
    pub fn build(&self) -> CliResult<FanoState> {
        let state = match self {
            StateSpec::Singlet => Ok(singlet()),
            StateSpec::Werner { w } => werner(*w),
            StateSpec::BellDiagonal { t } => bell_diagonal(t[0], t[1], t[2]),
            StateSpec::Fano { a, b, t } => state_from_fano(*a, *b, Mat3::from_rows(*t)),
        };
        state.map_err(|e| CliError::from(e).at("state"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Angles {
    /// Radians.
    pub theta: f64,
    /// Radians.
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSet {
    pub x: Observable,
    pub xp: Observable,
    pub y: Observable,
    pub yp: Observable,
}

/// Written by `achieve`; ignored on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionInfo {
    pub criterion: String,
    pub recipe: String,
    pub target_bound: f64,
    pub attained_chsh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub state: StateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strengths: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Angles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub biases: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<ObservableSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionInfo>,
}

/// A validated scenario file.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub state: FanoState,
    pub strengths: StrengthQuad,
    pub angles: Option<(f64, f64)>,
    pub biases: Option<[f64; 4]>,
    pub scenario: Option<Scenario>,
    pub seed: u64,
}

impl Resolved {
    /// True when nonzero biases were given.
    pub fn biased(&self) -> bool {
        self.biases.is_some_and(|b| b.iter().any(|x| *x != 0.0))
    }
}

/// Reads a JSON document, naming the offending key on failure.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text)
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        if key == "." {
            CliError::parse(inner.to_string())
        } else {
            CliError::parse(inner.to_string()).at(&key)
        }
    })
}

fn check_angle(key: &str, a: f64) -> CliResult<f64> {
    const SLACK: f64 = 1e-12;
    if !a.is_finite() || a < -SLACK || a > std::f64::consts::PI + SLACK {
        return Err(CliError::parse(format!("{a} is not a radian angle in [0, π]")).at(key));
    }
    Ok(a.clamp(0.0, std::f64::consts::PI))
}

impl ScenarioFile {
    pub fn resolve(&self) -> CliResult<Resolved> {
        let state = self.state.build()?;
        let scenario = self
            .observables
            .map(|o| Scenario::new(o.x, o.xp, o.y, o.yp));
        let strengths = match (self.strengths, &scenario) {
            (Some(s), _) => StrengthQuad::new(s[0], s[1], s[2], s[3])
                .map_err(|e| CliError::from(e).at("strengths"))?,
            (None, Some(sc)) => sc.strengths(),
            (None, None) => return Err(CliError::parse("missing field `strengths`")),
        };
        let angles = match (self.angles, &scenario) {
            (Some(a), _) => Some((check_angle("angles.theta", a.theta)?, check_angle("angles.phi", a.phi)?)),
            (None, Some(sc)) => Some((sc.theta(), sc.phi())),
            (None, None) => None,
        };
        let biases = match (self.biases, &scenario) {
            (Some(b), _) => Some(b),
            (None, Some(sc)) => Some(sc.biases()),
            (None, None) => None,
        };
        if let Some(b) = biases {
            for (i, (bi, si)) in b.iter().zip(strengths.as_array()).enumerate() {
                if !bi.is_finite() || bi.abs() > 1.0 - si + bellbound::model::CONSTRAINT_TOL {
                    return Err(CliError::parse(format!(
                        "bias {bi} violates S + |B| ≤ 1 with S = {si}"
                    ))
                    .at(&format!("biases[{i}]")));
                }
            }
        }
        if let Some(sc) = &scenario {
            let close = |a: &[f64], b: &[f64], tol: f64| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
            if !close(&sc.strengths().as_array(), &strengths.as_array(), CONSISTENCY_TOL) {
                return Err(CliError::parse("disagree with the observables' strengths").at("strengths"));
            }
            let (t, p) = angles.expect("derived above");
            if !close(&[sc.theta(), sc.phi()], &[t, p], ANGLE_CONSISTENCY_TOL) {
                return Err(CliError::parse(format!(
                    "disagree with the observables' relative angles ({}, {})",
                    sc.theta(),
                    sc.phi()
                ))
                .at("angles"));
            }
            if !close(&sc.biases(), &biases.expect("derived above"), CONSISTENCY_TOL) {
                return Err(CliError::parse("disagree with the observables' biases").at("biases"));
            }
        }
        Ok(Resolved {
            state,
            strengths,
            angles,
            biases,
            scenario,
            seed: self.seed.unwrap_or(0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::{EXIT_PARSE, EXIT_UNPHYSICAL};

    fn resolve(text: &str) -> CliResult<Resolved> {
        parse_json::<ScenarioFile>(text)?.resolve()
    }

    #[test]
    fn minimal_file() {
        let r = resolve(r#"{"state": {"kind": "singlet"}, "strengths": [1, 1, 1, 1]}"#).unwrap();
        assert_eq!(r.strengths, StrengthQuad::uniform(1.0).unwrap());
        assert!(r.angles.is_none() && r.biases.is_none() && r.scenario.is_none());
        assert_eq!(r.seed, 0);
    }

    #[test]
    fn all_state_kinds() {
        for state in [
            r#"{"kind": "werner", "w": 0.6}"#,
            r#"{"kind": "bell_diagonal", "t": [-0.5, -0.3, 0.1]}"#,
            r#"{"kind": "fano", "a": [0, 0, 0.2], "b": [0, 0, 0.2], "t": [[0.1, 0, 0], [0, 0.1, 0], [0, 0, 0.3]]}"#,
        ] {
            let text = format!(r#"{{"state": {state}, "strengths": [0.9, 0.8, 0.7, 0.6]}}"#);
            resolve(&text).unwrap();
        }
    }

    #[test]
    fn diagnostics_name_the_key() {
        let cases = [
            (r#"{"state": {"kind": "singlet"}, "strengths": [1, 1, 1]}"#, "strengths"),
            (r#"{"state": {"kind": "werner"}, "strengths": [1, 1, 1, 1]}"#, "state"),
            (r#"{"state": {"kind": "singlet"}, "strengths": [1, 1, 1, 1], "angels": {}}"#, "angels"),
            (r#"{"state": {"kind": "singlet"}, "strengths": [1, 1, 1, 1.5]}"#, "strengths"),
            (r#"{"state": {"kind": "singlet"}, "strengths": [1, 1, 1, 1], "angles": {"theta": 4, "phi": 1}}"#, "angles.theta"),
            (r#"{"state": {"kind": "singlet"}, "strengths": [1, 1, 1, 1], "angles": {"theta_deg": 90, "phi": 1}}"#, "theta_deg"),
            (r#"{"state": {"kind": "singlet"}, "strengths": [0.5, 1, 1, 1], "biases": [0.2, 0.1, 0, 0]}"#, "biases[1]"),
            (r#"{"state": {"kind": "singlet"}}"#, "strengths"),
        ];
        for (text, key) in cases {
            let e = resolve(text).unwrap_err();
            assert_eq!(e.code, EXIT_PARSE, "{text}");
            assert!(e.message.contains(key), "{text}: {}", e.message);
        }
    }

    #[test]
    fn unphysical_state_has_its_own_code() {
        let e = resolve(r#"{"state": {"kind": "bell_diagonal", "t": [1, 1, 1]}, "strengths": [1, 1, 1, 1]}"#)
            .unwrap_err();
        assert_eq!(e.code, EXIT_UNPHYSICAL);
        assert!(e.message.starts_with("state"));
    }

    #[test]
    fn observables_fill_in_and_must_agree() {
        let obs = r#""observables": {
            "x": {"bias": 0.1, "strength": 0.9, "direction": [1, 0, 0]},
            "xp": {"bias": 0, "strength": 0.8, "direction": [0, 1, 0]},
            "y": {"bias": 0, "strength": 0.7, "direction": [1, 0, 0]},
            "yp": {"bias": -0.2, "strength": 0.6, "direction": [0, 0, 1]}}"#;
        let r = resolve(&format!(r#"{{"state": {{"kind": "singlet"}}, {obs}}}"#)).unwrap();
        assert_eq!(r.strengths, StrengthQuad::new(0.9, 0.8, 0.7, 0.6).unwrap());
        let (t, p) = r.angles.unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-15 && (p - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(r.biases.unwrap(), [0.1, 0.0, 0.0, -0.2]);
        let bad = format!(r#"{{"state": {{"kind": "singlet"}}, "strengths": [0.9, 0.8, 0.7, 0.5], {obs}}}"#);
        assert!(resolve(&bad).unwrap_err().message.starts_with("strengths"));
    }
}
