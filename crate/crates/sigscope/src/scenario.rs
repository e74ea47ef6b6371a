// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario files: a named path plus optional hypotheses and defaults.

use std::{fs, path::Path};

use serde::{Deserialize, Serialize};
use sigscope_core::{
    estimator::CoverWindow,
    path::{make_singular_cusp, RegularCuspHypothesis, SingularCuspSpec, ThetaTable},
    AngularPath,
};

use crate::CliError;

/// The built-in library as `(name, json)`.
pub const BUILTIN: &[(&str, &str)] = &[
    ("line", include_str!("../scenarios/line.json")),
    ("l_shape", include_str!("../scenarios/l_shape.json")),
    ("staircase", include_str!("../scenarios/staircase.json")),
    ("cusp_c025", include_str!("../scenarios/cusp_c025.json")),
    ("cusp_c050", include_str!("../scenarios/cusp_c050.json")),
    ("cusp_c075", include_str!("../scenarios/cusp_c075.json")),
    ("cusp_c099", include_str!("../scenarios/cusp_c099.json")),
    ("cusp_c100", include_str!("../scenarios/cusp_c100.json")),
    ("treelike", include_str!("../scenarios/treelike.json")),
];

fn default_offsets() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}

/// Path description, tagged by `kind`. Angles are radians, durations
/// arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Polyline through `vertices`.
    Polygon { vertices: Vec<[f64; 2]> },
    /// A segment followed by its retrace.
    TreeLike { length: f64, angle: f64 },
    /// Forward direction β as `[duration, angle]` pairs.
    Custom { segments: Vec<(f64, f64)> },
    /// Singular cusp, given through its driving angle α. Without `theta`
    /// the table is linear.
    SingularCusp {
        length: f64,
        r: f64,
        a: f64,
        c: f64,
        #[serde(default)]
        theta: Option<Vec<(f64, f64)>>,
        resolution: usize,
        #[serde(default = "default_offsets")]
        t2_offsets: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(flatten)]
    pub shape: Shape,
    /// Endpoint margin for the estimator.
    #[serde(default)]
    pub kappa: f64,
    /// Signature depth used when the command line gives none.
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub hypothesis: Option<RegularCuspHypothesis>,
    #[serde(default)]
    pub windows: Vec<CoverWindow>,
}

impl Scenario {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, CliError> {
        let sc: Self = serde_json::from_str(text)
            .map_err(|e| CliError::usage(format!("scenario {origin}: {e}")))?;
        sc.beta()
            .map_err(|e| CliError::usage(format!("scenario {origin}: {e}")))?;
        Ok(sc)
    }

    /// Loads a file, or a built-in scenario by name when no such file
    /// exists.
    pub fn load(spec: &str) -> Result<Self, CliError> {
        let path = Path::new(spec);
        if path.exists() {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read {spec}: {e}")))?;
            return Self::from_json(&text, spec);
        }
        match builtin(spec) {
            Some(text) => Self::from_json(text, spec),
            None => Err(CliError::usage(format!(
                "scenario file {spec} not found and no built-in scenario has that name"
            ))),
        }
    }

    pub fn cusp_spec(&self) -> Result<Option<SingularCuspSpec>, sigscope_core::Error> {
        let Shape::SingularCusp {
            length,
            r,
            a,
            c,
            theta,
            ..
        } = &self.shape
        else {
            return Ok(None);
        };
        let spec = match theta {
            None => SingularCuspSpec::linear(*length, *r, *a, *c)?,
            Some(knots) => {
                let spec = SingularCuspSpec {
                    length: *length,
                    r: *r,
                    a: *a,
                    c: *c,
                    theta: ThetaTable::new(knots.clone())?,
                };
                spec.validate()?;
                spec
            }
        };
        Ok(Some(spec))
    }

    /// Forward direction β.
    pub fn beta(&self) -> Result<AngularPath, sigscope_core::Error> {
        match &self.shape {
            Shape::Polygon { vertices } => AngularPath::from_vertices(vertices),
            Shape::TreeLike { length, angle } => {
                AngularPath::from_pairs(&[(*length, *angle), (*length, angle + std::f64::consts::PI)])
            }
            Shape::Custom { segments } => AngularPath::from_pairs(segments),
            Shape::SingularCusp { .. } => Ok(self.alpha()?.reverse_time()),
        }
    }

    /// Driving angle α, the time reversal of β.
    pub fn alpha(&self) -> Result<AngularPath, sigscope_core::Error> {
        match (&self.shape, self.cusp_spec()?) {
            (Shape::SingularCusp { resolution, .. }, Some(spec)) => {
                make_singular_cusp(&spec, *resolution)
            }
            _ => Ok(self.beta()?.reverse_time()),
        }
    }
}

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_match_their_names() {
        for (name, text) in BUILTIN {
            let sc = Scenario::from_json(text, name).unwrap();
            assert_eq!(&sc.name, name);
            let beta = sc.beta().unwrap();
            let alpha = sc.alpha().unwrap();
            assert_eq!(alpha.reverse_time(), beta);
        }
    }

    #[test]
    fn staircase_carries_a_valid_hypothesis() {
        let sc = Scenario::from_json(builtin("staircase").unwrap(), "staircase").unwrap();
        let hyp = sc.hypothesis.clone().unwrap();
        let check = sigscope_core::path::check_regular_cusp(&sc.beta().unwrap(), &hyp, 0.05).unwrap();
        assert!(check.is_pass(), "{check:?}");
    }

    #[test]
    fn errors_name_the_field() {
        let err = Scenario::from_json(r#"{"name": "x", "kind": "polygon"}"#, "x.json").unwrap_err();
        assert!(err.to_string().contains("vertices"), "{err}");
        let err = Scenario::from_json(r#"{"name": "x", "kind": "custom", "segments": [[-1, 0]]}"#, "x.json")
            .unwrap_err();
        assert!(err.to_string().contains("duration"), "{err}");
        let err = Scenario::from_json(r#"{"kind": "custom", "segments": [[1, 0]]}"#, "x.json").unwrap_err();
        assert!(err.to_string().contains("name"), "{err}");
    }
}
