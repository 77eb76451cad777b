//! JSON scenario files.
//!
//! A file either names a preset:
//!
//! ```json
//! { "schema_version": 1, "preset": "trine3" }
//! ```
//!
//! or spells the scenario out. Complex numbers are `[re, im]` pairs, matrices
//! are lists of rows, answer maps list one index set per POVM outcome:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "n_paths": 2,
//!   "weights": [0.5, 0.5],
//!   "detectors": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
//!   "bob_povm": [
//!     { "label": [0], "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]] },
//!     { "label": [1], "matrix": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]] }
//!   ],
//!   "alice_phase_povm": [ ... ],
//!   "ways_answers": [[0], [1]],
//!   "phases_answers": [[0], [1]]
//! }
//! ```

use dualgame::game::presets::Preset;
use dualgame::game::{AnswerMap, GameScenario, ScenarioParts};
use dualgame::measure::{OutcomeLabel, Povm, PovmElement};
use dualgame::states::DetectorFamily;
use dualgame::{ComplexMatrix, ProbDist, PureState, C64};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// `[re, im]`
pub type JsonComplex = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmElementFile {
    pub label: Vec<usize>,
    pub matrix: Vec<Vec<JsonComplex>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detectors: Option<Vec<Vec<JsonComplex>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob_povm: Option<Vec<PovmElementFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice_phase_povm: Option<Vec<PovmElementFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ways_answers: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases_answers: Option<Vec<Vec<usize>>>,
}

/// A parse or validation failure, located by field path (and line/column for syntax errors).
#[derive(Debug, Clone, PartialEq)]
pub struct FileError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for FileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

fn at(path: impl Into<String>, message: impl ToString) -> FileError {
    FileError {
        path: path.into(),
        message: message.to_string(),
    }
}

fn complex(z: &JsonComplex) -> C64 {
    C64::new(z[0], z[1])
}

fn json_complex(z: &C64) -> JsonComplex {
    [z.re, z.im]
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, FileError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            at(
                e.path().to_string(),
                format!("{inner} (line {}, column {})", inner.line(), inner.column()),
            )
        })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(at(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    file.schema_version
                ),
            ));
        }
        Ok(file)
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario files always serialize")
    }

    pub fn preset(preset: Preset) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            preset: Some(preset.name().to_string()),
            n_paths: None,
            weights: None,
            detectors: None,
            bob_povm: None,
            alice_phase_povm: None,
            ways_answers: None,
            phases_answers: None,
        }
    }

    /// Fully explicit description of `s`.
    pub fn from_scenario(s: &GameScenario) -> Self {
        let povm = |p: &Povm| {
            p.elements()
                .iter()
                .map(|e| PovmElementFile {
                    label: e.label.indices(),
                    matrix: (0..e.operator.rows())
                        .map(|r| {
                            (0..e.operator.cols())
                                .map(|c| json_complex(&e.operator.get(r, c)))
                                .collect()
                        })
                        .collect(),
                })
                .collect()
        };
        Self {
            schema_version: SCHEMA_VERSION,
            preset: None,
            n_paths: Some(s.paths()),
            weights: Some(s.weights().probs().to_vec()),
            detectors: Some(
                s.detectors()
                    .states()
                    .iter()
                    .map(|st| st.amplitudes().iter().map(json_complex).collect())
                    .collect(),
            ),
            bob_povm: Some(povm(s.bob_povm())),
            alice_phase_povm: Some(povm(s.alice_phase_povm())),
            ways_answers: Some(s.ways_answers().sets().to_vec()),
            phases_answers: Some(s.phases_answers().sets().to_vec()),
        }
    }

    /// Builds and validates the scenario, refusing composite dimensions above `max_dim`.
    pub fn to_scenario(&self, max_dim: usize) -> Result<GameScenario, FileError> {
        if let Some(name) = &self.preset {
            let explicit = self.n_paths.is_some()
                || self.weights.is_some()
                || self.detectors.is_some()
                || self.bob_povm.is_some()
                || self.alice_phase_povm.is_some()
                || self.ways_answers.is_some()
                || self.phases_answers.is_some();
            if explicit {
                return Err(at(
                    "preset",
                    "a preset file must not also list scenario fields",
                ));
            }
            let preset = Preset::from_name(name)
                .ok_or_else(|| at("preset", format!("unknown preset {name:?}")))?;
            let s = preset.scenario();
            if s.paths() * s.detectors().detector_dim() > max_dim {
                return Err(at(
                    "preset",
                    format!("dimension exceeds the cap of {max_dim}"),
                ));
            }
            return Ok(s);
        }
        fn need<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T, FileError> {
            v.as_ref().ok_or_else(|| at(name, "missing field"))
        }
        let n = *need(&self.n_paths, "n_paths")?;
        if n == 0 || n > max_dim {
            return Err(at("n_paths", format!("must be in 1..={max_dim}")));
        }
        let weights_raw = need(&self.weights, "weights")?;
        if weights_raw.len() != n {
            return Err(at(
                "weights",
                format!("{} entries for {n} paths", weights_raw.len()),
            ));
        }
        let weights = ProbDist::new(weights_raw.clone()).map_err(|e| at("weights", e))?;

        let det_raw = need(&self.detectors, "detectors")?;
        if det_raw.len() != n {
            return Err(at(
                "detectors",
                format!("{} states for {n} paths", det_raw.len()),
            ));
        }
        let mut states = Vec::with_capacity(n);
        for (j, amps) in det_raw.iter().enumerate() {
            if amps.is_empty() || amps.len() > max_dim {
                return Err(at(
                    format!("detectors[{j}]"),
                    format!("dimension must be in 1..={max_dim}"),
                ));
            }
            let st = PureState::from_amplitudes(amps.iter().map(complex).collect())
                .map_err(|e| at(format!("detectors[{j}]"), e))?;
            states.push(st);
        }
        let detectors = DetectorFamily::new(states).map_err(|e| at("detectors", e))?;
        let bob_povm = povm_from_file(need(&self.bob_povm, "bob_povm")?, "bob_povm", max_dim)?;
        let alice_phase_povm = povm_from_file(
            need(&self.alice_phase_povm, "alice_phase_povm")?,
            "alice_phase_povm",
            max_dim,
        )?;
        let ways_answers = AnswerMap::new(need(&self.ways_answers, "ways_answers")?.clone())
            .map_err(|e| at("ways_answers", e))?;
        let phases_answers = AnswerMap::new(need(&self.phases_answers, "phases_answers")?.clone())
            .map_err(|e| at("phases_answers", e))?;
        GameScenario::with_max_dim(
            ScenarioParts {
                weights,
                detectors,
                bob_povm,
                alice_phase_povm,
                ways_answers,
                phases_answers,
            },
            max_dim,
        )
        .map_err(|e| at("", e))
    }
}

fn povm_from_file(
    elements: &[PovmElementFile],
    field: &str,
    max_dim: usize,
) -> Result<Povm, FileError> {
    let mut out = Vec::with_capacity(elements.len());
    for (i, e) in elements.iter().enumerate() {
        let path = format!("{field}[{i}]");
        if e.matrix.len() > max_dim {
            return Err(at(
                format!("{path}.matrix"),
                format!("dimension above the cap of {max_dim}"),
            ));
        }
        let rows: Vec<Vec<C64>> = e
            .matrix
            .iter()
            .map(|r| r.iter().map(complex).collect())
            .collect();
        let operator =
            ComplexMatrix::from_rows(&rows).map_err(|err| at(format!("{path}.matrix"), err))?;
        let label = OutcomeLabel::from_indices(e.label.clone())
            .map_err(|err| at(format!("{path}.label"), err))?;
        out.push(PovmElement { label, operator });
    }
    Povm::new(out).map_err(|e| at(field, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dualgame::qcore::{DEFAULT_MAX_DIM, TAU_NORM};

    fn assert_same(a: &GameScenario, b: &GameScenario) {
        assert_eq!(a.paths(), b.paths());
        assert_eq!(a.ways_answers(), b.ways_answers());
        assert_eq!(a.phases_answers(), b.phases_answers());
        for (x, y) in a.detectors().states().iter().zip(b.detectors().states()) {
            for (p, q) in x.amplitudes().iter().zip(y.amplitudes()) {
                assert!((p - q).norm() <= TAU_NORM);
            }
        }
        for (p, q) in [
            (a.bob_povm(), b.bob_povm()),
            (a.alice_phase_povm(), b.alice_phase_povm()),
        ] {
            assert_eq!(p.len(), q.len());
            for (e, f) in p.elements().iter().zip(q.elements()) {
                assert_eq!(e.label, f.label);
                assert!(e.operator.max_abs_diff(&f.operator) <= TAU_NORM);
            }
        }
    }

    #[test]
    fn explicit_round_trip_for_presets() {
        for p in Preset::ALL {
            let s = p.scenario();
            let text = ScenarioFile::from_scenario(&s).to_json();
            let back = ScenarioFile::parse(&text)
                .unwrap()
                .to_scenario(DEFAULT_MAX_DIM)
                .unwrap();
            assert_same(&s, &back);
            let again = ScenarioFile::from_scenario(&back).to_json();
            assert_eq!(
                ScenarioFile::parse(&again).unwrap(),
                ScenarioFile::parse(&text).unwrap()
            );
        }
    }

    #[test]
    fn preset_file() {
        let f = ScenarioFile::parse(r#"{"schema_version": 1, "preset": "twopair4"}"#).unwrap();
        let s = f.to_scenario(DEFAULT_MAX_DIM).unwrap();
        assert_eq!(s.paths(), 4);
        let err = ScenarioFile::parse(r#"{"schema_version": 1, "preset": "nope"}"#)
            .unwrap()
            .to_scenario(DEFAULT_MAX_DIM)
            .unwrap_err();
        assert_eq!(err.path, "preset");
        let err = ScenarioFile::preset(Preset::Trine3)
            .to_scenario(5)
            .unwrap_err();
        assert_eq!(err.path, "preset");
    }

    #[test]
    fn syntax_errors_carry_location() {
        let err =
            ScenarioFile::parse("{\n  \"schema_version\": 1,\n  \"weights\": [0.5, \"x\"]\n}")
                .unwrap_err();
        assert_eq!(err.path, "weights[1]");
        assert!(err.message.contains("line 3"), "{}", err.message);
        let err = ScenarioFile::parse(r#"{"schema_version": 1, "bogus": 3}"#).unwrap_err();
        assert!(err.message.contains("bogus"));
        let err = ScenarioFile::parse(r#"{"schema_version": 7}"#).unwrap_err();
        assert_eq!(err.path, "schema_version");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let mut f = ScenarioFile::from_scenario(&Preset::Trine3.scenario());
        f.detectors.as_mut().unwrap()[1][0] = [3.0, 0.0];
        assert_eq!(
            f.to_scenario(DEFAULT_MAX_DIM).unwrap_err().path,
            "detectors[1]"
        );

        let mut f = ScenarioFile::from_scenario(&Preset::Trine3.scenario());
        f.bob_povm.as_mut().unwrap()[0].matrix[0][0] = [5.0, 0.0];
        assert_eq!(f.to_scenario(DEFAULT_MAX_DIM).unwrap_err().path, "bob_povm");

        let mut f = ScenarioFile::from_scenario(&Preset::Trine3.scenario());
        f.bob_povm.as_mut().unwrap()[2].matrix.pop();
        assert_eq!(f.to_scenario(DEFAULT_MAX_DIM).unwrap_err().path, "bob_povm");

        let mut f = ScenarioFile::from_scenario(&Preset::Trine3.scenario());
        f.ways_answers = Some(vec![vec![0], vec![1, 2], vec![0, 1]]);
        assert_eq!(
            f.to_scenario(DEFAULT_MAX_DIM).unwrap_err().path,
            "ways_answers"
        );

        let mut f = ScenarioFile::from_scenario(&Preset::Trine3.scenario());
        f.weights = None;
        assert_eq!(f.to_scenario(DEFAULT_MAX_DIM).unwrap_err().path, "weights");

        let f = ScenarioFile::from_scenario(&Preset::SixPair4.scenario());
        assert!(f.to_scenario(11).is_err());
        assert!(f.to_scenario(12).is_ok());
    }
}
