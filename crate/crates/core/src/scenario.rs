//! Built-in scenarios and the JSON scenario file format.
//!
//! ```json
//! {
//!   "id": "s1",
//!   "candidates": ["A", "B", "C", "D", "E"],
//!   "utilities": [0.05, 0.1, 0.0, 0.0, 0.25],
//!   "tallies": [3, 3, 4, 3, 3],
//!   "lex_priority": ["A", "B", "C", "D", "E"],
//!   "notes": ""
//! }
//! ```
//!
//! Unknown fields are rejected. `lex_priority` defaults to candidate order and
//! `notes` to the empty string.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::election::{Candidates, ElectionState, Priority, TieBreak, TieRule, UtilityFunction};
use crate::error::{Error, Result};

/// Identifiers accepted by [`builtin`].
pub const BUILTIN_IDS: [&str; 5] = ["s1", "s2", "s3", "s4", "s4-design"];

/// A focal voter's view of an election before casting the last ballot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    id: String,
    candidates: Candidates,
    utilities: UtilityFunction,
    base_tallies: Vec<u64>,
    lex_priority: Priority,
    notes: String,
}

impl Scenario {
    pub fn new(
        id: impl Into<String>,
        candidates: Candidates,
        utilities: UtilityFunction,
        base_tallies: Vec<u64>,
        lex_priority: Priority,
        notes: impl Into<String>,
    ) -> Result<Self> {
        let m = candidates.len();
        for (field, found) in [
            ("utilities", utilities.len()),
            ("tallies", base_tallies.len()),
            ("lex_priority", lex_priority.order().len()),
        ] {
            if found != m {
                return Err(Error::LengthMismatch {
                    field,
                    expected: m,
                    found,
                });
            }
        }
        Ok(Scenario {
            id: id.into(),
            candidates,
            utilities,
            base_tallies,
            lex_priority,
            notes: notes.into(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn candidates(&self) -> &Candidates {
        &self.candidates
    }

    pub fn utilities(&self) -> &UtilityFunction {
        &self.utilities
    }

    pub fn base_tallies(&self) -> &[u64] {
        &self.base_tallies
    }

    pub fn priority(&self) -> &Priority {
        &self.lex_priority
    }

    pub fn notes(&self) -> &str {
        &self.notes
    }

    /// The election for a winner condition of `seats` under the given rule.
    pub fn state(&self, seats: usize, rule: TieRule) -> Result<ElectionState> {
        let tiebreak = match rule {
            TieRule::Lexicographic => TieBreak::Lexicographic(self.lex_priority.clone()),
            TieRule::Random => TieBreak::RandomUniform,
        };
        ElectionState::new(
            self.candidates.clone(),
            self.base_tallies.clone(),
            seats,
            tiebreak,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| Error::ScenarioParse(e.to_string()))?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        let file = ScenarioFile::from(self);
        let mut text = serde_json::to_string_pretty(&file).expect("scenario serializes");
        text.push('\n');
        text
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    id: String,
    candidates: Vec<String>,
    utilities: Vec<f64>,
    tallies: Vec<u64>,
    #[serde(default)]
    lex_priority: Option<Vec<String>>,
    #[serde(default)]
    notes: String,
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = Error;

    fn try_from(file: ScenarioFile) -> Result<Self> {
        let candidates = Candidates::new(file.candidates)?;
        let m = candidates.len();
        if file.utilities.len() != m {
            return Err(Error::LengthMismatch {
                field: "utilities",
                expected: m,
                found: file.utilities.len(),
            });
        }
        let utilities = UtilityFunction::new(&file.utilities)?;
        let priority = match file.lex_priority {
            None => Priority::identity(m),
            Some(labels) => {
                let order = labels
                    .iter()
                    .map(|l| {
                        candidates
                            .find(l)
                            .ok_or_else(|| Error::UnknownCandidate(l.clone()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Priority::new(order, m)?
            }
        };
        Scenario::new(
            file.id,
            candidates,
            utilities,
            file.tallies,
            priority,
            file.notes,
        )
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        ScenarioFile {
            id: s.id.clone(),
            candidates: s.candidates.labels().to_vec(),
            utilities: s.utilities.values(),
            tallies: s.base_tallies.clone(),
            lex_priority: Some(
                s.lex_priority
                    .order()
                    .iter()
                    .map(|&c| s.candidates.label(c).to_string())
                    .collect(),
            ),
            notes: s.notes.clone(),
        }
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = fs::read_to_string(path)?;
    Scenario::from_json(&text)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, scenario.to_json())?;
    Ok(())
}

/// The four reference scenarios, plus `s4-design` which keeps the alternative
/// vote total for candidate E (3 instead of 4).
pub fn builtin(id: &str) -> Result<Scenario> {
    const S1: [f64; 5] = [0.05, 0.10, 0.0, 0.0, 0.25];
    const S2: [f64; 5] = [0.05, 0.10, 0.01, 0.0, 0.25];
    const S4: [f64; 5] = [0.05, 0.10, 0.0, -1.0, 0.25];
    let (utilities, tallies, notes): (&[f64], [u64; 5], &str) = match id {
        "s1" => (&S1, [3, 3, 4, 3, 3], ""),
        "s2" => (
            &S2,
            [3, 3, 4, 3, 3],
            "C carries a small positive utility, so the truthful ballot is {A,B,C,E} \
             (0.06 / 0.16); [A,B,E] is take-x-best(3).",
        ),
        "s3" => (
            &S1,
            [1, 1, 4, 4, 1],
            "No-win election with two winners. Follow-the-leader {C} with three winners \
             elects {C,D,A} under A>B>C>D>E, worth 0.05.",
        ),
        "s4" => (
            &S4,
            [3, 3, 4, 4, 4],
            "E at 4 votes. The two-winner truthful value is 0.30 here and 0.15 only \
             with E at 3 (see s4-design).",
        ),
        "s4-design" => (
            &S4,
            [3, 3, 4, 4, 3],
            "Variant of s4 with E at 3 votes; the two-winner truthful value is 0.15.",
        ),
        other => return Err(Error::ScenarioNotFound(other.to_string())),
    };
    Scenario::new(
        id,
        Candidates::new(["A", "B", "C", "D", "E"])?,
        UtilityFunction::new(utilities)?,
        tallies.to_vec(),
        Priority::identity(5),
        notes,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_tallies_and_utilities() {
        assert_eq!(builtin("s3").unwrap().base_tallies(), &[1, 1, 4, 4, 1]);
        assert_eq!(builtin("s4").unwrap().base_tallies(), &[3, 3, 4, 4, 4]);
        assert_eq!(
            builtin("s4-design").unwrap().base_tallies(),
            &[3, 3, 4, 4, 3]
        );
        assert_eq!(
            builtin("s1").unwrap().utilities().values(),
            vec![0.05, 0.10, 0.0, 0.0, 0.25]
        );
        assert_eq!(builtin("s2").unwrap().utilities().micros()[2], 10_000);
        for id in BUILTIN_IDS {
            let s = builtin(id).unwrap();
            assert_eq!(s.priority(), &Priority::identity(5));
            assert_eq!(s.id(), id);
        }
    }

    #[test]
    fn unknown_builtin() {
        assert!(matches!(builtin("s9"), Err(Error::ScenarioNotFound(id)) if id == "s9"));
    }

    #[test]
    fn json_round_trip() {
        for id in BUILTIN_IDS {
            let s = builtin(id).unwrap();
            assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s1.json");
        let s = builtin("s2").unwrap();
        save_scenario(&s, &path).unwrap();
        assert_eq!(load_scenario(&path).unwrap(), s);
    }

    #[test]
    fn missing_tallies_names_field() {
        let text = r#"{"id":"x","candidates":["A","B"],"utilities":[1,0]}"#;
        let err = Scenario::from_json(text).unwrap_err().to_string();
        assert!(err.contains("tallies"), "{err}");
    }

    #[test]
    fn length_mismatch() {
        let text = r#"{"id":"x","candidates":["A","B"],"utilities":[1,0,2],"tallies":[1,1]}"#;
        let err = Scenario::from_json(text).unwrap_err();
        assert!(matches!(
            err,
            Error::LengthMismatch {
                field: "utilities",
                expected: 2,
                found: 3
            }
        ));
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"id":"x","candidates":["A"],"utilities":[1],"tallies":[1],"weights":[2]}"#;
        let err = Scenario::from_json(text).unwrap_err().to_string();
        assert!(err.contains("weights"), "{err}");
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = Scenario::from_json("{\n  \"id\": \"x\",\n  oops\n}")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn custom_priority() {
        let text = r#"{"id":"x","candidates":["A","B"],"utilities":[1,0],"tallies":[1,1],
                       "lex_priority":["B","A"]}"#;
        let s = Scenario::from_json(text).unwrap();
        let st = s.state(1, TieRule::Lexicographic).unwrap();
        assert_eq!(s.candidates().format_set(st.winners_lex().unwrap()), "B");
        let bad = r#"{"id":"x","candidates":["A","B"],"utilities":[1,0],"tallies":[1,1],
                      "lex_priority":["B","B"]}"#;
        assert!(Scenario::from_json(bad).is_err());
    }
}
