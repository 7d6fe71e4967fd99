//! Model instances `(S, P)` and their JSON file format.
//!
//! ```json
//! {
//!   "name": "triangle",
//!   "d": 2,
//!   "offsets": [["0", "0"]],
//!   "halfspaces": [{"a": [-1, 0], "b": "0"}, {"a": [0, -1], "b": "0"}, {"a": [1, 1], "b": "1"}],
//!   "witness": ["1/4", "1/4"]
//! }
//! ```
//!
//! Rationals are strings of the form `"p/q"` or `"p"`. Halfspace normals are
//! normalized to primitive integer vectors on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    parse_rational, Halfspace, HalfspaceSystem, OffsetSet, PolytopeSpec, RationalPoint,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelInstance {
    pub name: Option<String>,
    offsets: OffsetSet,
    polytope: PolytopeSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfspaceJson {
    pub a: Vec<i64>,
    pub b: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub d: usize,
    pub offsets: Vec<Vec<String>>,
    pub halfspaces: Vec<HalfspaceJson>,
    pub witness: Vec<String>,
}

impl ModelInstance {
    pub fn new(name: Option<String>, offsets: OffsetSet, polytope: PolytopeSpec) -> Result<Self> {
        if offsets.dim() != polytope.dim() {
            return Err(Error::DimensionMismatch {
                expected: polytope.dim(),
                found: offsets.dim(),
            });
        }
        Ok(ModelInstance {
            name,
            offsets,
            polytope,
        })
    }

    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }

    pub fn offsets(&self) -> &OffsetSet {
        &self.offsets
    }

    pub fn polytope(&self) -> &PolytopeSpec {
        &self.polytope
    }

    pub fn from_file_data(file: &InstanceFile) -> Result<Self> {
        let d = file.d;
        let check = |len: usize| {
            if len == d {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: d,
                    found: len,
                })
            }
        };
        let offsets = file
            .offsets
            .iter()
            .map(|o| {
                check(o.len())?;
                RationalPoint::parse(o)
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = file
            .halfspaces
            .iter()
            .map(|h| {
                check(h.a.len())?;
                Halfspace::new(h.a.clone(), parse_rational(&h.b)?)
            })
            .collect::<Result<Vec<_>>>()?;
        check(file.witness.len())?;
        let witness = RationalPoint::parse(&file.witness)?;
        let system = HalfspaceSystem::new(d, rows)?;
        Self::new(
            file.name.clone(),
            OffsetSet::new(offsets)?,
            PolytopeSpec::new(system, witness)?,
        )
    }

    pub fn to_file_data(&self) -> InstanceFile {
        InstanceFile {
            name: self.name.clone(),
            d: self.dim(),
            offsets: self.offsets.iter().map(RationalPoint::to_strings).collect(),
            halfspaces: self
                .polytope
                .system()
                .rows()
                .iter()
                .map(|r| HalfspaceJson {
                    a: r.a.clone(),
                    b: r.b.to_string(),
                })
                .collect(),
            witness: self.polytope.witness().to_strings(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        Self::from_file_data(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file_data()).expect("instance serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = r#"{
        "name": "triangle",
        "d": 2,
        "offsets": [["0", "0"]],
        "halfspaces": [{"a": [-1, 0], "b": "0"}, {"a": [0, -1], "b": "0"}, {"a": [1, 1], "b": "1"}],
        "witness": ["1/4", "1/4"]
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let inst = ModelInstance::from_json(TRIANGLE).unwrap();
        assert_eq!(inst.dim(), 2);
        assert_eq!(inst.name.as_deref(), Some("triangle"));
        let again = ModelInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn rational_strings_are_exact() {
        let text = r#"{"d": 1, "offsets": [["0"], ["1/3"]],
            "halfspaces": [{"a": [3], "b": "7/5"}, {"a": [-1], "b": "-1/7"}],
            "witness": ["2/7"]}"#;
        let inst = ModelInstance::from_json(text).unwrap();
        let out = inst.to_file_data();
        assert_eq!(
            out.offsets,
            vec![vec!["0".to_string()], vec!["1/3".to_string()]]
        );
        // 3x <= 7/5 is stored with a primitive normal.
        assert_eq!(out.halfspaces[0].a, vec![1]);
        assert_eq!(out.halfspaces[0].b, "7/15");
        assert_eq!(out.halfspaces[1].b, "-1/7");
        assert_eq!(out.witness, vec!["2/7".to_string()]);
        assert_eq!(out.name, None);
    }

    #[test]
    fn rejects_bad_files() {
        let wrong_dim = TRIANGLE.replace(r#""witness": ["1/4", "1/4"]"#, r#""witness": ["1/4"]"#);
        assert!(ModelInstance::from_json(&wrong_dim).is_err());
        let bad_witness = TRIANGLE.replace(r#"["1/4", "1/4"]"#, r#"["1", "0"]"#);
        assert!(matches!(
            ModelInstance::from_json(&bad_witness),
            Err(Error::BadWitness(_))
        ));
        let bad_num = TRIANGLE.replace(r#""1/4""#, r#""x""#);
        assert!(matches!(
            ModelInstance::from_json(&bad_num),
            Err(Error::Parse(_))
        ));
        assert!(ModelInstance::from_json("{}").is_err());
    }
}
