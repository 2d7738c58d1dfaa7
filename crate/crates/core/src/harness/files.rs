//! JSON file formats. Numbers are written as `"num/den"` strings; on input
//! decimal strings and plain JSON integers are accepted too.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::model::{validate_instance, Assignment, Epsilon, Instance, MachineSpec, ModelError};
use crate::rational::{as_string, parse_rational, Rational};
use crate::variant::TypedInstance;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid instance: {0}")]
    Invalid(#[from] ModelError),
    #[error("invalid epsilon `{0}`; expected 1/E with an integer E >= 2")]
    Epsilon(String),
}

fn lenient<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Int(i64),
    }
    match Raw::deserialize(d)? {
        Raw::Text(t) => parse_rational(&t).map_err(serde::de::Error::custom),
        Raw::Int(i) => Ok(Rational::from_integer(i.into())),
    }
}

fn lenient_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
    #[derive(Deserialize)]
    struct Wrap(#[serde(deserialize_with = "lenient")] Rational);
    Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineRecord {
    #[serde(serialize_with = "as_string::serialize", deserialize_with = "lenient")]
    pub f: Rational,
    #[serde(serialize_with = "as_string::serialize", deserialize_with = "lenient")]
    pub c: Rational,
    #[serde(serialize_with = "as_string::serialize", deserialize_with = "lenient")]
    pub sigma: Rational,
}

impl From<&MachineSpec> for MachineRecord {
    fn from(m: &MachineSpec) -> Self {
        Self {
            f: m.fixed_cost.clone(),
            c: m.capacity.clone(),
            sigma: m.overtime_rate.clone(),
        }
    }
}

impl From<&MachineRecord> for MachineSpec {
    fn from(r: &MachineRecord) -> Self {
        MachineSpec::new(r.f.clone(), r.c.clone(), r.sigma.clone())
    }
}

pub fn parse_epsilon(text: &str) -> Result<Epsilon, FileError> {
    let value = parse_rational(text).map_err(|_| FileError::Epsilon(text.to_string()))?;
    Epsilon::from_rational(&value).map_err(|_| FileError::Epsilon(text.to_string()))
}

fn read_text(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|e| FileError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FileError> {
    fs::write(path, text).map_err(|e| FileError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    pub machines: Vec<MachineRecord>,
    #[serde(serialize_with = "as_string::vec::serialize", deserialize_with = "lenient_vec")]
    pub jobs: Vec<Rational>,
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance, eps: Option<Epsilon>) -> Self {
        Self {
            epsilon: eps.map(|e| e.to_string()),
            machines: instance.machines.iter().map(MachineRecord::from).collect(),
            jobs: instance.jobs.clone(),
        }
    }

    /// The instance, after checking `f = c * sigma` and the signs.
    pub fn to_instance(&self) -> Result<Instance, FileError> {
        let inst = Instance::new(self.machines.iter().map(MachineSpec::from).collect(), self.jobs.clone());
        validate_instance(&inst).into_result()?;
        Ok(inst)
    }

    pub fn epsilon(&self) -> Result<Option<Epsilon>, FileError> {
        self.epsilon.as_deref().map(parse_epsilon).transpose()
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, FileError> {
        Self::parse(&read_text(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypedInstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    pub types: Vec<MachineRecord>,
    #[serde(serialize_with = "as_string::vec::serialize", deserialize_with = "lenient_vec")]
    pub jobs: Vec<Rational>,
}

impl TypedInstanceFile {
    pub fn from_typed(typed: &TypedInstance, eps: Option<Epsilon>) -> Self {
        Self {
            epsilon: eps.map(|e| e.to_string()),
            types: typed.types.iter().map(MachineRecord::from).collect(),
            jobs: typed.jobs.clone(),
        }
    }

    pub fn to_typed(&self) -> Result<TypedInstance, FileError> {
        let typed = TypedInstance::new(self.types.iter().map(MachineSpec::from).collect(), self.jobs.clone());
        let probe = Instance::new(typed.types.clone(), typed.jobs.clone());
        validate_instance(&probe).into_result()?;
        Ok(typed)
    }

    pub fn epsilon(&self) -> Result<Option<Epsilon>, FileError> {
        self.epsilon.as_deref().map(parse_epsilon).transpose()
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, FileError> {
        Self::parse(&read_text(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub assignment: Vec<usize>,
    #[serde(serialize_with = "as_string::serialize", deserialize_with = "lenient")]
    pub cost: Rational,
    #[serde(default)]
    pub audit: serde_json::Value,
}

impl SolutionFile {
    pub fn assignment(&self) -> Assignment {
        Assignment::new(self.assignment.clone())
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, FileError> {
        Self::parse(&read_text(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenedRecord {
    #[serde(rename = "type")]
    pub type_index: usize,
    pub jobs: Vec<usize>,
    pub dedicated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantSolutionFile {
    pub machines: Vec<OpenedRecord>,
    /// Number of opened machines of each type.
    pub opened_per_type: Vec<usize>,
    #[serde(serialize_with = "as_string::serialize", deserialize_with = "lenient")]
    pub cost: Rational,
    #[serde(default)]
    pub audit: serde_json::Value,
}

impl VariantSolutionFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }
}
