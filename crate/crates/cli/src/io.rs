//! JSON instance files and the lossless JSON/CSV renderings of results.
//!
//! Rationals are written as `"p/q"` strings (integers as `"p"`). On input,
//! both rational strings and finite decimal strings are accepted, as are
//! plain JSON numbers (converted from their decimal text, never via floats).

use std::fmt::Write as _;

use anyhow::{anyhow, Context};
use isc_core::coupling::{Coupling, VerificationReport};
use isc_core::curves::SupportTriple;
use isc_core::num::parse_rational;
use isc_core::regime::{Component, IrreducibleDecomposition};
use isc_core::{DiscreteMeasure, Ext, Rational};
use serde::Deserialize;
use serde_json::{json, Value};

/// A scalar as it may appear in an instance file.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Text(String),
    Number(serde_json::Number),
}

impl Scalar {
    fn to_rational(&self) -> isc_core::Result<Rational> {
        match self {
            Scalar::Text(s) => parse_rational(s),
            Scalar::Number(n) => parse_rational(&n.to_string()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct AtomFile {
    pub x: Scalar,
    pub w: Scalar,
}

#[derive(Clone, Debug, Deserialize)]
pub struct InstanceFile {
    pub mu: Vec<AtomFile>,
    pub nu: Vec<AtomFile>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub mu: DiscreteMeasure,
    pub nu: DiscreteMeasure,
}

fn measure_from(atoms: &[AtomFile], name: &str) -> anyhow::Result<DiscreteMeasure> {
    let mut out = Vec::with_capacity(atoms.len());
    for (i, a) in atoms.iter().enumerate() {
        let x = a.x.to_rational().with_context(|| format!("{name}[{i}].x"))?;
        let w = a.w.to_rational().with_context(|| format!("{name}[{i}].w"))?;
        if w <= Rational::from_integer(0.into()) {
            return Err(anyhow!(isc_core::Error::Parse(format!("{name}[{i}].w must be positive, got {w}"))));
        }
        out.push((x, w));
    }
    Ok(DiscreteMeasure::new(out)?)
}

impl Instance {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)
            .map_err(|e| isc_core::Error::Parse(format!("instance file: {e}")))?;
        Ok(Self { mu: measure_from(&file.mu, "mu")?, nu: measure_from(&file.nu, "nu")? })
    }

    pub fn to_json(&self) -> Value {
        json!({ "mu": measure_json(&self.mu), "nu": measure_json(&self.nu) })
    }
}

pub fn rational(r: &Rational) -> Value {
    Value::String(r.to_string())
}

pub fn optional(r: &Option<Rational>) -> Value {
    r.as_ref().map_or(Value::Null, rational)
}

pub fn extended(e: &Ext) -> Value {
    Value::String(e.to_string())
}

pub fn measure_json(m: &DiscreteMeasure) -> Value {
    Value::Array(m.atoms().iter().map(|(x, w)| json!({ "x": rational(x), "w": rational(w) })).collect())
}

pub fn coupling_json(pi: &Coupling) -> Value {
    Value::Array(
        pi.rows
            .iter()
            .map(|r| json!({ "x": rational(&r.x), "w": rational(&r.weight), "conditional": measure_json(&r.conditional) }))
            .collect(),
    )
}

/// Parses either the `couple` output shape (rows with conditionals) or a
/// flat list of joint masses `{x, y, p}`.
pub fn parse_coupling(text: &str) -> anyhow::Result<Coupling> {
    let value: Value = serde_json::from_str(text).map_err(|e| isc_core::Error::Parse(format!("coupling file: {e}")))?;
    let rows = value.get("coupling").unwrap_or(&value);
    let rows = rows.as_array().ok_or_else(|| isc_core::Error::Parse("coupling must be a JSON array".into()))?;
    let field = |v: &Value, key: &str| -> anyhow::Result<Rational> {
        let s: Scalar = serde_json::from_value(v.get(key).cloned().unwrap_or(Value::Null))
            .map_err(|_| isc_core::Error::Parse(format!("missing or malformed field {key:?}")))?;
        Ok(s.to_rational()?)
    };
    let mut joint = Vec::new();
    for row in rows {
        if let Some(cond) = row.get("conditional").and_then(Value::as_array) {
            let (x, w) = (field(row, "x")?, field(row, "w")?);
            for atom in cond {
                joint.push((x.clone(), field(atom, "x")?, &w * field(atom, "w")?));
            }
        } else {
            joint.push((field(row, "x")?, field(row, "y")?, field(row, "p")?));
        }
    }
    Ok(Coupling::from_joint(joint)?)
}

pub fn report_json(report: &VerificationReport) -> Value {
    let mut map = serde_json::Map::new();
    for (name, check) in report.checks() {
        map.insert(name.to_string(), json!({ "ok": check.ok, "witness": check.witness }));
    }
    map.insert("all_ok".into(), Value::Bool(report.all_ok()));
    Value::Object(map)
}

fn component_json(c: &Component) -> Value {
    json!({
        "left": extended(&c.left),
        "right": extended(&c.right),
        "mu": measure_json(&c.mu),
        "nu": measure_json(&c.nu),
        "alpha": rational(&c.alpha),
        "beta": rational(&c.beta),
    })
}

pub fn decomposition_json(d: &IrreducibleDecomposition) -> Value {
    json!({
        "x_star": extended(&d.x_star),
        "supermartingale": d.supermartingale.as_ref().map_or(Value::Null, component_json),
        "martingale": d.martingale.iter().map(component_json).collect::<Vec<_>>(),
        "fixed_part": measure_json(&d.fixed_part),
    })
}

pub fn triple_json(t: &SupportTriple) -> Value {
    json!({
        "u": rational(&t.u),
        "region": t.region.as_str(),
        "G": rational(&t.g),
        "R": optional(&t.r),
        "S": optional(&t.s),
        "T": optional(&t.t),
        "phi": optional(&t.phi),
    })
}

pub const CSV_HEADER: &str = "u,region,G,R,S,T,phi";

pub fn triples_csv(triples: &[SupportTriple]) -> String {
    let cell = |r: &Option<Rational>| r.as_ref().map(ToString::to_string).unwrap_or_default();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for t in triples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            t.u,
            t.region.as_str(),
            t.g,
            cell(&t.r),
            cell(&t.s),
            cell(&t.t),
            cell(&t.phi)
        );
    }
    out
}
