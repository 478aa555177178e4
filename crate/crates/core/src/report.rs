//! JSON encoding of results and decoding of inputs.
//!
//! Rationals are written as JSON integers when integral and as `"p/q"`
//! strings otherwise, so exact values never pass through `f64`.

use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::isometry::{
    Counterexample, CounterexampleOperator, FailedCondition, IsometryCertificate, KSetQuery, KSetReading,
    VertexEvidence,
};
use crate::linalg::{Functional, Matrix, Vector};
use crate::ortho::{OrthoCertificate, OrthoRefutation, OrthoResult, SideResult};
use crate::preserve::{KernelCheck, Mode, PreservationReport, Violation, Witness};
use crate::scalar::{format_rational, parse_rational, Field, Rational};
use crate::space::{make_space, NormedSpace, PolyKind, SpaceKind};
use crate::support::{AssociatedCone, SupportFace};

pub const SCHEMA: &str = "bjgeo/1";

pub trait ToJson {
    fn to_json(&self) -> Value;
}

impl ToJson for Rational {
    fn to_json(&self) -> Value {
        if self.is_integer() {
            if let Some(i) = self.numer().to_i64() {
                return json!(i);
            }
        }
        Value::String(format_rational(self))
    }
}

impl ToJson for f64 {
    fn to_json(&self) -> Value {
        json!(self)
    }
}

impl ToJson for bool {
    fn to_json(&self) -> Value {
        Value::Bool(*self)
    }
}

impl<T: ToJson> ToJson for Vec<T> {
    fn to_json(&self) -> Value {
        Value::Array(self.iter().map(ToJson::to_json).collect())
    }
}

impl<T: ToJson> ToJson for Option<T> {
    fn to_json(&self) -> Value {
        self.as_ref().map_or(Value::Null, ToJson::to_json)
    }
}

impl<S: ToJson + Field> ToJson for Vector<S> {
    fn to_json(&self) -> Value {
        Value::Array(self.coords().iter().map(ToJson::to_json).collect())
    }
}

impl<S: ToJson + Field> ToJson for Functional<S> {
    fn to_json(&self) -> Value {
        Value::Array(self.coeffs().iter().map(ToJson::to_json).collect())
    }
}

impl<S: ToJson + Field> ToJson for Matrix<S> {
    fn to_json(&self) -> Value {
        Value::Array((0..self.rows()).map(|i| Value::Array(self.row(i).iter().map(ToJson::to_json).collect())).collect())
    }
}

impl<S: ToJson + Field> ToJson for OrthoCertificate<S> {
    fn to_json(&self) -> Value {
        match self {
            OrthoCertificate::SingleFunctional { f, value } => {
                json!({"kind": "single", "f": f.to_json(), "value": value.to_json()})
            }
            OrthoCertificate::ConvexPair { phi1, phi2, alpha } => {
                json!({"kind": "pair", "pair": [phi1.to_json(), phi2.to_json()], "alpha": alpha.to_json()})
            }
        }
    }
}

impl<S: ToJson + Field> ToJson for OrthoRefutation<S> {
    fn to_json(&self) -> Value {
        json!({"lambda": self.lambda_star.to_json(), "norm": self.achieved_norm.to_json()})
    }
}

impl<S: ToJson + Field> ToJson for OrthoResult<S> {
    fn to_json(&self) -> Value {
        json!({
            "orthogonal": self.is_orthogonal(),
            "certificate": self.certificate().map_or(Value::Null, ToJson::to_json),
            "refutation": self.refutation().map_or(Value::Null, ToJson::to_json),
            "value_range": [self.value_range.0.to_json(), self.value_range.1.to_json()],
        })
    }
}

impl<S: ToJson + Field> ToJson for SideResult<S> {
    fn to_json(&self) -> Value {
        json!({"member": self.member, "witness": self.witness.to_json(), "value": self.value.to_json()})
    }
}

impl<S: ToJson + Field> ToJson for SupportFace<S> {
    fn to_json(&self) -> Value {
        json!({
            "x": self.base_point.to_json(),
            "functionals": self.extreme_functionals.to_json(),
            "k": self.smoothness_order,
            "smooth": self.is_smooth(),
        })
    }
}

impl<S: ToJson + Field> ToJson for AssociatedCone<S> {
    fn to_json(&self) -> Value {
        json!([self.i_functional.to_json(), self.j_functional.to_json()])
    }
}

impl<S: ToJson + Field> ToJson for Mode<S> {
    fn to_json(&self) -> Value {
        let arg = match self {
            Mode::InDirection(y) => y.to_json(),
            Mode::WrtKernel(f) => f.to_json(),
            Mode::WrtSubspace(b) => Value::Array(b.iter().map(ToJson::to_json).collect()),
            Mode::AtPoint | Mode::ExistsDirection => Value::Null,
        };
        json!({"name": self.name(), "argument": arg})
    }
}

impl<S: ToJson + Field> ToJson for KernelCheck<S> {
    fn to_json(&self) -> Value {
        json!({
            "f": self.f.to_json(),
            "verdict": self.verdict,
            "g": self.g.as_ref().map_or(Value::Null, ToJson::to_json),
            "violating_y": self.violating_y.as_ref().map_or(Value::Null, ToJson::to_json),
        })
    }
}

impl<S: ToJson + Field> ToJson for Violation<S> {
    fn to_json(&self) -> Value {
        json!({"y": self.y.to_json(), "ty": self.ty.to_json(), "refutation": self.refutation.to_json()})
    }
}

impl<S: ToJson + Field> ToJson for Witness<S> {
    fn to_json(&self) -> Value {
        match self {
            Witness::Vacuous => json!({"kind": "vacuous"}),
            Witness::Direction { y, certificate } => {
                json!({"kind": "direction", "y": y.to_json(), "certificate": certificate.to_json()})
            }
            Witness::Functional { g, generators, weights } => json!({
                "kind": "functional",
                "g": g.to_json(),
                "generators": Value::Array(generators.iter().map(ToJson::to_json).collect()),
                "weights": Value::Array(weights.iter().map(ToJson::to_json).collect()),
            }),
            Witness::Kernels => json!({"kind": "kernels"}),
        }
    }
}

impl<S: ToJson + Field> ToJson for PreservationReport<S> {
    fn to_json(&self) -> Value {
        let mut out = Map::new();
        out.insert("mode".into(), self.mode.to_json());
        out.insert("verdict".into(), json!(self.verdict));
        out.insert("witness".into(), self.witness.as_ref().map_or(Value::Null, ToJson::to_json));
        if let Some(Witness::Functional { g, .. }) = &self.witness {
            out.insert("witness_g".into(), g.to_json());
        }
        if let Some(Witness::Direction { y, .. }) = &self.witness {
            out.insert("witness_y".into(), y.to_json());
        }
        if let Some(v) = &self.violation {
            out.insert("violating_y".into(), v.y.to_json());
            out.insert("violation".into(), v.to_json());
        } else {
            out.insert("violating_y".into(), Value::Null);
        }
        out.insert("kernels".into(), Value::Array(self.kernels.iter().map(ToJson::to_json).collect()));
        if let Some(c) = self.criterion {
            out.insert("criterion".into(), json!(c));
            out.insert("criterion_agrees".into(), json!(c == self.verdict));
        }
        if matches!(self.mode, Mode::ExistsDirection) {
            out.insert("cone_pairs_checked".into(), json!(self.cone_pairs_checked));
            if let Some((v, w)) = &self.witness_cones {
                out.insert("witness_cones".into(), json!([v.to_json(), w.to_json()]));
            }
        }
        if self.spot_checks > 0 {
            out.insert("spot_checks".into(), json!(self.spot_checks));
            out.insert("spot_check_failures".into(), json!(self.spot_check_failures));
        }
        Value::Object(out)
    }
}

impl ToJson for Counterexample {
    fn to_json(&self) -> Value {
        let condition = match &self.condition {
            FailedCondition::EqualNorm { norm, expected } => {
                json!({"kind": "equal_norm", "norm": norm.to_json(), "expected": expected.to_json()})
            }
            FailedCondition::ZeroImage => json!({"kind": "zero_image"}),
            FailedCondition::Kernel { f, violating_y } => json!({
                "kind": "kernel",
                "f": f.to_json(),
                "violating_y": violating_y.as_ref().map_or(Value::Null, ToJson::to_json),
            }),
        };
        json!({"vertex": self.vertex.to_json(), "condition": condition})
    }
}

impl ToJson for VertexEvidence {
    fn to_json(&self) -> Value {
        json!({
            "vertex": self.vertex.to_json(),
            "image_norm": self.image_norm.to_json(),
            "selected": self.selected.to_json(),
            "kernels": Value::Array(self.kernels.iter().map(ToJson::to_json).collect()),
        })
    }
}

impl ToJson for IsometryCertificate {
    fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict.name(),
            "scale": self.verdict.scale().map_or(Value::Null, |c| c.to_json()),
            "counterexample": self.verdict.counterexample().map_or(Value::Null, ToJson::to_json),
            "permutes_vertices": self.permutes_vertices,
            "reverified": self.reverified,
            "evidence": Value::Array(self.evidence.iter().map(ToJson::to_json).collect()),
        })
    }
}

impl ToJson for KSetQuery {
    fn to_json(&self) -> Value {
        json!({
            "size": self.size,
            "reading": match self.reading { KSetReading::Strong => "strong", KSetReading::Weak => "weak" },
            "lin_indep_n": self.lin_indep_n,
            "no_orthogonal_partition": self.no_orthogonal_partition,
            "orthogonal_partition": self.orthogonal_partition.as_ref().map(|(a, b)| json!([a, b])),
            "partitions_checked": self.partitions_checked,
        })
    }
}

impl ToJson for CounterexampleOperator {
    fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "n": self.n,
            "operator": self.operator.to_json(),
            "set": self.set.to_json(),
            "checks": Value::Array(self.checks.iter().map(|c| json!({
                "point": c.point.to_json(),
                "preserved": c.preserved,
                "samples": c.samples,
                "sample_failures": c.sample_failures,
            })).collect()),
            "preserves_on_set": self.preserves_on_set(),
            "not_isometry_multiple": self.not_isometry_multiple(),
            "distinct_norms": self.distinct_norms.as_ref().map(|(u, v, a, b)| json!({
                "u": u.to_json(), "v": v.to_json(), "ratio_u": a, "ratio_v": b,
            })),
            "off_set_failure": self.off_set_failure.as_ref().map(ToJson::to_json),
        })
    }
}

/// The space as a `SpaceSpec` object.
pub fn space_json(space: &NormedSpace) -> Value {
    match space {
        NormedSpace::Polyhedral(s) => match s.kind() {
            PolyKind::Linf => json!({"kind": "linf", "dim": crate::space::Space::dim(s)}),
            PolyKind::L1 => json!({"kind": "l1", "dim": crate::space::Space::dim(s)}),
            PolyKind::General => json!({
                "kind": "poly",
                "dim": crate::space::Space::dim(s),
                "vertices": Value::Array(s.vertices().iter().map(|v| rational_strings(v.coords())).collect()),
            }),
        },
        NormedSpace::Lp(s) => json!({"kind": "lp", "dim": crate::space::Space::dim(s), "p": format_rational(s.p())}),
    }
}

fn rational_strings(values: &[Rational]) -> Value {
    Value::Array(values.iter().map(|r| Value::String(format_rational(r))).collect())
}

/// Adds the schema tag to an object.
pub fn tagged(mut value: Value) -> Value {
    if let Value::Object(map) = &mut value {
        map.insert("schema".into(), json!(SCHEMA));
    }
    value
}

pub fn error_json(e: &Error) -> Value {
    json!({"schema": SCHEMA, "error": e.code(), "message": e.to_string()})
}

// Decoding.

pub fn parse_scalar(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().expect("i64").into())),
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("expected a number, found {other}"))),
    }
}

pub fn parse_float(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}"))),
        Value::String(s) => match parse_rational(s) {
            Ok(r) => Ok(Field::to_f64(&r)),
            Err(_) => s.trim().parse().map_err(|_| Error::Parse(format!("bad number {s:?}"))),
        },
        other => Err(Error::Parse(format!("expected a number, found {other}"))),
    }
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("{what} must be an array")))
}

pub fn parse_vector(v: &Value) -> Result<Vector> {
    match v {
        Value::String(s) => parse_vector_text(s),
        _ => Ok(Vector::new(array(v, "vector")?.iter().map(parse_scalar).collect::<Result<_>>()?)),
    }
}

pub fn parse_vector_f64(v: &Value) -> Result<Vector<f64>> {
    match v {
        Value::String(s) => s.split(',').map(|c| parse_float(&Value::String(c.to_string()))).collect::<Result<_>>().map(Vector::new),
        _ => Ok(Vector::new(array(v, "vector")?.iter().map(parse_float).collect::<Result<_>>()?)),
    }
}

pub fn parse_functional(v: &Value) -> Result<Functional> {
    Ok(parse_vector(v)?.as_functional())
}

pub fn parse_vectors(v: &Value) -> Result<Vec<Vector>> {
    match v {
        Value::String(s) => s.split(';').filter(|r| !r.trim().is_empty()).map(parse_vector_text).collect(),
        _ => array(v, "vector list")?.iter().map(parse_vector).collect(),
    }
}

pub fn parse_matrix(v: &Value) -> Result<Matrix> {
    let rows = parse_vectors(v)?;
    Matrix::from_rows(rows.into_iter().map(Vector::into_coords).collect())
}

/// `"1,-2/3,0"`.
pub fn parse_vector_text(text: &str) -> Result<Vector> {
    let coords: Vec<Rational> = text.split(',').map(parse_rational).collect::<Result<_>>()?;
    Ok(Vector::new(coords))
}

/// `"1,0;0,1"`.
pub fn parse_matrix_text(text: &str) -> Result<Matrix> {
    parse_matrix(&Value::String(text.to_string()))
}

/// Decodes a `SpaceSpec` object.
pub fn parse_space(v: &Value) -> Result<NormedSpace> {
    let obj = v.as_object().ok_or_else(|| Error::Parse("space must be an object".into()))?;
    let kind = obj.get("kind").and_then(Value::as_str).ok_or_else(|| Error::Parse("space.kind missing".into()))?;
    let vertices = obj.get("vertices").map(parse_vectors).transpose()?;
    let facets = obj
        .get("facets")
        .map(|f| parse_vectors(f).map(|vs| vs.into_iter().map(|v| v.as_functional()).collect()))
        .transpose()?;
    let dim = match obj.get("dim") {
        Some(d) => d.as_u64().ok_or_else(|| Error::Parse("space.dim must be a non-negative integer".into()))? as usize,
        None => vertices
            .as_ref()
            .and_then(|v: &Vec<Vector>| v.first().map(Vector::dim))
            .or_else(|| facets.as_ref().and_then(|f: &Vec<Functional>| f.first().map(Functional::dim)))
            .ok_or_else(|| Error::Parse("space.dim missing".into()))?,
    };
    let p = obj.get("p").map(parse_scalar).transpose()?;
    let kind = match kind {
        "linf" => SpaceKind::Linf,
        "l1" => SpaceKind::L1,
        "lp" => SpaceKind::Lp,
        "poly" => SpaceKind::Polyhedral,
        other => return Err(Error::Parse(format!("unknown space kind {other:?}"))),
    };
    make_space(kind, dim, p, vertices, facets)
}
