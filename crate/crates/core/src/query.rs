//! JSON query dispatcher shared by the command line and the fixture replay.
//!
//! A query is an object with an `"op"` field and the operation's arguments.
//! The answer carries the schema tag and a `positive` flag that the command
//! line turns into its exit status.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::isometry::{bkt_refined_check, certify_isometry, counterexample_operator, kset_conditions, KSetReading};
use crate::linalg::{Functional, Matrix, Vector};
use crate::ortho::{in_x_minus, in_x_plus, is_orthogonal, oracle_is_orthogonal, LineSearch};
use crate::preserve::{
    bijectivity_check, cone_image_analysis, exists_preserved_direction, find_codim2_subspace, kernel_image_equals,
    kernel_image_within, preserves_at_point, preserves_in_direction, preserves_wrt_kernel, preserves_wrt_subspace,
    smoothness_monotonicity_check,
};
use crate::report::{
    parse_functional, parse_matrix, parse_scalar, parse_space, parse_vector, parse_vector_f64, parse_vectors,
    space_json, tagged, ToJson,
};
use crate::sampling::DEFAULT_SEED;
use crate::scalar::Rational;
use crate::search::Searchable;
use crate::space::{NormedSpace, Space};
use crate::support::{cones_of_face, support_face};

/// The answer to a query.
#[derive(Clone, Debug, PartialEq)]
pub struct Answer {
    pub value: Value,
    pub positive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Context {
    pub seed: u64,
}

impl Default for Context {
    fn default() -> Self {
        Context { seed: DEFAULT_SEED }
    }
}

/// Moves exact inputs into the scalar field of a space.
trait Lift: Searchable + ToJson {
    fn lift_vector(v: Vector) -> Vector<Self>;
    fn lift_matrix(m: &Matrix) -> Matrix<Self>;
}

impl Lift for Rational {
    fn lift_vector(v: Vector) -> Vector {
        v
    }

    fn lift_matrix(m: &Matrix) -> Matrix {
        m.clone()
    }
}

impl Lift for f64 {
    fn lift_vector(v: Vector) -> Vector<f64> {
        v.to_f64()
    }

    fn lift_matrix(m: &Matrix) -> Matrix<f64> {
        m.to_f64()
    }
}

struct Args<'a> {
    map: &'a Map<String, Value>,
}

impl<'a> Args<'a> {
    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn req(&self, key: &str) -> Result<&'a Value> {
        self.get(key).ok_or_else(|| Error::Parse(format!("missing argument {key:?}")))
    }

    fn str(&self, key: &str) -> Result<Option<&'a str>> {
        self.get(key)
            .map(|v| v.as_str().ok_or_else(|| Error::Parse(format!("{key:?} must be a string"))))
            .transpose()
    }

    fn flag(&self, key: &str) -> bool {
        self.get(key).and_then(Value::as_bool).unwrap_or(false)
    }

    fn space(&self, key: &str) -> Result<NormedSpace> {
        parse_space(self.req(key)?)
    }

    fn vector(&self, key: &str) -> Result<Vector> {
        parse_vector(self.req(key)?)
    }

    fn functional(&self, key: &str) -> Result<Functional> {
        parse_functional(self.req(key)?)
    }

    fn matrix(&self) -> Result<Matrix> {
        parse_matrix(self.req("operator")?)
    }

    fn usize(&self, key: &str) -> Result<usize> {
        let v = self.req(key)?;
        match v {
            Value::String(s) => s.trim().parse().ok(),
            _ => v.as_u64().map(|n| n as usize),
        }
        .ok_or_else(|| Error::Parse(format!("{key:?} must be a non-negative integer")))
    }
}

fn answer(value: Value, positive: bool) -> Answer {
    Answer { value: tagged(value), positive }
}

/// Runs one query.
pub fn run_query(query: &Value, ctx: &Context) -> Result<Answer> {
    let map = query.as_object().ok_or_else(|| Error::Parse("query must be an object".into()))?;
    let args = Args { map };
    let op = args.str("op")?.ok_or_else(|| Error::Parse("missing argument \"op\"".into()))?;
    match op {
        "ortho" => on_space(&args, "space", |s, a| ortho(s, a), |s, a| ortho(s, a)),
        "sides" => on_space(&args, "space", |s, a| sides(s, a), |s, a| sides(s, a)),
        "support" | "smooth" | "cones" => {
            on_space(&args, "space", |s, a| support_op(s, a, op), |s, a| support_op(s, a, op))
        }
        "preserve" => preserve(&args),
        "codim2" => preserve_extra(&args, "codim2"),
        "monotonicity" => preserve_extra(&args, "monotonicity"),
        "bijectivity" => preserve_extra(&args, "bijectivity"),
        "cone_image" => cone_image(&args, ctx),
        "kernel_image" => kernel_image(&args),
        "operator" => operator_info(&args),
        "isometry" => isometry(&args),
        "kset" => kset(&args),
        "counterexample" => counterexample(&args),
        other => Err(Error::Parse(format!("unknown op {other:?}"))),
    }
}

fn on_space(
    args: &Args,
    key: &str,
    exact: impl FnOnce(&crate::space::PolyhedralSpace, &Args) -> Result<Answer>,
    float: impl FnOnce(&crate::space::LpSpace, &Args) -> Result<Answer>,
) -> Result<Answer> {
    match args.space(key)? {
        NormedSpace::Polyhedral(s) => exact(&s, args),
        NormedSpace::Lp(s) => float(&s, args),
    }
}

fn ortho<Sp, F>(space: &Sp, args: &Args) -> Result<Answer>
where
    Sp: LineSearch<S = F>,
    F: Lift,
{
    let x = F::lift_vector(args.vector("x")?);
    let y = F::lift_vector(args.vector("y")?);
    let method = args.str("method")?.unwrap_or("char");
    let run_char = matches!(method, "char" | "both");
    let run_oracle = matches!(method, "oracle" | "both");
    if !run_char && !run_oracle {
        return Err(Error::Parse(format!("unknown method {method:?}")));
    }
    let mut out = Map::new();
    let mut verdict = None;
    if run_char {
        let r = is_orthogonal(space, &x, &y)?;
        verdict = Some(r.is_orthogonal());
        if let Value::Object(m) = r.to_json() {
            out.extend(m);
        }
    }
    if run_oracle {
        let o = oracle_is_orthogonal(space, &x, &y)?;
        out.insert(
            "oracle".into(),
            json!({"orthogonal": o.orthogonal, "lambda": o.minimum.lambda.to_json(), "norm": o.minimum.value.to_json()}),
        );
        match verdict {
            Some(v) if v != o.orthogonal => return Err(Error::MethodDisagreement),
            Some(_) => {
                out.insert("methods_agree".into(), json!(true));
            }
            None => {
                out.insert("orthogonal".into(), json!(o.orthogonal));
                verdict = Some(o.orthogonal);
            }
        }
    }
    let v = verdict.expect("some method ran");
    Ok(answer(Value::Object(out), v))
}

fn sides<Sp, F>(space: &Sp, args: &Args) -> Result<Answer>
where
    Sp: LineSearch<S = F>,
    F: Lift,
{
    let x = F::lift_vector(args.vector("x")?);
    let y = F::lift_vector(args.vector("y")?);
    let plus = in_x_plus(space, &x, &y)?;
    let minus = in_x_minus(space, &x, &y)?;
    let both = plus.member && minus.member;
    Ok(answer(json!({"plus": plus.to_json(), "minus": minus.to_json(), "orthogonal": both}), both))
}

fn support_op<Sp, F>(space: &Sp, args: &Args, op: &str) -> Result<Answer>
where
    Sp: LineSearch<S = F>,
    F: Lift,
{
    let x = F::lift_vector(args.vector("x")?);
    let face = support_face(space, &x)?;
    let value = match op {
        "support" => face.to_json(),
        "smooth" => json!({"k": face.smoothness_order, "smooth": face.is_smooth()}),
        _ => {
            let cones = cones_of_face(&face);
            json!({"count": cones.len(), "cones": cones.iter().map(ToJson::to_json).collect::<Vec<_>>()})
        }
    };
    Ok(answer(value, true))
}

fn codomain(args: &Args) -> Result<NormedSpace> {
    match args.get("codomain") {
        Some(c) => parse_space(c),
        None => args.space("space"),
    }
}

fn with_pair(
    args: &Args,
    exact: impl FnOnce(&crate::space::PolyhedralSpace, &crate::space::PolyhedralSpace) -> Result<Answer>,
    float: impl FnOnce(&crate::space::LpSpace, &crate::space::LpSpace) -> Result<Answer>,
) -> Result<Answer> {
    match (args.space("space")?, codomain(args)?) {
        (NormedSpace::Polyhedral(a), NormedSpace::Polyhedral(b)) => exact(&a, &b),
        (NormedSpace::Lp(a), NormedSpace::Lp(b)) => float(&a, &b),
        (a, b) => Err(Error::UnsupportedSpace(format!("{} -> {}", a.label(), b.label()))),
    }
}

fn preserve(args: &Args) -> Result<Answer> {
    with_pair(args, |a, b| preserve_generic(a, b, args), |a, b| preserve_generic(a, b, args))
}

fn mode_of(args: &Args) -> Result<&'static str> {
    let mut found = Vec::new();
    for (key, name) in [("y", "direction"), ("kernel", "kernel"), ("subspace", "subspace")] {
        if args.get(key).is_some() {
            found.push(name);
        }
    }
    match args.str("mode")? {
        Some("exists") => found.push("exists"),
        Some("at_point") => found.push("at_point"),
        Some(m) if ["direction", "kernel", "subspace"].contains(&m) => {}
        Some(m) => return Err(Error::Parse(format!("unknown mode {m:?}"))),
        None => {}
    }
    match found.as_slice() {
        [one] => Ok(one),
        [] => Err(Error::Parse("no preservation mode given".into())),
        _ => Err(Error::Parse("exactly one preservation mode is allowed".into())),
    }
}

fn preserve_generic<X, Y, F>(sx: &X, sy: &Y, args: &Args) -> Result<Answer>
where
    X: LineSearch<S = F>,
    Y: LineSearch<S = F>,
    F: Lift,
{
    let t = F::lift_matrix(&args.matrix()?);
    let x = F::lift_vector(args.vector("x")?);
    let report = match mode_of(args)? {
        "direction" => preserves_in_direction(sx, sy, &t, &x, &F::lift_vector(args.vector("y")?))?,
        "kernel" => {
            let f = F::lift_vector(args.vector("kernel")?).as_functional();
            preserves_wrt_kernel(sx, sy, &t, &x, &f)?
        }
        "subspace" => {
            let basis: Vec<Vector<F>> =
                parse_vectors(args.req("subspace")?)?.into_iter().map(F::lift_vector).collect();
            preserves_wrt_subspace(sx, sy, &t, &x, &basis)?
        }
        "exists" => exists_preserved_direction(sx, sy, &t, &x)?,
        _ => preserves_at_point(sx, sy, &t, &x)?,
    };
    Ok(answer(report.to_json(), report.verdict))
}

fn preserve_extra(args: &Args, op: &'static str) -> Result<Answer> {
    with_pair(args, |a, b| extra_generic(a, b, args, op), |a, b| extra_generic(a, b, args, op))
}

fn extra_generic<X, Y, F>(sx: &X, sy: &Y, args: &Args, op: &str) -> Result<Answer>
where
    X: LineSearch<S = F>,
    Y: LineSearch<S = F>,
    F: Lift,
{
    let t = F::lift_matrix(&args.matrix()?);
    let x = F::lift_vector(args.vector("x")?);
    let kernels = || -> Result<Vec<Functional<F>>> {
        Ok(parse_vectors(args.req("kernels")?)?.into_iter().map(|v| F::lift_vector(v).as_functional()).collect())
    };
    match op {
        "codim2" => {
            let sub = find_codim2_subspace(sx, sy, &t, &x)?;
            let verified = preserves_wrt_subspace(sx, sy, &t, &x, &sub.basis)?.verdict;
            Ok(answer(
                json!({
                    "basis": sub.basis.to_json(),
                    "f": sub.f.to_json(),
                    "g": sub.g.to_json(),
                    "codimension": sx.dim() - sub.basis.len(),
                    "preserved": verified,
                }),
                verified,
            ))
        }
        "monotonicity" => {
            let r = smoothness_monotonicity_check(sx, sy, &t, &x, &kernels()?)?;
            Ok(answer(json!({"k": r.k, "p": r.p, "holds": r.holds}), r.holds))
        }
        _ => {
            let r = bijectivity_check(sx, sy, &t, &x, &kernels()?)?;
            Ok(answer(
                json!({"tx_zero": r.tx_zero, "determinant": r.determinant.to_json(), "holds": r.holds}),
                r.holds,
            ))
        }
    }
}

fn polyhedral(space: NormedSpace) -> Result<crate::space::PolyhedralSpace> {
    match space {
        NormedSpace::Polyhedral(s) => Ok(s),
        NormedSpace::Lp(_) => Err(Error::NotPolyhedral),
    }
}

fn cone_image(args: &Args, ctx: &Context) -> Result<Answer> {
    let sx = polyhedral(args.space("space")?)?;
    let sy = polyhedral(codomain(args)?)?;
    let samples = args.get("samples").map(|_| args.usize("samples")).transpose()?.unwrap_or(24);
    let r = cone_image_analysis(&sx, &sy, &args.matrix()?, &args.vector("x")?, samples, ctx.seed)?;
    let per_cone: Vec<Value> = r
        .per_cone
        .iter()
        .map(|c| {
            json!({
                "cone": c.cone.to_json(),
                "samples": c.samples,
                "all_in_perp": c.all_in_perp,
                "common_cones": c.common_cones,
                "sign_consistent": c.sign_consistent,
            })
        })
        .collect();
    let kernels: Vec<Value> = r
        .kernels
        .iter()
        .map(|k| json!({"f": k.f.to_json(), "into": k.into.to_json(), "onto": k.onto.to_json()}))
        .collect();
    let consistent = r.consistent();
    Ok(answer(
        json!({
            "image_cones": r.image_cones.iter().map(ToJson::to_json).collect::<Vec<_>>(),
            "per_cone": per_cone,
            "kernels": kernels,
            "preserves_at_point": r.preserves_at_point,
            "perp_onto": r.perp_onto,
            "single_cone": r.single_cone,
            "consistent": consistent,
        }),
        consistent,
    ))
}

fn kernel_image(args: &Args) -> Result<Answer> {
    let t = args.matrix()?;
    let f = args.functional("f")?;
    let g = args.functional("g")?;
    let equal = kernel_image_equals(&t, &f, &g)?;
    let within = kernel_image_within(&t, &f, &g)?;
    Ok(answer(json!({"equal": equal, "within": within}), equal))
}

fn operator_info(args: &Args) -> Result<Answer> {
    let t = args.matrix()?;
    let mut out = Map::new();
    out.insert("rows".into(), json!(t.rows()));
    out.insert("cols".into(), json!(t.cols()));
    out.insert("rank".into(), json!(t.rank()));
    if t.is_square() {
        out.insert("determinant".into(), t.determinant()?.to_json());
    }
    if args.get("x").is_some() {
        out.insert("image".into(), t.apply(&args.vector("x")?)?.to_json());
    }
    let bijective = t.is_square() && t.rank() == t.rows();
    out.insert("bijective".into(), json!(bijective));
    Ok(answer(Value::Object(out), bijective))
}

fn isometry(args: &Args) -> Result<Answer> {
    let space = args.space("space")?;
    let t = args.matrix()?;
    let cert = if args.flag("bkt") { bkt_refined_check(&space, &t)? } else { certify_isometry(&space, &t)? };
    let mut value = cert.to_json();
    value["space"] = space_json(&space);
    Ok(answer(value, cert.is_positive()))
}

fn kset(args: &Args) -> Result<Answer> {
    let space = match args.space("space")? {
        NormedSpace::Lp(s) => s,
        other => return Err(Error::UnsupportedSpace(other.label())),
    };
    let raw = args.req("set")?;
    let rows: Vec<Vector<f64>> = match raw {
        Value::String(s) => s
            .split(';')
            .filter(|r| !r.trim().is_empty())
            .map(|r| parse_vector_f64(&Value::String(r.to_string())))
            .collect::<Result<_>>()?,
        Value::Array(items) => items.iter().map(parse_vector_f64).collect::<Result<_>>()?,
        _ => return Err(Error::Parse("set must be a list of vectors".into())),
    };
    let rows: Vec<Vector<f64>> = if args.flag("normalize") {
        rows.into_iter()
            .map(|v| {
                let n = space.norm(&v);
                if n == 0.0 {
                    Err(Error::ZeroVector)
                } else {
                    Ok(v.scale(&(1.0 / n)))
                }
            })
            .collect::<Result<_>>()?
    } else {
        rows
    };
    let reading = match args.str("reading")?.unwrap_or("strong") {
        "strong" => KSetReading::Strong,
        "weak" => KSetReading::Weak,
        other => return Err(Error::Parse(format!("unknown reading {other:?}"))),
    };
    let q = kset_conditions(&space, &rows, reading)?;
    Ok(answer(q.to_json(), q.both()))
}

fn counterexample(args: &Args) -> Result<Answer> {
    let p = parse_scalar(args.req("p")?)?;
    let n = args.usize("n")?;
    let ce = counterexample_operator(&p, n)?;
    let ok = ce.preserves_on_set() && ce.not_isometry_multiple();
    Ok(answer(ce.to_json(), ok))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(q: Value) -> Result<Answer> {
        run_query(&q, &Context::default())
    }

    #[test]
    fn ortho_pair_certificate() {
        let a = run(json!({"op": "ortho", "space": {"kind": "linf", "dim": 2}, "x": [1, 1], "y": [-1, 1]})).unwrap();
        assert!(a.positive);
        assert_eq!(a.value["certificate"]["pair"], json!([[1, 0], [0, 1]]));
        assert_eq!(a.value["certificate"]["alpha"], json!("1/2"));
        assert_eq!(a.value["schema"], json!("bjgeo/1"));
    }

    #[test]
    fn ortho_methods_agree_on_l1() {
        let a = run(json!({"op": "ortho", "space": {"kind": "l1", "dim": 3}, "x": "1,0,0", "y": "2,1,-1", "method": "both"}))
            .unwrap();
        assert!(a.positive);
        assert_eq!(a.value["methods_agree"], json!(true));
    }

    #[test]
    fn errors_and_modes() {
        let e = run(json!({"op": "ortho", "space": {"kind": "linf", "dim": 2}, "x": [0, 0], "y": [1, 0]})).unwrap_err();
        assert_eq!(e, Error::ZeroVector);
        let q = json!({"op": "preserve", "space": {"kind": "linf", "dim": 2}, "operator": "1,0;0,1", "x": [1, 0],
                       "y": [0, 1], "mode": "exists"});
        assert!(matches!(run(q), Err(Error::Parse(_))));
    }

    #[test]
    fn lp_support_is_a_singleton() {
        let a = run(json!({"op": "support", "space": {"kind": "lp", "dim": 2, "p": "3"}, "x": [1, 1]})).unwrap();
        assert_eq!(a.value["functionals"].as_array().unwrap().len(), 1);
        assert_eq!(a.value["k"], json!(1));
    }
}
