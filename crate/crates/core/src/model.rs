//! JSON model and operator files.
//!
//! A model is `{"dimension": m, "periodic": [bool], "step": N, "fields":
//! [[poly; m]; n]}` with optional `"bounds"`, `"operators"` (name to
//! operator) and `"grids"` (name to list of points). A poly is a list of
//! terms `{"coeff": "p/q", "exponents": [..]}` or `{"coeff": "p/q",
//! "harmonics": [..], "phase": "sin" | "cos"}`. An operator is `{"terms":
//! [{"coeff": poly | {"re": poly, "im": poly}, "word": [1, 2, ..]}]}` with
//! 1-based generator indices.

use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::frame::{CPoly, Frame, Monomial, Phase, Point, Poly, PolyVF};
use crate::rational::{parse_q, Q};
use crate::symbols::NCPoly;

#[derive(Debug, Clone)]
pub struct ModelFile {
    pub frame: Frame,
    pub operators: BTreeMap<String, NCPoly>,
    pub grids: BTreeMap<String, Vec<Point>>,
}

fn err(path: &str, msg: impl Into<String>) -> Error {
    Error::model(path, msg)
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a serde_json::Map<String, Value>> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn field<'a>(o: &'a serde_json::Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    o.get(key).ok_or_else(|| err(path, format!("missing key \"{key}\"")))
}

fn positive(v: &Value, path: &str) -> Result<usize> {
    match v.as_u64() {
        Some(n) if n > 0 => Ok(n as usize),
        _ => Err(err(path, "expected a positive integer")),
    }
}

/// A rational written as a string `"p/q"` or as a JSON integer.
fn rational(v: &Value, path: &str) -> Result<Q> {
    match v {
        Value::String(s) => parse_q(s).map_err(|e| err(path, e.to_string())),
        Value::Number(n) if n.is_i64() => Ok(Q::from_integer(n.as_i64().unwrap_or(0).into())),
        Value::Number(n) => parse_q(&n.to_string()).map_err(|e| err(path, e.to_string())),
        _ => Err(err(path, "expected a rational literal")),
    }
}

fn int_list(v: &Value, len: usize, path: &str) -> Result<Vec<i64>> {
    let a = array(v, path)?;
    if a.len() != len {
        return Err(err(path, format!("expected {len} entries, found {}", a.len())));
    }
    a.iter()
        .enumerate()
        .map(|(i, x)| x.as_i64().ok_or_else(|| err(&format!("{path}[{i}]"), "expected an integer")))
        .collect()
}

pub fn parse_poly(v: &Value, nvars: usize, path: &str) -> Result<Poly> {
    let mut p = Poly::zero(nvars);
    for (i, t) in array(v, path)?.iter().enumerate() {
        let tp = format!("{path}[{i}]");
        let o = object(t, &tp)?;
        for k in o.keys() {
            if !matches!(k.as_str(), "coeff" | "exponents" | "harmonics" | "phase") {
                return Err(err(&tp, format!("unknown key \"{k}\"")));
            }
        }
        let coeff = rational(field(o, "coeff", &tp)?, &format!("{tp}.coeff"))?;
        let mut mono = Monomial::one(nvars);
        if let Some(e) = o.get("exponents") {
            let ep = format!("{tp}.exponents");
            mono.exponents = int_list(e, nvars, &ep)?
                .into_iter()
                .map(|x| u32::try_from(x).map_err(|_| err(&ep, "exponents must be non-negative")))
                .collect::<Result<_>>()?;
        }
        if let Some(h) = o.get("harmonics") {
            let hp = format!("{tp}.harmonics");
            mono.harmonics = int_list(h, nvars, &hp)?
                .into_iter()
                .map(|x| i32::try_from(x).map_err(|_| err(&hp, "harmonic out of range")))
                .collect::<Result<_>>()?;
            mono.phase = match o.get("phase").and_then(Value::as_str) {
                Some("sin") => Phase::Sin,
                Some("cos") => Phase::Cos,
                _ => return Err(err(&format!("{tp}.phase"), "expected \"sin\" or \"cos\"")),
            };
        } else if o.contains_key("phase") {
            return Err(err(&format!("{tp}.phase"), "phase given without harmonics"));
        }
        p.add_term(mono, coeff);
    }
    Ok(p)
}

fn parse_cpoly(v: &Value, nvars: usize, path: &str) -> Result<CPoly> {
    match v {
        Value::Object(o) => {
            let re = match o.get("re") {
                Some(r) => parse_poly(r, nvars, &format!("{path}.re"))?,
                None => Poly::zero(nvars),
            };
            let im = match o.get("im") {
                Some(r) => parse_poly(r, nvars, &format!("{path}.im"))?,
                None => Poly::zero(nvars),
            };
            if let Some(k) = o.keys().find(|k| !matches!(k.as_str(), "re" | "im")) {
                return Err(err(path, format!("unknown key \"{k}\"")));
            }
            Ok(CPoly { re, im })
        }
        _ => Ok(CPoly::real(parse_poly(v, nvars, path)?)),
    }
}

fn parse_operator_value(v: &Value, nvars: usize, generators: usize, path: &str) -> Result<NCPoly> {
    let o = object(v, path)?;
    let tp = format!("{path}.terms");
    let mut p = NCPoly::zero(nvars, generators);
    for (i, t) in array(field(o, "terms", path)?, &tp)?.iter().enumerate() {
        let ip = format!("{tp}[{i}]");
        let to = object(t, &ip)?;
        let coeff = parse_cpoly(field(to, "coeff", &ip)?, nvars, &format!("{ip}.coeff"))?;
        let wp = format!("{ip}.word");
        let word = array(field(to, "word", &ip)?, &wp)?
            .iter()
            .enumerate()
            .map(|(j, g)| match g.as_u64() {
                Some(g) if g >= 1 && (g as usize) <= generators => Ok(g as usize - 1),
                _ => Err(err(
                    &format!("{wp}[{j}]"),
                    format!("expected a generator index in 1..={generators}"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        p.add_term(coeff, &word).map_err(|e| err(&ip, e.to_string()))?;
    }
    Ok(p)
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| err("$", format!("invalid JSON: {e}")))
}

/// Operator file for a frame with `nvars` coordinates and `generators` fields.
pub fn parse_operator(text: &str, nvars: usize, generators: usize) -> Result<NCPoly> {
    parse_operator_value(&parse_json(text)?, nvars, generators, "$")
}

fn parse_point(v: &Value, m: usize, path: &str) -> Result<Point> {
    let a = array(v, path)?;
    if a.len() != m {
        return Err(err(path, format!("expected {m} coordinates, found {}", a.len())));
    }
    if a.iter().all(|x| x.is_string() || x.is_i64()) {
        let q = a
            .iter()
            .enumerate()
            .map(|(i, x)| rational(x, &format!("{path}[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Point::exact(q));
    }
    let f = a
        .iter()
        .enumerate()
        .map(|(i, x)| x.as_f64().ok_or_else(|| err(&format!("{path}[{i}]"), "expected a number")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Point::new(f))
}

pub fn parse_model(text: &str) -> Result<ModelFile> {
    let v = parse_json(text)?;
    let o = object(&v, "$")?;
    for k in o.keys() {
        if !matches!(
            k.as_str(),
            "name" | "description" | "dimension" | "periodic" | "step" | "fields" | "bounds" | "operators" | "grids"
        ) {
            return Err(err("$", format!("unknown key \"{k}\"")));
        }
    }
    let m = positive(field(o, "dimension", "$")?, "$.dimension")?;
    let step = positive(field(o, "step", "$")?, "$.step")?;
    let fa = array(field(o, "fields", "$")?, "$.fields")?;
    if fa.is_empty() {
        return Err(err("$.fields", "need at least one field"));
    }
    let mut fields = Vec::new();
    for (j, f) in fa.iter().enumerate() {
        let fp = format!("$.fields[{j}]");
        let comps = array(f, &fp)?;
        if comps.len() != m {
            return Err(err(&fp, format!("expected {m} components, found {}", comps.len())));
        }
        let polys = comps
            .iter()
            .enumerate()
            .map(|(i, c)| parse_poly(c, m, &format!("{fp}[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        fields.push(PolyVF::new(polys).map_err(|e| err(&fp, e.to_string()))?);
    }
    let mut frame = Frame::new(m, fields, step).map_err(|e| match e {
        Error::DimensionCap { .. } => err("$.step", e.to_string()),
        other => err("$.fields", other.to_string()),
    })?;
    if let Some(p) = o.get("periodic") {
        let pa = array(p, "$.periodic")?;
        let flags = pa
            .iter()
            .enumerate()
            .map(|(i, b)| b.as_bool().ok_or_else(|| err(&format!("$.periodic[{i}]"), "expected a boolean")))
            .collect::<Result<Vec<_>>>()?;
        frame = frame.with_periodic(flags).map_err(|e| err("$.periodic", e.to_string()))?;
    }
    if let Some(b) = o.get("bounds") {
        let ba = array(b, "$.bounds")?;
        let bounds = ba
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let bp = format!("$.bounds[{i}]");
                if x.is_null() {
                    return Ok(None);
                }
                let pair = array(x, &bp)?;
                match (pair.first().and_then(Value::as_f64), pair.get(1).and_then(Value::as_f64)) {
                    (Some(lo), Some(hi)) if pair.len() == 2 && lo < hi => Ok(Some((lo, hi))),
                    _ => Err(err(&bp, "expected null or [lo, hi] with lo < hi")),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        frame = frame.with_bounds(bounds).map_err(|e| err("$.bounds", e.to_string()))?;
    }
    let n = frame.generators();
    let mut operators = BTreeMap::new();
    if let Some(ops) = o.get("operators") {
        for (name, op) in object(ops, "$.operators")? {
            let p = parse_operator_value(op, m, n, &format!("$.operators.{name}"))?;
            operators.insert(name.clone(), p);
        }
    }
    let mut grids = BTreeMap::new();
    if let Some(gs) = o.get("grids") {
        for (name, g) in object(gs, "$.grids")? {
            let gp = format!("$.grids.{name}");
            let pts = array(g, &gp)?
                .iter()
                .enumerate()
                .map(|(i, p)| parse_point(p, m, &format!("{gp}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            grids.insert(name.clone(), pts);
        }
    }
    Ok(ModelFile { frame, operators, grids })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    const GRUSHIN: &str = r#"{
        "dimension": 2, "step": 2,
        "fields": [
            [[{"coeff": "1"}], []],
            [[], [{"coeff": "1", "exponents": [1, 0]}]]
        ],
        "grids": {"axis": [["0", "0"], ["0", "1/2"]]}
    }"#;

    #[test]
    fn grushin_model() {
        let m = parse_model(GRUSHIN).unwrap();
        assert_eq!(m.frame.generators(), 2);
        assert_eq!(m.frame.fields()[1].component(1), &Poly::var(2, 0));
        assert_eq!(m.grids["axis"][1].exact_coords().unwrap()[1], crate::rational::q(1, 2));
    }

    #[test]
    fn schema_paths_in_errors() {
        let bad = GRUSHIN.replace(r#""exponents": [1, 0]"#, r#""exponents": [1]"#);
        match parse_model(&bad) {
            Err(Error::Model { path, .. }) => assert_eq!(path, "$.fields[1][1][0].exponents"),
            other => panic!("{other:?}"),
        }
        match parse_model(r#"{"dimension": 0, "step": 1, "fields": []}"#) {
            Err(Error::Model { path, .. }) => assert_eq!(path, "$.dimension"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn operator_words_are_one_based() {
        let op = r#"{"terms": [{"coeff": {"im": [{"coeff": 3}]}, "word": [1, 2]}, {"coeff": [{"coeff": 1}], "word": []}]}"#;
        let p = parse_operator(op, 2, 2).unwrap();
        let terms: Vec<_> = p.terms().collect();
        assert_eq!(terms.len(), 2);
        assert!(terms.iter().any(|(w, c)| *w == [0, 1] && c.im == Poly::constant(2, qi(3))));
        match parse_operator(r#"{"terms": [{"coeff": [], "word": [3]}]}"#, 2, 2) {
            Err(Error::Model { path, .. }) => assert_eq!(path, "$.terms[0].word[0]"),
            other => panic!("{other:?}"),
        }
    }
}
