//! Curve files: CSV (`index,x1,...,xq`, one node per row, closed
//! implicitly) and JSON (`{"manifold": ..., "nodes": [[...], ...]}`).

use serde::{Deserialize, Serialize};

use crate::curve::DiscreteClosedCurve;
use crate::error::{Error, Result};
use crate::manifold::ManifoldModel;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveDocument {
    manifold: ManifoldModel,
    nodes: Vec<Vec<f64>>,
}

pub fn curve_to_csv(c: &DiscreteClosedCurve) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index".to_string()];
    header.extend((1..=c.dim()).map(|k| format!("x{k}")));
    w.write_record(&header)?;
    for i in 0..c.len() {
        let mut rec = vec![i.to_string()];
        rec.extend(c.node(i).iter().map(|x| format!("{x:e}")));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Reads a CSV curve; rows are ordered by their `index` column.
pub fn curve_from_csv(text: &str, manifold: ManifoldModel) -> Result<DiscreteClosedCurve> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    let q = manifold.ambient_dim();
    let expected: Vec<String> = std::iter::once("index".to_string())
        .chain((1..=q).map(|k| format!("x{k}")))
        .collect();
    if header
        .iter()
        .map(str::trim)
        .ne(expected.iter().map(String::as_str))
    {
        return Err(Error::Parse(format!(
            "expected header {}",
            expected.join(",")
        )));
    }
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let idx: usize = rec[0]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad index {:?}: {e}", &rec[0])))?;
        let x = (1..=q)
            .map(|k| {
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad coordinate {:?}: {e}", &rec[k])))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((idx, x));
    }
    rows.sort_by_key(|(i, _)| *i);
    if rows.iter().enumerate().any(|(k, (i, _))| *i != k) {
        return Err(Error::Parse("indices must be 0..N-1 without gaps".into()));
    }
    DiscreteClosedCurve::new(manifold, rows.into_iter().map(|(_, x)| x).collect())
}

pub fn curve_to_json(c: &DiscreteClosedCurve) -> Result<String> {
    let doc = CurveDocument {
        manifold: c.manifold().clone(),
        nodes: c.nodes(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn curve_from_json(text: &str) -> Result<DiscreteClosedCurve> {
    let doc: CurveDocument = serde_json::from_str(text)?;
    DiscreteClosedCurve::new(doc.manifold, doc.nodes)
}
