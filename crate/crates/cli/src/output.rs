//! CSV/JSON writers and the sample-table reader.

use clap::ValueEnum;
use lsys_core::measures::{InversionTable, SampleTable};
use lsys_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Failure, Outcome};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Scientific notation with 17 significant digits; `NaN` for poles.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct Row {
    re_z: f64,
    im_z: f64,
    re_f: Option<f64>,
    im_f: Option<f64>,
    pole_flag: bool,
}

pub fn write_rows(values: &[(Complex64, Option<Complex64>)], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["re_z", "im_z", "re_f", "im_f", "pole_flag"])
                .expect("write to memory");
            for (z, v) in values {
                let (re, im, flag) = match v {
                    Some(v) => (num(v.re), num(v.im), "0"),
                    None => ("NaN".into(), "NaN".into(), "1"),
                };
                w.write_record([num(z.re), num(z.im), re, im, flag.into()])
                    .expect("write to memory");
            }
            String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii output")
        }
        Format::Json => {
            let rows: Vec<Row> = values
                .iter()
                .map(|(z, v)| Row {
                    re_z: z.re,
                    im_z: z.im,
                    re_f: v.map(|v| v.re),
                    im_f: v.map(|v| v.im),
                    pole_flag: v.is_none(),
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
        }
    }
}

/// Rows `kind,lambda,value`: one `atom` row per detected atom (value is the
/// weight), then one `density` row per grid point.
pub fn write_inversion(t: &InversionTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "lambda", "value"])
        .expect("write to memory");
    for a in &t.atoms {
        w.write_record(["atom".into(), num(a.location), num(a.weight)])
            .expect("write to memory");
    }
    for (x, d) in t.lambdas.iter().zip(&t.density) {
        w.write_record(["density".into(), num(*x), num(*d)])
            .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii output")
}

#[derive(Deserialize)]
struct SampleRow {
    lambda: f64,
    eps: f64,
    re_f: f64,
    im_f: f64,
}

/// Reads `lambda,eps,re_f,im_f` rows. Every `eps` must cover the same
/// `lambda` values; rows may come in any order.
pub fn parse_samples(text: &str) -> Outcome<SampleTable> {
    let parse = |m: String| Failure::new(Failure::PARSE, m);
    let mut rows = Vec::new();
    for r in csv::Reader::from_reader(text.as_bytes()).deserialize::<SampleRow>() {
        rows.push(r.map_err(|e| parse(format!("samples: {e}")))?);
    }
    let mut eps: Vec<f64> = Vec::new();
    for r in &rows {
        if !eps.contains(&r.eps) {
            eps.push(r.eps);
        }
    }
    if eps.is_empty() {
        return Err(parse("samples file has no rows".into()));
    }
    eps.sort_by(|a, b| b.total_cmp(a));
    let mut lambdas: Vec<f64> = rows
        .iter()
        .filter(|r| r.eps == eps[0])
        .map(|r| r.lambda)
        .collect();
    lambdas.sort_by(f64::total_cmp);
    let mut values = Vec::with_capacity(eps.len());
    for &e in &eps {
        let mut row: Vec<(f64, Complex64)> = rows
            .iter()
            .filter(|r| r.eps == e)
            .map(|r| (r.lambda, Complex64::new(r.re_f, r.im_f)))
            .collect();
        row.sort_by(|a, b| a.0.total_cmp(&b.0));
        if row.len() != lambdas.len() || row.iter().zip(&lambdas).any(|(a, b)| a.0 != *b) {
            return Err(parse(format!(
                "samples at eps = {e} do not match the lambda grid"
            )));
        }
        values.push(row.into_iter().map(|p| p.1).collect());
    }
    Ok(SampleTable {
        lambdas,
        eps,
        values,
    })
}
