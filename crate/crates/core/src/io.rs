//! CSV serialization of signals (`x,re,im`) and time-frequency arrays
//! (`x,xi,re,im[,abs]`). Grids are inferred from the coordinate columns.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, Signal, TfArray, TfGrid};

const COORD_TOL: f64 = 1e-9;

fn csv_err(e: csv::Error) -> Error {
    let msg = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        _ => Error::Parse(msg),
    }
}

fn parse_f64(field: &str, what: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {what} value {field:?}")))
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str], optional: &[&str]) -> Result<usize> {
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();
    let ok_len = header.len() >= expected.len() && header.len() <= expected.len() + optional.len();
    let names_ok = header
        .iter()
        .zip(expected.iter().chain(optional))
        .all(|(h, e)| h == e);
    if !ok_len || !names_ok {
        return Err(Error::Parse(format!(
            "expected header {}, got {}",
            expected.join(","),
            header.join(",")
        )));
    }
    Ok(header.len())
}

/// Grid whose nodes are `xs` (sorted, uniform, centered).
pub fn infer_grid(xs: &[f64]) -> Result<Grid1D> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {n}")));
    }
    let h = xs[1] - xs[0];
    let grid = Grid1D::new(n, h * n as f64)?;
    for (k, x) in xs.iter().enumerate() {
        if (x - grid.node(k)).abs() > COORD_TOL * grid.length().max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "node {k} is {x}, expected {} on a centered grid of {n} nodes over {}",
                grid.node(k),
                grid.length()
            )));
        }
    }
    Ok(grid)
}

pub fn write_signal(f: &Signal, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "re", "im"]).map_err(csv_err)?;
    for (x, v) in f.grid().nodes().iter().zip(f.values()) {
        w.write_record([x.to_string(), v.re.to_string(), v.im.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_signal(input: impl Read) -> Result<Signal> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(&mut rdr, &["x", "re", "im"], &[])?;
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        xs.push(parse_f64(&rec[0], "x", line)?);
        vals.push(Complex64::new(parse_f64(&rec[1], "re", line)?, parse_f64(&rec[2], "im", line)?));
    }
    Signal::new(infer_grid(&xs)?, vals)
}

pub fn write_tf_array(a: &TfArray, out: impl Write, with_abs: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if with_abs {
        w.write_record(["x", "xi", "re", "im", "abs"]).map_err(csv_err)?;
    } else {
        w.write_record(["x", "xi", "re", "im"]).map_err(csv_err)?;
    }
    let xs = a.grid().x.nodes();
    let xis = a.grid().xi.nodes();
    for (i, x) in xs.iter().enumerate() {
        for (j, xi) in xis.iter().enumerate() {
            let v = a.get(i, j);
            let mut rec = vec![x.to_string(), xi.to_string(), v.re.to_string(), v.im.to_string()];
            if with_abs {
                rec.push(v.norm().to_string());
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_tf_array(input: impl Read) -> Result<TfArray> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(&mut rdr, &["x", "xi", "re", "im"], &["abs"])?;
    let mut xs = Vec::new();
    let mut xis = Vec::new();
    let mut vals = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let x = parse_f64(&rec[0], "x", line)?;
        let xi = parse_f64(&rec[1], "xi", line)?;
        if xs.last().is_none_or(|last: &f64| (x - last).abs() > COORD_TOL) {
            xs.push(x);
        }
        if xs.len() == 1 {
            xis.push(xi);
        }
        vals.push(Complex64::new(parse_f64(&rec[2], "re", line)?, parse_f64(&rec[3], "im", line)?));
    }
    let tf = TfGrid::new(infer_grid(&xs)?, infer_grid(&xis)?);
    TfArray::new(tf, vals)
}
