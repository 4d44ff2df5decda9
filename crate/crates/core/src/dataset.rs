//! Experimental designs: input points paired with model responses.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conformal::PredictionInterval;
use crate::error::{Error, Result};
use crate::fmt_f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, outputs: Vec<f64>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::Invalid("dataset needs at least one sample".into()));
        }
        if inputs.len() != outputs.len() {
            return Err(Error::Invalid(format!(
                "{} input points but {} outputs",
                inputs.len(),
                outputs.len()
            )));
        }
        let dim = inputs[0].len();
        if dim == 0 {
            return Err(Error::Invalid(
                "input points need at least one coordinate".into(),
            ));
        }
        if let Some(row) = inputs.iter().position(|x| x.len() != dim) {
            return Err(Error::Invalid(format!(
                "row {row} has {} coordinates, expected {dim}",
                inputs[row].len()
            )));
        }
        if let Some(row) = outputs.iter().position(|y| !y.is_finite()) {
            return Err(Error::Invalid(format!("output {row} is not finite")));
        }
        Ok(Dataset { inputs, outputs })
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    /// Copy with sample `index` removed; `None` if that would leave it empty.
    pub fn without(&self, index: usize) -> Option<Dataset> {
        if self.len() <= 1 || index >= self.len() {
            return None;
        }
        let mut inputs = self.inputs.clone();
        let mut outputs = self.outputs.clone();
        inputs.remove(index);
        outputs.remove(index);
        Some(Dataset { inputs, outputs })
    }

    /// Rows reordered so that row `i` of the result is row `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Dataset> {
        let mut seen = vec![false; self.len()];
        for &i in order {
            if i >= self.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Invalid(
                    "not a permutation of the dataset rows".into(),
                ));
            }
        }
        if order.len() != self.len() {
            return Err(Error::Invalid(
                "not a permutation of the dataset rows".into(),
            ));
        }
        Ok(Dataset {
            inputs: order.iter().map(|&i| self.inputs[i].clone()).collect(),
            outputs: order.iter().map(|&i| self.outputs[i]).collect(),
        })
    }

    /// Writes `x1,...,xN,y` CSV with shortest round-trip decimals.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.input_dim()).map(|i| format!("x{i}")).collect();
        header.push("y".into());
        w.write_record(&header)?;
        for (x, y) in self.inputs.iter().zip(&self.outputs) {
            let row = x.iter().chain(std::iter::once(y)).map(|&v| fmt_f64(v));
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let n = header.len();
        let valid_header = n >= 2
            && header.get(n - 1) == Some("y")
            && (1..n).all(|i| header.get(i - 1) == Some(format!("x{i}").as_str()));
        if !valid_header {
            return Err(Error::Invalid(format!(
                "dataset header must be x1,...,xN,y; got {:?}",
                header.iter().collect::<Vec<_>>()
            )));
        }
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for (line, record) in r.records().enumerate() {
            let values = parse_row(&record?, line)?;
            outputs.push(values[n - 1]);
            inputs.push(values[..n - 1].to_vec());
        }
        Dataset::new(inputs, outputs)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Dataset> {
        Dataset::read_csv(std::fs::File::open(path)?)
    }
}

/// Reads query points from a CSV with header `x1,...,xN`. A trailing `y`
/// column is accepted and ignored so a dataset file can be reused as queries.
pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    let n = if header.get(header.len().saturating_sub(1)) == Some("y") {
        header.len() - 1
    } else {
        header.len()
    };
    let valid_header =
        n >= 1 && (1..=n).all(|i| header.get(i - 1) == Some(format!("x{i}").as_str()));
    if !valid_header {
        return Err(Error::Invalid(format!(
            "points header must be x1,...,xN; got {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut points = Vec::new();
    for (line, record) in r.records().enumerate() {
        let mut values = parse_row(&record?, line)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!(
                "row {}: non-finite coordinate",
                line + 1
            )));
        }
        values.truncate(n);
        points.push(values);
    }
    if points.is_empty() {
        return Err(Error::Invalid("points file has no rows".into()));
    }
    Ok(points)
}

/// Writes `x1,...,xN,center,lower,upper`; unbounded ends appear as `inf`/`-inf`.
pub fn write_intervals_csv<W: Write>(
    points: &[Vec<f64>],
    intervals: &[PredictionInterval],
    writer: W,
) -> Result<()> {
    if points.len() != intervals.len() {
        return Err(Error::Dimension {
            expected: points.len(),
            got: intervals.len(),
        });
    }
    let dim = points.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    header.extend(["center", "lower", "upper"].map(String::from));
    w.write_record(&header)?;
    for (x, iv) in points.iter().zip(intervals) {
        let tail = [iv.center, iv.lower, iv.upper];
        let row = x.iter().chain(&tail).map(|&v| fmt_f64(v));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn parse_row(record: &csv::StringRecord, line: usize) -> Result<Vec<f64>> {
    record
        .iter()
        .map(|field| {
            field.trim().parse::<f64>().map_err(|_| {
                Error::Invalid(format!(
                    "row {}: cannot parse {field:?} as a number",
                    line + 1
                ))
            })
        })
        .collect()
}
