//! Simulation records, CSV I/O, exploratory statistics and splitting.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::design_space::{DesignPoint, DesignSpace};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

pub const CSV_HEADER: [&str; 7] = [
    "t_beam_mm",
    "t_cross_mm",
    "spacing_mm",
    "fx_n",
    "fy_n",
    "dx_mm",
    "dy_mm",
];

pub const COLUMN_NAMES: [&str; 7] = ["t_beam", "t_cross", "spacing", "fx", "fy", "dx", "dy"];
pub const TARGET_NAMES: [&str; 4] = ["fx", "fy", "dx", "dy"];

/// One simulated design: responses are taken at maximum base displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SimRecord<T: Scalar> {
    pub design: DesignPoint<T>,
    /// Contact force along x, N.
    pub fx: T,
    /// Contact force along y, N.
    pub fy: T,
    /// Tip displacement along x, mm.
    pub dx: T,
    /// Tip displacement along y, mm.
    pub dy: T,
}

impl<T: Scalar> SimRecord<T> {
    pub fn targets(&self) -> [T; 4] {
        [self.fx, self.fy, self.dx, self.dy]
    }

    pub fn inputs(&self) -> [T; 3] {
        self.design.to_array()
    }

    pub fn columns(&self) -> [T; 7] {
        let [a, b, c] = self.inputs();
        [a, b, c, self.fx, self.fy, self.dx, self.dy]
    }

    /// Checks finiteness and the sign constraints on fx and dx.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in COLUMN_NAMES.iter().zip(self.columns()) {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("record field `{name}`")));
            }
        }
        if self.fx < T::zero() || self.dx < T::zero() {
            return Err(Error::Precondition(
                "fx and dx must be non-negative".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    OracleGenerated { seed: u64 },
    FileImported,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T: Scalar> {
    records: Vec<SimRecord<T>>,
    provenance: Provenance,
}

fn design_key<T: Scalar>(d: &DesignPoint<T>) -> [u64; 3] {
    d.to_array().map(|v| {
        let v = v.as_f64();
        // -0.0 and 0.0 are the same design
        if v == 0.0 { 0 } else { v.to_bits() }
    })
}

impl<T: Scalar> Dataset<T> {
    /// Validates every record and rejects duplicated designs.
    pub fn new(records: Vec<SimRecord<T>>, provenance: Provenance) -> Result<Self> {
        let mut seen = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            r.validate()?;
            if let Some(&first) = seen.get(&design_key(&r.design)) {
                return Err(Error::DuplicateDesign { row: i, first });
            }
            seen.insert(design_key(&r.design), i);
        }
        Ok(Self {
            records,
            provenance,
        })
    }

    pub fn records(&self) -> &[SimRecord<T>] {
        &self.records
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn seed(&self) -> Option<u64> {
        match self.provenance {
            Provenance::OracleGenerated { seed } => Some(seed),
            Provenance::FileImported => None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.records.iter().map(|r| r.columns()[j]).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Vec<SimRecord<T>> {
        indices.iter().map(|&i| self.records[i]).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        let csv_err = |e: csv::Error| Error::Csv {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        };
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for r in &self.records {
            // Display prints the shortest decimal that parses back to the
            // same float, so the round trip is exact.
            w.write_record(r.columns().iter().map(|v| v.to_string()))
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    /// Parses records, checking header, numbers, design bounds and
    /// duplicates. Rows are numbered from 1 (the header is row 0).
    pub fn read_csv<R: Read>(reader: R, space: &DesignSpace<T>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Csv {
                row: 0,
                column: String::new(),
                message: e.to_string(),
            })?
            .clone();
        let found: Vec<&str> = header.iter().map(str::trim).collect();
        if found != CSV_HEADER {
            return Err(Error::CsvHeader {
                expected: CSV_HEADER.join(","),
                found: found.join(","),
            });
        }
        let mut records = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row_no = i + 1;
            let row = row.map_err(|e| Error::Csv {
                row: row_no,
                column: String::new(),
                message: e.to_string(),
            })?;
            if row.len() != CSV_HEADER.len() {
                return Err(Error::Csv {
                    row: row_no,
                    column: String::new(),
                    message: format!("expected {} fields, found {}", CSV_HEADER.len(), row.len()),
                });
            }
            let mut vals = [T::zero(); 7];
            for (j, cell) in row.iter().enumerate() {
                let v: T = cell.trim().parse().map_err(|_| Error::Csv {
                    row: row_no,
                    column: CSV_HEADER[j].to_string(),
                    message: format!("`{cell}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Csv {
                        row: row_no,
                        column: CSV_HEADER[j].to_string(),
                        message: format!("`{cell}` is not finite"),
                    });
                }
                vals[j] = v;
            }
            let design = DesignPoint::new_unchecked(vals[0], vals[1], vals[2]);
            if let Err(Error::OutOfBounds {
                variable,
                value,
                min,
                max,
            }) = space.check(&design)
            {
                let j = crate::design_space::VARIABLE_NAMES
                    .iter()
                    .position(|n| *n == variable)
                    .unwrap_or(0);
                return Err(Error::Csv {
                    row: row_no,
                    column: CSV_HEADER[j].to_string(),
                    message: format!("{value} lies outside [{min}, {max}]"),
                });
            }
            let rec = SimRecord {
                design,
                fx: vals[3],
                fy: vals[4],
                dx: vals[5],
                dy: vals[6],
            };
            rec.validate().map_err(|e| Error::Csv {
                row: row_no,
                column: String::new(),
                message: e.to_string(),
            })?;
            records.push(rec);
        }
        Self::new(records, Provenance::FileImported).map_err(|e| match e {
            Error::DuplicateDesign { row, first } => Error::DuplicateDesign {
                row: row + 1,
                first: first + 1,
            },
            e => e,
        })
    }

    pub fn read_csv_file(path: impl AsRef<Path>, space: &DesignSpace<T>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file), space)
    }
}

/// Pearson correlation coefficient of two equal-length samples.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 2 samples, have {}",
            x.len()
        )));
    }
    let n = T::from_usize_lossy(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::UndefinedCorrelation("constant vector".into()));
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

/// Labeled square correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix<T> {
    pub labels: Vec<String>,
    pub values: Vec<Vec<T>>,
}

impl<T: Scalar> CorrelationMatrix<T> {
    pub fn get(&self, a: &str, b: &str) -> Option<T> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }

    /// CSV with a leading label column and a header of labels.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("column");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.values) {
            out.push_str(l);
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise Pearson correlations over the three inputs and four responses.
pub fn correlation_matrix<T: Scalar>(dataset: &Dataset<T>) -> Result<CorrelationMatrix<T>> {
    let cols: Vec<Vec<T>> = (0..7).map(|j| dataset.column(j)).collect();
    let mut values = vec![vec![T::zero(); 7]; 7];
    for i in 0..7 {
        for j in i..7 {
            let r = pearson(&cols[i], &cols[j]).map_err(|e| {
                Error::UndefinedCorrelation(format!(
                    "{} vs {}: {e}",
                    COLUMN_NAMES[i], COLUMN_NAMES[j]
                ))
            })?;
            let r = if i == j { T::one() } else { r };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        labels: COLUMN_NAMES.iter().map(|s| s.to_string()).collect(),
        values,
    })
}

/// A value more than three standard deviations from its column mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierWarning {
    pub row: usize,
    pub column: &'static str,
    pub z_score: f64,
}

/// Flags |z| > 3 per column. Records are never dropped.
pub fn outlier_warnings<T: Scalar>(dataset: &Dataset<T>) -> Vec<OutlierWarning> {
    let mut out = Vec::new();
    if dataset.len() < 2 {
        return out;
    }
    for (j, name) in COLUMN_NAMES.iter().enumerate() {
        let col: Vec<f64> = dataset.column(j).into_iter().map(Scalar::as_f64).collect();
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        if sd == 0.0 {
            continue;
        }
        for (i, v) in col.iter().enumerate() {
            let z = (v - mean) / sd;
            if z.abs() > 3.0 {
                out.push(OutlierWarning {
                    row: i,
                    column: name,
                    z_score: z,
                });
            }
        }
    }
    out
}

/// Train/validation/test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::config("split.ratios", "every ratio must be positive"));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::config("split.ratios", "ratios must sum to 1"));
        }
        Ok(())
    }
}

/// A partition of record indices plus K-fold ids over the non-test part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    /// Fold id per record index; `None` for test records.
    pub folds: Vec<Option<usize>>,
    pub k: usize,
}

impl SplitIndices {
    /// (training, held-out) indices for cross-validation fold `fold`.
    pub fn fold(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut fit = Vec::new();
        let mut held = Vec::new();
        for idx in self.non_test() {
            if self.folds[idx] == Some(fold) {
                held.push(idx);
            } else {
                fit.push(idx);
            }
        }
        (fit, held)
    }

    /// Non-test indices in shuffled order (validation first, then train).
    pub fn non_test(&self) -> impl Iterator<Item = usize> + '_ {
        self.validation.iter().chain(&self.train).copied()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for f in self.folds.iter().flatten() {
            sizes[*f] += 1;
        }
        sizes
    }
}

/// Seeded shuffle into train/validation/test, then round-robin K folds
/// over the non-test records.
pub fn split(n: usize, seed: u64, ratios: SplitRatios, k: usize) -> Result<SplitIndices> {
    ratios.validate()?;
    if k < 2 {
        return Err(Error::config("split.k", "need at least 2 folds"));
    }
    let n_test = (n as f64 * ratios.test).round() as usize;
    let n_val = (n as f64 * ratios.validation).round() as usize;
    let required = minimum_records(ratios, k);
    if n < required || n_test == 0 || n_val == 0 || n_test + n_val >= n || n - n_test < k {
        return Err(Error::Sizing {
            required,
            available: n,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let test = order[..n_test].to_vec();
    let validation = order[n_test..n_test + n_val].to_vec();
    let train = order[n_test + n_val..].to_vec();
    let mut folds = vec![None; n];
    for (pos, idx) in validation.iter().chain(&train).enumerate() {
        folds[*idx] = Some(pos % k);
    }
    Ok(SplitIndices {
        train,
        validation,
        test,
        folds,
        k,
    })
}

/// Smallest record count for which every part (and every fold) is non-empty.
pub fn minimum_records(ratios: SplitRatios, k: usize) -> usize {
    (3..10_000)
        .find(|&n| {
            let t = (n as f64 * ratios.test).round() as usize;
            let v = (n as f64 * ratios.validation).round() as usize;
            t > 0 && v > 0 && t + v < n && n - t >= k
        })
        .unwrap_or(usize::MAX)
}
