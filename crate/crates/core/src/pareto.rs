//! Surrogate-driven design optimization: the two-objective evaluator,
//! decoding of the front, labeled designs A/B/C, random-sample
//! validation and comparison against the oracle.

use std::fmt;
use std::io::Read;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::design_space::{DesignPoint, DesignSpace, BOUNDS_TOLERANCE};
use crate::error::{Error, Result};
use crate::mlp::MlpModel;
use crate::nsga2::{self, GenerationStats, NsgaConfig, ParetoFrontRaw};
use crate::oracle::{self, OracleConfig};
use crate::rng;
use crate::scalar::Scalar;

pub const FRONT_CSV_HEADER: [&str; 6] = ["t_beam_mm", "t_cross_mm", "spacing_mm", "f_n", "d_mm", "label"];
pub const COMPARISON_CSV_HEADER: &str = "label,pred_d_mm,pred_f_n,truth_d_mm,truth_f_n,err_d_pct,err_f_pct";

/// Force magnitude `f` (N) and tip displacement magnitude `d` (mm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct ObjectivePair<T: Scalar> {
    pub f: T,
    pub d: T,
}

impl<T: Scalar> ObjectivePair<T> {
    /// Maximization dominance: no worse in both, better in one.
    pub fn dominates(&self, other: &Self) -> bool {
        self.f >= other.f && self.d >= other.d && (self.f > other.f || self.d > other.d)
    }
}

/// Magnitudes of the (fx, fy) force and (dx, dy) displacement vectors.
pub fn compose_objectives<T: Scalar>(responses: [T; 4]) -> ObjectivePair<T> {
    let [fx, fy, dx, dy] = responses;
    ObjectivePair {
        f: fx.hypot(fy),
        d: dx.hypot(dy),
    }
}

/// Genes in [0, 1]³ are the model's normalized inputs. Returns `(-f, -d)`
/// for a minimizing engine; a model failure yields NaNs, which the engine
/// rejects.
pub fn make_evaluator<T: Scalar>(model: &MlpModel<T>) -> impl Fn(&[T]) -> Vec<T> + Sync + '_ {
    move |genes: &[T]| match model.predict_normalized(genes) {
        Ok(r) => {
            let o = compose_objectives(r);
            vec![-o.f, -o.d]
        }
        Err(_) => vec![T::nan(); 2],
    }
}

/// Maps genes to a physical design through the model's input scaler.
/// Values within the bounds tolerance of a limit are snapped onto it.
pub fn decode<T: Scalar>(model: &MlpModel<T>, space: &DesignSpace<T>, genes: &[T]) -> Result<DesignPoint<T>> {
    if genes.len() != 3 {
        return Err(Error::LengthMismatch {
            expected: 3,
            actual: genes.len(),
        });
    }
    let raw = model.input_scaler.unscale_row(genes);
    let tol = T::lit(BOUNDS_TOLERANCE);
    let mut v = [T::zero(); 3];
    for (i, (_, r)) in space.ranges().iter().enumerate() {
        let x = raw[i];
        v[i] = if x < r.min && x >= r.min - tol {
            r.min
        } else if x > r.max && x <= r.max + tol {
            r.max
        } else {
            x
        };
    }
    let p = DesignPoint::from_array(v);
    space.check(&p)?;
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Label {
    A,
    B,
    C,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::A => "A",
            Label::B => "B",
            Label::C => "C",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution<T: Scalar> {
    pub design: DesignPoint<T>,
    pub objectives: ObjectivePair<T>,
    /// Empty, or any of A, B, C. One design may carry several labels.
    pub labels: Vec<Label>,
}

impl<T: Scalar> DesignSolution<T> {
    /// Labels joined with `+`, e.g. `A+B+C` for a single-member front.
    pub fn label_text(&self) -> String {
        self.labels
            .iter()
            .map(Label::to_string)
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Decodes a raw engine front, sorted by ascending f then d.
pub fn decode_front<T: Scalar>(
    model: &MlpModel<T>,
    space: &DesignSpace<T>,
    raw: &ParetoFrontRaw<T>,
) -> Result<Vec<DesignSolution<T>>> {
    let mut out = raw
        .members
        .iter()
        .map(|(genes, obj)| {
            Ok(DesignSolution {
                design: decode(model, space, genes)?,
                objectives: ObjectivePair {
                    f: -obj[0],
                    d: -obj[1],
                },
                labels: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| {
        a.objectives
            .f
            .partial_cmp(&b.objectives.f)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.objectives.d.partial_cmp(&b.objectives.d).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(out)
}

pub struct OptimizeOutcome<T: Scalar> {
    pub front: Vec<DesignSolution<T>>,
    pub stats: Vec<GenerationStats<T>>,
}

/// Runs the optimizer over the surrogate and decodes the final front.
pub fn optimize<T: Scalar>(
    model: &MlpModel<T>,
    space: &DesignSpace<T>,
    config: &NsgaConfig,
) -> Result<OptimizeOutcome<T>> {
    model.validate()?;
    let out = nsga2::run(3, make_evaluator(model), config)?;
    Ok(OptimizeOutcome {
        front: decode_front(model, space, &out.front)?,
        stats: out.stats,
    })
}

/// Indices of the labeled designs within a front.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

/// A = largest d, B = largest f, C = nearest (1, 1) after min-max
/// normalizing f and d over the front. Ties go to the earlier index; an
/// objective that is constant over the front adds nothing to C's distance.
pub fn select_points<T: Scalar>(front: &[ObjectivePair<T>]) -> Result<Selection> {
    if front.is_empty() {
        return Err(Error::Precondition("cannot label an empty front".into()));
    }
    let argmax = |key: fn(&ObjectivePair<T>) -> T| {
        let mut best = 0;
        for (i, p) in front.iter().enumerate().skip(1) {
            if key(p) > key(&front[best]) {
                best = i;
            }
        }
        best
    };
    let a = argmax(|p| p.d);
    let b = argmax(|p| p.f);
    let span = |key: fn(&ObjectivePair<T>) -> T| {
        let lo = front.iter().map(key).fold(T::infinity(), T::min);
        let hi = front.iter().map(key).fold(T::neg_infinity(), T::max);
        (lo, hi - lo)
    };
    let (f_lo, f_span) = span(|p| p.f);
    let (d_lo, d_span) = span(|p| p.d);
    let gap = |v: T, lo: T, span: T| {
        if span > T::zero() {
            T::one() - (v - lo) / span
        } else {
            T::zero()
        }
    };
    let dist = |p: &ObjectivePair<T>| gap(p.f, f_lo, f_span).hypot(gap(p.d, d_lo, d_span));
    let mut c = 0;
    for (i, p) in front.iter().enumerate().skip(1) {
        if dist(p) < dist(&front[c]) {
            c = i;
        }
    }
    Ok(Selection { a, b, c })
}

/// Clears existing labels and assigns A, B and C.
pub fn label_front<T: Scalar>(front: &mut [DesignSolution<T>]) -> Result<Selection> {
    let objs: Vec<_> = front.iter().map(|s| s.objectives).collect();
    let sel = select_points(&objs)?;
    for s in front.iter_mut() {
        s.labels.clear();
    }
    front[sel.a].labels.push(Label::A);
    front[sel.b].labels.push(Label::B);
    front[sel.c].labels.push(Label::C);
    Ok(sel)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T: Scalar> {
    pub genes: [T; 3],
    pub objectives: ObjectivePair<T>,
}

/// `n` uniform gene vectors drawn in order from `seed`, evaluated through
/// the model in parallel.
pub fn sample_objectives<T: Scalar>(model: &MlpModel<T>, n: usize, seed: u64) -> Result<Vec<Sample<T>>> {
    let mut rng = rng::seeded(seed);
    let genes: Vec<[T; 3]> = (0..n)
        .map(|_| std::array::from_fn(|_| T::lit(rng.random::<f64>())))
        .collect();
    genes
        .into_par_iter()
        .map(|g| {
            Ok(Sample {
                genes: g,
                objectives: compose_objectives(model.predict_normalized(&g)?),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct Violation<T: Scalar> {
    pub sample: usize,
    pub genes: [T; 3],
    pub f: T,
    pub d: T,
    /// Front members (by row) this sample dominates.
    pub dominated_members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct ValidationReport<T: Scalar> {
    pub n_samples: usize,
    pub n_dominating: usize,
    pub violations: Vec<Violation<T>>,
}

/// Counts samples that dominate at least one front member.
pub fn check_samples<T: Scalar>(front: &[ObjectivePair<T>], samples: &[Sample<T>]) -> ValidationReport<T> {
    let violations: Vec<Violation<T>> = samples
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let hit: Vec<usize> = front
                .iter()
                .enumerate()
                .filter(|(_, m)| s.objectives.dominates(m))
                .map(|(j, _)| j)
                .collect();
            (!hit.is_empty()).then(|| Violation {
                sample: i,
                genes: s.genes,
                f: s.objectives.f,
                d: s.objectives.d,
                dominated_members: hit,
            })
        })
        .collect();
    ValidationReport {
        n_samples: samples.len(),
        n_dominating: violations.len(),
        violations,
    }
}

/// Draws `n_random` samples and checks the front against them.
pub fn validate_front<T: Scalar>(
    front: &[ObjectivePair<T>],
    model: &MlpModel<T>,
    n_random: usize,
    seed: u64,
) -> Result<(ValidationReport<T>, Vec<Sample<T>>)> {
    if n_random == 0 {
        return Err(Error::Precondition("n_random must be at least 1".into()));
    }
    let samples = sample_objectives(model, n_random, seed)?;
    Ok((check_samples(front, &samples), samples))
}

pub fn percent_error<T: Scalar>(predicted: T, truth: T) -> T {
    T::lit(100.0) * (predicted - truth).abs() / truth
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct ComparisonRow<T: Scalar> {
    pub label: Label,
    pub predicted: ObjectivePair<T>,
    pub truth: ObjectivePair<T>,
    pub err_f_pct: T,
    pub err_d_pct: T,
}

/// One row per label, in label order, against the noise-free oracle.
pub fn compare_to_truth<T: Scalar>(front: &[DesignSolution<T>], oracle: &OracleConfig) -> Result<Vec<ComparisonRow<T>>> {
    oracle.validate()?;
    if oracle.noise_sigma != 0.0 {
        return Err(Error::Precondition(
            "ground truth needs a noise-free oracle (noise_sigma = 0)".into(),
        ));
    }
    let mut rows = Vec::new();
    for s in front {
        for &label in &s.labels {
            let truth = compose_objectives(oracle::evaluate(&s.design, oracle)?.to_array());
            if truth.f <= T::zero() || truth.d <= T::zero() {
                return Err(Error::Precondition(format!(
                    "oracle truth for {label} is not positive"
                )));
            }
            rows.push(ComparisonRow {
                label,
                predicted: s.objectives,
                truth,
                err_f_pct: percent_error(s.objectives.f, truth.f),
                err_d_pct: percent_error(s.objectives.d, truth.d),
            });
        }
    }
    rows.sort_by_key(|r| r.label);
    Ok(rows)
}

pub fn front_csv<T: Scalar>(front: &[DesignSolution<T>]) -> String {
    let mut out = FRONT_CSV_HEADER.join(",");
    out.push('\n');
    for s in front {
        let p = &s.design;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.t_beam,
            p.t_cross,
            p.spacing,
            s.objectives.f,
            s.objectives.d,
            s.label_text()
        ));
    }
    out
}

/// Parses a front CSV. Designs are checked against `space`; labels are
/// read back as written.
pub fn read_front_csv<T: Scalar, R: Read>(reader: R, space: &DesignSpace<T>) -> Result<Vec<DesignSolution<T>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let csv_err = |row: usize, column: &str, message: String| Error::Csv {
        row,
        column: column.to_string(),
        message,
    };
    let header = rdr.headers().map_err(|e| csv_err(0, "", e.to_string()))?.clone();
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != FRONT_CSV_HEADER {
        return Err(Error::CsvHeader {
            expected: FRONT_CSV_HEADER.join(","),
            found: found.join(","),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| csv_err(row_no, "", e.to_string()))?;
        if row.len() != FRONT_CSV_HEADER.len() {
            return Err(csv_err(
                row_no,
                "",
                format!("expected {} fields, found {}", FRONT_CSV_HEADER.len(), row.len()),
            ));
        }
        let mut v = [T::zero(); 5];
        for j in 0..5 {
            let cell = row[j].trim();
            v[j] = cell
                .parse::<T>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| csv_err(row_no, FRONT_CSV_HEADER[j], format!("`{cell}` is not a finite number")))?;
        }
        for j in 3..5 {
            if v[j] < T::zero() {
                return Err(csv_err(row_no, FRONT_CSV_HEADER[j], "must be non-negative".into()));
            }
        }
        let design = DesignPoint::new_unchecked(v[0], v[1], v[2]);
        space
            .check(&design)
            .map_err(|e| csv_err(row_no, "", e.to_string()))?;
        let mut labels = Vec::new();
        for part in row[5].trim().split('+').filter(|s| !s.is_empty()) {
            labels.push(match part {
                "A" => Label::A,
                "B" => Label::B,
                "C" => Label::C,
                other => return Err(csv_err(row_no, "label", format!("unknown label `{other}`"))),
            });
        }
        out.push(DesignSolution {
            design,
            objectives: ObjectivePair { f: v[3], d: v[4] },
            labels,
        });
    }
    if out.is_empty() {
        return Err(Error::Precondition("front CSV has no rows".into()));
    }
    Ok(out)
}

pub fn comparison_csv<T: Scalar>(rows: &[ComparisonRow<T>]) -> String {
    let mut out = format!("{COMPARISON_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.label, r.predicted.d, r.predicted.f, r.truth.d, r.truth.f, r.err_d_pct, r.err_f_pct
        ));
    }
    out
}

/// Plot-ready `t_beam_mm,t_cross_mm,spacing_mm,f_n,d_mm` rows for random samples.
pub fn samples_csv<T: Scalar>(model: &MlpModel<T>, samples: &[Sample<T>]) -> String {
    let mut out = String::from("t_beam_mm,t_cross_mm,spacing_mm,f_n,d_mm\n");
    for s in samples {
        let p = model.input_scaler.unscale_row(&s.genes);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p[0], p[1], p[2], s.objectives.f, s.objectives.d
        ));
    }
    out
}
