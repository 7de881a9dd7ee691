//! File formats: step functions as CSV, shifts, sparse families and
//! coefficient maps as versioned JSON documents.
//!
//! Floats are written in shortest round-trip form, so every finite value
//! reads back bit for bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use twoweight_core::{
    CoefficientMap, DyadicCube, DyadicGrid, HaarFunction, HaarShiftSpec, ShiftTerm, SparseFamily, StepFunction,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] twoweight_core::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type FormatResult<T> = Result<T, FormatError>;

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

/// Writes one row per finest cell: integer cell coordinates, then the value.
pub fn write_step_csv<W: Write>(f: &StepFunction, out: W) -> FormatResult<()> {
    let grid = f.grid();
    let dim = grid.dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..dim).map(|a| format!("c{a}")).collect();
    header.push("value".into());
    w.write_record(&header)?;
    for (i, v) in f.values().iter().enumerate() {
        let cell = grid.cell_cube(i);
        let mut row: Vec<String> = cell.coords()[..dim].iter().map(i64::to_string).collect();
        row.push(format_f64(*v));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a step function on `grid`; every cell must appear exactly once.
pub fn read_step_csv<R: Read>(grid: DyadicGrid, input: R) -> FormatResult<StepFunction> {
    let dim = grid.dim();
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let expected: Vec<String> = (0..dim).map(|a| format!("c{a}")).chain(["value".to_string()]).collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(invalid(format!("expected header {}", expected.join(","))));
    }
    let mut values = vec![f64::NAN; grid.cell_count()];
    let mut seen = vec![false; grid.cell_count()];
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let coords: Vec<i64> = (0..dim)
            .map(|a| record[a].trim().parse::<i64>().map_err(|e| invalid(format!("row {}: {e}", line + 1))))
            .collect::<FormatResult<_>>()?;
        let value: f64 = record[dim].trim().parse().map_err(|e| invalid(format!("row {}: {e}", line + 1)))?;
        let idx = grid.cell_index(&coords).ok_or_else(|| invalid(format!("row {}: cell outside the window", line + 1)))?;
        if std::mem::replace(&mut seen[idx], true) {
            return Err(invalid(format!("row {}: duplicate cell", line + 1)));
        }
        values[idx] = value;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(invalid(format!("cell {:?} missing", grid.cell_cube(missing).coords()[..dim].to_vec())));
    }
    Ok(StepFunction::new(grid, values)?)
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite floats serialize")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub dim: usize,
    pub top: i32,
    pub bottom: i32,
    pub shift: Vec<f64>,
}

impl GridDoc {
    pub fn from_grid(g: &DyadicGrid) -> Self {
        Self { dim: g.dim(), top: g.top(), bottom: g.bottom(), shift: g.shift().to_vec() }
    }

    pub fn to_grid(&self) -> FormatResult<DyadicGrid> {
        Ok(DyadicGrid::new(self.dim, &self.shift, self.top, self.bottom)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeDoc {
    pub level: i32,
    pub coords: Vec<i64>,
}

impl CubeDoc {
    fn from_cube(q: &DyadicCube, dim: usize) -> Self {
        Self { level: q.level(), coords: q.coords()[..dim].to_vec() }
    }

    fn to_cube(&self, dim: usize) -> FormatResult<DyadicCube> {
        if self.coords.len() != dim {
            return Err(invalid(format!("cube with {} coordinates in dimension {dim}", self.coords.len())));
        }
        Ok(DyadicCube::new(self.level, &self.coords))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarDoc {
    pub cube: CubeDoc,
    pub depth: u32,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub cube: CubeDoc,
    pub input: HaarDoc,
    pub output: HaarDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftDoc {
    pub version: u32,
    pub grid: GridDoc,
    pub m: u32,
    pub k: u32,
    pub scale: f64,
    /// Factor applied to the shift output (`sqrt 2` for the dyadic Hilbert transform).
    #[serde(default = "one")]
    pub gamma: f64,
    pub terms: Vec<TermDoc>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationCube {
    pub generation: usize,
    pub cube: CubeDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseDoc {
    pub version: u32,
    pub grid: GridDoc,
    pub cubes: Vec<GenerationCube>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub cube: CubeDoc,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsDoc {
    pub version: u32,
    pub grid: GridDoc,
    pub entries: Vec<CoefficientEntry>,
}

/// Any structured document, tagged by `format`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "kebab-case")]
pub enum Document {
    HaarShift(ShiftDoc),
    SparseFamily(SparseDoc),
    Coefficients(CoefficientsDoc),
}

impl Document {
    pub fn version(&self) -> u32 {
        match self {
            Self::HaarShift(d) => d.version,
            Self::SparseFamily(d) => d.version,
            Self::Coefficients(d) => d.version,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::HaarShift(_) => "haar-shift",
            Self::SparseFamily(_) => "sparse-family",
            Self::Coefficients(_) => "coefficients",
        }
    }
}

fn haar_doc(h: &HaarFunction, dim: usize) -> HaarDoc {
    HaarDoc { cube: CubeDoc::from_cube(&h.cube, dim), depth: h.depth, values: h.values.clone() }
}

fn haar_from(d: &HaarDoc, dim: usize) -> FormatResult<HaarFunction> {
    Ok(HaarFunction::new(d.cube.to_cube(dim)?, d.depth, d.values.clone()))
}

pub fn shift_document(spec: &HaarShiftSpec, gamma: f64) -> Document {
    let dim = spec.grid().dim();
    let terms = spec
        .terms()
        .iter()
        .map(|t| TermDoc { cube: CubeDoc::from_cube(&t.cube, dim), input: haar_doc(&t.input, dim), output: haar_doc(&t.output, dim) })
        .collect();
    Document::HaarShift(ShiftDoc {
        version: FORMAT_VERSION,
        grid: GridDoc::from_grid(spec.grid()),
        m: spec.m(),
        k: spec.k(),
        scale: spec.scale(),
        gamma,
        terms,
    })
}

pub fn shift_from_doc(doc: &ShiftDoc) -> FormatResult<(HaarShiftSpec, f64)> {
    let grid = doc.grid.to_grid()?;
    let dim = grid.dim();
    let terms = doc
        .terms
        .iter()
        .map(|t| Ok(ShiftTerm { cube: t.cube.to_cube(dim)?, input: haar_from(&t.input, dim)?, output: haar_from(&t.output, dim)? }))
        .collect::<FormatResult<Vec<_>>>()?;
    Ok((HaarShiftSpec::new(grid, doc.m, doc.k, doc.scale, terms)?, doc.gamma))
}

pub fn sparse_document(s: &SparseFamily) -> Document {
    let dim = s.grid().dim();
    let cubes = s
        .generations()
        .iter()
        .enumerate()
        .flat_map(|(k, g)| g.iter().map(move |q| GenerationCube { generation: k, cube: CubeDoc::from_cube(q, dim) }))
        .collect();
    Document::SparseFamily(SparseDoc { version: FORMAT_VERSION, grid: GridDoc::from_grid(s.grid()), cubes })
}

/// Rebuilds the family without validating it; see `twoweight_core::sparse_validate`.
pub fn sparse_from_doc(doc: &SparseDoc) -> FormatResult<SparseFamily> {
    let grid = doc.grid.to_grid()?;
    let count = doc.cubes.iter().map(|c| c.generation + 1).max().unwrap_or(0);
    let mut generations = vec![Vec::new(); count];
    for c in &doc.cubes {
        generations[c.generation].push(c.cube.to_cube(grid.dim())?);
    }
    Ok(SparseFamily::new(grid, generations))
}

pub fn coefficients_document(grid: &DyadicGrid, alpha: &CoefficientMap) -> Document {
    let entries = alpha.iter().map(|(q, v)| CoefficientEntry { cube: CubeDoc::from_cube(q, grid.dim()), value: *v }).collect();
    Document::Coefficients(CoefficientsDoc { version: FORMAT_VERSION, grid: GridDoc::from_grid(grid), entries })
}

pub fn coefficients_from_doc(doc: &CoefficientsDoc) -> FormatResult<(DyadicGrid, CoefficientMap)> {
    let grid = doc.grid.to_grid()?;
    let mut alpha = CoefficientMap::new();
    for e in &doc.entries {
        let q = e.cube.to_cube(grid.dim())?;
        if !grid.contains_cube(&q) {
            return Err(twoweight_core::Error::CubeOutsideWindow(q).into());
        }
        alpha.insert(q, e.value)?;
    }
    Ok((grid, alpha))
}

pub fn write_document<W: Write>(doc: &Document, mut out: W) -> FormatResult<()> {
    serde_json::to_writer_pretty(&mut out, doc)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_document<R: Read>(input: R) -> FormatResult<Document> {
    let doc: Document = serde_json::from_reader(input)?;
    if doc.version() != FORMAT_VERSION {
        return Err(invalid(format!("unsupported {} version {}", doc.kind(), doc.version())));
    }
    Ok(doc)
}
