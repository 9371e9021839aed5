//! Plain-text serialization: matrix CSV, C-style number formatting, and
//! factorization directories (`Q.csv`, `L.csv`, `P.csv`, `meta.json`).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::qlp::{Algorithm, QlpFactorization, SketchConfig, Triangle};
use crate::scalar::Scalar;

/// C's `%.17g`: shortest of fixed or exponent form at 17 significant digits,
/// trailing zeros removed. Round-trips every `f64`.
pub fn format_g17(x: f64) -> String {
    format_g(x, 17)
}

fn format_g(x: f64, precision: usize) -> String {
    if let Some(s) = non_finite(x) {
        return s;
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", precision - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= precision as i32 {
        format!("{}e{}", strip_zeros(mantissa), c_exponent(exp))
    } else {
        let digits = (precision as i32 - 1 - exp) as usize;
        strip_zeros(&format!("{:.*}", digits, x)).to_string()
    }
}

/// C's `%.6e`, e.g. `9.550000e-02`.
pub fn format_e6(x: f64) -> String {
    if let Some(s) = non_finite(x) {
        return s;
    }
    let sci = format!("{x:.6e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    format!("{mantissa}e{}", c_exponent(exp.parse().expect("integer exponent")))
}

fn non_finite(x: f64) -> Option<String> {
    if x.is_nan() {
        Some("nan".into())
    } else if x.is_infinite() {
        Some(if x > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        None
    }
}

fn c_exponent(exp: i32) -> String {
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{sign}{:02}", exp.abs())
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One row per line, comma separated, `%.17g` entries.
pub fn matrix_to_csv<T: Scalar>(a: &DenseMatrix<T>) -> String {
    let mut out = String::with_capacity(a.rows() * a.cols() * 24);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_g17(a[(i, j)].as_f64()));
        }
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv<T: Scalar>(text: &str, origin: &Path) -> Result<DenseMatrix<T>> {
    let parse_err = |reason: String| Error::Parse {
        path: origin.to_path_buf(),
        reason,
    };
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|field| {
                field
                    .trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| parse_err(format!("line {}: '{}': {e}", lineno + 1, field.trim())))
            })
            .collect::<Result<Vec<T>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(format!(
                    "line {} has {} fields, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err("no data rows".into()));
    }
    DenseMatrix::from_rows(&rows)
}

pub fn write_matrix_csv<T: Scalar>(path: impl AsRef<Path>, a: &DenseMatrix<T>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, matrix_to_csv(a)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<DenseMatrix<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    matrix_from_csv(&text, path)
}

/// Contents of `meta.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationMeta {
    pub algorithm: Algorithm,
    pub triangle: Triangle,
    pub rank: usize,
    pub rows: usize,
    pub cols: usize,
    pub config: Option<SketchConfig>,
    pub seed: Option<u64>,
    pub block_size: Option<usize>,
}

pub fn write_factorization<T: Scalar>(dir: impl AsRef<Path>, f: &QlpFactorization<T>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix_csv(dir.join("Q.csv"), &f.q)?;
    write_matrix_csv(dir.join("L.csv"), &f.l_factor)?;
    write_matrix_csv(dir.join("P.csv"), &f.p)?;
    let meta = FactorizationMeta {
        algorithm: f.algorithm,
        triangle: f.triangle,
        rank: f.rank(),
        rows: f.q.rows(),
        cols: f.p.rows(),
        config: f.config,
        seed: f.config.map(|c| c.seed),
        block_size: f.block_size,
    };
    let path = dir.join("meta.json");
    let json = serde_json::to_string_pretty(&meta)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_factorization<T: Scalar>(dir: impl AsRef<Path>) -> Result<QlpFactorization<T>> {
    let dir = dir.as_ref();
    let meta_path = dir.join("meta.json");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: FactorizationMeta = serde_json::from_str(&text)?;
    let q = read_matrix_csv(dir.join("Q.csv"))?;
    let l_factor = read_matrix_csv(dir.join("L.csv"))?;
    let p = read_matrix_csv(dir.join("P.csv"))?;
    let expected = [(meta.rows, meta.rank), (meta.rank, meta.rank), (meta.cols, meta.rank)];
    for (name, m, want) in [("Q", &q, expected[0]), ("L", &l_factor, expected[1]), ("P", &p, expected[2])] {
        if m.shape() != want {
            return Err(Error::Parse {
                path: dir.join(format!("{name}.csv")),
                reason: format!("shape {:?} disagrees with meta.json {:?}", m.shape(), want),
            });
        }
    }
    Ok(QlpFactorization {
        q,
        l_factor,
        p,
        algorithm: meta.algorithm,
        triangle: meta.triangle,
        config: meta.config,
        block_size: meta.block_size,
    })
}
