//! Test matrices: synthetic spectra with random singular vectors, and the
//! `heat` and `phillips` discretizations from Hansen's Regularization Tools.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::random::{random_orthogonal, RngState};
use crate::scalar::Scalar;
use crate::svd::SingularValueList;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    /// `1,…,1, 2⁻ˢ, 3⁻ˢ, …, (n−t+1)⁻ˢ`
    Pds,
    /// `1,…,1, 2⁻ˢ, 2⁻²ˢ, …, 2⁻⁽ⁿ⁻ᵗ⁾ˢ`
    Eds,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub n: usize,
    pub kind: SpectrumKind,
    /// Number of leading unit singular values.
    pub t: usize,
    /// Decay rate.
    pub s: f64,
    pub seed: u64,
}

impl SpectrumSpec {
    pub fn validate(&self) -> Result<()> {
        if self.t < 1 || self.t > self.n {
            return Err(Error::Config(format!("plateau length t = {} must lie in 1..={}", self.t, self.n)));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::Config(format!("decay rate s = {} must be positive", self.s)));
        }
        Ok(())
    }
}

pub fn spectrum<T: Scalar>(spec: &SpectrumSpec) -> Result<SingularValueList<T>> {
    spec.validate()?;
    let values = (0..spec.n)
        .map(|j| {
            if j < spec.t {
                return T::one();
            }
            let i = (j + 1 - spec.t) as f64;
            let v = match spec.kind {
                SpectrumKind::Pds => (i + 1.0).powf(-spec.s),
                SpectrumKind::Eds => (-i * spec.s).exp2(),
            };
            T::lit(v)
        })
        .collect();
    SingularValueList::new(values)
}

/// `U·Σ·Vᵀ` with Haar-random orthogonal `U` and `V` drawn from `spec.seed`.
pub fn synthetic_matrix<T: Scalar>(spec: &SpectrumSpec) -> Result<DenseMatrix<T>> {
    let sigma = spectrum::<T>(spec)?;
    let mut rng = RngState::new(spec.seed);
    let u: DenseMatrix<T> = random_orthogonal(&mut rng, spec.n);
    let v: DenseMatrix<T> = random_orthogonal(&mut rng, spec.n);
    let mut scaled = u;
    for j in 0..spec.n {
        let s = sigma[j];
        for x in scaled.col_mut(j) {
            *x *= s;
        }
    }
    scaled.matmul_tr(&v)
}

pub const DEFAULT_KAPPA: f64 = 1.0;

/// Inverse heat equation: a Volterra convolution with kernel
/// `k(t) = t^{-3/2} / (2κ√π) · exp(−1/(4κ²t))`, midpoint rule on `[0, 1]`.
/// Lower-triangular Toeplitz with first column `h·k(tᵢ)`, `tᵢ = (i − ½)h`.
pub fn heat_matrix<T: Scalar>(n: usize, kappa: f64) -> Result<DenseMatrix<T>> {
    if n < 2 {
        return Err(Error::Config(format!("heat needs n >= 2, got {n}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Config(format!("heat needs kappa > 0, got {kappa}")));
    }
    let h = 1.0 / n as f64;
    let c = h / (2.0 * kappa * PI.sqrt());
    let column: Vec<f64> = (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            c * t.powf(-1.5) * (-1.0 / (4.0 * kappa * kappa * t)).exp()
        })
        .collect();
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        if i >= j {
            T::lit(column[i - j])
        } else {
            T::zero()
        }
    }))
}

/// Phillips' test problem: Galerkin discretization with box functions of the
/// kernel `φ(y − z)`, `φ(x) = 1 + cos(πx/3)` for `|x| < 3`, on `[−6, 6]`,
/// scaled by `1/h`. Symmetric banded Toeplitz; `n` must be a multiple of 4.
pub fn phillips_matrix<T: Scalar>(n: usize) -> Result<DenseMatrix<T>> {
    if n == 0 || n % 4 != 0 {
        return Err(Error::Config(format!("phillips needs n divisible by 4, got {n}")));
    }
    let h = 12.0 / n as f64;
    let quarter = n / 4;
    let theta = 4.0 * PI / n as f64;
    let scale = 9.0 / (h * PI * PI);
    let mut first_row = vec![0.0; n];
    for (m, entry) in first_row.iter_mut().enumerate().take(quarter) {
        let m = m as f64;
        let curvature = 2.0 * (m * theta).cos() - ((m - 1.0) * theta).cos() - ((m + 1.0) * theta).cos();
        *entry = h + scale * curvature;
    }
    first_row[quarter] = h / 2.0 + scale * (theta.cos() - 1.0);
    Ok(DenseMatrix::from_fn(n, n, |i, j| T::lit(first_row[i.abs_diff(j)])))
}

/// A matrix family together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum TestProblem {
    Synthetic(SpectrumSpec),
    Heat { n: usize, kappa: f64 },
    Phillips { n: usize },
}

impl TestProblem {
    pub fn n(&self) -> usize {
        match self {
            TestProblem::Synthetic(s) => s.n,
            TestProblem::Heat { n, .. } | TestProblem::Phillips { n } => *n,
        }
    }

    pub fn family(&self) -> Family {
        match self {
            TestProblem::Synthetic(SpectrumSpec { kind: SpectrumKind::Pds, .. }) => Family::Pds,
            TestProblem::Synthetic(SpectrumSpec { kind: SpectrumKind::Eds, .. }) => Family::Eds,
            TestProblem::Heat { .. } => Family::Heat,
            TestProblem::Phillips { .. } => Family::Phillips,
        }
    }

    pub fn matrix<T: Scalar>(&self) -> Result<DenseMatrix<T>> {
        match self {
            TestProblem::Synthetic(spec) => synthetic_matrix(spec),
            TestProblem::Heat { n, kappa } => heat_matrix(*n, *kappa),
            TestProblem::Phillips { n } => phillips_matrix(*n),
        }
    }

    /// Exact singular values, when known in closed form.
    pub fn known_spectrum<T: Scalar>(&self) -> Option<Result<SingularValueList<T>>> {
        match self {
            TestProblem::Synthetic(spec) => Some(spectrum(spec)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Pds,
    Eds,
    Heat,
    Phillips,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Pds, Family::Eds, Family::Heat, Family::Phillips];

    pub fn name(self) -> &'static str {
        match self {
            Family::Pds => "pds",
            Family::Eds => "eds",
            Family::Heat => "heat",
            Family::Phillips => "phillips",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pds" => Ok(Family::Pds),
            "eds" => Ok(Family::Eds),
            "heat" => Ok(Family::Heat),
            "phillips" => Ok(Family::Phillips),
            other => Err(Error::Config(format!("unknown matrix family '{other}'"))),
        }
    }
}
