//! Error metrics, numerical evaluation of the theoretical bounds, and
//! singular-value tracking reports.
//!
//! The bounds contain big-O terms whose constants are never given; the
//! evaluators use an implied constant of 1, so `per_j_bound` is indicative
//! only. The Frobenius bound is constant-free and can be checked directly.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::format_e6;
use crate::matrix::DenseMatrix;
use crate::qlp::{erqlp, pivoted_qlp, rqlp, QlpFactorization, SketchConfig};
use crate::qr::qr_column_pivoted;
use crate::scalar::Scalar;
use crate::svd::{singular_values, spectral_norm, SingularValueList};

/// `max_{j<k} |σ_j(A) − |L_jj||`.
pub fn err_metric<T: Scalar>(a_sv: &SingularValueList<T>, f: &QlpFactorization<T>, k: usize) -> Result<f64> {
    let values = f.l_values();
    if k > a_sv.len() || k > values.len() {
        return Err(Error::Config(format!(
            "err metric over {k} values needs at least that many singular values ({}) and L-values ({})",
            a_sv.len(),
            values.len()
        )));
    }
    Ok(max_deviation(&to_f64(a_sv.as_slice())[..k], &to_f64(&values)[..k]))
}

fn max_deviation(reference: &[f64], approx: &[f64]) -> f64 {
    reference.iter().zip(approx).map(|(s, v)| (s - v).abs()).fold(0.0, f64::max)
}

fn to_f64<T: Scalar>(xs: &[T]) -> Vec<f64> {
    xs.iter().map(|x| x.as_f64()).collect()
}

/// Expected Frobenius error bound `(1 + k/(p−1))^½ · (Σ_{j>k} σ_j²)^½`.
pub fn frobenius_bound<T: Scalar>(a_sv: &SingularValueList<T>, k: usize, p: usize) -> Result<f64> {
    if p <= 2 {
        return Err(Error::Hypothesis(format!("the expected-error bound needs p > 2, got p = {p}")));
    }
    if k > a_sv.len() {
        return Err(Error::Config(format!("k = {k} exceeds the {} singular values given", a_sv.len())));
    }
    let tail: f64 = a_sv.as_slice()[k..].iter().map(|s| s.as_f64().powi(2)).sum();
    Ok((1.0 + k as f64 / (p as f64 - 1.0)).sqrt() * tail.sqrt())
}

/// `C = 4e√ℓ(√(n−ℓ+p) + √ℓ + 7)`.
pub fn c_constant(n: usize, ell: usize, p: usize) -> f64 {
    let ell_f = ell as f64;
    let inner = (n + p).saturating_sub(ell) as f64;
    4.0 * E * ell_f.sqrt() * (inner.sqrt() + ell_f.sqrt() + 7.0)
}

/// The rank-revealing hypotheses on the leading/trailing blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Hypotheses {
    /// `γ ≥ σ_k(B)/√(k(n−k+1))`.
    pub gamma_lower: bool,
    /// `‖trailing block‖₂ ≤ σ_{k+1}(B)·√((k+1)(n−k))`.
    pub tail_upper: bool,
    /// `ρ < 1`.
    pub rho_below_one: bool,
}

impl Hypotheses {
    pub fn all(&self) -> bool {
        self.gamma_lower && self.tail_upper && self.rho_below_one
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub k: usize,
    pub c_const: f64,
    /// `τ_j = σ_{k+1}(A)/σ_j(A)`, `j = 1..k`.
    pub tau: Vec<f64>,
    /// `σ_min` of the leading k×k block of the final triangular factor.
    pub gamma: f64,
    /// `‖trailing block‖₂ / γ`.
    pub rho: f64,
    /// `‖L₂₁‖₂` for RQLP, `‖R₁₂⁽⁰⁾‖₂` for ERQLP.
    pub l21_norm: f64,
    /// `‖L₂₂‖₂` for RQLP, `‖R₂₂⁽⁰⁾‖₂` for ERQLP (the block the hypotheses test).
    pub tail_norm: f64,
    /// `σ_{k+1}(B)/σ_k(B)`; 1 for a degenerate gap.
    pub gap_ratio: f64,
    /// `gap_ratio^{2d}`; 1 for RQLP.
    pub decay_factor: f64,
    pub hypotheses: Hypotheses,
    /// Sampling term `1 − 1/√(1 + C²τ_j²)`.
    pub sampling_term: Vec<f64>,
    /// Sampling term plus the triangular-factor term with implied constant 1.
    pub per_j_bound: Vec<f64>,
    pub vacuous: bool,
}

struct Common {
    c_const: f64,
    tau: Vec<f64>,
    sampling_term: Vec<f64>,
    gap_ratio: f64,
    sigma_k_b: f64,
    sigma_k1_b: f64,
}

fn common<T: Scalar>(a_sv: &SingularValueList<T>, b: &DenseMatrix<T>, ell: usize, k: usize) -> Result<Common> {
    let n = b.cols();
    if k == 0 || k >= ell || ell > b.rows() || k >= a_sv.len() {
        return Err(Error::Config(format!(
            "bound needs 0 < k < ℓ ≤ rows(B) and k < #σ(A); got k = {k}, ℓ = {ell}, B {:?}, {} singular values",
            b.shape(),
            a_sv.len()
        )));
    }
    let p = ell - k;
    let sigma = to_f64(a_sv.as_slice());
    let tail = sigma[k];
    let tau: Vec<f64> = sigma[..k].iter().map(|&s| if s > 0.0 { tail / s } else { 1.0 }).collect();
    let c_const = c_constant(n, ell, p);
    let sampling_term = tau.iter().map(|t| 1.0 - 1.0 / (1.0 + (c_const * t).powi(2)).sqrt()).collect();
    let b_sv = singular_values(b)?;
    let sigma_k_b = b_sv[k - 1].as_f64();
    let sigma_k1_b = if k < b_sv.len() { b_sv[k].as_f64() } else { 0.0 };
    let gap_ratio = if sigma_k_b > sigma_k1_b { sigma_k1_b / sigma_k_b } else { 1.0 };
    Ok(Common { c_const, tau, sampling_term, gap_ratio, sigma_k_b, sigma_k1_b })
}

fn smallest_singular_value<T: Scalar>(a: &DenseMatrix<T>) -> Result<f64> {
    let sv = singular_values(a)?;
    Ok(sv.as_slice().last().map_or(0.0, |s| s.as_f64()))
}

fn norm2<T: Scalar>(a: &DenseMatrix<T>) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(spectral_norm(a)?.as_f64())
}

fn check_hypotheses(gamma: f64, tail_norm: f64, rho: f64, n: usize, k: usize, c: &Common) -> Hypotheses {
    let (kf, nf) = (k as f64, n as f64);
    Hypotheses {
        gamma_lower: gamma >= c.sigma_k_b / (kf * (nf - kf + 1.0)).sqrt(),
        tail_upper: tail_norm <= c.sigma_k1_b * ((kf + 1.0) * (nf - kf)).sqrt(),
        rho_below_one: rho < 1.0,
    }
}

/// Evaluates the RQLP tracking bound for the ℓ×ℓ lower-triangular `l_factor`
/// of `B = Vᵀ·A`.
pub fn rqlp_bound<T: Scalar>(
    a_sv: &SingularValueList<T>,
    b: &DenseMatrix<T>,
    l_factor: &DenseMatrix<T>,
    k: usize,
    p: usize,
) -> Result<BoundReport> {
    let ell = l_factor.rows();
    if ell != k + p || l_factor.cols() != ell {
        return Err(Error::Config(format!(
            "L must be (k+p)×(k+p) = {}×{}, got {:?}",
            k + p,
            k + p,
            l_factor.shape()
        )));
    }
    let c = common(a_sv, b, ell, k)?;
    let gamma = smallest_singular_value(&l_factor.submatrix(0..k, 0..k))?;
    let l21_norm = norm2(&l_factor.submatrix(k..ell, 0..k))?;
    let tail_norm = norm2(&l_factor.submatrix(k..ell, k..ell))?;
    let rho = if gamma > 0.0 { tail_norm / gamma } else { f64::INFINITY };
    let hypotheses = check_hypotheses(gamma, tail_norm, rho, b.cols(), k, &c);
    let second = l21_norm.powi(2) / ((1.0 - rho * rho) * gamma * gamma);
    Ok(assemble(c, k, gamma, rho, l21_norm, tail_norm, 1.0, second, hypotheses))
}

/// Evaluates the ERQLP tracking bound from `r_factors = [R⁽⁰⁾, …, R⁽ᵈ⁾]`.
pub fn erqlp_bound<T: Scalar>(
    a_sv: &SingularValueList<T>,
    b: &DenseMatrix<T>,
    r_factors: &[DenseMatrix<T>],
    k: usize,
    d: usize,
) -> Result<BoundReport> {
    if r_factors.len() != d + 1 {
        return Err(Error::Config(format!("expected {} R factors for d = {d}, got {}", d + 1, r_factors.len())));
    }
    let r0 = &r_factors[0];
    let rd = &r_factors[d];
    let ell = rd.rows();
    let n = b.cols();
    let c = common(a_sv, b, ell, k)?;

    let gamma0 = smallest_singular_value(&r0.submatrix(0..k, 0..k))?;
    let r12_0 = norm2(&r0.submatrix(0..k, k..r0.cols()))?;
    let r22_0 = norm2(&r0.submatrix(k..r0.rows(), k..r0.cols()))?;
    let gamma = smallest_singular_value(&rd.submatrix(0..k, 0..k))?;
    let rd22 = norm2(&rd.submatrix(k..ell, k..rd.cols()))?;
    let rho = if gamma > 0.0 { rd22 / gamma } else { f64::INFINITY };

    let hypotheses = check_hypotheses(gamma0, r22_0, rho, n, k, &c);
    let decay_factor = c.gap_ratio.powi(2 * d as i32);
    let growth = (n as f64).powf((4 * d + 1) as f64 / 2.0);
    let second = decay_factor * growth * r12_0.powi(2) / ((1.0 - rho * rho) * gamma * gamma);
    Ok(assemble(c, k, gamma, rho, r12_0, r22_0, decay_factor, second, hypotheses))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    c: Common,
    k: usize,
    gamma: f64,
    rho: f64,
    l21_norm: f64,
    tail_norm: f64,
    decay_factor: f64,
    second: f64,
    hypotheses: Hypotheses,
) -> BoundReport {
    // 0·∞ from an exactly zero off-diagonal block with ρ ≥ 1 counts as 0.
    let second = if second.is_nan() { 0.0 } else { second };
    let per_j_bound = c.sampling_term.iter().map(|s| s + second).collect();
    let vacuous = !hypotheses.all() || c.gap_ratio >= 1.0;
    BoundReport {
        k,
        c_const: c.c_const,
        tau: c.tau,
        gamma,
        rho,
        l21_norm,
        tail_norm,
        gap_ratio: c.gap_ratio,
        decay_factor,
        hypotheses,
        sampling_term: c.sampling_term,
        per_j_bound,
        vacuous,
    }
}

/// A factorization whose diagonal is compared against the singular values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TrackedMethod {
    /// R-values of column-pivoted QR.
    Cpqr,
    Qlp,
    Rqlp,
    Erqlp(usize),
}

impl TrackedMethod {
    pub fn label(&self) -> String {
        match self {
            TrackedMethod::Cpqr => "cpqr".into(),
            TrackedMethod::Qlp => "qlp".into(),
            TrackedMethod::Rqlp => "rqlp".into(),
            TrackedMethod::Erqlp(d) => format!("erqlp_d{d}"),
        }
    }

    fn is_randomized(&self) -> bool {
        matches!(self, TrackedMethod::Rqlp | TrackedMethod::Erqlp(_))
    }

    /// Leading `k` diagonal magnitudes.
    pub fn values<T: Scalar>(&self, a: &DenseMatrix<T>, k: usize, cfg: &SketchConfig) -> Result<Vec<f64>> {
        let all = match self {
            TrackedMethod::Cpqr => qr_column_pivoted(a).r_values(),
            TrackedMethod::Qlp => pivoted_qlp(a).l_values(),
            TrackedMethod::Rqlp => rqlp(a, cfg)?.l_values(),
            TrackedMethod::Erqlp(d) => erqlp(a, &cfg.with_inner_iterations(*d))?.l_values(),
        };
        Ok(to_f64(&all[..k]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackSeries {
    pub method: String,
    pub values: Vec<f64>,
    /// `max_j |σ_j − v_j|`.
    pub err: f64,
    /// `(σ_j − v_j)/σ_j`, or the absolute error where `σ_j = 0`.
    pub relative_err: Vec<f64>,
}

impl TrackSeries {
    pub fn new(method: String, true_sv: &[f64], values: Vec<f64>) -> Self {
        let relative_err = true_sv
            .iter()
            .zip(&values)
            .map(|(&s, &v)| if s == 0.0 { (s - v).abs() } else { (s - v) / s })
            .collect();
        TrackSeries {
            method,
            err: max_deviation(true_sv, &values),
            values,
            relative_err,
        }
    }

    /// `Σ_j |σ_j − v_j|`.
    pub fn total_deviation(&self, true_sv: &[f64]) -> f64 {
        true_sv.iter().zip(&self.values).map(|(s, v)| (s - v).abs()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackReport {
    pub k: usize,
    pub true_sv: Vec<f64>,
    pub series: Vec<TrackSeries>,
}

/// Computes the singular values of `a` with the oracle, then tracks them.
pub fn track_report<T: Scalar>(
    a: &DenseMatrix<T>,
    k: usize,
    methods: &[TrackedMethod],
    cfg: &SketchConfig,
) -> Result<TrackReport> {
    let sv = singular_values(a)?;
    track_report_with_spectrum(a, &sv, k, methods, cfg)
}

/// As [`track_report`], with the singular values of `a` supplied.
pub fn track_report_with_spectrum<T: Scalar>(
    a: &DenseMatrix<T>,
    a_sv: &SingularValueList<T>,
    k: usize,
    methods: &[TrackedMethod],
    cfg: &SketchConfig,
) -> Result<TrackReport> {
    let limit = a.rows().min(a.cols()).min(a_sv.len());
    if k > limit {
        return Err(Error::Config(format!("cannot track {k} values of a {:?} matrix", a.shape())));
    }
    if methods.iter().any(TrackedMethod::is_randomized) && k > cfg.ell() {
        return Err(Error::Config(format!("k = {k} exceeds the sketch width {}", cfg.ell())));
    }
    let true_sv = to_f64(&a_sv.as_slice()[..k]);
    let series = methods
        .iter()
        .map(|m| Ok(TrackSeries::new(m.label(), &true_sv, m.values(a, k, cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrackReport { k, true_sv, series })
}

impl TrackReport {
    pub fn series(&self, method: &str) -> Option<&TrackSeries> {
        self.series.iter().find(|s| s.method == method)
    }

    /// One row per j: `j, sigma, <method>...`, `%.6e` entries.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,sigma");
        for s in &self.series {
            out.push(',');
            out.push_str(&s.method);
        }
        out.push('\n');
        for j in 0..self.k {
            out.push_str(&format!("{},{}", j + 1, format_e6(self.true_sv[j])));
            for s in &self.series {
                out.push(',');
                out.push_str(&format_e6(s.values[j]));
            }
            out.push('\n');
        }
        out
    }

    /// Per-method `err` values as JSON.
    pub fn summary_json(&self) -> serde_json::Value {
        let errs: serde_json::Map<String, serde_json::Value> =
            self.series.iter().map(|s| (s.method.clone(), s.err.into())).collect();
        serde_json::json!({ "k": self.k, "err": errs })
    }
}

impl BoundReport {
    /// One row per j: `j, tau, sampling_term, per_j_bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,tau,sampling_term,per_j_bound\n");
        for j in 0..self.k {
            out.push_str(&format!(
                "{},{},{},{}\n",
                j + 1,
                format_e6(self.tau[j]),
                format_e6(self.sampling_term[j]),
                format_e6(self.per_j_bound[j])
            ));
        }
        out
    }
}

/// Median; the mean of the middle pair for even lengths. NaN for empty input.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
