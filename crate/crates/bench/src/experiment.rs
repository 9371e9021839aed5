//! Experiment definitions and runners behind the CLI subcommands.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rqlp::analysis::{erqlp_bound, frobenius_bound, median, mean, rqlp_bound, track_report_with_spectrum};
use rqlp::io::{format_e6, matrix_to_csv};
use rqlp::qlp::{erqlp_run, rqlp_run};
use rqlp::svd::singular_values;
use rqlp::testmat::DEFAULT_KAPPA;
use rqlp::{
    brqlp, erqlp, pivoted_qlp, rqlp, BoundReport, Family, Matrix, QlpFactorization, RngState, SingularValues,
    SketchConfig, SpectrumKind, SpectrumSpec, TestProblem, TrackReport, TrackedMethod,
};
use serde::Serialize;

use crate::config::Settings;
use crate::error::{BenchError, Result};

/// Stream index used to derive a synthetic matrix's seed from a trial seed,
/// keeping `U`, `V` independent of the sketch `Ω`.
const MATRIX_STREAM: u64 = 0x6d61_7472_6978;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Qlp,
    Rqlp,
    Erqlp(usize),
    Brqlp(usize),
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Qlp => "qlp".into(),
            Method::Rqlp => "rqlp".into(),
            Method::Erqlp(d) => format!("erqlp_d{d}"),
            Method::Brqlp(b) => format!("brqlp_b{b}"),
        }
    }

    pub fn run(&self, a: &Matrix, sketch: &SketchConfig) -> Result<QlpFactorization<f64>> {
        Ok(match self {
            Method::Qlp => pivoted_qlp(a),
            Method::Rqlp => rqlp(a, sketch)?,
            Method::Erqlp(d) => erqlp(a, &sketch.with_inner_iterations(*d))?,
            Method::Brqlp(b) => brqlp(a, &sketch.with_block_size(*b))?,
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Everything one experiment needs; built from [`Settings`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub k: usize,
    pub p: usize,
    pub inner_iterations: Vec<usize>,
    pub block_size: Option<usize>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
    pub reps: usize,
    /// Plateau length for pds/eds.
    pub t: usize,
    /// Decay rate for pds/eds.
    pub s: f64,
    /// Fixes the synthetic matrix across trials; otherwise each trial seed draws its own.
    pub matrix_seed: Option<u64>,
    pub kappa: f64,
}

pub const DEFAULT_N: usize = 400;
pub const DEFAULT_K: usize = 60;
pub const DEFAULT_P: usize = 5;
pub const DEFAULT_TRIALS: u64 = 20;
pub const DEFAULT_REPS: usize = 5;
pub const DEFAULT_T: usize = 30;

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| BenchError::Config(format!("--{key} '{value}': {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    let items = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_one(key, s))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(BenchError::Config(format!("--{key} needs at least one value")));
    }
    Ok(items)
}

fn get<T: FromStr>(settings: &Settings, key: &str, default: T) -> Result<T>
where
    T::Err: fmt::Display,
{
    settings.get(key).map_or(Ok(default), |v| parse_one(key, v))
}

impl ExperimentConfig {
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let family: Family = get(settings, "family", Family::Pds)?;
        let sizes = settings.get("n").map_or(Ok(vec![DEFAULT_N]), |v| parse_list("n", v))?;
        let k = get(settings, "k", DEFAULT_K)?;
        let p = get(settings, "p", DEFAULT_P)?;
        let inner_iterations = settings.get("d").map_or(Ok(vec![2, 4]), |v| parse_list("d", v))?;
        let block_size = settings.get("b").map(|v| parse_one("b", v)).transpose()?;
        let seeds = match (settings.get("seed-list"), settings.get("trials")) {
            (Some(list), _) => parse_list("seed-list", list)?,
            (None, Some(trials)) => (1..=parse_one::<u64>("trials", trials)?).collect(),
            (None, None) => (1..=DEFAULT_TRIALS).collect(),
        };
        let default_s = if family == Family::Eds { 0.05 } else { 2.0 };
        let methods = match settings.get("algorithms") {
            Some(list) => parse_methods(list, &inner_iterations, block_size)?,
            None => default_methods(&inner_iterations, block_size),
        };
        let cfg = ExperimentConfig {
            family,
            sizes,
            k,
            p,
            inner_iterations,
            block_size,
            methods,
            seeds,
            out: settings.get("out").map(PathBuf::from),
            reps: get(settings, "reps", DEFAULT_REPS)?,
            t: get(settings, "t", DEFAULT_T)?,
            s: get(settings, "s", default_s)?,
            matrix_seed: settings.get("matrix-seed").map(|v| parse_one("matrix-seed", v)).transpose()?,
            kappa: get(settings, "kappa", DEFAULT_KAPPA)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(BenchError::Config(msg));
        if self.seeds.is_empty() {
            return fail("at least one trial is required".into());
        }
        if self.reps == 0 {
            return fail("--reps must be at least 1".into());
        }
        if self.methods.is_empty() {
            return fail("no algorithms selected".into());
        }
        if self.inner_iterations.contains(&0) {
            return fail("--d values must be at least 1; d = 0 is plain rqlp".into());
        }
        for &n in &self.sizes {
            match self.problem(n, self.seeds[0]) {
                TestProblem::Synthetic(spec) => spec.validate()?,
                // Cheap to build; reuses the generators' own checks.
                other => other.matrix::<f64>().map(drop)?,
            }
            let sketch = self.sketch(self.seeds[0]);
            for m in &self.methods {
                let (algorithm, cfg) = match m {
                    Method::Qlp => continue,
                    Method::Rqlp => (rqlp::Algorithm::Rqlp, sketch),
                    Method::Erqlp(d) => (rqlp::Algorithm::Erqlp, sketch.with_inner_iterations(*d)),
                    Method::Brqlp(b) => (rqlp::Algorithm::Brqlp, sketch.with_block_size(*b)),
                };
                cfg.validate((n, n), algorithm)?;
            }
            if self.k > n {
                return fail(format!("k = {} exceeds n = {n}", self.k));
            }
        }
        Ok(())
    }

    pub fn sketch(&self, seed: u64) -> SketchConfig {
        SketchConfig::new(self.k, self.p).with_seed(seed)
    }

    /// The matrix for size `n` in the trial with seed `seed`.
    pub fn problem(&self, n: usize, seed: u64) -> TestProblem {
        let kind = match self.family {
            Family::Pds => SpectrumKind::Pds,
            Family::Eds => SpectrumKind::Eds,
            Family::Heat => return TestProblem::Heat { n, kappa: self.kappa },
            Family::Phillips => return TestProblem::Phillips { n },
        };
        let matrix_seed = self.matrix_seed.unwrap_or_else(|| RngState::new(seed).split(MATRIX_STREAM).next_u64());
        TestProblem::Synthetic(SpectrumSpec { n, kind, t: self.t, s: self.s, seed: matrix_seed })
    }

    /// Whether the matrix changes from trial to trial.
    pub fn matrix_varies(&self) -> bool {
        matches!(self.family, Family::Pds | Family::Eds) && self.matrix_seed.is_none()
    }
}

fn default_methods(ds: &[usize], b: Option<usize>) -> Vec<Method> {
    let mut methods = vec![Method::Qlp, Method::Rqlp];
    methods.extend(ds.iter().map(|&d| Method::Erqlp(d)));
    methods.extend(b.map(Method::Brqlp));
    methods
}

fn parse_methods(list: &str, ds: &[usize], b: Option<usize>) -> Result<Vec<Method>> {
    let mut methods = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name {
            "qlp" => methods.push(Method::Qlp),
            "rqlp" => methods.push(Method::Rqlp),
            "erqlp" => methods.extend(ds.iter().map(|&d| Method::Erqlp(d))),
            "brqlp" => methods.push(Method::Brqlp(
                b.ok_or_else(|| BenchError::Config("brqlp needs --b".into()))?,
            )),
            other => return Err(BenchError::Config(format!("unknown algorithm '{other}'"))),
        }
    }
    Ok(methods)
}

/// A matrix together with its (exact or oracle) singular values.
#[derive(Clone)]
pub struct Instance {
    pub problem: TestProblem,
    pub matrix: Matrix,
    pub spectrum: SingularValues,
}

impl Instance {
    pub fn build(problem: TestProblem) -> Result<Self> {
        let matrix = problem.matrix()?;
        let spectrum = match problem.known_spectrum() {
            Some(sv) => sv?,
            None => singular_values(&matrix)?,
        };
        Ok(Instance { problem, matrix, spectrum })
    }
}

/// Builds matrices per trial, reusing one instance when the matrix does not vary.
struct Instances<'a> {
    cfg: &'a ExperimentConfig,
    cached: Option<(usize, Instance)>,
}

impl<'a> Instances<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        Instances { cfg, cached: None }
    }

    fn get(&mut self, n: usize, seed: u64) -> Result<Instance> {
        let problem = self.cfg.problem(n, seed);
        if self.cfg.matrix_varies() {
            return Instance::build(problem);
        }
        match &self.cached {
            Some((cn, inst)) if *cn == n => Ok(inst.clone()),
            _ => {
                let inst = Instance::build(problem)?;
                self.cached = Some((n, inst.clone()));
                Ok(inst)
            }
        }
    }
}

/// Runs `f` `reps` times; returns the median wall-clock seconds and the last result.
pub fn timed<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let out = f()?;
        times.push(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    Ok((median(&times), last.expect("at least one repetition")))
}

/// `max_{j ≤ k} |σ_j(A) − |L_jj||`.
pub fn err_of(spectrum: &SingularValues, f: &QlpFactorization<f64>, k: usize) -> Result<f64> {
    Ok(rqlp::err_metric(spectrum, f, k)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub algorithm: String,
    /// `None` for the median row.
    pub seed: Option<u64>,
    pub time_s: f64,
    pub err: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub family: Family,
    pub rows: Vec<TableRow>,
}

impl Table {
    pub fn to_csv(&self, with_time: bool) -> String {
        let mut out = String::from(if with_time { "n,algorithm,seed,time_s,err\n" } else { "n,algorithm,seed,err\n" });
        for r in &self.rows {
            let seed = r.seed.map_or_else(|| "median".to_string(), |s| s.to_string());
            out.push_str(&format!("{},{},{seed},", r.n, r.algorithm));
            if with_time {
                out.push_str(&format_e6(r.time_s));
                out.push(',');
            }
            out.push_str(&format_e6(r.err));
            out.push('\n');
        }
        out
    }

    pub fn median_row(&self, n: usize, algorithm: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.n == n && r.algorithm == algorithm && r.seed.is_none())
    }

    /// Per-seed rows for one `(n, algorithm)`.
    pub fn trials(&self, n: usize, algorithm: &str) -> Vec<&TableRow> {
        self.rows.iter().filter(|r| r.n == n && r.algorithm == algorithm && r.seed.is_some()).collect()
    }
}

/// Timing and err for every `(n, algorithm, seed)`, plus a median row per `(n, algorithm)`.
pub fn run_table(cfg: &ExperimentConfig) -> Result<Table> {
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let mut per_method: Vec<Vec<TableRow>> = vec![Vec::new(); cfg.methods.len()];
        let mut instances = Instances::new(cfg);
        for &seed in &cfg.seeds {
            let inst = instances.get(n, seed)?;
            let sketch = cfg.sketch(seed);
            for (slot, method) in per_method.iter_mut().zip(&cfg.methods) {
                let (time_s, f) = timed(cfg.reps, || method.run(&inst.matrix, &sketch))?;
                slot.push(TableRow {
                    n,
                    algorithm: method.label(),
                    seed: Some(seed),
                    time_s,
                    err: err_of(&inst.spectrum, &f, cfg.k)?,
                    residual: f.residual_norm(&inst.matrix)?,
                });
            }
        }
        for trials in per_method {
            let summary = TableRow {
                n,
                algorithm: trials[0].algorithm.clone(),
                seed: None,
                time_s: median(&trials.iter().map(|r| r.time_s).collect::<Vec<_>>()),
                err: median(&trials.iter().map(|r| r.err).collect::<Vec<_>>()),
                residual: median(&trials.iter().map(|r| r.residual).collect::<Vec<_>>()),
            };
            rows.extend(trials);
            rows.push(summary);
        }
    }
    Ok(Table { family: cfg.family, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tracking {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub report: TrackReport,
}

impl Tracking {
    pub fn file_stem(&self) -> String {
        format!("track_{}_n{}_seed{}", self.family, self.n, self.seed)
    }
}

/// Per-j singular value approximations from CPQR, QLP, RQLP and ERQLP(d).
pub fn run_tracking(cfg: &ExperimentConfig) -> Result<Vec<Tracking>> {
    let mut methods = vec![TrackedMethod::Cpqr, TrackedMethod::Qlp, TrackedMethod::Rqlp];
    methods.extend(cfg.inner_iterations.iter().map(|&d| TrackedMethod::Erqlp(d)));
    let mut out = Vec::new();
    for &n in &cfg.sizes {
        let mut instances = Instances::new(cfg);
        for &seed in &cfg.seeds {
            let inst = instances.get(n, seed)?;
            let report = track_report_with_spectrum(&inst.matrix, &inst.spectrum, cfg.k, &methods, &cfg.sketch(seed))?;
            out.push(Tracking { family: cfg.family, n, seed, report });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub family: Family,
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub frobenius_bound: f64,
    pub residuals: Vec<f64>,
    pub mean_residual: f64,
    pub max_residual: f64,
    /// Sample mean within the bound.
    pub mean_ok: bool,
    /// Every seed within three times the bound.
    pub per_seed_ok: bool,
    /// Tracking bounds for the first seed (indicative).
    pub rqlp_report: BoundReport,
    pub erqlp_reports: Vec<(usize, BoundReport)>,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.mean_ok && self.per_seed_ok
    }
}

/// Monte-Carlo check of the expected Frobenius error bound, plus the
/// tracking-bound ingredients for the first seed.
pub fn verify_bounds(cfg: &ExperimentConfig) -> Result<Vec<BoundCheck>> {
    let mut checks = Vec::new();
    for &n in &cfg.sizes {
        let mut instances = Instances::new(cfg);
        let mut residuals = Vec::with_capacity(cfg.seeds.len());
        let mut bound = None;
        let mut reports = None;
        for &seed in &cfg.seeds {
            let inst = instances.get(n, seed)?;
            let sketch = cfg.sketch(seed);
            let run = rqlp_run(&inst.matrix, &sketch)?;
            residuals.push(run.factorization.residual_norm(&inst.matrix)?);
            if bound.is_none() {
                bound = Some(frobenius_bound(&inst.spectrum, cfg.k, cfg.p)?);
                let rq = rqlp_bound(&inst.spectrum, &run.reduced, &run.factorization.l_factor, cfg.k, cfg.p)?;
                let mut er = Vec::new();
                for &d in &cfg.inner_iterations {
                    let erun = erqlp_run(&inst.matrix, &sketch.with_inner_iterations(d))?;
                    er.push((d, erqlp_bound(&inst.spectrum, &erun.reduced, &erun.r_factors, cfg.k, d)?));
                }
                reports = Some((rq, er));
            }
        }
        let bound = bound.expect("at least one seed");
        let (rqlp_report, erqlp_reports) = reports.expect("at least one seed");
        let mean_residual = mean(&residuals);
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        checks.push(BoundCheck {
            family: cfg.family,
            n,
            k: cfg.k,
            p: cfg.p,
            frobenius_bound: bound,
            mean_ok: mean_residual <= bound,
            per_seed_ok: max_residual <= 3.0 * bound,
            residuals,
            mean_residual,
            max_residual,
            rqlp_report,
            erqlp_reports,
        });
    }
    Ok(checks)
}

pub fn bounds_csv(checks: &[BoundCheck]) -> String {
    let mut out = String::from("family,n,k,p,bound,mean_residual,max_residual,mean_ok,per_seed_ok\n");
    for c in checks {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.family,
            c.n,
            c.k,
            c.p,
            format_e6(c.frobenius_bound),
            format_e6(c.mean_residual),
            format_e6(c.max_residual),
            c.mean_ok,
            c.per_seed_ok
        ));
    }
    out
}

/// Parameters for `gen`, given as `key=value` words after the size.
pub fn gen_problem(family: Family, n: usize, params: &[String]) -> Result<TestProblem> {
    let mut settings = Settings::default();
    let mut seed = 0u64;
    for word in params {
        let (key, value) = word
            .split_once('=')
            .ok_or_else(|| BenchError::Config(format!("expected key=value, got '{word}'")))?;
        match key.trim() {
            "seed" => seed = parse_one("seed", value)?,
            "t" | "s" | "kappa" => settings.set(key.trim(), value.trim()),
            other => return Err(BenchError::Config(format!("unknown generator parameter '{other}'"))),
        }
    }
    let default_s = if family == Family::Eds { 0.05 } else { 2.0 };
    let problem = match family {
        Family::Pds | Family::Eds => TestProblem::Synthetic(SpectrumSpec {
            n,
            kind: if family == Family::Pds { SpectrumKind::Pds } else { SpectrumKind::Eds },
            t: get(&settings, "t", DEFAULT_T.min(n))?,
            s: get(&settings, "s", default_s)?,
            seed,
        }),
        Family::Heat => TestProblem::Heat { n, kappa: get(&settings, "kappa", DEFAULT_KAPPA)? },
        Family::Phillips => TestProblem::Phillips { n },
    };
    problem.matrix::<f64>().map(drop)?;
    Ok(problem)
}

pub fn gen_csv(problem: &TestProblem) -> Result<String> {
    Ok(matrix_to_csv(&problem.matrix::<f64>()?))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| BenchError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> Settings {
        let mut s = Settings::default();
        for (k, v) in pairs {
            s.set(k, v);
        }
        s
    }

    #[test]
    fn defaults() {
        let cfg = ExperimentConfig::from_settings(&Settings::default()).unwrap();
        assert_eq!(cfg.sizes, vec![400]);
        assert_eq!((cfg.k, cfg.p, cfg.reps), (60, 5, 5));
        assert_eq!(cfg.seeds, (1..=20).collect::<Vec<_>>());
        assert_eq!(cfg.methods, vec![Method::Qlp, Method::Rqlp, Method::Erqlp(2), Method::Erqlp(4)]);
    }

    #[test]
    fn invalid_configs() {
        assert!(ExperimentConfig::from_settings(&settings(&[("family", "phillips"), ("n", "10")])).is_err());
        assert!(ExperimentConfig::from_settings(&settings(&[("n", "50"), ("k", "48")])).is_err());
        assert!(ExperimentConfig::from_settings(&settings(&[("b", "7"), ("algorithms", "brqlp")])).is_err());
        assert!(ExperimentConfig::from_settings(&settings(&[("algorithms", "svd")])).is_err());
        assert!(ExperimentConfig::from_settings(&settings(&[("reps", "0")])).is_err());
    }

    #[test]
    fn small_table_is_deterministic() {
        let s = settings(&[("n", "40"), ("k", "6"), ("p", "3"), ("seed-list", "1,2,3"), ("reps", "1"), ("t", "5")]);
        let cfg = ExperimentConfig::from_settings(&s).unwrap();
        let a = run_table(&cfg).unwrap();
        let b = run_table(&cfg).unwrap();
        assert_eq!(a.to_csv(false), b.to_csv(false));
        assert_eq!(a.rows.len(), 4 * 4);
        assert!(a.median_row(40, "rqlp").is_some());
        assert_eq!(a.trials(40, "erqlp_d2").len(), 3);
    }

    #[test]
    fn gen_pds_spectrum() {
        let problem = gen_problem(Family::Pds, 8, &["t=2".into(), "s=1".into()]).unwrap();
        let sv = problem.known_spectrum::<f64>().unwrap().unwrap();
        let want = [1.0, 1.0, 0.5, 1.0 / 3.0, 0.25, 0.2, 1.0 / 6.0, 1.0 / 7.0];
        for (g, w) in sv.as_slice().iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        assert!(gen_problem(Family::Phillips, 10, &[]).is_err());
        assert!(gen_problem(Family::Heat, 10, &["depth=3".into()]).is_err());
    }
}
