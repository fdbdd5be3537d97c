use std::path::{Path, PathBuf};
use std::time::Instant;

use fockspin::eprb::analyzers::correlation_with_weight;
use fockspin::eprb::{correlation_closed_form, correlation_1q, fit_two_gamma, CorrelationSample, FockEprbModel};
use fockspin::eprb::AnalyzerPair;
use fockspin::field::entanglement::{
    correlation_field, entanglement_l_gaussian, entanglement_l_point, entanglement_l_quadrature, steepest_descent_l,
    ValidityReport,
};
use fockspin::field::lattice::{lattice_entanglement_l, lattice_exact_correlation, loglog_slope, LatticeExact};
use fockspin::field::CouplingProfile;
use fockspin::verify::{run_suite, Bound, Check, Suite};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::config::{ContinuumInput, EprbInput, LatticeInput, Model, ScenarioConfig, SweepPoint, DEFAULT_EPSILONS};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Format, Row, RowWriter};

/// Bound on the steepest-descent smoothness ratios and on packet spreading.
pub const SD_VALIDITY_THRESHOLD: f64 = 0.05;
/// Smallest distance from the saddle to a window edge, in time-Gaussian widths.
pub const SD_MIN_WINDOW_MARGIN: f64 = 3.0;

fn sd_trusted(v: &ValidityReport) -> bool {
    v.holds(SD_VALIDITY_THRESHOLD) && v.spreading <= SD_VALIDITY_THRESHOLD && v.window_margin >= SD_MIN_WINDOW_MARGIN
}

/// Global flags shared by every verb.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub timing: bool,
    pub env: Vec<(String, String)>,
}

impl Options {
    fn pool(&self) -> CliResult<rayon::ThreadPool> {
        if self.jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
    }

    fn load(&self, fallback: Option<Model>) -> CliResult<ScenarioConfig> {
        match (&self.config, fallback) {
            (Some(p), _) => ScenarioConfig::from_path(p, &self.env),
            (None, Some(m)) => ScenarioConfig::default_for(m, &self.env),
            (None, None) => Err(CliError::Usage("--config <path> is required for this command".into())),
        }
    }

    /// Flag, then config, then the output file's extension, then CSV.
    fn writer(&self, cfg: Option<&ScenarioConfig>) -> CliResult<RowWriter> {
        let path = self.output.clone().or_else(|| cfg.and_then(|c| c.output.path.clone()));
        let format = self
            .format
            .or_else(|| cfg.and_then(|c| c.output.format))
            .or_else(|| path.as_deref().map(Format::from_path))
            .unwrap_or(Format::Csv);
        RowWriter::open(path.as_ref(), format)
    }

    fn seed(&self, cfg: &ScenarioConfig) -> u64 {
        self.seed.or(cfg.seed).unwrap_or(0)
    }
}

fn write_all(mut w: RowWriter, rows: &[Row]) -> CliResult<()> {
    for r in rows {
        w.write(r)?;
    }
    w.finish()
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn verify(opts: &Options, selection: &str) -> CliResult<()> {
    let suites = Suite::parse_selection(selection).map_err(|e| CliError::Usage(e.to_string()))?;
    let pool = opts.pool()?;
    let results: Vec<(Suite, CliResult<Vec<Check>>, f64)> = pool.install(|| {
        suites
            .par_iter()
            .map(|&s| {
                let start = Instant::now();
                let r = run_suite(s).map_err(CliError::from);
                (s, r, start.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut failed = 0;
    for (suite, result, ms) in results {
        let checks = result?;
        for c in &checks {
            println!("{c}");
            failed += usize::from(!c.passed);
            let mut row = Row::new();
            row.push("suite", suite.name())
                .push("check", c.name.as_str())
                .push("measured", c.measured)
                .push("tolerance", c.tolerance)
                .push(
                    "bound",
                    match c.bound {
                        Bound::AtMost => "at_most",
                        Bound::AtLeast => "at_least",
                    },
                )
                .push("passed", c.passed);
            if opts.timing {
                row.push("suite_elapsed_ms", ms);
            }
            rows.push(row);
        }
        if opts.timing {
            println!("[{suite}] {} checks in {ms:.0} ms", checks.len());
        }
    }
    let total = rows.len();
    println!("{} of {total} checks passed", total - failed);
    if opts.output.is_some() {
        write_all(opts.writer(None)?, &rows)?;
    }
    if failed > 0 {
        return Err(CliError::Verification(failed));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluation {
    /// Correlations, with L where the model has one.
    Correlate,
    /// L only.
    Entangle,
}

pub fn evaluate(opts: &Options, kind: Evaluation, require_sweep: bool) -> CliResult<()> {
    let cfg = opts.load(None)?;
    if kind == Evaluation::Entangle && cfg.model == Model::Eprb4 {
        return Err(CliError::Usage("entangle needs a lattice or continuum model".into()));
    }
    if require_sweep && cfg.sweeps.is_empty() {
        return Err(CliError::Usage("sweep needs at least one [[sweep]] entry in the config".into()));
    }
    let rows = evaluate_rows(&cfg, opts, kind)?;
    write_all(opts.writer(Some(&cfg))?, &rows)
}

/// Rows for every sweep point, ordered by point index whatever the worker count.
pub fn evaluate_rows(cfg: &ScenarioConfig, opts: &Options, kind: Evaluation) -> CliResult<Vec<Row>> {
    let points = cfg.points()?;
    let seed = opts.seed(cfg);
    let pool = opts.pool()?;
    let per_point: Vec<CliResult<Vec<Row>>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let start = Instant::now();
                let mut rows = match cfg.model {
                    Model::Eprb4 => eprb_rows(p, seed),
                    Model::Continuum => continuum_row(p, kind).map(|r| vec![r]),
                    Model::Lattice => lattice_row(p, kind).map(|r| vec![r]),
                }?;
                if opts.timing {
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    for r in &mut rows {
                        r.push("elapsed_ms", ms);
                    }
                }
                Ok(rows)
            })
            .collect()
    });
    let mut out = Vec::new();
    for r in per_point {
        out.extend(r?);
    }
    Ok(out)
}

fn point_row(p: &SweepPoint) -> Row {
    let mut row = Row::new();
    row.push("index", p.index);
    for (name, v) in &p.params {
        row.push(format!("sweep.{name}"), *v);
    }
    row
}

fn input_echo(p: &SweepPoint) -> CliResult<String> {
    serde_json::to_string(&p.section).map_err(|e| CliError::Usage(e.to_string()))
}

fn push_analyzers(row: &mut Row, a: &AnalyzerPair) {
    for (k, axis) in ["x", "y", "z"].iter().enumerate() {
        row.push(format!("n1{axis}"), a.n1[k]);
    }
    for (k, axis) in ["x", "y", "z"].iter().enumerate() {
        row.push(format!("n2{axis}"), a.n2[k]);
    }
}

/// One row per analyzer pair. `correlation` is the Fock-space value plus
/// the configured noise, drawn from a stream keyed by the point index.
fn eprb_rows(p: &SweepPoint, seed: u64) -> CliResult<Vec<Row>> {
    let input: EprbInput = p.decode()?;
    input.validate()?;
    let pairs = input.analyzer_pairs()?;
    let model = FockEprbModel::new()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(p.index as u64);
    let noise = Normal::new(0.0, input.noise).map_err(|e| CliError::Usage(format!("noise: {e}")))?;
    let mut rows = Vec::with_capacity(pairs.len());
    for (k, a) in pairs.iter().enumerate() {
        let c_fock = model.correlation(input.gamma, a)?;
        let measured = if input.noise > 0.0 { c_fock + noise.sample(&mut rng) } else { c_fock };
        let mut row = point_row(p);
        row.push("pair", k).push("gamma", input.gamma);
        push_analyzers(&mut row, a);
        row.push("noise", input.noise)
            .push("sin_2gamma", (2.0 * input.gamma).sin())
            .push("c_closed_form", correlation_closed_form(input.gamma, a))
            .push("c_first_quantized", correlation_1q(input.gamma, a)?)
            .push("c_fock", c_fock)
            .push("correlation", measured)
            .push("input", input_echo(p)?);
        rows.push(row);
    }
    Ok(rows)
}

/// `Ok(None)` when the path does not apply to this scenario.
fn optional(r: fockspin::Result<f64>) -> CliResult<Option<f64>> {
    use fockspin::Error as E;
    match r {
        Ok(v) => Ok(Some(v)),
        Err(E::Precondition(_)) | Err(E::DegenerateKinematics(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn continuum_row(p: &SweepPoint, kind: Evaluation) -> CliResult<Row> {
    let s = p.decode::<ContinuumInput>()?.scenario()?;
    let lq = entanglement_l_quadrature(&s)?;
    let lg = optional(entanglement_l_gaussian(&s))?;
    let lp = match s.coupling {
        CouplingProfile::PointImpulse { .. } => optional(entanglement_l_point(&s))?,
        _ => None,
    };
    let sd = match s.coupling {
        CouplingProfile::Uniform { .. } => match steepest_descent_l(&s) {
            Ok(sd) => Some(sd),
            Err(fockspin::Error::DegenerateKinematics(_)) | Err(fockspin::Error::Precondition(_)) => None,
            Err(e) => return Err(e.into()),
        },
        _ => None,
    };
    let (l, path) = match lg {
        Some(g) => (g, "gaussian"),
        None => (lq, "quadrature"),
    };
    let mut row = point_row(p);
    row.push("epsilon", s.epsilon)
        .push("t0", s.t0)
        .push("t", s.t)
        .push("l_quadrature", lq)
        .push("l_gaussian", lg)
        .push("l_point", lp)
        .push("l_steepest", sd.map(|d| d.l_approx))
        .push("sd_t_min", sd.map(|d| d.t_min))
        .push("sd_d_min", sd.map(|d| d.d_min))
        .push("sd_slope_ratio", sd.map(|d| d.validity.slope_ratio))
        .push("sd_curvature_ratio", sd.map(|d| d.validity.curvature_ratio))
        .push("sd_spreading", sd.map(|d| d.validity.spreading))
        .push("sd_window_margin", sd.map(|d| d.validity.window_margin))
        .push("sd_valid", sd.map_or(Cell::Empty, |d| Cell::Bool(sd_trusted(&d.validity))))
        .push("sd_rel_error", sd.map(|d| rel(d.l_approx, lq)))
        .push("l", l)
        .push("l_path", path)
        .push("l_rel_spread", lg.map(|g| rel(g, lq)));
    if kind == Evaluation::Correlate {
        row.push("eps_l", s.epsilon * l).push("correlation", correlation_field(&s, l));
    }
    row.push("input", input_echo(p)?);
    Ok(row)
}

fn lattice_row(p: &SweepPoint, kind: Evaluation) -> CliResult<Row> {
    let sc = p.decode::<LatticeInput>()?.scenario()?;
    let l = lattice_entanglement_l(&sc)?;
    let mut row = point_row(p);
    row.push("sites", sc.config.sites)
        .push("spacing", sc.config.spacing)
        .push("epsilon", sc.epsilon)
        .push("t0", sc.t0)
        .push("t", sc.t)
        .push("l", l);
    if kind == Evaluation::Correlate {
        let exact = lattice_exact_correlation(&sc)?;
        let first = correlation_with_weight(sc.epsilon * l, &sc.analyzers);
        row.push("c_exact", exact).push("c_first_order", first).push("residual", (exact - first).abs());
    }
    row.push("input", input_echo(p)?);
    Ok(row)
}

/// Exact against first-order correlations over the configured couplings.
pub fn lattice_compare(opts: &Options) -> CliResult<()> {
    let cfg = opts.load(Some(Model::Lattice))?;
    let (rows, slope) = lattice_compare_rows(&cfg, opts)?;
    match slope {
        Some(s) => eprintln!("log-log slope of |C_exact - C_first_order| against epsilon: {s:.4}"),
        None => eprintln!("slope unavailable: fewer than two rows with positive epsilon and residual"),
    }
    write_all(opts.writer(Some(&cfg))?, &rows)
}

pub fn lattice_compare_rows(cfg: &ScenarioConfig, opts: &Options) -> CliResult<(Vec<Row>, Option<f64>)> {
    if cfg.model != Model::Lattice {
        return Err(CliError::Usage("lattice-compare needs model = \"lattice\"".into()));
    }
    if !cfg.sweeps.is_empty() {
        return Err(CliError::Usage("lattice-compare takes couplings from [lattice_compare], not [[sweep]]".into()));
    }
    let epsilons = cfg.lattice_compare.as_ref().map_or(DEFAULT_EPSILONS.to_vec(), |c| c.epsilons.clone());
    let point = cfg.points()?.remove(0);
    let sc = point.decode::<LatticeInput>()?.scenario()?;
    let start = Instant::now();
    let model = LatticeExact::new(&sc)?;
    let l = lattice_entanglement_l(&sc)?;
    info!("lattice setup took {:.0} ms", start.elapsed().as_secs_f64() * 1e3);
    let pool = opts.pool()?;
    let values: Vec<CliResult<(f64, f64, f64)>> = pool.install(|| {
        epsilons
            .par_iter()
            .map(|&e| {
                let t = Instant::now();
                let exact = model.correlation(e)?;
                Ok((exact, correlation_with_weight(e * l, &sc.analyzers), t.elapsed().as_secs_f64() * 1e3))
            })
            .collect()
    });
    let values: Vec<(f64, f64, f64)> = values.into_iter().collect::<CliResult<_>>()?;
    let fit: Vec<(f64, f64)> = epsilons
        .iter()
        .zip(&values)
        .map(|(&e, &(x, p, _))| (e, (x - p).abs()))
        .filter(|&(e, r)| e > 0.0 && r > 0.0)
        .collect();
    let slope = if fit.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
        Some(loglog_slope(&xs, &ys)?)
    } else {
        None
    };
    let rows = epsilons
        .iter()
        .zip(&values)
        .map(|(&e, &(exact, first, ms))| {
            let mut row = Row::new();
            row.push("sites", sc.config.sites)
                .push("epsilon", e)
                .push("l", l)
                .push("c_exact", exact)
                .push("c_first_order", first)
                .push("residual", (exact - first).abs())
                .push("slope", slope);
            if opts.timing {
                row.push("elapsed_ms", ms);
            }
            row
        })
        .collect();
    Ok((rows, slope))
}

const FIT_COLUMNS: [&str; 7] = ["n1x", "n1y", "n1z", "n2x", "n2y", "n2z", "correlation"];

/// Least-squares fit of sin 2γ to a sample file (CSV with a header, or JSON
/// lines), identified by extension.
pub fn fit(opts: &Options, input: &Path) -> CliResult<()> {
    let samples = read_samples(input)?;
    let report = fit_two_gamma(&samples)?;
    let mut row = Row::new();
    row.push("samples", report.samples)
        .push("two_gamma", report.two_gamma)
        .push("gamma", report.gamma())
        .push("residual", report.residual)
        .push("standard_error", report.standard_error)
        .push("input", input.display().to_string());
    write_all(opts.writer(None)?, &[row])
}

fn sample(src: &str, line: u64, v: [f64; 7]) -> CliResult<CorrelationSample> {
    let analyzers = AnalyzerPair::normalized([v[0], v[1], v[2]], [v[3], v[4], v[5]])
        .map_err(|e| CliError::parse(src, format!("line {line}: {e}")))?;
    // Measured values may stray outside [-1, 1], so skip the range check.
    Ok(CorrelationSample { analyzers, value: v[6] })
}

pub fn read_samples(path: &Path) -> CliResult<Vec<CorrelationSample>> {
    let src = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(src.clone(), e))?;
    match Format::from_path(path) {
        Format::Jsonl => parse_jsonl_samples(&src, &text),
        Format::Csv => parse_csv_samples(&src, &text),
    }
}

pub fn parse_csv_samples(src: &str, text: &str) -> CliResult<Vec<CorrelationSample>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| CliError::parse(src, e))?.clone();
    let mut out = Vec::new();
    let mut columns: Option<Vec<usize>> = None;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::parse(src, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let cols = match &columns {
            Some(c) => c,
            None => columns.insert(
                FIT_COLUMNS
                    .iter()
                    .map(|name| {
                        headers
                            .iter()
                            .position(|h| h.trim() == *name)
                            .ok_or_else(|| CliError::parse(src, format!("line 1: missing column '{name}'")))
                    })
                    .collect::<CliResult<_>>()?,
            ),
        };
        let mut v = [0.0; 7];
        for (k, &c) in cols.iter().enumerate() {
            let raw = rec.get(c).unwrap_or("").trim();
            v[k] = raw.parse().map_err(|_| {
                CliError::parse(src, format!("line {line}: column '{}': '{raw}' is not a number", FIT_COLUMNS[k]))
            })?;
        }
        out.push(sample(src, line, v)?);
    }
    Ok(out)
}

pub fn parse_jsonl_samples(src: &str, text: &str) -> CliResult<Vec<CorrelationSample>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let obj: serde_json::Map<String, serde_json::Value> =
            serde_json::from_str(raw).map_err(|e| CliError::parse(src, format!("line {line}: {e}")))?;
        let mut v = [0.0; 7];
        for (k, name) in FIT_COLUMNS.iter().enumerate() {
            v[k] = obj
                .get(*name)
                .and_then(serde_json::Value::as_f64)
                .ok_or_else(|| CliError::parse(src, format!("line {line}: '{name}' missing or not a number")))?;
        }
        out.push(sample(src, line, v)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> Options {
        Options { jobs: 1, ..Options::default() }
    }

    #[test]
    fn csv_sample_errors_name_the_line() {
        let text = "n1x,n1y,n1z,n2x,n2y,n2z,correlation\n0,0,1,0,0,1,-1\n0,0,1,0,x,1,-1\n";
        let err = parse_csv_samples("f.csv", text).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("n2y"), "{err}");
        let err = parse_csv_samples("f.csv", "a,b\n1,2\n").unwrap_err().to_string();
        assert!(err.contains("missing column 'n1x'"), "{err}");
        assert!(parse_csv_samples("f.csv", "").unwrap().is_empty());
        let err = parse_jsonl_samples("f.jsonl", "{\"n1x\": 0}\n").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn extra_columns_are_ignored() {
        let text = "index,n2z,n1x,n1y,n1z,n2x,n2y,correlation\n3,1,0,0,1,0,0,-1\n";
        let s = parse_csv_samples("f.csv", text).unwrap();
        assert_eq!(s[0].analyzers.n2, [0.0, 0.0, 1.0]);
        assert_eq!(s[0].value, -1.0);
    }

    #[test]
    fn eprb_rows_at_pi_over_4_fit_to_one() {
        let text = "model = \"eprb4\"\n[eprb4]\ngamma = 0.7853981633974483\nanalyzer_grid = 40\n";
        let cfg = ScenarioConfig::from_str("t", text, &[]).unwrap();
        let rows = evaluate_rows(&cfg, &opts(), Evaluation::Correlate).unwrap();
        assert_eq!(rows.len(), 40);
        let samples: Vec<CorrelationSample> = rows
            .iter()
            .map(|r| {
                let f = |n: &str| match r.get(n) {
                    Some(Cell::Float(v)) => *v,
                    other => panic!("{n}: {other:?}"),
                };
                CorrelationSample {
                    analyzers: AnalyzerPair { n1: [f("n1x"), f("n1y"), f("n1z")], n2: [f("n2x"), f("n2y"), f("n2z")] },
                    value: f("correlation"),
                }
            })
            .collect();
        assert!((fit_two_gamma(&samples).unwrap().two_gamma - 1.0).abs() < 1e-10);
    }

    #[test]
    fn noise_is_reproducible_and_independent_of_workers() {
        let text = "model = \"eprb4\"\nseed = 5\n[eprb4]\ngamma = 0.3\nanalyzer_grid = 7\nnoise = 0.01\n[[sweep]]\nparameter = \"gamma\"\nvalues = [0.1, 0.2, 0.3]\n";
        let cfg = ScenarioConfig::from_str("t", text, &[]).unwrap();
        let a = evaluate_rows(&cfg, &opts(), Evaluation::Correlate).unwrap();
        let b = evaluate_rows(&cfg, &Options { jobs: 3, ..opts() }, Evaluation::Correlate).unwrap();
        assert_eq!(a, b);
        let c = evaluate_rows(&cfg, &Options { seed: Some(6), ..opts() }, Evaluation::Correlate).unwrap();
        assert_ne!(a, c);
        assert_ne!(a[0].get("correlation"), a[0].get("c_fock"));
    }

    #[test]
    fn zero_coupling_gives_the_unentangled_correlation() {
        let env = vec![("FOCKSPIN_CONTINUUM__COUPLING__PROFILE__VALUE".to_string(), "0.0".to_string())];
        let cfg = ScenarioConfig::default_for(Model::Continuum, &env).unwrap();
        let rows = evaluate_rows(&cfg, &opts(), Evaluation::Correlate).unwrap();
        // Analyzers z and x: -n1z n2z = 0.
        for r in &rows {
            assert_eq!(r.get("correlation"), Some(&Cell::Float(0.0)));
            assert_eq!(r.get("l"), Some(&Cell::Float(0.0)));
        }
    }

    #[test]
    fn lattice_compare_single_and_zero_rows() {
        let env = vec![("FOCKSPIN_LATTICE_COMPARE__EPSILONS".to_string(), "[0.0]".to_string())];
        let cfg = ScenarioConfig::default_for(Model::Lattice, &env).unwrap();
        let (rows, slope) = lattice_compare_rows(&cfg, &opts()).unwrap();
        assert_eq!(slope, None);
        match rows[0].get("residual") {
            Some(Cell::Float(r)) => assert!(*r <= 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
