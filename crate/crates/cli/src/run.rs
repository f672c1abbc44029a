use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use parity_spectrum::adjustment::{CellMeanLearner, LinearLearner};
use parity_spectrum::audit::{bn_cookbook, pareto_sweep, pareto_table, yhat_outcome, Overall};
use parity_spectrum::estimators::{
    bootstrap_joint, BootstrapConfig, Estimator, LevelWeighting, Outcome, Sample, SpmDecomposition,
};
use parity_spectrum::model::{
    bin_column, parse_number, validate_schema, Dataset, EffectEstimate, EstimateRecord, RawTable,
    Schema,
};
use parity_spectrum::scm::{builtin, pp_terms, sample_units, PanelOutcome, ScmSpec, UnitPanel};
use serde::{Deserialize, Serialize};

use crate::args::{
    AuditArgs, BootstrapArgs, Command, DataArgs, EffectsArgs, Learner, ParetoArgs, SimulateArgs,
    VerifyPpArgs,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_AUDIT_FAIL: u8 = 3;
pub const EXIT_ESTIMATION: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Usage(String),
    Core(parity_spectrum::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use parity_spectrum::Error as E;
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(E::Parameter(_)) => EXIT_USAGE,
            CliError::Core(e) if e.is_estimation() => EXIT_ESTIMATION,
            // malformed input files
            CliError::Core(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) | CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<parity_spectrum::Error> for CliError {
    fn from(e: parity_spectrum::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Result of a command: what goes to stdout, files to write, exit status.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(String, String)>,
    pub status: u8,
}

/// Schema sidecar: the core schema keys plus CLI extras.
#[derive(Debug, Deserialize)]
struct SchemaFile {
    #[serde(flatten)]
    schema: Schema,
    /// Outcome level used when no --outcome is given.
    y_level: Option<String>,
    /// Numeric columns to quantile-bin before estimation.
    #[serde(default)]
    bin: Vec<String>,
}

pub fn read_csv(path: &Path) -> Result<RawTable> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let headers = reader
        .headers()
        .map_err(|e| io_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        rows.push(
            rec.map_err(|e| io_err(path, e))?
                .iter()
                .map(str::to_string)
                .collect(),
        );
    }
    Ok(RawTable::new(headers, rows))
}

pub fn csv_string(table: &RawTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.headers).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

struct Loaded {
    data: Dataset,
    y_level: Option<String>,
}

fn load_data(args: &DataArgs) -> Result<Loaded> {
    let text = fs::read_to_string(&args.schema).map_err(|e| io_err(&args.schema, e))?;
    let file: SchemaFile = toml::from_str(&text).map_err(|e| io_err(&args.schema, e))?;
    file.schema.check()?;
    let table = read_csv(&args.data)?;
    let mut data = validate_schema(&table, &file.schema)?;
    for name in &file.bin {
        let col = data.require_column(name)?;
        let raw = (0..data.n())
            .map(|r| {
                parse_number(data.cell(r, col)).ok_or_else(|| parity_spectrum::Error::Data {
                    row: r,
                    message: format!("`{}` in column `{name}` is not a number", data.cell(r, col)),
                })
            })
            .collect::<std::result::Result<Vec<f64>, _>>()?;
        data = bin_column(&data, name, args.bins as usize, &raw)?.dataset;
    }
    Ok(Loaded {
        data,
        y_level: file.y_level,
    })
}

fn load_scm(spec: &str) -> Result<ScmSpec> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        return Ok(ScmSpec::from_toml(&text)?);
    }
    builtin::by_name(spec).map_err(|_| {
        CliError::Io(format!(
            "`{spec}` is neither an SCM file nor a built-in model ({})",
            builtin::names().collect::<Vec<_>>().join(", ")
        ))
    })
}

/// The outcome level on the schema's y column.
fn y_level(data: &Dataset, outcome: Option<&Outcome>, fallback: Option<String>) -> Result<String> {
    let y = data.schema().y.clone().ok_or_else(|| {
        CliError::Core(parity_spectrum::Error::Schema(
            "schema declares no y column".into(),
        ))
    })?;
    match outcome {
        Some(Outcome::Level { column, level }) if *column == y => Ok(level.clone()),
        Some(o) => Err(CliError::Usage(format!(
            "--outcome must name the y column `{y}`, got `{o}`"
        ))),
        None => Ok(fallback.unwrap_or_else(|| "1".into())),
    }
}

fn config(b: BootstrapArgs) -> BootstrapConfig {
    BootstrapConfig::new(b.replicates, b.level, b.seed)
}

/// Runs a command; `Err` carries a non-zero exit status.
pub fn execute(command: &Command) -> Result<Output> {
    let out = match command {
        Command::Effects(a) => effects(a)?,
        Command::Audit(a) => audit(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::VerifyPp(a) => verify_pp(a)?,
        Command::Pareto(a) => pareto(a)?,
    };
    if let Some(dir) = out_dir(command) {
        write_files(dir, &out.files)?;
    }
    Ok(out)
}

fn out_dir(command: &Command) -> Option<&PathBuf> {
    match command {
        Command::Effects(a) => a.out.as_ref(),
        Command::Audit(a) => a.out.as_ref(),
        Command::Simulate(a) => a.out.as_ref(),
        Command::VerifyPp(a) => a.out.as_ref(),
        Command::Pareto(a) => a.out.as_ref(),
    }
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (name, body) in files {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        f.write_all(body.as_bytes()).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EffectsReport {
    command: &'static str,
    config: EffectsEcho,
    estimates: Vec<EstimateRecord>,
    decomposition: SpmDecomposition,
    #[serde(skip_serializing_if = "Option::is_none")]
    predictor: Option<PredictorEffects>,
}

#[derive(Serialize)]
struct EffectsEcho {
    data: String,
    outcome: String,
    yhat: Option<String>,
    baseline: String,
    n: usize,
    replicates: usize,
    level: f64,
    seed: u64,
}

#[derive(Serialize)]
struct PredictorEffects {
    outcome: String,
    estimates: Vec<EstimateRecord>,
    decomposition: SpmDecomposition,
    ippm: parity_spectrum::estimators::PpmProfile,
}

const MEASURES: [&str; 4] = ["spm", "ctf_de", "ctf_ie", "ctf_se"];

/// SPM, DE, IE, SE of `outcome` (and iPPM of `yhat` against `y` when given)
/// on shared bootstrap resamples.
fn measure_set(
    data: &Dataset,
    outcome: &Outcome,
    ippm_of: Option<(&str, &Outcome)>,
    b: BootstrapArgs,
) -> Result<Vec<EffectEstimate>> {
    let measure = |s: &Sample| -> parity_spectrum::Result<Vec<f64>> {
        let est = Estimator::new(*s);
        let d = est.decompose_spm(outcome)?;
        let mut v = vec![d.spm, d.de, d.ie, d.se];
        if let Some((yhat, y)) = ippm_of {
            v.push(est.ippm(yhat, y, LevelWeighting::Equal)?.ippm);
        }
        Ok(v)
    };
    if b.replicates == 0 {
        let point = measure(&Sample::full(data))?;
        return Ok(point.into_iter().map(EffectEstimate::point).collect());
    }
    let joint = bootstrap_joint(measure, data, config(b))?;
    Ok((0..joint.point.len()).map(|i| joint.estimate(i)).collect())
}

fn with_flags(
    est: EffectEstimate,
    point: parity_spectrum::Result<EffectEstimate>,
) -> EffectEstimate {
    // point-estimate diagnostics (pooling, degenerate outcome) travel with the interval
    let mut flags = point.map(|p| p.flags).unwrap_or_default();
    flags.extend(est.flags.iter().cloned());
    est.with_flags(flags)
}

fn records(data: &Dataset, outcome: &Outcome, ests: &[EffectEstimate]) -> Vec<EstimateRecord> {
    let e = Estimator::new(Sample::full(data));
    let points = [
        e.spm(outcome),
        e.ctf_de(outcome, 0),
        e.ctf_ie(outcome, 0),
        e.ctf_se(outcome),
    ];
    MEASURES
        .iter()
        .zip(points)
        .zip(ests)
        .map(|((m, p), est)| {
            EstimateRecord::new(m, &outcome.to_string(), &with_flags(est.clone(), p))
        })
        .collect()
}

fn effects(a: &EffectsArgs) -> Result<Output> {
    let loaded = load_data(&a.data)?;
    let data = &loaded.data;
    data.require_column(a.outcome.column())?;
    let ests = measure_set(data, &a.outcome, None, a.bootstrap)?;
    let decomposition = Estimator::new(Sample::full(data)).decompose_spm(&a.outcome)?;
    let predictor = match &a.yhat {
        None => None,
        Some(yhat) => {
            let level = y_level(data, Some(&a.outcome), None)?;
            let o = yhat_outcome(data, yhat, &level)?;
            let ests = measure_set(data, &o, Some((yhat, &a.outcome)), a.bootstrap)?;
            let mut recs = records(data, &o, &ests[..4]);
            recs.push(EstimateRecord::new(
                "ippm",
                &a.outcome.to_string(),
                &ests[4],
            ));
            let est = Estimator::new(Sample::full(data));
            Some(PredictorEffects {
                outcome: o.to_string(),
                estimates: recs,
                decomposition: est.decompose_spm(&o)?,
                ippm: est.ippm(yhat, &a.outcome, LevelWeighting::Equal)?,
            })
        }
    };
    let report = EffectsReport {
        command: "effects",
        config: EffectsEcho {
            data: a.data.data.display().to_string(),
            outcome: a.outcome.to_string(),
            yhat: a.yhat.clone(),
            baseline: data.schema().x0.clone(),
            n: data.n(),
            replicates: a.bootstrap.replicates,
            level: a.bootstrap.level,
            seed: a.bootstrap.seed,
        },
        estimates: records(data, &a.outcome, &ests),
        decomposition,
        predictor,
    };
    let body = json(&report);
    Ok(Output {
        files: vec![("effects.json".into(), body.clone())],
        stdout: body,
        status: EXIT_OK,
    })
}

fn audit(a: &AuditArgs) -> Result<Output> {
    if a.bootstrap.replicates == 0 {
        return Err(CliError::Usage("the audit needs --replicates ≥ 1".into()));
    }
    let loaded = load_data(&a.data)?;
    let level = y_level(&loaded.data, a.outcome.as_ref(), loaded.y_level)?;
    let report = bn_cookbook(&loaded.data, &a.yhat, a.bn, &level, config(a.bootstrap))?;
    let body = json(&report);
    Ok(Output {
        files: vec![
            ("audit.json".into(), body.clone()),
            ("audit.csv".into(), csv_string(&report.to_table())),
        ],
        stdout: body,
        status: if report.overall == Overall::Success {
            EXIT_OK
        } else {
            EXIT_AUDIT_FAIL
        },
    })
}

fn simulate(a: &SimulateArgs) -> Result<Output> {
    let scm = load_scm(&a.scm)?;
    let panel = sample_units(&scm, a.n, a.seed, None)?;
    let body = csv_string(&panel.to_table());
    Ok(Output {
        files: vec![("panel.csv".into(), body.clone())],
        stdout: body,
        status: EXIT_OK,
    })
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    command: &'static str,
    scm: &'a str,
    n: usize,
    n_bins: u64,
    learner: &'static str,
    seed: u64,
    #[serde(flatten)]
    report: parity_spectrum::scm::PpTermsReport,
}

fn fit_learner(panel: &mut UnitPanel, learner: Learner, bins: usize) -> Result<()> {
    let (x, f, y) = panel.training_view();
    match learner {
        Learner::Cells => panel.attach_predictor(&CellMeanLearner::fit(&x, &f, &y, bins)?),
        Learner::Linear => panel.attach_predictor(&LinearLearner::fit(&x, &f, &y)?),
    }
    Ok(())
}

fn verify_pp(a: &VerifyPpArgs) -> Result<Output> {
    let scm = load_scm(&a.scm)?;
    let mut panel = sample_units(&scm, a.n, a.seed, None)?;
    fit_learner(&mut panel, a.learner, a.bins as usize)?;
    let report = pp_terms(&panel, PanelOutcome::Mean, a.bins as usize)?;
    let headers = [
        "bin", "lo", "hi", "term1", "term2", "term3", "ppm", "residual",
    ];
    let rows = report
        .bins
        .iter()
        .map(|b| {
            [
                b.bin as f64,
                b.lo,
                b.hi,
                b.term1,
                b.term2,
                b.term3,
                b.ppm,
                b.residual,
            ]
            .iter()
            .map(|v| v.to_string())
            .collect()
        })
        .collect();
    let bins_csv = csv_string(&RawTable::new(
        headers.iter().map(|s| s.to_string()).collect(),
        rows,
    ));
    let body = json(&VerifyReport {
        command: "verify-pp",
        scm: &a.scm,
        n: a.n,
        n_bins: a.bins,
        learner: match a.learner {
            Learner::Cells => "cells",
            Learner::Linear => "linear",
        },
        seed: a.seed,
        report,
    });
    Ok(Output {
        files: vec![
            ("pp_terms.json".into(), body.clone()),
            ("pp_bins.csv".into(), bins_csv),
        ],
        stdout: body,
        status: EXIT_OK,
    })
}

fn pareto(a: &ParetoArgs) -> Result<Output> {
    let (data, level) = match (&a.data, &a.schema) {
        (Some(data), Some(schema)) => {
            let loaded = load_data(&DataArgs {
                data: data.clone(),
                schema: schema.clone(),
                bins: a.bins,
            })?;
            let level = y_level(&loaded.data, a.outcome.as_ref(), loaded.y_level)?;
            (loaded.data, level)
        }
        _ => {
            let scm = load_scm(&a.scm)?;
            let data = sample_units(&scm, a.n, a.seed, None)?.to_dataset(a.bins as usize)?;
            let level = y_level(&data, a.outcome.as_ref(), None)?;
            (data, level)
        }
    };
    let points = pareto_sweep(&data, &a.bn_sets, a.reps as usize, &level, a.seed)?;
    let body = csv_string(&pareto_table(&points));
    Ok(Output {
        files: vec![
            ("pareto.csv".into(), body.clone()),
            ("pareto.json".into(), json(&points)),
        ],
        stdout: body,
        status: EXIT_OK,
    })
}
