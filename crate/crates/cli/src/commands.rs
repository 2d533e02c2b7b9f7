//! One function per subcommand. Each returns the document it wrote.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use matmart::gls::TailProvenance;
use matmart::mart_sim::MartingalePath;
use matmart::moment_bounds::{finiteness_interval, Finiteness};
use matmart::normed_space::{operator_tensor_set, EntropyProfile, NormSpec};
use matmart::osekowski::k_os_default;
use matmart::verify::{
    bound_check_report, empirical_moment, empirical_tail, simulate_norms, BoundSetup, EmpiricalReport,
};
use serde_json::Value;

use crate::config::{json_error, ExperimentConfig, Format, KappaMode};
use crate::table::{num, text, write_file, Document, Table};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "matmart", version, about = "Moment and tail bounds for normed matrix martingales")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON experiment config; defaults apply when omitted
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the config
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, overriding the config
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; changes speed only
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// ν, ρ, β and the tail bound on their grids
    Bounds,
    /// Covering entropy of the tensor extreme set and the fitted κ
    Entropy,
    /// Empirical moments and tails of the simulated norms
    Simulate,
    /// Empirical rows against their bounds, with verdicts
    Verify,
    /// Merges earlier outputs in the output directory into one long table
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Entropy => "entropy",
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::Report => "report",
        }
    }
}

/// Parses nothing; runs `command` with already-parsed flags.
pub fn run(command: Command, common: &Common) -> Result<String, CliError> {
    if common.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let work = || execute(command, common);
    match common.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(work),
        None => work(),
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output.path = Some(out.display().to_string());
    }
    config.validate()?;
    config.materialize_static()?;
    Ok(config)
}

fn out_dir(config: &ExperimentConfig) -> PathBuf {
    PathBuf::from(config.output.path.clone().expect("materialized"))
}

fn execute(command: Command, common: &Common) -> Result<String, CliError> {
    if command == Command::Report {
        let dir = match &common.out {
            Some(d) => d.clone(),
            None => out_dir(&load_config(common)?),
        };
        return report(&dir);
    }
    let mut config = load_config(common)?;
    let doc = match command {
        Command::Bounds => bounds(&mut config)?,
        Command::Entropy => entropy(&mut config)?,
        Command::Simulate => simulate(&mut config)?,
        Command::Verify => verify(&mut config)?.0,
        Command::Report => unreachable!(),
    };
    let dir = out_dir(&config);
    doc.write(&dir, config.output.format)?;
    write_file(&dir.join("config.json"), &(serde_json::to_string_pretty(&config).expect("serializable") + "\n"))?;
    let summary = summarize(&doc);
    if command == Command::Verify {
        let failures = doc.metadata.get("failures").and_then(Value::as_u64).unwrap_or(0) as usize;
        if failures > 0 {
            println!("{summary}");
            return Err(CliError::Failed(failures));
        }
    }
    Ok(summary)
}

fn summarize(doc: &Document) -> String {
    let mut s = format!("{}:", doc.command);
    for t in &doc.tables {
        s.push_str(&format!(" {} {} rows;", t.name, t.rows.len()));
    }
    if let Some(v) = doc.metadata.get("verdict") {
        s.push_str(&format!(" verdict {}", v.as_str().unwrap_or("?")));
    }
    s
}

fn estimated_kappa(config: &ExperimentConfig, spec: &NormSpec) -> Result<EntropyProfile, CliError> {
    let z = operator_tensor_set(spec);
    Ok(EntropyProfile::estimate(&z, config.entropy.eps_grid.as_deref().expect("materialized"), config.entropy.cloud_size)?)
}

/// Resolves `κ` and fills the estimated value into the config.
fn resolve_kappa(config: &mut ExperimentConfig, spec: &NormSpec) -> Result<f64, CliError> {
    match config.kappa_mode {
        KappaMode::Analytic { value } => Ok(value.expect("materialized")),
        KappaMode::Estimated { .. } => {
            let k = estimated_kappa(config, spec)?.slope;
            config.kappa_mode = KappaMode::Estimated { value: Some(k) };
            Ok(k)
        }
    }
}

fn setup(config: &mut ExperimentConfig) -> Result<(NormSpec, BoundSetup), CliError> {
    let spec = config.spec()?;
    let kappa = resolve_kappa(config, &spec)?;
    let entry = config.moment_profile.clone().expect("materialized");
    let c_z = operator_tensor_set(&spec).l1_radius();
    // fail early, before any grids, when the key condition does not hold
    if let Finiteness::Violated = finiteness_interval(&entry.scaled(c_z)?, kappa) {
        return Err(matmart::Error::ConditionViolated.into());
    }
    let t_grid = config.t_grid.clone().expect("materialized");
    let s = BoundSetup::build(&config.model, &spec, kappa, Some(entry), config.beta_scale, &t_grid)?;
    config.materialize_orders(&s.bound.p_grid, s.bound.p_plus);
    Ok((spec, s))
}

fn common_metadata(config: &ExperimentConfig, spec: &NormSpec) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("model".into(), serde_json::to_value(config.model).expect("serializable"));
    m.insert("spec".into(), serde_json::to_value(spec).expect("serializable"));
    m.insert("seed".into(), Value::from(config.seed));
    m
}

fn bound_metadata(m: &mut BTreeMap<String, Value>, s: &BoundSetup) {
    m.insert("c_z".into(), num(s.c_z));
    m.insert("kappa".into(), num(s.kappa));
    m.insert("aggregation".into(), text("mu_bar(p) = c_Z * max_ij mu_ij(p), c_Z = sup_z sum_ij |z(i,j)|"));
    m.insert("k_os".into(), num(k_os_default()));
    m.insert("p_minus".into(), num(s.bound.p_minus));
    m.insert("p_plus".into(), num(s.bound.p_plus));
    m.insert("rho_inf".into(), num(s.bound.rho_inf));
    m.insert("beta_scale".into(), num(s.bound.beta_scale));
    m.insert("n".into(), Value::from(s.bound.n));
}

pub fn bounds(config: &mut ExperimentConfig) -> Result<Document, CliError> {
    let (spec, s) = setup(config)?;
    let mut table = Table::new("bounds", &["p", "nu", "rho", "beta", "moment_bound"]);
    for &p in config.p_grid.as_deref().expect("materialized") {
        let nu = matmart::moment_bounds::nu_osekowski(p, &s.bound.profile).ok();
        let rho = s.bound.rho_at(p).ok();
        let beta = s.bound.beta(p).ok();
        let mb = s.bound.moment_bound(p).ok();
        let cell = |v: Option<f64>| v.map(num).unwrap_or(Value::Null);
        table.push(vec![num(p), cell(nu), cell(rho), cell(beta), cell(mb)]);
    }
    let mut tail = Table::new("tail", &["t", "bound", "provenance"]);
    for (&t, &b) in s.tail.t_grid.iter().zip(&s.tail.values) {
        tail.push(vec![num(t), num(b), text(s.tail.provenance.label())]);
    }
    let mut m = common_metadata(config, &spec);
    bound_metadata(&mut m, &s);
    let mut prov = BTreeMap::new();
    prov.insert("nu", "K_Os * (p / ln p) * mu_bar(p)");
    prov.insert("rho", "nu(p) * (10p - kappa) / (p - kappa), p > max(kappa, 4)");
    prov.insert("beta", "rho(p) on J0; inf of rho over J0 on [1, p-]");
    prov.insert("moment_bound", "sqrt(n) * beta(p) bounds | ||Theta|| |_p");
    prov.insert("tail", TailProvenance::MomentChain.label());
    m.insert("provenance".into(), serde_json::to_value(prov).expect("serializable"));
    Ok(Document { command: "bounds".into(), config: config.clone(), metadata: m, tables: vec![table, tail] })
}

pub fn entropy(config: &mut ExperimentConfig) -> Result<Document, CliError> {
    let spec = config.spec()?;
    let profile = estimated_kappa(config, &spec)?;
    if let KappaMode::Estimated { value } = &mut config.kappa_mode {
        *value = Some(profile.slope);
    }
    let mut table = Table::new("entropy", &["eps", "cover_size", "entropy", "resolved"]);
    for i in 0..profile.eps_grid.len() {
        table.push(vec![
            num(profile.eps_grid[i]),
            Value::from(profile.cover_sizes[i]),
            num(profile.entropy[i]),
            Value::from(profile.resolved[i]),
        ]);
    }
    let mut m = common_metadata(config, &spec);
    m.insert("intercept".into(), num(profile.intercept));
    m.insert("kappa_hat".into(), num(profile.slope));
    m.insert("kappa_upper".into(), num(2.0 * (spec.dim() as f64 - 1.0)));
    m.insert("cloud_size".into(), Value::from(profile.cloud_size));
    m.insert("c_z".into(), num(operator_tensor_set(&spec).l1_radius()));
    Ok(Document { command: "entropy".into(), config: config.clone(), metadata: m, tables: vec![table] })
}

pub fn simulate(config: &mut ExperimentConfig) -> Result<Document, CliError> {
    let spec = config.spec()?;
    if config.moment_orders.is_none() {
        let p_plus = config.moment_profile.as_ref().expect("materialized").finite_up_to();
        config.materialize_orders(&[], p_plus);
    }
    let norms = simulate_norms(&config.model, &spec, config.paths, config.seed)?;
    let mut moments = Table::new("moments", &["p", "empirical", "stderr"]);
    for &p in config.moment_orders.as_deref().expect("materialized") {
        let e = empirical_moment(&norms, p)?;
        moments.push(vec![num(p), num(e.estimate), num(e.stderr)]);
    }
    let sqrt_n = (config.model.n as f64).sqrt();
    let scaled: Vec<f64> = norms.iter().map(|v| v / sqrt_n).collect();
    let mut tails = Table::new("tails", &["t", "frequency", "stderr", "lower", "upper"]);
    for e in empirical_tail(&scaled, config.t_grid.as_deref().expect("materialized"))? {
        tails.push(vec![num(e.t), num(e.frequency), num(e.stderr), num(e.lower), num(e.upper)]);
    }
    let dir = out_dir(config);
    if config.dump_paths > 0 {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        for i in 0..config.dump_paths.min(config.paths) {
            let path = MartingalePath::simulate(&config.model, config.seed, i as u64)?;
            write_file(&dir.join(format!("path_{i}.csv")), &path.to_csv())?;
        }
    }
    let mut m = common_metadata(config, &spec);
    m.insert("paths".into(), Value::from(config.paths));
    m.insert("moment_quantity".into(), text("||V(n)||"));
    m.insert("tail_quantity".into(), text("n^{-1/2} ||V(n)||"));
    Ok(Document { command: "simulate".into(), config: config.clone(), metadata: m, tables: vec![moments, tails] })
}

pub fn verify(config: &mut ExperimentConfig) -> Result<(Document, EmpiricalReport), CliError> {
    let (spec, s) = setup(config)?;
    let orders = config.moment_orders.clone().expect("materialized");
    let r = bound_check_report(&config.model, &spec, &s.bound, &s.tail, &orders, config.paths, config.seed)?;
    let mut moments = Table::new("moments", &["p", "empirical", "stderr", "bound", "margin", "verdict"]);
    for row in &r.moment_rows {
        moments.push(vec![num(row.p), num(row.empirical), num(row.stderr), num(row.bound), num(row.margin), text(row.verdict.as_str())]);
    }
    let mut tails = Table::new("tails", &["t", "empirical", "stderr", "lower", "upper", "bound", "margin", "verdict"]);
    for row in &r.tail_rows {
        tails.push(vec![
            num(row.t),
            num(row.empirical),
            num(row.stderr),
            num(row.lower),
            num(row.upper),
            num(row.bound),
            num(row.margin),
            text(row.verdict.as_str()),
        ]);
    }
    let mut m = common_metadata(config, &spec);
    bound_metadata(&mut m, &s);
    m.insert("paths".into(), Value::from(r.paths));
    m.insert("failures".into(), Value::from(r.failures()));
    m.insert("verdict".into(), text(if r.passed() { "PASS" } else { "FAIL" }));
    m.insert("rule".into(), text("PASS iff empirical - 3 * stderr <= bound"));
    m.insert("moment_bound".into(), text(&r.moment_bound));
    m.insert("tail_bound".into(), text(&r.tail_bound));
    if let Some(note) = &r.dependence_note {
        m.insert("dependence_note".into(), text(note));
    }
    let doc = Document { command: "verify".into(), config: config.clone(), metadata: m, tables: vec![moments, tails] };
    Ok((doc, r))
}

/// Tables of earlier runs found in `dir`, JSON documents first.
pub fn collect_tables(dir: &Path) -> Result<Vec<(String, Table)>, CliError> {
    let mut found = Vec::new();
    for (command, tables) in [
        ("bounds", &["bounds", "tail"][..]),
        ("entropy", &["entropy"][..]),
        ("simulate", &["moments", "tails"][..]),
        ("verify", &["moments", "tails"][..]),
    ] {
        let json = dir.join(format!("{command}.json"));
        if json.exists() {
            let text = std::fs::read_to_string(&json).map_err(|e| CliError::Io(format!("{}: {e}", json.display())))?;
            let doc: Document = serde_json::from_str(&text)
                .map_err(|e| json_error(&json.display().to_string(), &e))?;
            found.extend(doc.tables.into_iter().map(|t| (command.to_string(), t)));
            continue;
        }
        for name in tables {
            let csv = dir.join(format!("{command}_{name}.csv"));
            if csv.exists() {
                let text = std::fs::read_to_string(&csv).map_err(|e| CliError::Io(format!("{}: {e}", csv.display())))?;
                found.push((command.to_string(), Table::from_csv(name, &text)?));
            }
        }
    }
    Ok(found)
}

/// Long table `source, table, x_name, x, column, value`: one row per cell.
pub fn merge(tables: &[(String, Table)]) -> Table {
    let mut out = Table::new("report", &["source", "table", "x_name", "x", "column", "value"]);
    for (source, t) in tables {
        let x_name = t.columns[0].clone();
        for row in &t.rows {
            for (col, v) in t.columns.iter().zip(row).skip(1) {
                out.push(vec![text(source), text(&t.name), text(&x_name), row[0].clone(), text(col), v.clone()]);
            }
        }
    }
    out
}

fn report(dir: &Path) -> Result<String, CliError> {
    let tables = collect_tables(dir)?;
    if tables.is_empty() {
        return Err(CliError::Usage(format!("no earlier outputs found in {}", dir.display())));
    }
    let merged = merge(&tables);
    write_file(&dir.join("report.csv"), &merged.to_csv()?)?;
    Ok(format!("report: {} rows from {} tables", merged.rows.len(), tables.len()))
}

/// Writes `doc` as JSON regardless of the configured format.
pub fn write_json(doc: &Document, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    doc.write(dir, Format::Json)
}
