//! Experiment configuration, report emission and the operations behind the
//! `iml` command line.
//!
//! A run is an [`ExperimentConfig`] (TOML, every key optional) plus an
//! [`Operation`]. [`execute`] produces a [`Report`]; [`Report::render`] writes
//! it as CSV or JSON with 12 significant digits. Rows are computed in a fixed
//! order and every random draw is keyed by the seed, so output bytes do not
//! depend on the worker count.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{json, Map, Value};

use crate::curves::{
    example3_chain_experiment, length_by_metric, length_ladder, ChainExperimentConfig, ParametricCurve,
};
use crate::derivatives::{kappa_and_trace, prop2_check, theorem1_check, CheckConfig, CheckRow, QuotientTrace, ShrinkSchedule};
use crate::disc_search::{atanh_checked, kobayashi_royden_upper, lempert_upper, MetricEstimate, SearchConfig, Witness};
use crate::error::{Error, Result};
use crate::example_domains::{
    eval_u, u_at_origin_exact, u_tail_bound, v_tail_bound, Example3Domain, Example3Params,
};
use crate::geometry::{fmt_complex, fmt_num, CPoint, CVector, DomainDescriptor, DomainModel, C64};
use crate::higher_metrics::{
    kobayashi_buseman, kobayashi_ladder, lempert_ladder, HullFunctional, InfinitesimalMetric, LadderConfig,
    LempertEvaluator, OracleKappa, OracleLempert, SearchKappa, SearchLempert,
};
use crate::oracles::{oracle_kappa, oracle_lempert, OracleDomainTag};
use crate::rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    Metric,
    Lempert,
    Higher,
    Hull,
    Derivative,
    VerifyProp2,
    VerifyTheorem1,
    /// Both verification suites in one report.
    VerifyAll,
    Example3,
    /// Singular-set first coordinates of the example domain.
    Example3Dump,
    CurveLength,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::Metric => "metric",
            Operation::Lempert => "lempert",
            Operation::Higher => "higher",
            Operation::Hull => "hull",
            Operation::Derivative => "derivative",
            Operation::VerifyProp2 => "verify-prop2",
            Operation::VerifyTheorem1 => "verify-theorem1",
            Operation::VerifyAll => "verify-all",
            Operation::Example3 => "example3",
            Operation::Example3Dump => "example3-dump",
            Operation::CurveLength => "curve-length",
        }
    }
}

/// How `metric`, `lempert` and `higher` obtain values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Closed form when available, disc search otherwise.
    #[default]
    Auto,
    Oracle,
    Search,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    /// `t ↦ (ti/2, 1/2)`.
    #[default]
    Gamma,
    /// Straight segment from `z` to `w`.
    Segment,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthMode {
    #[default]
    Distance,
    Metric,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub theorem1_tol: f64,
    /// First radius of the shrinking schedule on balanced domains.
    pub balanced_rho0: f64,
    /// Disc search used where no closed form exists.
    pub search: SearchConfig,
}

impl Default for CheckSettings {
    fn default() -> Self {
        let c = CheckConfig::default();
        Self {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            theorem1_tol: c.theorem1_tol,
            balanced_rho0: 0.1 / 64.0,
            search: c.search,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    /// Random inputs per domain and per `m`.
    pub directions: usize,
    pub m: Vec<usize>,
    /// Base points are drawn from this fraction of the inscribed ball, except
    /// on balanced domains where the base point is the origin.
    pub z_radius: f64,
    pub prop2_domains: Vec<String>,
    pub theorem1_domains: Vec<String>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            directions: 20,
            m: vec![1, 2, 3],
            z_radius: 0.3,
            prop2_domains: ["unit-disc", "polydisc", "ball", "max-geo", "geo-mean"].map(String::from).to_vec(),
            theorem1_domains: ["unit-disc", "polydisc", "ball"].map(String::from).to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Example3Settings {
    #[serde(rename = "K")]
    pub k_terms: usize,
    #[serde(rename = "J")]
    pub j_terms: usize,
    pub t0: f64,
    pub t1: f64,
    pub hop_radius: f64,
    pub search: SearchConfig,
}

impl Default for Example3Settings {
    fn default() -> Self {
        let c = ChainExperimentConfig::default();
        Self { k_terms: 200, j_terms: 60, t0: 0.0, t1: 1.0, hop_radius: c.hop_radius, search: c.search }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveSettings {
    pub curve: CurveKind,
    pub mode: LengthMode,
    /// Partition sums use `P = 1, 2, …, 2^doublings`.
    pub doublings: u32,
    pub quadrature_points: usize,
    pub search: SearchConfig,
}

impl Default for CurveSettings {
    fn default() -> Self {
        Self {
            curve: CurveKind::Gamma,
            mode: LengthMode::Distance,
            doublings: 4,
            quadrature_points: 33,
            search: SearchConfig::linear(),
        }
    }
}

/// Everything a run needs. Seeds inside the sections are replaced by the
/// top-level `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub operation: Option<Operation>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub method: Method,
    pub m: usize,
    /// Base point, e.g. `"0.1,0.2i"`; the origin when absent.
    pub z: Option<String>,
    #[serde(rename = "X")]
    pub x: Option<String>,
    pub w: Option<String>,
    #[serde(deserialize_with = "domain_field")]
    pub domain: DomainDescriptor,
    pub search: SearchConfig,
    pub ladder: LadderConfig,
    pub schedule: ShrinkSchedule,
    pub check: CheckSettings,
    pub verify: VerifySettings,
    pub example3: Example3Settings,
    pub curve: CurveSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            operation: None,
            seed: 0,
            format: Format::Csv,
            out: None,
            method: Method::Auto,
            m: 1,
            z: None,
            x: None,
            w: None,
            domain: DomainDescriptor::UnitDisc,
            search: SearchConfig::default(),
            ladder: LadderConfig::default(),
            schedule: ShrinkSchedule::default(),
            check: CheckSettings::default(),
            verify: VerifySettings::default(),
            example3: Example3Settings::default(),
            curve: CurveSettings::default(),
        }
    }
}

/// Accepts a shorthand name or a table.
fn domain_field<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DomainDescriptor, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Field {
        Name(String),
        Table(toml::Table),
    }
    match Field::deserialize(d)? {
        Field::Name(s) => s.parse().map_err(serde::de::Error::custom),
        Field::Table(t) => {
            let table = toml::Value::try_from(t).map_err(serde::de::Error::custom)?;
            table.try_into::<DomainDescriptor>().map_err(|e| {
                let msg = e.to_string();
                if msg.contains("unknown variant") {
                    serde::de::Error::custom(Error::UnknownDescriptor(msg.trim().to_string()))
                } else {
                    serde::de::Error::custom(Error::InvalidDescriptor(msg.trim().to_string()))
                }
            })
        }
    }
}

impl ExperimentConfig {
    /// Parses a config file. Domain errors keep their class so that the
    /// caller can tell them from syntax errors.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.to_string().trim().to_string();
            if msg.contains("unknown domain descriptor") {
                Error::UnknownDescriptor(msg)
            } else if msg.contains("invalid domain descriptor") {
                Error::InvalidDescriptor(msg)
            } else {
                Error::Parse(msg)
            }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn point(&self, field: &Option<String>, dim: usize) -> Result<Option<CPoint>> {
        field.as_deref().map(|s| s.parse::<CPoint>()).transpose().and_then(|p| match p {
            Some(p) if p.dim() != dim => Err(Error::DimensionMismatch { expected: dim, got: p.dim() }),
            other => Ok(other),
        })
    }

    fn base_point(&self, dim: usize) -> Result<CPoint> {
        Ok(self.point(&self.z, dim)?.unwrap_or_else(|| CPoint::origin(dim)))
    }

    fn second_point(&self, dim: usize) -> Result<Option<CPoint>> {
        self.point(&self.w, dim)
    }

    fn vector(&self, dim: usize) -> Result<CVector> {
        let s = self.x.as_deref().ok_or_else(|| Error::Parse("this operation needs a tangent vector (X)".into()))?;
        let x: CVector = s.parse()?;
        if x.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: x.dim() });
        }
        Ok(x)
    }

    fn seeded_search(&self, s: &SearchConfig) -> SearchConfig {
        SearchConfig { seed: self.seed, ..s.clone() }
    }

    fn seeded_ladder(&self) -> LadderConfig {
        LadderConfig { seed: self.seed, ..self.ladder.clone() }
    }

    /// Check configuration for `dom`; balanced domains start the schedule at
    /// `check.balanced_rho0`.
    pub fn check_config(&self, dom: &DomainModel) -> CheckConfig {
        let mut schedule = ShrinkSchedule { seed: self.seed, ..self.schedule.clone() };
        if dom.balanced_gauge().is_some() {
            schedule.rho0 = self.check.balanced_rho0;
        }
        CheckConfig {
            schedule,
            ladder: self.seeded_ladder(),
            search: self.seeded_search(&self.check.search),
            rel_tol: self.check.rel_tol,
            abs_tol: self.check.abs_tol,
            theorem1_tol: self.check.theorem1_tol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        self.check.search.validate()?;
        self.example3.search.validate()?;
        self.curve.search.validate()?;
        self.ladder.validate()?;
        self.schedule.validate()?;
        if self.m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        if self.verify.m.contains(&0) {
            return Err(Error::InvalidParameter("verify.m entries must be at least 1".into()));
        }
        if !(self.check.balanced_rho0 > 0.0) {
            return Err(Error::InvalidParameter("check.balanced_rho0 must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.verify.z_radius) {
            return Err(Error::InvalidParameter("verify.z_radius must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// A report cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}
impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}
impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// JSON number with 12 significant digits; non-finite values become strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        fmt_num(x).parse::<serde_json::Number>().map(Value::Number).unwrap_or(Value::Null)
    } else {
        Value::String(fmt_num(x))
    }
}

fn trace_json(t: &QuotientTrace) -> Value {
    let levels: Vec<Value> = t
        .levels
        .iter()
        .map(|l| json!({"rho": num(l.rho), "max": num(l.max), "min": num(l.min), "samples": l.samples}))
        .collect();
    json!({
        "levels": levels,
        "upper_limit": num(t.upper_limit),
        "lower_limit": num(t.lower_limit),
        "upper_extrapolated": num(t.upper_extrapolated),
        "lower_extrapolated": num(t.lower_extrapolated),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub operation: Operation,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Per-row quotient traces, JSON only.
    pub traces: Vec<Value>,
    /// Scalar facts about the run, JSON only.
    pub notes: BTreeMap<String, Cell>,
    /// `Some` for verification runs.
    pub passed: Option<bool>,
}

impl Report {
    fn new(operation: Operation, columns: &[&'static str]) -> Self {
        Self { operation, columns: columns.to_vec(), rows: vec![], traces: vec![], notes: BTreeMap::new(), passed: None }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn note(&mut self, key: &str, value: impl Into<Cell>) {
        self.notes.insert(key.into(), value.into());
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect()))
            .collect();
        let mut obj = Map::new();
        obj.insert("operation".into(), json!(self.operation.name()));
        obj.insert("rows".into(), Value::Array(rows));
        if !self.traces.is_empty() {
            obj.insert("traces".into(), Value::Array(self.traces.clone()));
        }
        if !self.notes.is_empty() {
            obj.insert("notes".into(), Value::Object(self.notes.iter().map(|(k, v)| (k.clone(), v.json())).collect()));
        }
        if let Some(p) = self.passed {
            obj.insert("pass".into(), json!(p));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// 0 unless a verification failed.
    pub fn exit_status(&self) -> i32 {
        match self.passed {
            Some(false) => 1,
            _ => 0,
        }
    }
}

/// Exit status for an error: 2 for unparsable or invalid input, 3 when the
/// domain cannot be built or does not support the request, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::DimensionMismatch { .. }
        | Error::NonFinite(_)
        | Error::Empty
        | Error::InvalidParameter(_)
        | Error::NotInDomain(_) => 2,
        Error::UnknownDescriptor(_) | Error::InvalidDescriptor(_) | Error::OracleUnsupported(_) | Error::NotReinhardt => 3,
        Error::SampleExhausted(_) | Error::VacuousBound(_) | Error::NoSingularLine { .. } => 1,
    }
}

/// Worker count from `IML_THREADS`; `None` when unset, empty or zero.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("IML_THREADS") {
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(Error::Parse(format!("IML_THREADS must be a positive integer, got `{s}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `op` on a private worker pool of `threads` workers (all cores when
/// `None`).
pub fn execute_with_threads(op: Operation, cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Report> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(|| execute(op, cfg))
}

/// Runs `op` on the current worker pool.
pub fn execute(op: Operation, cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    match op {
        Operation::Metric => run_metric(cfg),
        Operation::Lempert => run_lempert(cfg),
        Operation::Higher => run_higher(cfg),
        Operation::Hull => run_hull(cfg),
        Operation::Derivative => run_derivative(cfg),
        Operation::VerifyProp2 => run_verify(cfg, &[Suite::Prop2]),
        Operation::VerifyTheorem1 => run_verify(cfg, &[Suite::Theorem1]),
        Operation::VerifyAll => run_verify(cfg, &[Suite::Prop2, Suite::Theorem1]),
        Operation::Example3 => run_example3(cfg),
        Operation::Example3Dump => run_example3_dump(cfg),
        Operation::CurveLength => run_curve_length(cfg),
    }
}

const VALUE_COLUMNS: [&str; 8] = ["quantity", "domain", "z", "arg", "m", "value", "kind", "witness"];

fn value_row(q: &str, dom: &DomainModel, z: &CPoint, arg: String, m: usize, est: &MetricEstimate) -> Vec<Cell> {
    let mut witness = est.witness.summary();
    if let Some(d) = &est.diagnostic {
        witness = format!("{witness}; {d}");
    }
    vec![
        q.into(),
        dom.label().into(),
        z.to_string().into(),
        arg.into(),
        m.into(),
        est.value.into(),
        est.kind.as_str().into(),
        witness.into(),
    ]
}

fn oracle_usable(dom: &DomainModel, z: &CPoint, w: Option<&CPoint>) -> Option<OracleDomainTag> {
    let origin = |p: &CPoint| p.as_slice().iter().all(|c| c.norm() == 0.0);
    match OracleDomainTag::from_domain(dom).ok()? {
        t @ OracleDomainTag::BalancedAtOrigin { .. } => {
            let ok = match w {
                None => origin(z),
                Some(w) => origin(z) || origin(w),
            };
            ok.then_some(t)
        }
        t => Some(t),
    }
}

fn use_oracle(cfg: &ExperimentConfig, dom: &DomainModel, z: &CPoint, w: Option<&CPoint>) -> Result<bool> {
    match cfg.method {
        Method::Search => Ok(false),
        Method::Auto => Ok(oracle_usable(dom, z, w).is_some()),
        Method::Oracle => {
            let tag = OracleDomainTag::from_domain(dom)?;
            if oracle_usable(dom, z, w).is_none() {
                return Err(Error::OracleUnsupported(format!("no closed form at this point for {}", tag.name())));
            }
            Ok(true)
        }
    }
}

fn build_domain(cfg: &ExperimentConfig) -> Result<DomainModel> {
    DomainModel::new(&cfg.domain)
}

fn run_metric(cfg: &ExperimentConfig) -> Result<Report> {
    let dom = build_domain(cfg)?;
    let z = cfg.base_point(dom.dim())?;
    let x = cfg.vector(dom.dim())?;
    let est = if use_oracle(cfg, &dom, &z, None)? {
        oracle_kappa(&OracleDomainTag::from_domain(&dom)?, &z, &x)?
    } else {
        kobayashi_royden_upper(&dom, &z, &x, &cfg.seeded_search(&cfg.search))?
    };
    let mut r = Report::new(Operation::Metric, &VALUE_COLUMNS);
    r.push(value_row("kappa", &dom, &z, x.to_string(), 1, &est));
    Ok(r)
}

fn run_lempert(cfg: &ExperimentConfig) -> Result<Report> {
    let dom = build_domain(cfg)?;
    let z = cfg.base_point(dom.dim())?;
    let w = cfg.second_point(dom.dim())?.ok_or_else(|| Error::Parse("lempert needs a second point (w)".into()))?;
    let est = if use_oracle(cfg, &dom, &z, Some(&w))? {
        oracle_lempert(&OracleDomainTag::from_domain(&dom)?, &z, &w)?
    } else {
        lempert_upper(&dom, &z, &w, &cfg.seeded_search(&cfg.search))?
    };
    let mut r = Report::new(Operation::Lempert, &VALUE_COLUMNS);
    r.push(value_row("lempert_star", &dom, &z, w.to_string(), 1, &est));
    let tanh = MetricEstimate { value: atanh_checked(est.value).unwrap_or(f64::INFINITY), ..est.clone() };
    r.push(value_row("lempert", &dom, &z, w.to_string(), 1, &tanh));
    Ok(r)
}

fn metric_backend(cfg: &ExperimentConfig, dom: &DomainModel, z: &CPoint) -> Result<Box<dyn InfinitesimalMetric>> {
    Ok(if use_oracle(cfg, dom, z, None)? {
        Box::new(OracleKappa::new(dom)?)
    } else {
        Box::new(SearchKappa { dom: dom.clone(), cfg: cfg.seeded_search(&cfg.search) })
    })
}

fn lempert_backend(
    cfg: &ExperimentConfig,
    search: &SearchConfig,
    dom: &DomainModel,
    z: &CPoint,
    w: &CPoint,
) -> Result<Box<dyn LempertEvaluator>> {
    Ok(if use_oracle(cfg, dom, z, Some(w))? && !matches!(OracleDomainTag::from_domain(dom)?, OracleDomainTag::BalancedAtOrigin { .. }) {
        Box::new(OracleLempert::new(dom)?)
    } else {
        Box::new(SearchLempert { dom: dom.clone(), cfg: cfg.seeded_search(search) })
    })
}

fn run_higher(cfg: &ExperimentConfig) -> Result<Report> {
    let dom = build_domain(cfg)?;
    let z = cfg.base_point(dom.dim())?;
    let ladder = cfg.seeded_ladder();
    let mut r = Report::new(Operation::Higher, &VALUE_COLUMNS);
    if let Some(w) = cfg.second_point(dom.dim())? {
        let eval = lempert_backend(cfg, &cfg.search, &dom, &z, &w)?;
        let kind = eval.lempert_star(&z, &z)?.kind;
        let (values, chain) = lempert_ladder(eval.as_ref(), &z, &w, cfg.m, &[], &ladder)?;
        for (i, v) in values.iter().enumerate() {
            let points = if i + 1 == values.len() { chain.points.clone() } else { vec![] };
            let mut est = MetricEstimate::upper(*v, Witness::Chain { points });
            est.kind = kind;
            let mut row = value_row("k_m", &dom, &z, w.to_string(), i + 1, &est);
            if i + 1 < values.len() {
                row[7] = "nested".into();
            }
            r.push(row);
        }
    } else {
        let x = cfg.vector(dom.dim())?;
        let metric = metric_backend(cfg, &dom, &z)?;
        let kind = metric.kappa(&z, &CVector::zeros(dom.dim()))?.kind;
        let (values, d) = kobayashi_ladder(metric.as_ref(), &z, &x, cfg.m, &ladder)?;
        for (i, v) in values.iter().enumerate() {
            let parts = if i + 1 == values.len() { d.parts.clone() } else { vec![] };
            let mut est = MetricEstimate::upper(*v, Witness::Decomposition { parts });
            est.kind = kind;
            let mut row = value_row("kappa_m", &dom, &z, x.to_string(), i + 1, &est);
            if i + 1 < values.len() {
                row[7] = "nested".into();
            }
            r.push(row);
        }
    }
    Ok(r)
}

fn run_hull(cfg: &ExperimentConfig) -> Result<Report> {
    let dom = build_domain(cfg)?;
    let h = dom
        .balanced_gauge()
        .ok_or_else(|| Error::OracleUnsupported("hull needs a balanced domain".into()))?
        .clone();
    let x = cfg.vector(dom.dim())?;
    let z = CPoint::origin(dom.dim());
    let hull = HullFunctional::new(&h, cfg.ladder.hull_points)?;
    let mut r = Report::new(Operation::Hull, &VALUE_COLUMNS);
    let hx = h.eval(&x)?;
    r.push(value_row("h", &dom, &z, x.to_string(), 1, &MetricEstimate::exact(hx, Witness::Oracle { tag: "gauge".into() })));
    let hv = hull.eval(&x)?;
    let mut hull_est = MetricEstimate::exact(hv, Witness::Oracle { tag: "hull-polygon".into() });
    if hull.is_unbounded() {
        hull_est.diagnostic = Some("hull contains a coordinate axis direction".into());
    }
    r.push(value_row("hull", &dom, &z, x.to_string(), 1, &hull_est));
    let kb = kobayashi_buseman(&OracleKappa::new(&dom)?, &z, &x, &cfg.seeded_ladder())?;
    r.push(value_row("kappa_hat", &dom, &z, x.to_string(), 2 * dom.dim() - 1, &kb));
    Ok(r)
}

const TRACE_COLUMNS: [&str; 7] = ["level", "rho", "upper", "lower", "samples", "kappa_m", "m"];

fn run_derivative(cfg: &ExperimentConfig) -> Result<Report> {
    let dom = build_domain(cfg)?;
    let z = cfg.base_point(dom.dim())?;
    let x = cfg.vector(dom.dim())?;
    let check = cfg.check_config(&dom);
    let (kappa_m, trace, witness) = kappa_and_trace(&dom, &z, &x, cfg.m, &check)?;
    let mut r = Report::new(Operation::Derivative, &TRACE_COLUMNS);
    for (i, l) in trace.levels.iter().enumerate() {
        r.push(vec![i.to_string().into(), l.rho.into(), l.max.into(), l.min.into(), l.samples.into(), kappa_m.into(), cfg.m.into()]);
    }
    let last_rho = trace.levels.last().map_or(0.0, |l| l.rho);
    r.push(vec!["limit".into(), last_rho.into(), trace.upper_limit.into(), trace.lower_limit.into(), 0usize.into(), kappa_m.into(), cfg.m.into()]);
    r.push(vec![
        "extrapolated".into(),
        0.0.into(),
        trace.upper_extrapolated.into(),
        trace.lower_extrapolated.into(),
        0usize.into(),
        kappa_m.into(),
        cfg.m.into(),
    ]);
    r.note("domain", dom.label());
    r.note("z", z.to_string());
    r.note("X", x.to_string());
    r.note("witness", witness);
    r.traces.push(trace_json(&trace));
    Ok(r)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Suite {
    Prop2,
    Theorem1,
}

const VERIFY_COLUMNS: [&str; 13] = [
    "check",
    "domain",
    "z",
    "X",
    "m",
    "kappa_m",
    "upper",
    "lower",
    "upper_extrapolated",
    "lower_extrapolated",
    "tol",
    "pass",
    "witness",
];

/// Radius of a ball around the origin inside the domain, when one is known.
fn inscribed_radius(desc: &DomainDescriptor) -> f64 {
    match desc {
        DomainDescriptor::Polydisc { radii } => radii.iter().cloned().fold(f64::INFINITY, f64::min),
        DomainDescriptor::EuclideanBall { radius, .. } => *radius,
        DomainDescriptor::Product { first, second } => inscribed_radius(first).min(inscribed_radius(second)),
        _ => 1.0,
    }
}

/// The `k`-th random input of a suite.
pub fn verify_input(cfg: &ExperimentConfig, dom: &DomainModel, suite_tag: u64, domain_index: usize, m: usize, k: usize) -> Result<(CPoint, CVector)> {
    let n = dom.dim();
    let mut g = rng::stream(cfg.seed, &[0x7e41, suite_tag, domain_index as u64, m as u64, k as u64]);
    let x = CVector::new(rng::unit_sphere(&mut g, n))?;
    let z = if let Some(z) = cfg.point(&cfg.z, n)? {
        z
    } else if dom.balanced_gauge().is_some() {
        CPoint::origin(n)
    } else {
        let s = cfg.verify.z_radius * inscribed_radius(dom.descriptor()) / (n as f64).sqrt().max(1.0);
        let b: Vec<C64> = rng::unit_ball(&mut g, n).into_iter().map(|c| c * s).collect();
        CPoint::new(b)?
    };
    Ok((z, x))
}

fn verify_row(row: &CheckRow, upper_ext: f64, lower_ext: f64) -> Vec<Cell> {
    vec![
        row.check.clone().into(),
        row.domain.clone().into(),
        row.z.to_string().into(),
        row.x.to_string().into(),
        row.m.into(),
        row.kappa_m.into(),
        row.upper.into(),
        row.lower.into(),
        upper_ext.into(),
        lower_ext.into(),
        row.tol.into(),
        row.pass.into(),
        row.witness.clone().into(),
    ]
}

fn run_verify(cfg: &ExperimentConfig, suites: &[Suite]) -> Result<Report> {
    let op = match suites {
        [Suite::Prop2] => Operation::VerifyProp2,
        [Suite::Theorem1] => Operation::VerifyTheorem1,
        _ => Operation::VerifyAll,
    };
    let mut r = Report::new(op, &VERIFY_COLUMNS);
    let mut all = true;
    for &suite in suites {
        let names = match suite {
            Suite::Prop2 => &cfg.verify.prop2_domains,
            Suite::Theorem1 => &cfg.verify.theorem1_domains,
        };
        let descriptors: Vec<DomainDescriptor> = names.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        let tag = if suite == Suite::Prop2 { 2 } else { 1 };
        for (di, desc) in descriptors.iter().enumerate() {
            let dom = DomainModel::new(desc)?;
            let check = cfg.check_config(&dom);
            for &m in &cfg.verify.m {
                for k in 0..cfg.verify.directions {
                    let (z, x) = verify_input(cfg, &dom, tag, di, m, k)?;
                    let row = match suite {
                        Suite::Prop2 => prop2_check(&dom, &z, &x, m, &check)?,
                        Suite::Theorem1 => theorem1_check(&dom, &z, &x, m, &check)?,
                    };
                    all &= row.pass;
                    r.push(verify_row(&row, row.trace.upper_extrapolated, row.trace.lower_extrapolated));
                    r.traces.push(trace_json(&row.trace));
                }
            }
        }
    }
    r.passed = Some(all);
    Ok(r)
}

fn example3_domain(cfg: &ExperimentConfig) -> Result<Example3Domain> {
    Ok(Example3Domain::new(Example3Params::new(cfg.example3.k_terms, cfg.example3.j_terms)?))
}

const CHAIN_COLUMNS: [&str; 7] = ["segment", "kind", "from", "to", "lempert_star", "cost", "min_margin"];

fn run_example3(cfg: &ExperimentConfig) -> Result<Report> {
    let dom = example3_domain(cfg)?;
    let chain_cfg = ChainExperimentConfig { hop_radius: cfg.example3.hop_radius, search: cfg.seeded_search(&cfg.example3.search) };
    let rep = example3_chain_experiment(&dom, cfg.example3.t0, cfg.example3.t1, &chain_cfg)?;
    let mut r = Report::new(Operation::Example3, &CHAIN_COLUMNS);
    for (i, s) in rep.segments.iter().enumerate() {
        let kind = serde_json::to_value(s.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        r.push(vec![
            i.to_string().into(),
            kind.into(),
            s.from.to_string().into(),
            s.to.to_string().into(),
            s.lempert_star.into(),
            s.cost.into(),
            s.min_margin.into(),
        ]);
    }
    let gamma = ParametricCurve::Example3Gamma;
    r.push(vec![
        "total".into(),
        "chain".into(),
        gamma.point(rep.t0).to_string().into(),
        gamma.point(rep.t1).to_string().into(),
        "".into(),
        rep.total.into(),
        rep.segments.iter().map(|s| s.min_margin).fold(f64::INFINITY, f64::min).into(),
    ]);
    r.note("K", rep.k_terms);
    r.note("J", rep.j_terms);
    r.note("total", rep.total);
    r.note("hop_distance_start", rep.hop_distances[0]);
    r.note("hop_distance_end", rep.hop_distances[1]);
    r.note("line_start", fmt_complex(rep.lines[0]));
    r.note("line_end", fmt_complex(rep.lines[1]));
    r.note("u0_truncated", eval_u(C64::new(0.0, 0.0), rep.k_terms).to_f64());
    r.note("u0_exact", u_at_origin_exact());
    r.note("u_tail_bound", u_tail_bound(rep.k_terms));
    r.note("v_tail_bound", v_tail_bound(rep.k_terms, rep.j_terms));
    Ok(r)
}

fn run_example3_dump(cfg: &ExperimentConfig) -> Result<Report> {
    let dom = example3_domain(cfg)?;
    let mut r = Report::new(Operation::Example3Dump, &["index", "re", "im"]);
    for (i, c) in dom.singular_first_coordinates().iter().enumerate() {
        r.push(vec![i.into(), c.re.into(), c.im.into()]);
    }
    r.note("K", cfg.example3.k_terms);
    r.note("J", cfg.example3.j_terms);
    Ok(r)
}

fn run_curve_length(cfg: &ExperimentConfig) -> Result<Report> {
    let (dom, curve) = match cfg.curve.curve {
        CurveKind::Gamma => (build_domain(cfg)?, ParametricCurve::Example3Gamma),
        CurveKind::Segment => {
            let dom = build_domain(cfg)?;
            let z = cfg.base_point(dom.dim())?;
            let w = cfg.second_point(dom.dim())?.ok_or_else(|| Error::Parse("a segment needs its end point (w)".into()))?;
            (dom, ParametricCurve::segment(z, w)?)
        }
    };
    if curve.dim() != dom.dim() {
        return Err(Error::DimensionMismatch { expected: dom.dim(), got: curve.dim() });
    }
    for t in [0.0, 1.0] {
        dom.require_inside(&curve.point(t))?;
    }
    let search = cfg.seeded_search(&cfg.curve.search);
    let mut r = Report::new(Operation::CurveLength, &["mode", "resolution", "length"]);
    if matches!(cfg.curve.mode, LengthMode::Distance | LengthMode::Both) {
        let chain_dom = dom.example3().cloned();
        let chain_cfg = ChainExperimentConfig { hop_radius: cfg.example3.hop_radius, search: search.clone() };
        let d = |a: &CPoint, b: &CPoint| -> Result<f64> {
            if a == b {
                return Ok(0.0);
            }
            let eval = lempert_backend(cfg, &search, &dom, a, b)?;
            let mut best = eval.lempert(a, b)?;
            if let (Some(e3), CurveKind::Gamma) = (&chain_dom, cfg.curve.curve) {
                let (ta, tb) = (2.0 * a[0].im, 2.0 * b[0].im);
                if let Ok(rep) = example3_chain_experiment(e3, ta, tb, &chain_cfg) {
                    best = best.min(rep.total);
                }
            }
            Ok(best)
        };
        for (p, l) in length_ladder(d, &curve, cfg.curve.doublings)? {
            r.push(vec!["distance".into(), p.into(), l.into()]);
        }
    }
    if matches!(cfg.curve.mode, LengthMode::Metric | LengthMode::Both) {
        let mu = |z: &CPoint, x: &CVector| -> Result<f64> {
            if x.is_zero() {
                return Ok(0.0);
            }
            match oracle_usable(&dom, z, None) {
                Some(tag) if cfg.method != Method::Search => Ok(oracle_kappa(&tag, z, x)?.value),
                _ => Ok(kobayashi_royden_upper(&dom, z, x, &search)?.value),
            }
        };
        let l = length_by_metric(mu, &curve, cfg.curve.quadrature_points)?;
        r.push(vec!["metric".into(), cfg.curve.quadrature_points.into(), l.into()]);
    }
    r.note("domain", dom.label());
    Ok(r)
}
