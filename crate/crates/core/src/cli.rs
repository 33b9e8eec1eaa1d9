//! Command driver: one JSON input document per command, reports as JSON
//! (sorted keys), CSV or SVG.
//!
//! Every document carries `"schema": "v1"` and rejects unknown fields.
//! Exit codes: 0 success, 2 invalid input, 3 budget exceeded, 64 unknown
//! command, 65 malformed JSON.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::compacta::{Gap, Scheme};
use crate::construction::{check_propositions, CoordinateModel};
use crate::error::Error;
use crate::gamma::{
    cross_validate, gamma_rank_symbolic, gamma_trace, symbolic_levels, IntervalSquareRelation,
    TraceRow,
};
use crate::interval_maps::{
    cpe_verdict, entropy_table, eval_psi, product_verdict, psi_finite, tent, EntropyRow,
    PiecewiseLinearMap, PsiMap, DEFAULT_BUDGET,
};
use crate::plots;
use crate::rational::{self, one, zero, Q};
use crate::shadowing::{
    demo, finite_shadowing_check, independence_from_shadowing, is_pseudo_orbit, weave,
    GridSystem, ShadowVerdict, WeaveInputs,
};
use crate::shifts::{Cylinder, DensityResult, Sft, SftSpec};
use crate::space::FiniteSpace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_UNKNOWN_COMMAND: i32 = 64;
pub const EXIT_MALFORMED: i32 = 65;

/// Default exhaustive-search budget for `shadow-check`.
pub const DEFAULT_SHADOW_BUDGET: u64 = 1_000_000;

pub const COMMANDS: [&str; 13] = [
    "cb-rank",
    "gamma-rank",
    "psi-build",
    "psi-entropy",
    "entropy-pairs",
    "cpe-verdict",
    "ie-verdict",
    "density-profile",
    "sft-entropy",
    "shadow-check",
    "weave",
    "construct-check",
    "cross-validate",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Svg,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cpe-workbench", version, about = "Desk-scale local entropy theory workbench")]
pub struct Args {
    /// One of: cb-rank, gamma-rank, psi-build, psi-entropy, entropy-pairs,
    /// cpe-verdict, ie-verdict, density-profile, sft-entropy, shadow-check,
    /// weave, construct-check, cross-validate.
    pub command: String,
    /// Input document; standard input when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Directory for the report file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the document's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the document's work budget.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Flag overrides shared by all commands.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<u64>,
}

/// A failed run: exit code plus a machine-readable error document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub exit_code: i32,
    pub kind: String,
    pub message: String,
}

impl Failure {
    fn new(exit_code: i32, kind: &str, message: impl Into<String>) -> Self {
        Failure {
            exit_code,
            kind: kind.into(),
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        to_sorted_json(&serde_json::json!({ "error": self }))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match &e {
            Error::Resource(m) => Failure::new(EXIT_BUDGET, "resource", m.clone()),
            Error::Validation(m) => Failure::new(EXIT_INVALID, "validation", m.clone()),
            Error::Domain(m) => Failure::new(EXIT_INVALID, "domain", m.clone()),
            Error::Precondition(m) => Failure::new(EXIT_INVALID, "precondition", m.clone()),
        }
    }
}

/// A finished report in every format the command supports.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub json: Value,
    pub csv: Option<String>,
    pub svg: Option<String>,
}

impl Report {
    pub fn render(&self, format: Format) -> Result<String, Failure> {
        match format {
            Format::Json => Ok(to_sorted_json(&self.json)),
            Format::Csv => self.csv.clone().ok_or_else(|| unsupported(&self.command, format)),
            Format::Svg => self.svg.clone().ok_or_else(|| unsupported(&self.command, format)),
        }
    }
}

fn unsupported(command: &str, format: Format) -> Failure {
    Failure::new(
        EXIT_INVALID,
        "validation",
        format!("{command} has no {} output", format.extension()),
    )
}

/// Pretty JSON with object keys in sorted order and a trailing newline.
pub fn to_sorted_json<T: Serialize>(value: &T) -> String {
    // serde_json's default map is ordered, so a round trip through Value sorts.
    let v = serde_json::to_value(value).expect("reports serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemaVersion {
    #[serde(rename = "v1")]
    V1,
}

// ---- documents ----

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeDoc {
    pub schema: SchemaVersion,
    pub scheme: Scheme,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CbRankDoc {
    pub schema: SchemaVersion,
    pub scheme: Scheme,
    /// Widest gaps listed per level.
    #[serde(default = "default_gaps")]
    pub gaps_per_level: usize,
}

fn default_gaps() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaRankDoc {
    pub schema: SchemaVersion,
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "rational::text_opt")]
    pub eps: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiBuildDoc {
    pub schema: SchemaVersion,
    pub scheme: Scheme,
    pub depth: usize,
    /// Points at which the exact (unapproximated) map is evaluated.
    #[serde(default, with = "rational::text_vec")]
    pub eval: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiEntropyDoc {
    pub schema: SchemaVersion,
    /// The tent map when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    pub n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
}

fn default_depth() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpeDoc {
    pub schema: SchemaVersion,
    pub scheme: Scheme,
    /// Also report the verdict for this finite power of the system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_power: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IeDoc {
    pub schema: SchemaVersion,
    pub sft: SftSpec,
    pub u: Cylinder,
    pub v: Cylinder,
    #[serde(with = "rational::text")]
    pub r: Q,
    pub l_max: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityDoc {
    pub schema: SchemaVersion,
    pub sft: SftSpec,
    pub u: Cylinder,
    pub v: Cylinder,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SftEntropyDoc {
    pub schema: SchemaVersion,
    pub sft: SftSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Word length for the counting cross-check.
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_tol() -> f64 {
    1e-12
}

fn default_k() -> usize {
    20
}

/// A finite system given explicitly or by name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemDoc {
    Explicit { space: FiniteSpace, map: Vec<usize> },
    /// Identity on the grid `i/grid_n`.
    IdentityGrid { grid_n: usize },
    /// The tent map rounded to the grid `i/grid_n`.
    TentGrid { grid_n: usize },
}

impl SystemDoc {
    pub fn build(&self) -> crate::Result<GridSystem> {
        match self {
            SystemDoc::Explicit { space, map } => GridSystem::new(space.clone(), map.clone()),
            SystemDoc::IdentityGrid { grid_n } => Ok(GridSystem::identity(FiniteSpace::grid(*grid_n))),
            SystemDoc::TentGrid { grid_n } => Ok(GridSystem::tent_grid(*grid_n)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowDoc {
    pub schema: SchemaVersion,
    pub system: SystemDoc,
    #[serde(with = "rational::text")]
    pub eps: Q,
    #[serde(with = "rational::text")]
    pub delta: Q,
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeaveSetup {
    /// Periodic points of the binary full shift carrying every stream.
    FullShift,
    /// A single periodic orbit.
    SingleCycle,
    Explicit {
        system: SystemDoc,
        inputs: WeaveInputs,
        #[serde(with = "rational::text")]
        eps: Q,
        #[serde(with = "rational::text")]
        delta: Q,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeaveDoc {
    pub schema: SchemaVersion,
    pub setup: WeaveSetup,
    pub k: usize,
    /// A pattern of 1s and 3s to weave and report, extended cyclically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<Vec<u8>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructDoc {
    pub schema: SchemaVersion,
    pub model: CoordinateModel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossDoc {
    pub schema: SchemaVersion,
    pub scheme: Scheme,
    pub grid_n: usize,
    #[serde(with = "rational::text")]
    pub eps: Q,
}

// ---- results ----

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelGaps {
    pub level: usize,
    pub set: Option<Scheme>,
    pub gaps: Vec<Gap>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CbRankResult {
    pub rank: usize,
    pub core: Option<Scheme>,
    pub levels: Vec<LevelGaps>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGamma {
    pub grid_n: usize,
    #[serde(with = "rational::text")]
    pub eps: Q,
    pub rank: usize,
    pub fixed_full: bool,
    pub trace: Vec<TraceRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaRankResult {
    pub symbolic_rank: usize,
    pub symbolic_fixed_full: bool,
    /// Base set of each symbolic level; `null` is the full square.
    pub symbolic_bases: Vec<Option<Scheme>>,
    pub finite: Option<FiniteGamma>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    #[serde(with = "rational::text")]
    pub x: Q,
    #[serde(with = "rational::text")]
    pub value: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiBuildResult {
    pub map: PiecewiseLinearMap,
    pub pieces: usize,
    pub laps: u64,
    pub evaluations: Vec<Evaluation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyPairsResult {
    /// The relation is the union of closed gap squares of this set plus the
    /// diagonal.
    pub base: Scheme,
    pub gamma_rank: usize,
    pub fixed_full: bool,
    pub widest_blocks: Vec<Gap>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SftEntropyResult {
    pub entropy: f64,
    pub irreducible: bool,
    pub states: usize,
    pub k: usize,
    /// Number of allowed words of length `k`, in decimal.
    pub word_count: String,
    /// `ln(word_count) / k`.
    pub growth_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowResult {
    pub budget: u64,
    pub seed: u64,
    pub outcome: ShadowVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WovenPattern {
    pub pattern: Vec<u8>,
    pub seq: Vec<usize>,
    pub is_pseudo_orbit: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeaveResult {
    pub points: usize,
    pub period: usize,
    pub centres: [usize; 3],
    pub woven: Option<WovenPattern>,
    pub independence: crate::shadowing::IndependenceReport,
}

// ---- driver ----

fn parse_doc<D: DeserializeOwned>(value: Value) -> Result<D, Failure> {
    match value.get("schema") {
        None => return Err(Failure::new(EXIT_INVALID, "validation", "missing \"schema\" field")),
        Some(Value::String(s)) if s == "v1" => {}
        Some(other) => {
            return Err(Failure::new(
                EXIT_INVALID,
                "validation",
                format!("unsupported schema {other}, expected \"v1\""),
            ))
        }
    }
    serde_json::from_value(value).map_err(|e| Failure::new(EXIT_INVALID, "validation", e.to_string()))
}

fn report<D: Serialize, R: Serialize>(command: &str, doc: &D, result: &R) -> Value {
    serde_json::json!({
        "command": command,
        "input": serde_json::to_value(doc).expect("documents serialize"),
        "result": serde_json::to_value(result).expect("results serialize"),
    })
}

fn plain(command: &str, json: Value) -> Report {
    Report {
        command: command.into(),
        json,
        csv: None,
        svg: None,
    }
}

fn csv_lines(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

/// Runs one command on the text of its input document.
pub fn run_text(command: &str, text: &str, ov: Overrides) -> Result<Report, Failure> {
    if !COMMANDS.contains(&command) {
        return Err(Failure::new(
            EXIT_UNKNOWN_COMMAND,
            "unknown_command",
            format!("unknown command {command:?}"),
        ));
    }
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Failure::new(EXIT_MALFORMED, "malformed_json", e.to_string()))?;
    match command {
        "cb-rank" => cb_rank(parse_doc(value)?),
        "gamma-rank" => gamma_rank(parse_doc(value)?),
        "psi-build" => psi_build(parse_doc(value)?),
        "psi-entropy" => psi_entropy(parse_doc(value)?, ov),
        "entropy-pairs" => entropy_pairs(parse_doc(value)?),
        "cpe-verdict" => cpe(parse_doc(value)?),
        "ie-verdict" => ie(parse_doc(value)?),
        "density-profile" => density(parse_doc(value)?),
        "sft-entropy" => sft_entropy(parse_doc(value)?),
        "shadow-check" => shadow(parse_doc(value)?, ov),
        "weave" => weave_cmd(parse_doc(value)?),
        "construct-check" => construct(parse_doc(value)?),
        "cross-validate" => cross(parse_doc(value)?),
        _ => unreachable!("checked against COMMANDS"),
    }
}

fn validated(s: &Scheme) -> Result<(), Failure> {
    s.validate().map_err(Failure::from)
}

fn level_gaps(set: Option<&Scheme>, k: usize) -> Vec<Gap> {
    match set {
        Some(s) => s.contiguous_intervals(k),
        None => vec![Gap {
            lo: zero(),
            hi: one(),
            lo_in_a: false,
            hi_in_a: false,
        }],
    }
}

fn cb_rank(doc: CbRankDoc) -> Result<Report, Failure> {
    validated(&doc.scheme)?;
    let (sets, core) = doc.scheme.derived_sets();
    let rank = sets.len();
    let mut levels: Vec<LevelGaps> = sets
        .iter()
        .enumerate()
        .map(|(level, s)| LevelGaps {
            level,
            set: Some(s.clone()),
            gaps: level_gaps(Some(s), doc.gaps_per_level),
        })
        .collect();
    levels.push(LevelGaps {
        level: rank,
        set: core.clone(),
        gaps: level_gaps(core.as_ref(), doc.gaps_per_level),
    });
    let result = CbRankResult { rank, core, levels };
    let rows = result.levels.iter().flat_map(|l| {
        l.gaps.iter().map(move |g| {
            format!(
                "{},{},{},{}",
                l.level,
                rational::format(&g.lo),
                rational::format(&g.hi),
                rational::format(&g.width())
            )
        })
    });
    let csv = csv_lines("level,lo,hi,width", rows);
    let cascade: Vec<(usize, Vec<Gap>)> =
        result.levels.iter().map(|l| (l.level, l.gaps.clone())).collect();
    Ok(Report {
        command: "cb-rank".into(),
        json: report("cb-rank", &doc, &result),
        csv: Some(csv),
        svg: Some(plots::cascade_svg(&cascade)),
    })
}

fn trace_csv(rows: &[TraceRow]) -> String {
    csv_lines(
        "step,pair_count,is_fixed",
        rows.iter().map(|r| format!("{},{},{}", r.step, r.pair_count, r.is_fixed)),
    )
}

fn gamma_rank(doc: GammaRankDoc) -> Result<Report, Failure> {
    validated(&doc.scheme)?;
    let rel = IntervalSquareRelation::new(doc.scheme.clone());
    let (symbolic_rank, fixed) = gamma_rank_symbolic(&rel);
    let symbolic_bases = symbolic_levels(&rel).into_iter().map(|r| r.base).collect();
    let finite = match (doc.grid_n, &doc.eps) {
        (None, None) => None,
        (Some(grid_n), Some(eps)) => {
            if grid_n == 0 || *eps < zero() {
                return Err(Failure::new(EXIT_INVALID, "validation", "grid_n must be positive and eps nonnegative"));
            }
            let space = FiniteSpace::grid(grid_n);
            let trace = gamma_trace(&space, &rel.discretize(grid_n), eps);
            let last = trace.last().expect("trace is nonempty");
            Some(FiniteGamma {
                grid_n,
                eps: eps.clone(),
                rank: last.step,
                fixed_full: last.pair_count == space.len() * space.len(),
                trace,
            })
        }
        _ => {
            return Err(Failure::new(
                EXIT_INVALID,
                "validation",
                "grid_n and eps must be given together",
            ))
        }
    };
    let result = GammaRankResult {
        symbolic_rank,
        symbolic_fixed_full: fixed.is_full(),
        symbolic_bases,
        finite,
    };
    let (csv, svg) = match &result.finite {
        Some(f) => (Some(trace_csv(&f.trace)), Some(plots::trace_svg(&f.trace))),
        None => (None, None),
    };
    Ok(Report {
        command: "gamma-rank".into(),
        json: report("gamma-rank", &doc, &result),
        csv,
        svg,
    })
}

fn psi_build(doc: PsiBuildDoc) -> Result<Report, Failure> {
    validated(&doc.scheme)?;
    let map = psi_finite(&doc.scheme, doc.depth);
    let exact = PsiMap::new(doc.scheme.clone());
    let mut evaluations = Vec::new();
    for x in &doc.eval {
        evaluations.push(Evaluation {
            x: x.clone(),
            value: eval_psi(&exact, x)?,
        });
    }
    let result = PsiBuildResult {
        pieces: map.pieces(),
        laps: map.laps(),
        map,
        evaluations,
    };
    let csv = csv_lines(
        "x,value",
        result
            .map
            .breakpoints
            .iter()
            .zip(&result.map.values)
            .map(|(x, y)| format!("{},{}", rational::format(x), rational::format(y))),
    );
    Ok(Report {
        csv: Some(csv),
        ..plain("psi-build", report("psi-build", &doc, &result))
    })
}

fn psi_entropy(doc: PsiEntropyDoc, ov: Overrides) -> Result<Report, Failure> {
    let map = match &doc.scheme {
        Some(s) => {
            validated(s)?;
            psi_finite(s, doc.depth)
        }
        None => tent(),
    };
    if doc.n_max == 0 {
        return Err(Failure::new(EXIT_INVALID, "validation", "n_max must be at least 1"));
    }
    let budget = ov.budget.or(doc.budget).map_or(DEFAULT_BUDGET, |b| b as usize);
    let rows: Vec<EntropyRow> = entropy_table(&map, doc.n_max, budget)?;
    let csv = csv_lines(
        "n,laps,estimate",
        rows.iter().map(|r| format!("{},{},{:.15}", r.n, r.laps, r.estimate)),
    );
    Ok(Report {
        csv: Some(csv),
        ..plain("psi-entropy", report("psi-entropy", &doc, &rows))
    })
}

fn entropy_pairs(doc: SchemeDoc) -> Result<Report, Failure> {
    validated(&doc.scheme)?;
    let rel = IntervalSquareRelation::new(doc.scheme.clone());
    let (gamma_rank, fixed) = gamma_rank_symbolic(&rel);
    let result = EntropyPairsResult {
        base: doc.scheme.clone(),
        gamma_rank,
        fixed_full: fixed.is_full(),
        widest_blocks: doc.scheme.contiguous_intervals(8),
    };
    Ok(plain("entropy-pairs", report("entropy-pairs", &doc, &result)))
}

fn cpe(doc: CpeDoc) -> Result<Report, Failure> {
    validated(&doc.scheme)?;
    let verdict = cpe_verdict(&doc.scheme);
    let mut result = serde_json::to_value(&verdict).expect("verdicts serialize");
    if let Some(d) = doc.product_power {
        result["product"] = serde_json::to_value(product_verdict(&verdict, d)).expect("verdicts serialize");
    }
    Ok(plain("cpe-verdict", report("cpe-verdict", &doc, &result)))
}

fn ie(doc: IeDoc) -> Result<Report, Failure> {
    let sft = Sft::new(doc.sft.clone())?;
    let verdict = sft.ie_pair_verdict(&doc.u, &doc.v, &doc.r, doc.l_max)?;
    Ok(plain("ie-verdict", report("ie-verdict", &doc, &verdict)))
}

fn density(doc: DensityDoc) -> Result<Report, Failure> {
    let sft = Sft::new(doc.sft.clone())?;
    let rows: Vec<DensityResult> = sft.density_profile(&doc.u, &doc.v, doc.n)?;
    let csv = csv_lines(
        "l,max_size,density",
        rows.iter().map(|r| {
            format!("{},{},{}", r.window, r.positions.len(), rational::format(&r.density))
        }),
    );
    let svg = plots::density_svg(&rows);
    Ok(Report {
        command: "density-profile".into(),
        json: report("density-profile", &doc, &rows),
        csv: Some(csv),
        svg: Some(svg),
    })
}

fn sft_entropy(doc: SftEntropyDoc) -> Result<Report, Failure> {
    let sft = Sft::new(doc.sft.clone())?;
    if doc.k == 0 {
        return Err(Failure::new(EXIT_INVALID, "validation", "k must be at least 1"));
    }
    let entropy = sft.entropy(doc.tol)?;
    let count = sft.word_count(doc.k);
    let digits = count.to_string();
    // ln of a big integer from its leading digits and length.
    let lead: f64 = digits[..digits.len().min(15)].parse().expect("decimal digits");
    let ln_count = lead.ln() + (digits.len() - digits.len().min(15)) as f64 * std::f64::consts::LN_10;
    let result = SftEntropyResult {
        entropy,
        irreducible: sft.is_irreducible(),
        states: sft.state_count(),
        k: doc.k,
        word_count: digits,
        growth_rate: ln_count / doc.k as f64,
    };
    Ok(plain("sft-entropy", report("sft-entropy", &doc, &result)))
}

fn shadow(doc: ShadowDoc, ov: Overrides) -> Result<Report, Failure> {
    let sys = doc.system.build()?;
    let budget = ov.budget.or(doc.budget).unwrap_or(DEFAULT_SHADOW_BUDGET);
    let seed = ov.seed.or(doc.seed).ok_or_else(|| {
        Failure::new(EXIT_INVALID, "validation", "shadow-check needs a seed (document field or --seed)")
    })?;
    let outcome = finite_shadowing_check(&sys, &doc.eps, &doc.delta, doc.p, budget, seed)?;
    let label = match &outcome {
        ShadowVerdict::HoldsExhaustive => "holds_exhaustive",
        ShadowVerdict::Fails { .. } => "fails",
        ShadowVerdict::UnknownSampled { .. } => "unknown_sampled",
    };
    let csv = csv_lines(
        "eps,delta,p,verdict",
        [format!(
            "{},{},{},{label}",
            rational::format(&doc.eps),
            rational::format(&doc.delta),
            doc.p
        )],
    );
    let result = ShadowResult {
        budget,
        seed,
        outcome,
    };
    Ok(Report {
        csv: Some(csv),
        ..plain("shadow-check", report("shadow-check", &doc, &result))
    })
}

fn weave_cmd(doc: WeaveDoc) -> Result<Report, Failure> {
    let (sys, inputs, eps, delta) = match &doc.setup {
        WeaveSetup::FullShift => {
            let (s, i) = demo::full_shift_grid(doc.k)?;
            (s, i, demo::eps(), demo::delta())
        }
        WeaveSetup::SingleCycle => {
            let (s, i) = demo::single_cycle()?;
            (s, i, demo::eps(), demo::delta())
        }
        WeaveSetup::Explicit {
            system,
            inputs,
            eps,
            delta,
        } => (system.build()?, inputs.clone(), eps.clone(), delta.clone()),
    };
    let woven = match &doc.pattern {
        Some(p) if p.is_empty() => {
            return Err(Failure::new(EXIT_INVALID, "validation", "pattern must be nonempty"))
        }
        Some(p) => {
            let mut f = p.clone();
            f.push(p[0]);
            let orbit = weave(&sys, &inputs, &f, &delta)?;
            Some(WovenPattern {
                pattern: p.clone(),
                is_pseudo_orbit: is_pseudo_orbit(&sys, &orbit.seq, &delta),
                seq: orbit.seq,
            })
        }
        None => None,
    };
    let independence = independence_from_shadowing(&sys, &inputs, &eps, &delta, doc.k)?;
    let result = WeaveResult {
        points: sys.len(),
        period: inputs.period(),
        centres: inputs.centres,
        woven,
        independence,
    };
    Ok(plain("weave", report("weave", &doc, &result)))
}

fn construct(doc: ConstructDoc) -> Result<Report, Failure> {
    let result = check_propositions(&doc.model)?;
    let mut csv = String::from("check,status,cases\n");
    for c in &result.checks {
        let status = serde_json::to_value(c.status).expect("status serializes");
        let _ = writeln!(csv, "{},{},{}", c.name, status.as_str().unwrap_or(""), c.cases);
    }
    Ok(Report {
        csv: Some(csv),
        ..plain("construct-check", report("construct-check", &doc, &result))
    })
}

fn cross(doc: CrossDoc) -> Result<Report, Failure> {
    let result = cross_validate(&doc.scheme, doc.grid_n, &doc.eps)?;
    Ok(plain("cross-validate", report("cross-validate", &doc, &result)))
}

/// Parses arguments, runs the command and writes the output. Returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let ov = Overrides {
        seed: args.seed,
        budget: args.budget,
    };
    let outcome = read_input(&args)
        .and_then(|text| run_text(&args.command, &text, ov))
        .and_then(|r| r.render(args.format));
    match outcome {
        Ok(body) => match emit(&args, &args.command, args.format.extension(), &body) {
            Ok(()) => EXIT_OK,
            Err(f) => fail(&args, f),
        },
        Err(f) => fail(&args, f),
    }
}

fn read_input(args: &Args) -> Result<String, Failure> {
    let mut text = String::new();
    let res = match &args.input {
        Some(p) => std::fs::read_to_string(p).map(|t| text = t),
        None => std::io::stdin().read_to_string(&mut text).map(|_| ()),
    };
    res.map_err(|e| Failure::new(EXIT_INVALID, "io", format!("cannot read input: {e}")))?;
    Ok(text)
}

fn emit(args: &Args, stem: &str, ext: &str, body: &str) -> Result<(), Failure> {
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .and_then(|_| std::fs::write(dir.join(format!("{stem}.{ext}")), body))
                .map_err(|e| Failure::new(EXIT_INVALID, "io", format!("cannot write report: {e}")))
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn fail(args: &Args, f: Failure) -> i32 {
    eprintln!("error: {}", f.message);
    let doc = f.to_json();
    if emit(args, "error", "json", &doc).is_err() {
        print!("{doc}");
    }
    f.exit_code
}
