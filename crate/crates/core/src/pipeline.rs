//! End-to-end runs: ingest, encode, transpile, estimate, validate, write.
//!
//! Every error carries the stage it came from and maps to a process exit
//! code (2 for bad configuration or input, 3 for internal failures).
//! Outputs carry no timestamps or paths, so equal configurations give
//! byte-identical files.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{BackendError, BackendModel};
use crate::circuit::{stage, Circuit};
use crate::decompose;
use crate::encoder::{self, McxMode, QdpCircuit, QdpOptions};
use crate::fasta::{self, FastaError};
use crate::logic;
use crate::qasm;
use crate::sequence::{self, Alphabet, SymbolSequence};
use crate::sim::statevector::{self, Histogram};
use crate::sim::SimError;
use crate::transpile::{self, ResourceReport, TranspileError};
use crate::validate::{self, ValidateError, ValidationReport};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_SHOTS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphabetChoice {
    /// A, C, G, T as 0..=3; anything else is rejected.
    Dna,
    /// Any letter, coded by first appearance.
    Auto,
}

impl AlphabetChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dna" => Some(Self::Dna),
            "auto" => Some(Self::Auto),
            _ => None,
        }
    }

    fn fixed(self) -> Option<Alphabet> {
        match self {
            Self::Dna => Some(Alphabet::dna()),
            Self::Auto => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub reference: PathBuf,
    /// `None` aligns the reference against itself.
    pub query: Option<PathBuf>,
    pub alphabet: AlphabetChoice,
    pub mcx_mode: McxMode,
    /// Preset name or path to a backend JSON file.
    pub backend: String,
    pub use_minimizer: bool,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub shots: u64,
    pub validate: bool,
    /// Label for the CSV row; defaults to the reference file stem.
    pub dataset: Option<String>,
}

impl RunConfig {
    pub fn new(reference: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            reference: reference.into(),
            query: None,
            alphabet: AlphabetChoice::Dna,
            mcx_mode: McxMode::CcnotChain,
            backend: "allsim".into(),
            use_minimizer: true,
            out_dir: out_dir.into(),
            seed: DEFAULT_SEED,
            shots: DEFAULT_SHOTS,
            validate: false,
            dataset: None,
        }
    }

    pub fn options(&self) -> QdpOptions {
        QdpOptions {
            use_minimizer: self.use_minimizer,
            mcx_mode: self.mcx_mode,
        }
    }

    pub fn dataset_label(&self) -> String {
        self.dataset.clone().unwrap_or_else(|| {
            let stem = |p: &Path| p.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned());
            match &self.query {
                Some(q) => format!("{}_vs_{}", stem(&self.reference), stem(q)),
                None => format!("{}_self", stem(&self.reference)),
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Encode,
    Transpile,
    Simulate,
    Validate,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Encode => "encode",
            Stage::Transpile => "transpile",
            Stage::Simulate => "simulate",
            Stage::Validate => "validate",
            Stage::Output => "output",
        })
    }
}

#[derive(Debug, Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    /// Bad configuration or input rather than a fault in the run itself.
    pub is_config: bool,
    pub message: String,
}

impl PipelineError {
    fn config(stage: Stage, e: impl fmt::Display) -> Self {
        Self {
            stage,
            is_config: true,
            message: e.to_string(),
        }
    }

    fn internal(stage: Stage, e: impl fmt::Display) -> Self {
        Self {
            stage,
            is_config: false,
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_config {
            2
        } else {
            3
        }
    }
}

impl From<BackendError> for PipelineError {
    fn from(e: BackendError) -> Self {
        Self::config(Stage::Config, e)
    }
}

impl From<FastaError> for PipelineError {
    fn from(e: FastaError) -> Self {
        Self::config(Stage::Ingest, e)
    }
}

impl From<TranspileError> for PipelineError {
    fn from(e: TranspileError) -> Self {
        let config = matches!(e, TranspileError::TooWide { .. } | TranspileError::Unreachable { .. });
        Self {
            stage: Stage::Transpile,
            is_config: config,
            message: e.to_string(),
        }
    }
}

fn sim_error(stage: Stage, e: SimError) -> PipelineError {
    let config = matches!(e, SimError::QubitCap { .. });
    PipelineError {
        stage,
        is_config: config,
        message: e.to_string(),
    }
}

impl From<ValidateError> for PipelineError {
    fn from(e: ValidateError) -> Self {
        match e {
            ValidateError::Sim(s) => sim_error(Stage::Validate, s),
            ValidateError::TooLong(_) => Self::config(Stage::Validate, e),
            other => Self::internal(Stage::Validate, other),
        }
    }
}

type Result<T> = std::result::Result<T, PipelineError>;

/// The mapped and padded pair named by `config`.
pub fn load_pair(config: &RunConfig) -> Result<(SymbolSequence, SymbolSequence)> {
    let fixed = config.alphabet.fixed();
    let r = fasta::read_fasta(&config.reference, fixed.as_ref())?;
    let q = match &config.query {
        Some(p) => fasta::read_fasta(p, fixed.as_ref())?,
        None => r.clone(),
    };
    let (r, q) = sequence::map_pair(&r, &q, fixed.as_ref()).map_err(|e| PipelineError::config(Stage::Ingest, e))?;
    Ok(sequence::pad_pair(&r, &q))
}

/// The reference alone, mapped and padded.
pub fn load_reference(config: &RunConfig) -> Result<SymbolSequence> {
    let fixed = config.alphabet.fixed();
    let r = fasta::read_fasta(&config.reference, fixed.as_ref())?;
    let r = sequence::map_alphabet(&r, fixed.as_ref()).map_err(|e| PipelineError::config(Stage::Ingest, e))?;
    Ok(sequence::pad_pair(&r, &r).0)
}

fn encode_err(e: impl fmt::Display) -> PipelineError {
    PipelineError::internal(Stage::Encode, e)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::config(Stage::Output, format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| PipelineError::config(Stage::Output, format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub dataset: String,
    pub alphabet: AlphabetChoice,
    pub reference_length: usize,
    pub query_length: usize,
    pub width_pixels: usize,
    pub height_pixels: usize,
    pub index_bits: usize,
    pub data_bits: usize,
    pub self_alignment: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub input: InputSummary,
    pub use_minimizer: bool,
    pub seed: u64,
    /// `(lower, upper)` qubit counts for this `n` and `d`.
    pub width_bounds: (usize, usize),
    pub logical_depth_per_stage: std::collections::BTreeMap<String, usize>,
    pub resources: ResourceReport,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub validation: Vec<ValidationSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub method: String,
    pub passed: bool,
    pub checks: u64,
    pub failures: u64,
}

impl From<&ValidationReport> for ValidationSummary {
    fn from(r: &ValidationReport) -> Self {
        Self {
            method: r.method.clone(),
            passed: r.passed,
            checks: r.checks,
            failures: r.failures,
        }
    }
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub validations: Vec<ValidationReport>,
    pub artifacts: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.validations.iter().all(|v| v.passed)
    }

    /// 0, or 1 when a requested validation failed.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }
}

fn summarize(config: &RunConfig, r: &SymbolSequence, q: &SymbolSequence) -> InputSummary {
    InputSummary {
        dataset: config.dataset_label(),
        alphabet: config.alphabet,
        reference_length: r.original_length(),
        query_length: q.original_length(),
        width_pixels: r.padded_length(),
        height_pixels: q.padded_length(),
        index_bits: r.index_bits().max(q.index_bits()) as usize,
        data_bits: r.d() as usize,
        self_alignment: config.query.is_none(),
    }
}

/// Runs both validation methods on the dot-plot circuit of the pair.
pub fn run_validations(
    r: &SymbolSequence,
    q: &SymbolSequence,
    config: &RunConfig,
) -> Result<Vec<ValidationReport>> {
    let m1 = validate::validate_method1(r, q, config.options())?;
    let m2 = validate::validate_method2(r, q, config.options(), config.shots, config.seed)?;
    Ok(vec![m1, m2])
}

/// Builds the full QPR circuit for the configured pair.
pub fn build_circuit(config: &RunConfig) -> Result<(QdpCircuit, SymbolSequence, SymbolSequence)> {
    let (r, q) = load_pair(config)?;
    let qpr = encoder::build_qpr(&r, &q, config.options()).map_err(encode_err)?;
    Ok((qpr, r, q))
}

/// The QPR circuit with MCX gates decomposed; still above the native level.
pub fn decomposed(qpr: &QdpCircuit, mode: McxMode) -> Result<Circuit> {
    decompose::decompose_circuit(&qpr.circuit, mode).map_err(encode_err)
}

/// Full pipeline: writes `report.json`, `report.csv`, `circuit.qasm` and,
/// with `validate`, one JSON per validation method.
pub fn run_pipeline(config: &RunConfig) -> Result<RunOutcome> {
    let backend = BackendModel::resolve(&config.backend)?;
    let (qpr, r, q) = build_circuit(config)?;
    let logical = decomposed(&qpr, config.mcx_mode)?;
    let (resources, routed) = transpile::estimate(&qpr.circuit, &backend, config.mcx_mode)?;
    let input = summarize(config, &r, &q);
    let validations = if config.validate {
        run_validations(&r, &q, config)?
    } else {
        Vec::new()
    };
    let report = RunReport {
        width_bounds: transpile::width_bounds(input.index_bits, input.data_bits),
        input,
        use_minimizer: config.use_minimizer,
        seed: config.seed,
        logical_depth_per_stage: logical.stage_depths(),
        resources,
        validation: validations.iter().map(ValidationSummary::from).collect(),
    };
    let qasm_text = qasm::emit_qasm(&routed.circuit).map_err(|e| PipelineError::internal(Stage::Output, e))?;
    let dir = &config.out_dir;
    let mut artifacts = vec![
        write_file(dir, "report.json", &to_json(&report))?,
        write_file(dir, "report.csv", &csv_text(&report))?,
        write_file(dir, "circuit.qasm", &qasm_text)?,
    ];
    for v in &validations {
        artifacts.push(write_file(dir, &format!("validation_{}.json", v.method), &to_json(v))?);
    }
    Ok(RunOutcome {
        report,
        validations,
        artifacts,
    })
}

fn csv_text(report: &RunReport) -> String {
    format!(
        "{}\n{}\n",
        transpile::CSV_HEADER,
        report.resources.csv_row(&report.input.dataset)
    )
}

/// Resource estimate only: `report.json` and `report.csv`.
pub fn run_estimate(config: &RunConfig) -> Result<RunReport> {
    let backend = BackendModel::resolve(&config.backend)?;
    let (qpr, r, q) = build_circuit(config)?;
    let logical = decomposed(&qpr, config.mcx_mode)?;
    let (resources, _) = transpile::estimate(&qpr.circuit, &backend, config.mcx_mode)?;
    let input = summarize(config, &r, &q);
    let report = RunReport {
        width_bounds: transpile::width_bounds(input.index_bits, input.data_bits),
        input,
        use_minimizer: config.use_minimizer,
        seed: config.seed,
        logical_depth_per_stage: logical.stage_depths(),
        resources,
        validation: Vec::new(),
    };
    write_file(&config.out_dir, "report.json", &to_json(&report))?;
    write_file(&config.out_dir, "report.csv", &csv_text(&report))?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSummary {
    pub width: usize,
    pub depth: usize,
    pub depth_per_stage: std::collections::BTreeMap<String, usize>,
    pub gate_counts: std::collections::BTreeMap<String, usize>,
}

impl CircuitSummary {
    pub fn of(c: &Circuit) -> Self {
        Self {
            width: c.width(),
            depth: c.depth(),
            depth_per_stage: c.stage_depths(),
            gate_counts: c.gate_counts(),
        }
    }
}

/// NEQR encoding of the reference alone: `neqr.json` and `neqr.qasm`
/// (MCX gates decomposed per the configured mode).
pub fn run_encode(config: &RunConfig) -> Result<CircuitSummary> {
    let seq = load_reference(config)?;
    let (c, _, _) = encoder::build_neqr(&seq, config.use_minimizer, config.mcx_mode, None).map_err(encode_err)?;
    let c = decompose::decompose_circuit(&c, config.mcx_mode).map_err(encode_err)?;
    let summary = CircuitSummary::of(&c);
    let text = qasm::emit_qasm(&c).map_err(|e| PipelineError::internal(Stage::Output, e))?;
    write_file(&config.out_dir, "neqr.json", &to_json(&summary))?;
    write_file(&config.out_dir, "neqr.qasm", &text)?;
    Ok(summary)
}

/// Full QPR circuit with decomposed MCX gates: `qpr.json` and `qpr.qasm`.
pub fn run_build(config: &RunConfig) -> Result<CircuitSummary> {
    let (qpr, _, _) = build_circuit(config)?;
    let c = decomposed(&qpr, config.mcx_mode)?;
    let summary = CircuitSummary::of(&c);
    let text = qasm::emit_qasm(&c).map_err(|e| PipelineError::internal(Stage::Output, e))?;
    write_file(&config.out_dir, "qpr.json", &to_json(&summary))?;
    write_file(&config.out_dir, "qpr.qasm", &text)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranspileSummary {
    pub backend: String,
    pub circuit: CircuitSummary,
    pub swaps_inserted: usize,
    /// Physical qubit per logical wire.
    pub initial_layout: Option<Vec<Option<usize>>>,
    pub final_layout: Option<Vec<Option<usize>>>,
}

/// Native, routed circuit: `transpiled.json` and `circuit.qasm`.
pub fn run_transpile(config: &RunConfig) -> Result<TranspileSummary> {
    let backend = BackendModel::resolve(&config.backend)?;
    let (qpr, _, _) = build_circuit(config)?;
    let routed = transpile::transpile(&qpr.circuit, &backend, config.mcx_mode)?;
    let summary = TranspileSummary {
        backend: backend.name.clone(),
        circuit: CircuitSummary::of(&routed.circuit),
        swaps_inserted: routed.swaps_inserted,
        initial_layout: routed.initial_layout.clone(),
        final_layout: routed.final_layout.clone(),
    };
    let text = qasm::emit_qasm(&routed.circuit).map_err(|e| PipelineError::internal(Stage::Output, e))?;
    write_file(&config.out_dir, "transpiled.json", &to_json(&summary))?;
    write_file(&config.out_dir, "circuit.qasm", &text)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub shots: u64,
    pub seed: u64,
    /// Fraction of shots with `v = 1`; the dot plot's black fraction.
    pub v_one_fraction: f64,
    /// Post-QFT pixel outcomes given `v = 1`, keyed by `y * W + x`.
    pub pattern_counts: std::collections::BTreeMap<u64, u64>,
    pub histogram: Histogram,
}

/// Samples the QPR circuit: `simulation.json`.
pub fn run_simulate(config: &RunConfig) -> Result<SimulationSummary> {
    let (qpr, _, _) = build_circuit(config)?;
    let c = decomposed(&qpr, config.mcx_mode)?;
    let histogram = statevector::sample(&c, config.shots, config.seed, statevector::DEFAULT_QUBIT_CAP)
        .map_err(|e| sim_error(Stage::Simulate, e))?;
    let mut v_one = 0;
    let mut pattern_counts = std::collections::BTreeMap::new();
    for (&key, &n) in &histogram.counts {
        if key & 1 == 1 {
            v_one += n;
            *pattern_counts.entry(key >> 1).or_insert(0) += n;
        }
    }
    let summary = SimulationSummary {
        shots: config.shots,
        seed: config.seed,
        v_one_fraction: if config.shots == 0 { 0.0 } else { v_one as f64 / config.shots as f64 },
        pattern_counts,
        histogram,
    };
    write_file(&config.out_dir, "simulation.json", &to_json(&summary))?;
    Ok(summary)
}

/// Both validation methods: one JSON per method. Exit status 1 on failure.
pub fn run_validate(config: &RunConfig) -> Result<RunOutcome> {
    let (r, q) = load_pair(config)?;
    let validations = run_validations(&r, &q, config)?;
    let mut artifacts = Vec::new();
    for v in &validations {
        artifacts.push(write_file(&config.out_dir, &format!("validation_{}.json", v.method), &to_json(v))?);
    }
    let backend = BackendModel::resolve(&config.backend)?;
    let qpr = encoder::build_qpr(&r, &q, config.options()).map_err(encode_err)?;
    let (resources, _) = transpile::estimate(&qpr.circuit, &backend, config.mcx_mode)?;
    let input = summarize(config, &r, &q);
    let report = RunReport {
        width_bounds: transpile::width_bounds(input.index_bits, input.data_bits),
        input,
        use_minimizer: config.use_minimizer,
        seed: config.seed,
        logical_depth_per_stage: decomposed(&qpr, config.mcx_mode)?.stage_depths(),
        resources,
        validation: validations.iter().map(ValidationSummary::from).collect(),
    };
    Ok(RunOutcome {
        report,
        validations,
        artifacts,
    })
}

/// Compression as `1 - minimized / brute`; `None` when brute is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Compression(pub Option<f64>);

impl Serialize for Compression {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_str("n/a"),
        }
    }
}

impl<'de> Deserialize<'de> for Compression {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Self(Some(v))),
            Raw::Text(t) if t == "n/a" => Ok(Self(None)),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad compression `{t}`"))),
        }
    }
}

impl fmt::Display for Compression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(v) => write!(f, "{:.2}%", v * 100.0),
            None => f.write_str("n/a"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub sequence: String,
    pub length: usize,
    pub brute_mcx: usize,
    pub minimized_mcx: usize,
    pub brute_chain_ccnot: usize,
    pub minimized_chain_ccnot: usize,
    /// Depth of the decomposed NEQR stage under the configured MCX mode.
    pub brute_depth: usize,
    pub minimized_depth: usize,
    pub compression: Compression,
}

/// Brute-force against minimized NEQR encodings of one sequence.
pub fn compare_sequence(label: &str, seq: &SymbolSequence, mode: McxMode) -> Result<ModeComparison> {
    let table = logic::build_pla(seq).map_err(encode_err)?;
    let brute = logic::brute_force_mcx(&table).map_err(encode_err)?;
    let minimized = logic::cubes_to_mcx(&logic::d1merge_minimize(&table));
    let depth = |use_minimizer| -> Result<usize> {
        let (c, _, _) = encoder::build_neqr(seq, use_minimizer, mode, None).map_err(encode_err)?;
        let c = decompose::decompose_circuit(&c, mode).map_err(encode_err)?;
        Ok(c.stage_depths().get(stage::NEQR).copied().unwrap_or(0))
    };
    let compression = (!brute.is_empty()).then(|| 1.0 - minimized.len() as f64 / brute.len() as f64);
    Ok(ModeComparison {
        sequence: label.to_string(),
        length: seq.original_length(),
        brute_mcx: brute.len(),
        minimized_mcx: minimized.len(),
        brute_chain_ccnot: logic::chain_ccnot_count(&brute),
        minimized_chain_ccnot: logic::chain_ccnot_count(&minimized),
        brute_depth: depth(false)?,
        minimized_depth: depth(true)?,
        compression: Compression(compression),
    })
}

/// Compares encodings of the reference (and the query, when distinct):
/// writes `compare.json`.
pub fn compare_modes(config: &RunConfig) -> Result<Vec<ModeComparison>> {
    let (r, q) = load_pair(config)?;
    let mut rows = vec![compare_sequence("reference", &r, config.mcx_mode)?];
    if config.query.is_some() {
        rows.push(compare_sequence("query", &q, config.mcx_mode)?);
    }
    write_file(&config.out_dir, "compare.json", &to_json(&rows))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fasta(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, format!(">{name}\n{body}\n")).unwrap();
        p
    }

    #[test]
    fn compression_prints_na_when_undefined() {
        let seq = SymbolSequence::from_codes(vec![0; 8], 2).unwrap();
        let row = compare_sequence("zeros", &seq, McxMode::CcnotChain).unwrap();
        assert_eq!((row.brute_mcx, row.minimized_mcx), (0, 0));
        assert_eq!(row.compression.to_string(), "n/a");
        assert!(serde_json::to_string(&row).unwrap().contains("\"n/a\""));
    }

    #[test]
    fn constant_sequence_collapses() {
        let seq = SymbolSequence::from_codes(vec![3; 8], 2).unwrap();
        let row = compare_sequence("c", &seq, McxMode::CcnotChain).unwrap();
        assert_eq!(row.brute_mcx, 16);
        assert_eq!(row.minimized_mcx, 2);
        assert_eq!(row.minimized_chain_ccnot, 0);
    }

    #[test]
    fn unknown_backend_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(fasta(dir.path(), "r.fa", "ACGTACGT"), dir.path().join("out"));
        cfg.backend = "nowhere".into();
        let e = run_pipeline(&cfg).unwrap_err();
        assert_eq!((e.stage, e.exit_code()), (Stage::Config, 2));
    }

    #[test]
    fn missing_file_is_ingest_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::new(dir.path().join("absent.fa"), dir.path().join("out"));
        let e = run_pipeline(&cfg).unwrap_err();
        assert_eq!((e.stage, e.exit_code()), (Stage::Ingest, 2));
    }

    #[test]
    fn demo_pair_validates_within_bounds() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(fasta(dir.path(), "r.fa", "ACGTTGCA"), dir.path().join("out"));
        cfg.query = Some(fasta(dir.path(), "q.fa", "AGGTCGCA"));
        cfg.validate = true;
        cfg.shots = 20_000;
        let out = run_pipeline(&cfg).unwrap();
        assert_eq!(out.exit_code(), 0);
        let (lo, hi) = out.report.width_bounds;
        assert_eq!((lo, hi), (11, 12));
        assert!((lo..=hi).contains(&out.report.resources.width));
        assert_eq!(out.artifacts.len(), 5);
        let csv = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
        assert!(csv.starts_with(transpile::CSV_HEADER));
    }

    #[test]
    fn single_ancilla_not_wider_than_chain() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(fasta(dir.path(), "r.fa", "ACGTTGCAACGTTGCA"), dir.path().join("a"));
        let chain = run_estimate(&cfg).unwrap();
        cfg.mcx_mode = McxMode::SingleAncilla;
        cfg.out_dir = dir.path().join("b");
        let single = run_estimate(&cfg).unwrap();
        assert!(single.resources.width <= chain.resources.width);
        assert!(chain.input.self_alignment);
        assert_eq!(chain.input.width_pixels, chain.input.height_pixels);
    }

    #[test]
    fn reports_are_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let r = fasta(dir.path(), "r.fa", "ACGTTGCA");
        let read = |sub: &str| {
            let cfg = RunConfig::new(&r, dir.path().join(sub));
            run_pipeline(&cfg).unwrap();
            ["report.json", "report.csv", "circuit.qasm"].map(|f| std::fs::read(dir.path().join(sub).join(f)).unwrap())
        };
        assert_eq!(read("one"), read("two"));
    }
}
