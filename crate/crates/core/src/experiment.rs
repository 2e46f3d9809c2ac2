//! Batch experiment harness behind the `mrd-subcodes` binary.
//!
//! A JSON [`ExperimentConfig`] describes the field, the code, optional
//! direct-sum parts, an optional subfield degree and the channel. Every
//! command produces a list of JSON records; each record echoes the fully
//! resolved configuration under `params`. Nothing depends on wall-clock time
//! or thread scheduling, so equal inputs give byte-identical output.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::directsum::{
    monte_carlo_decoding, monte_carlo_success, success_probability_exact,
    success_probability_leading_order, success_probability_per_part_leading_order,
    validate_direct_sum, DirectSumCode,
};
use crate::error::Error;
use crate::field::{self, FieldOps, FieldTower, Fqn};
use crate::gabidulin::{exhaustive_size, GabidulinCode};
use crate::qlinalg::{count_rank_matrices, random_error, ErrorMode, ExtMatrix, QMatrix};
use crate::subfield::compute_factorization;
use crate::subspace::SubspaceBasis;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub q: u32,
    pub n: usize,
    /// Monic modulus low-to-high; the crate default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

/// Elements are canonical integers (base-q digits over the polynomial basis).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub k: usize,
    /// Code length when neither g nor h is given; defaults to n.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default)]
    pub t: Vec<usize>,
    #[serde(default = "default_mode")]
    pub mode: ErrorMode,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// End-to-end decoding trials per cell in `simulate`, and trials per
    /// cell in `roundtrip`; `trials` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decode_trials: Option<u64>,
}

fn default_mode() -> ErrorMode {
    ErrorMode::UniformMatrix
}

fn default_trials() -> u64 {
    10_000
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            t: Vec::new(),
            mode: default_mode(),
            trials: default_trials(),
            seed: None,
            decode_trials: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub field: FieldConfig,
    pub code: CodeConfig,
    /// Bases of the direct-sum subspaces; a single part spanning GF(q^n)
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subfield: Option<usize>,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Command-line values that replace the corresponding config entries.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub decode_trials: Option<u64>,
    pub t: Option<Vec<usize>>,
    pub mode: Option<ErrorMode>,
    pub subfield: Option<usize>,
    pub output: Option<PathBuf>,
}

/// Failures split by exit code: 2 for bad input, 3 for a broken invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExperimentError {
    Config(String),
    Invariant(String),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Invariant(m) => write!(f, "invariant violation: {m}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

type Outcome<T> = std::result::Result<T, ExperimentError>;

fn config_err(field: &str, e: impl fmt::Display) -> ExperimentError {
    ExperimentError::Config(format!("{field}: {e}"))
}

/// Library errors met while running (not while building) are invariant
/// violations unless they report a size limit.
fn run_err(e: Error) -> ExperimentError {
    match e {
        Error::Oversized { .. } | Error::InvalidParameters(_) => {
            ExperimentError::Config(e.to_string())
        }
        other => ExperimentError::Invariant(other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Outcome<Self> {
        serde_json::from_str(text).map_err(|e| config_err("config", e))
    }

    pub fn load(path: &Path) -> Outcome<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(&path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.channel.seed = Some(seed);
        }
        if let Some(trials) = o.trials {
            self.channel.trials = trials;
        }
        if let Some(dt) = o.decode_trials {
            self.channel.decode_trials = Some(dt);
        }
        if let Some(t) = &o.t {
            self.channel.t = t.clone();
        }
        if let Some(mode) = o.mode {
            self.channel.mode = mode;
        }
        if let Some(s) = o.subfield {
            self.subfield = Some(s);
        }
        if let Some(out) = &o.output {
            self.output = Some(out.clone());
        }
    }

    /// Validates the config and constructs the objects it describes. The
    /// returned config has every default made explicit, with the code given
    /// by its generator vector so that it resolves again to the same code.
    pub fn resolve(&self) -> Outcome<Resolved> {
        let f = &self.field;
        let tower = match &f.modulus {
            Some(m) => FieldTower::new(f.q, f.n, m),
            None => FieldTower::with_default_modulus(f.q, f.n),
        }
        .map_err(|e| config_err("field", e))?;
        let tower = Arc::new(tower);
        let elements = |name: &str, v: &[u64]| -> Outcome<Vec<Fqn>> {
            v.iter()
                .map(|&x| tower.element(x).map_err(|e| config_err(name, e)))
                .collect()
        };
        let c = &self.code;
        let code = match (&c.g, &c.h) {
            (Some(_), Some(_)) => return Err(config_err("code", "give g or h, not both")),
            (Some(g), None) => {
                GabidulinCode::from_generator(tower.clone(), elements("code.g", g)?, c.k)
            }
            (None, Some(h)) => {
                GabidulinCode::from_parity(tower.clone(), elements("code.h", h)?, c.k)
            }
            (None, None) => {
                GabidulinCode::with_default_generator(tower.clone(), c.len.unwrap_or(f.n), c.k)
            }
        }
        .map_err(|e| config_err("code", e))?;
        let part_lists: Vec<Vec<u64>> = match &self.parts {
            Some(p) => p.clone(),
            None => vec![tower.basis().iter().map(|x| x.to_int()).collect()],
        };
        let bases = part_lists
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let name = format!("parts[{i}]");
                SubspaceBasis::new(&tower, elements(&name, p)?).map_err(|e| config_err(&name, e))
            })
            .collect::<Outcome<Vec<_>>>()?;
        validate_direct_sum(&tower, &bases).map_err(|e| config_err("parts", e))?;
        let part_dims: Vec<usize> = bases.iter().map(SubspaceBasis::dim).collect();
        // Parts of dimension below d carry only the zero word; such a
        // configuration still defines the rank-event probabilities.
        let direct_sum = match DirectSumCode::new(code.clone(), bases) {
            Ok(ds) => Some(ds),
            Err(Error::TrivialSubcode { .. }) => None,
            Err(e) => return Err(config_err("parts", e)),
        };
        if let Some(s) = self.subfield {
            compute_factorization(&code, s).map_err(|e| config_err("subfield", e))?;
        }
        let mut config = self.clone();
        config.field.modulus = Some(tower.modulus().to_vec());
        config.code = CodeConfig {
            k: c.k,
            len: Some(code.len()),
            g: Some(code.g().iter().map(|x| x.to_int()).collect()),
            h: None,
        };
        config.parts = Some(part_lists);
        config.channel.decode_trials =
            Some(self.channel.decode_trials.unwrap_or(self.channel.trials));
        Ok(Resolved {
            config,
            tower,
            code,
            part_dims,
            direct_sum,
        })
    }
}

/// A validated configuration with its constructed objects.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub tower: Arc<FieldTower>,
    pub code: GabidulinCode,
    pub part_dims: Vec<usize>,
    /// `None` when some part has dimension below d.
    pub direct_sum: Option<DirectSumCode>,
}

fn ints(v: &[Fqn]) -> Vec<u64> {
    v.iter().map(|x| x.to_int()).collect()
}

fn ext_ints(m: &ExtMatrix) -> Vec<Vec<u64>> {
    m.to_rows().iter().map(|r| ints(r)).collect()
}

fn q_ints(m: &QMatrix) -> Vec<Vec<u32>> {
    m.to_rows()
}

impl Resolved {
    /// The resolved config without the output path, so records do not
    /// depend on where they are written.
    fn params(&self) -> Value {
        let mut config = self.config.clone();
        config.output = None;
        serde_json::to_value(&config).expect("config serializes")
    }

    fn seed(&self) -> Outcome<u64> {
        self.config
            .channel
            .seed
            .ok_or_else(|| config_err("channel.seed", "a seed is required"))
    }

    pub fn code_info(&self) -> Outcome<Vec<Value>> {
        let code = &self.code;
        let ds = self.direct_sum.as_ref();
        Ok(vec![json!({
            "command": "code-info",
            "params": self.params(),
            "len": code.len(),
            "k": code.k(),
            "d": code.d(),
            "capability": code.capability(),
            "g": ints(code.g()),
            "h": ints(code.h()),
            "part_dims": self.part_dims,
            "total_dim": self.part_dims.iter().sum::<usize>(),
            "message_len": ds.map(DirectSumCode::message_len),
            "log_q_cardinality": ds.map(DirectSumCode::log_cardinality),
        })])
    }

    /// Encode, add an error of rank t on G, decode; tallies per t.
    pub fn roundtrip(&self) -> Outcome<Vec<Value>> {
        let seed = self.seed()?;
        let channel = &self.config.channel;
        let trials = channel.decode_trials.unwrap_or(channel.trials);
        let (tower, code) = (&*self.tower, &self.code);
        let mut records = Vec::new();
        for &t in &channel.t {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            field::reset_mul_count();
            let (mut exact, mut failures, mut miscorrections) = (0u64, 0u64, 0u64);
            for _ in 0..trials {
                let x: Vec<Fqn> = (0..code.k()).map(|_| tower.random(&mut rng)).collect();
                let c = code.encode(&x).map_err(run_err)?;
                let e = random_error(tower, t, None, code.len(), channel.mode, &mut rng)
                    .map_err(|e| config_err("channel.t", e))?;
                let y: Vec<Fqn> = c.iter().zip(&e).map(|(&a, &b)| tower.add(a, b)).collect();
                match code.decode(&y) {
                    Ok(dec) if !code.is_codeword(&dec.codeword) => {
                        return Err(ExperimentError::Invariant(
                            "decoder returned a non-codeword".into(),
                        ))
                    }
                    Ok(dec) if dec.codeword == c && dec.error == e => exact += 1,
                    Ok(_) => miscorrections += 1,
                    Err(Error::DecodingFailure { .. }) => failures += 1,
                    Err(other) => return Err(run_err(other)),
                }
            }
            if t <= code.capability() && exact != trials {
                return Err(ExperimentError::Invariant(format!(
                    "rank-{t} errors within capability were not all corrected"
                )));
            }
            records.push(json!({
                "command": "roundtrip",
                "params": self.params(),
                "t": t,
                "trials": trials,
                "exact_recoveries": exact,
                "decoding_failures": failures,
                "miscorrections": miscorrections,
                "field_mul_count": field::mul_count(),
            }));
        }
        Ok(records)
    }

    /// Monte Carlo over the direct sum, one record per t.
    pub fn simulate(&self) -> Outcome<Vec<Value>> {
        let seed = self.seed()?;
        let channel = &self.config.channel;
        let q = self.tower.q();
        let dims = &self.part_dims;
        let cap = self.code.capability();
        let decode_trials = channel.decode_trials.unwrap_or(channel.trials);
        let mut records = Vec::new();
        for &t in &channel.t {
            let exact = success_probability_exact(q, dims, cap, t);
            let mc = monte_carlo_success(q, dims, cap, t, channel.trials, seed, channel.mode)
                .map_err(|e| config_err("channel.t", e))?;
            let tally = match &self.direct_sum {
                Some(ds) => Some(
                    monte_carlo_decoding(ds, t, decode_trials, seed, channel.mode).map_err(
                        |e| match e {
                            Error::InvalidParameters(m) => config_err("channel.t", m),
                            other => run_err(other),
                        },
                    )?,
                ),
                None => None,
            };
            if let Some(tally) = tally.as_ref().filter(|t| t.mismatches != 0) {
                return Err(ExperimentError::Invariant(format!(
                    "decoder success disagreed with the rank event in {} trials at t = {t}",
                    tally.mismatches
                )));
            }
            records.push(json!({
                "command": "simulate",
                "params": self.params(),
                "t": t,
                "exact_probability": exact.to_f64(),
                "exact_probability_fraction": exact.to_string(),
                "leading_order": success_probability_leading_order(q, dims, cap, t),
                "per_part_leading_order": success_probability_per_part_leading_order(q, dims, cap, t),
                "trials": mc.trials,
                "successes": mc.successes,
                "empirical": mc.frequency,
                "half_width": mc.half_width,
                "decode_trials": tally.as_ref().map(|t| t.trials),
                "decode_successes": tally.as_ref().map(|t| t.successes),
                "field_mul_count": tally.as_ref().map(|t| t.field_mul_count),
            }));
        }
        Ok(records)
    }

    /// Parity-check factorization of the subfield subcode.
    pub fn subfield(&self) -> Outcome<Vec<Value>> {
        let s = self
            .config
            .subfield
            .ok_or_else(|| config_err("subfield", "a subfield degree is required"))?;
        let code = &self.code;
        let fact = compute_factorization(code, s).map_err(|e| config_err("subfield", e))?;
        fact.verify_uniqueness().map_err(run_err)?;
        let h = fact.parity_check_matrix();
        let block = fact.block_code().map_err(run_err)?;
        let block_distance = match exhaustive_size(block.tower().order(), block.k()) {
            Ok(_) => Some(block.min_rank_distance_exhaustive().map_err(run_err)?),
            Err(_) => None,
        };
        let n = self.tower.n();
        Ok(vec![json!({
            "command": "subfield",
            "params": self.params(),
            "s": s,
            "a": ints(fact.a()),
            "basis_ext": ints(fact.basis_ext()),
            "A": ext_ints(fact.a_matrix()),
            "S": q_ints(fact.s_matrix()),
            "H": ext_ints(&h),
            "H_rank": h.rank(&*self.tower),
            "log_q_cardinality": n * (s + 1 - code.d()),
            "block_code": {
                "len": block.len(),
                "k": block.k(),
                "d": block.d(),
                "min_rank_distance": block_distance,
            },
            "unique": true,
        })])
    }
}

/// N_r(m, t) for r = 0..=min(m, t), or only `rank` when given.
pub fn count_records(q: u32, m: usize, t: usize, rank: Option<usize>) -> Outcome<Vec<Value>> {
    crate::field::Fq::new(q).map_err(|e| config_err("q", e))?;
    let ranks: Vec<usize> = match rank {
        Some(r) => vec![r],
        None => (0..=m.min(t)).collect(),
    };
    Ok(ranks
        .into_iter()
        .map(|r| {
            json!({
                "command": "count",
                "q": q,
                "m": m,
                "t": t,
                "rank": r,
                "count": count_rank_matrices(q, m, t, r).to_string(),
            })
        })
        .collect())
}

/// One compact JSON object per line.
pub fn to_json_lines(records: &[Value]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}

const CSV_COLUMNS: [&str; 10] = [
    "t",
    "exact_probability",
    "leading_order",
    "empirical",
    "half_width",
    "trials",
    "successes",
    "decode_trials",
    "decode_successes",
    "field_mul_count",
];

/// Flat CSV of the scalar fields of `simulate` records.
pub fn to_csv(records: &[Value]) -> String {
    let mut out = CSV_COLUMNS.join(",") + "\n";
    for r in records {
        let row: Vec<String> = CSV_COLUMNS
            .iter()
            .map(|c| r.get(*c).map_or_else(String::new, Value::to_string))
            .collect();
        out += &row.join(",");
        out.push('\n');
    }
    out
}

/// Writes to `path`, or to stdout when `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Outcome<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| config_err(&p.display().to_string(), e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| ExperimentError::Invariant(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn resolves_defaults_and_echoes_them() {
        let cfg = config(r#"{"field":{"q":2,"n":4},"code":{"k":2}}"#);
        let r = cfg.resolve().unwrap();
        assert_eq!(
            r.config.field.modulus.as_deref(),
            Some(&[1, 1, 0, 0, 1][..])
        );
        assert_eq!(r.config.code.g.as_ref().map(Vec::len), Some(4));
        assert_eq!(r.part_dims, vec![4]);
        assert!(r.direct_sum.is_some());
        let info = r.code_info().unwrap();
        assert_eq!(info[0]["d"], 3);
        let reparsed: ExperimentConfig = serde_json::from_value(info[0]["params"].clone()).unwrap();
        assert_eq!(reparsed, r.config);
        assert_eq!(reparsed.resolve().unwrap().code.h(), r.code.h());
    }

    #[test]
    fn config_errors_name_the_field() {
        let bad = [
            r#"{"field":{"q":4,"n":4},"code":{"k":2}}"#,
            r#"{"field":{"q":2,"n":4},"code":{"k":5}}"#,
            r#"{"field":{"q":2,"n":4},"code":{"k":2,"g":[1,2,3,99]}}"#,
            r#"{"field":{"q":2,"n":4},"code":{"k":2},"parts":[[1,2],[2,4]]}"#,
            r#"{"field":{"q":2,"n":6},"code":{"k":2},"subfield":4}"#,
            r#"{"field":{"q":2,"n":4},"code":{"k":2},"bogus":1}"#,
        ];
        for text in bad {
            let err = ExperimentConfig::from_json(text).and_then(|c| c.resolve().map(|_| ()));
            assert!(
                matches!(err, Err(ExperimentError::Config(_))),
                "{text}: {err:?}"
            );
        }
    }

    #[test]
    fn simulate_needs_seed_and_handles_empty_t() {
        let r = config(r#"{"field":{"q":2,"n":4},"code":{"k":2},"channel":{"t":[2]}}"#)
            .resolve()
            .unwrap();
        assert_eq!(r.simulate().unwrap_err().exit_code(), 2);
        let r = config(r#"{"field":{"q":2,"n":4},"code":{"k":2},"channel":{"seed":1}}"#)
            .resolve()
            .unwrap();
        assert!(r.simulate().unwrap().is_empty());
    }

    #[test]
    fn simulate_reproduces_small_cell() {
        // q = 2, n = 4, d = 3 (C = 1), parts of dimension 2 and 2.
        let mut cfg = config(
            r#"{"field":{"q":2,"n":4},"code":{"k":2},"parts":[[1,2],[4,8]],
                "channel":{"t":[2],"trials":20000,"seed":3,"decode_trials":200}}"#,
        );
        cfg.apply(&Overrides::default());
        let r = cfg.resolve().unwrap();
        let recs = r.simulate().unwrap();
        assert_eq!(recs[0]["exact_probability"], 0.390625);
        assert_eq!(recs[0]["exact_probability_fraction"], "25/64");
        let p = recs[0]["empirical"].as_f64().unwrap();
        let hw = recs[0]["half_width"].as_f64().unwrap();
        assert!((p - 0.390625).abs() <= hw);
        assert_eq!(to_json_lines(&recs), to_json_lines(&r.simulate().unwrap()));
        assert!(recs[0]["decode_successes"].is_null());
        assert_eq!(to_csv(&recs).lines().count(), 2);
    }

    #[test]
    fn roundtrip_and_subfield_records() {
        let r = config(
            r#"{"field":{"q":2,"n":6},"code":{"k":4},"subfield":3,
                "channel":{"t":[0,1,2],"trials":50,"seed":2,"mode":"exact-rank"}}"#,
        )
        .resolve()
        .unwrap();
        let recs = r.roundtrip().unwrap();
        assert_eq!(recs[1]["exact_recoveries"], 50);
        assert_eq!(
            recs[2]["miscorrections"].as_u64().unwrap()
                + recs[2]["decoding_failures"].as_u64().unwrap()
                + recs[2]["exact_recoveries"].as_u64().unwrap(),
            50
        );
        let sf = r.subfield().unwrap();
        assert_eq!(sf[0]["H_rank"], 4);
        assert_eq!(sf[0]["block_code"]["min_rank_distance"], 3);
        assert_eq!(sf[0]["S"].as_array().unwrap().len(), 6);
    }

    #[test]
    fn count_matches_small_enumeration() {
        let recs = count_records(2, 2, 2, None).unwrap();
        let counts: Vec<&str> = recs.iter().map(|r| r["count"].as_str().unwrap()).collect();
        assert_eq!(counts, ["1", "9", "6"]);
        assert!(count_records(6, 2, 2, None).is_err());
    }
}
