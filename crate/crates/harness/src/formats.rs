//! On-disk formats: metrics CSV, JSON sidecars, training curves and
//! network checkpoints.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rissac_core::nn::DenseNet;
use rissac_core::sac::{SacAgent, SacHyperparams, TrainingLog};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const METRICS_HEADER: [&str; 8] = [
    "method",
    "sweep_variable",
    "sweep_value",
    "seed",
    "mean_reward",
    "mean_sum_rate",
    "per_ue_rates",
    "outage",
];

pub const CURVE_HEADER: [&str; 9] = [
    "episode",
    "steps",
    "mean_reward",
    "critic1_loss",
    "critic2_loss",
    "policy_loss",
    "alpha",
    "eval_reward",
    "best_reward",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub method: String,
    pub sweep_variable: String,
    pub sweep_value: f64,
    pub seed: u64,
    pub mean_reward: f64,
    pub mean_sum_rate: f64,
    pub per_ue_rates: Vec<f64>,
    /// One entry per point of the configured R_min grid.
    pub outage: Vec<f64>,
}

// `Display` for f64 prints the shortest string that parses back exactly.
fn join(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn split(s: &str) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(parse_f64).collect()
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| HarnessError::Format(format!("not a number: {s:?}")))
}

impl MetricsRow {
    fn record(&self) -> [String; 8] {
        [
            self.method.clone(),
            self.sweep_variable.clone(),
            self.sweep_value.to_string(),
            self.seed.to_string(),
            self.mean_reward.to_string(),
            self.mean_sum_rate.to_string(),
            join(&self.per_ue_rates),
            join(&self.outage),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != METRICS_HEADER.len() {
            return Err(HarnessError::Format(format!(
                "expected 8 fields, found {}",
                r.len()
            )));
        }
        Ok(Self {
            method: r[0].to_string(),
            sweep_variable: r[1].to_string(),
            sweep_value: parse_f64(&r[2])?,
            seed: r[3]
                .parse()
                .map_err(|_| HarnessError::Format(format!("bad seed {:?}", &r[3])))?,
            mean_reward: parse_f64(&r[4])?,
            mean_sum_rate: parse_f64(&r[5])?,
            per_ue_rates: split(&r[6])?,
            outage: split(&r[7])?,
        })
    }
}

/// Appends rows to a metrics CSV, flushing after each one.
pub struct MetricsWriter {
    inner: csv::Writer<File>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut inner = csv::Writer::from_path(path)?;
        inner.write_record(METRICS_HEADER)?;
        inner.flush().map_err(|e| HarnessError::io(path, e))?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, row: &MetricsRow) -> Result<()> {
        self.inner.write_record(row.record())?;
        self.inner
            .flush()
            .map_err(|e| HarnessError::Format(format!("flush failed: {e}")))?;
        Ok(())
    }
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = MetricsWriter::create(path)?;
    for r in rows {
        w.write(r)?;
    }
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().ne(METRICS_HEADER) {
        return Err(HarnessError::Format(format!(
            "unexpected header {header:?}"
        )));
    }
    rdr.records()
        .map(|r| MetricsRow::from_record(&r?))
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// One row per episode.
pub fn write_training_curve(path: &Path, log: &TrainingLog) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CURVE_HEADER)?;
    for e in &log.episodes {
        w.write_record([
            e.episode.to_string(),
            e.steps.to_string(),
            e.mean_reward.to_string(),
            e.critic1_loss.to_string(),
            e.critic2_loss.to_string(),
            e.policy_loss.to_string(),
            e.alpha.to_string(),
            e.eval_reward.to_string(),
            e.best.reward.to_string(),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

const MAGIC: &[u8; 8] = b"RISSAC01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub hyperparams: SacHyperparams,
    pub updates: u64,
    pub log_alpha: f64,
    pub reward_scale: Option<f64>,
    pub state_dim: usize,
    pub action_dim: usize,
}

/// Layout: magic, u64 header length, JSON header, u64 network count, then
/// per network a u64 layer count, that many u64 widths, a u64 parameter
/// count and the parameters as f64. All integers and floats little-endian.
pub fn write_checkpoint<W: Write>(mut w: W, agent: &SacAgent) -> std::io::Result<()> {
    let header = CheckpointHeader {
        hyperparams: agent.hyperparams().clone(),
        updates: agent.updates(),
        log_alpha: agent.log_alpha(),
        reward_scale: agent.reward_scale(),
        state_dim: agent.state_dim(),
        action_dim: agent.action_dim(),
    };
    let json = serde_json::to_vec(&header)?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    let nets = agent.networks();
    w.write_all(&(nets.len() as u64).to_le_bytes())?;
    for net in nets {
        w.write_all(&(net.sizes().len() as u64).to_le_bytes())?;
        for &s in net.sizes() {
            w.write_all(&(s as u64).to_le_bytes())?;
        }
        w.write_all(&(net.num_params() as u64).to_le_bytes())?;
        for p in net.params() {
            w.write_all(&p.to_le_bytes())?;
        }
    }
    w.flush()
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|e| HarnessError::Format(format!("truncated checkpoint: {e}")))?;
    Ok(u64::from_le_bytes(b))
}

// Guards allocations against corrupt length fields.
const MAX_LEN: u64 = 1 << 32;

fn read_len<R: Read>(r: &mut R) -> Result<usize> {
    let n = read_u64(r)?;
    if n > MAX_LEN {
        return Err(HarnessError::Format(format!("implausible length {n}")));
    }
    Ok(n as usize)
}

/// Restores an agent; `seed` drives its sampling from here on.
pub fn read_checkpoint<R: Read>(mut r: R, seed: u64) -> Result<(CheckpointHeader, SacAgent)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|e| HarnessError::Format(format!("truncated checkpoint: {e}")))?;
    if &magic != MAGIC {
        return Err(HarnessError::Format("not a checkpoint file".into()));
    }
    let n = read_len(&mut r)?;
    let mut json = vec![0u8; n];
    r.read_exact(&mut json)
        .map_err(|e| HarnessError::Format(format!("truncated header: {e}")))?;
    let header: CheckpointHeader = serde_json::from_slice(&json)?;
    let count = read_len(&mut r)?;
    if count != 5 {
        return Err(HarnessError::Format(format!(
            "expected 5 networks, found {count}"
        )));
    }
    let mut nets = Vec::with_capacity(5);
    for _ in 0..count {
        let layers = read_len(&mut r)?;
        let sizes = (0..layers)
            .map(|_| read_len(&mut r))
            .collect::<Result<Vec<_>>>()?;
        let n = read_len(&mut r)?;
        let mut params = Vec::with_capacity(n);
        for _ in 0..n {
            params.push(f64::from_bits(read_u64(&mut r)?));
        }
        nets.push(DenseNet::from_parameters(&sizes, params)?);
    }
    let nets: [DenseNet; 5] = nets
        .try_into()
        .map_err(|_| HarnessError::Format("network count".into()))?;
    let agent = SacAgent::from_parts(
        header.hyperparams.clone(),
        nets,
        header.log_alpha,
        header.reward_scale,
        header.updates,
        seed,
    )?;
    Ok((header, agent))
}

pub fn save_checkpoint(path: &Path, agent: &SacAgent) -> Result<()> {
    let f = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_checkpoint(BufWriter::new(f), agent).map_err(|e| HarnessError::io(path, e))
}

pub fn load_checkpoint(path: &Path, seed: u64) -> Result<(CheckpointHeader, SacAgent)> {
    let f = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_checkpoint(BufReader::new(f), seed)
}
