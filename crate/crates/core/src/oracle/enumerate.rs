use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::structure::check_final_structure;
use super::{binom, hypercube, next_colex, unrank_colex, vertex};
use crate::bootstrap::cubes::spans_points;
use crate::bootstrap::sequential::{endings_points, final_events_points, sequential_points};
use crate::error::{Error, Result};
use crate::lattice::{subcube_family, Cube, FamilyMode};

pub const CHECKPOINT_VERSION: &str = "hdbp-enumeration-checkpoint/1";

/// Largest number of subsets enumerate_counts will visit.
pub const DEFAULT_GUARD: u64 = 1_000_000_000;

#[derive(Clone, Debug)]
pub struct EnumerationOptions {
    pub shards: usize,
    pub guard: u64,
    /// Dimension 7 is refused unless set.
    pub allow_dim7: bool,
    pub checkpoint: Option<PathBuf>,
    /// Subsets per shard between checkpoint writes.
    pub checkpoint_every: u64,
    /// Run the final-pair structure checks on every spanning set.
    pub structure_checks: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            shards: 1,
            guard: DEFAULT_GUARD,
            allow_dim7: false,
            checkpoint: None,
            checkpoint_every: 100_000_000,
            structure_checks: true,
        }
    }
}

/// Counts over all `size`-subsets `A` of `[2]^dim`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationCounts {
    /// `A` internally spans the cube.
    pub spanning: u64,
    /// `A` sequentially spans it (even `dim`, `size = dim/2 + 1`).
    pub sequential: u64,
    /// `A` has at least one final pair.
    pub final_pair_events: u64,
    /// `A` has at least one final element.
    pub final_element_events: u64,
    /// Final pair, or (odd `dim`) final pair or final element.
    pub r_star: u64,
    /// `A` spans but internally spans no subcube of dimension `dim-1` or
    /// `dim-2`.
    pub y_star: u64,
    /// `ending_histogram[m]`: sequentially spanning sets with exactly `m`
    /// endings.
    pub ending_histogram: Vec<u64>,
    pub structure_violations: u64,
}

impl EnumerationCounts {
    fn add(&mut self, o: &EnumerationCounts) {
        self.spanning += o.spanning;
        self.sequential += o.sequential;
        self.final_pair_events += o.final_pair_events;
        self.final_element_events += o.final_element_events;
        self.r_star += o.r_star;
        self.y_star += o.y_star;
        self.structure_violations += o.structure_violations;
        if self.ending_histogram.len() < o.ending_histogram.len() {
            self.ending_histogram.resize(o.ending_histogram.len(), 0);
        }
        for (a, b) in self.ending_histogram.iter_mut().zip(&o.ending_histogram) {
            *a += b;
        }
    }

    /// `sum_{pairs P of size t} |∩_{p in P} N(p)|`, from the histogram.
    pub fn ending_intersection_sum(&self, t: usize) -> u64 {
        self.ending_histogram
            .iter()
            .enumerate()
            .map(|(m, &c)| binom(m as u64, t as u64) * c)
            .sum()
    }

    pub fn named(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("spanning", self.spanning),
            ("sequential", self.sequential),
            ("final_pair_events", self.final_pair_events),
            ("final_element_events", self.final_element_events),
            ("r_star", self.r_star),
            ("y_star", self.y_star),
            ("structure_violations", self.structure_violations),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnumerationReport {
    pub dim: usize,
    pub set_size: usize,
    pub counts: EnumerationCounts,
    pub enumerated_total: u64,
    pub runtime_secs: f64,
    pub checksum: String,
}

impl EnumerationReport {
    pub fn count(&self, name: &str) -> Option<BigUint> {
        self.counts
            .named()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| BigUint::from(v))
    }

    /// `{dim, size, counts, checksum}` with counts as decimal strings.
    pub fn to_json(&self) -> Value {
        let mut counts = serde_json::Map::new();
        for (name, v) in self.counts.named() {
            counts.insert(name.into(), Value::String(v.to_string()));
        }
        counts.insert(
            "ending_histogram".into(),
            Value::Array(
                self.counts
                    .ending_histogram
                    .iter()
                    .map(|v| Value::String(v.to_string()))
                    .collect(),
            ),
        );
        json!({
            "dim": self.dim,
            "size": self.set_size,
            "counts": counts,
            "enumerated_total": self.enumerated_total.to_string(),
            "runtime_secs": self.runtime_secs,
            "checksum": self.checksum,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardState {
    pub shard: usize,
    /// First colex rank not yet visited.
    pub next_rank: u64,
    pub end_rank: u64,
    pub counts: EnumerationCounts,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: String,
    pub dim: usize,
    pub size: usize,
    pub shards: Vec<ShardState>,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let cp: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(Error::Parse(format!(
                "checkpoint version {:?}, expected {CHECKPOINT_VERSION:?}",
                cp.version
            )));
        }
        Ok(cp)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        fs::rename(tmp, path)?;
        Ok(())
    }
}

/// SHA-256 over the enumeration parameters.
pub fn params_checksum(dim: usize, size: usize) -> String {
    let mut h = Sha256::new();
    h.update(format!("{CHECKPOINT_VERSION};dim={dim};size={size}").as_bytes());
    hex::encode(h.finalize())
}

fn spans_any_member(q: &Cube, pts: &[Vec<usize>], axes: &[usize]) -> bool {
    let fam = subcube_family(q, axes, FamilyMode::ConstantOn).expect("axes are free");
    fam.iter().any(|c| {
        let inside: Vec<Vec<usize>> = pts.iter().filter(|p| c.contains(p)).cloned().collect();
        spans_points(c, &inside)
    })
}

fn classify(q: &Cube, pts: &[Vec<usize>], structure: bool, out: &mut EnumerationCounts) {
    if !spans_points(q, pts) {
        return;
    }
    let d = q.dim();
    let odd = d % 2 == 1;
    out.spanning += 1;
    let events = final_events_points(q, pts, odd);
    if !events.pairs.is_empty() {
        out.final_pair_events += 1;
    }
    if !events.elements.is_empty() {
        out.final_element_events += 1;
    }
    if !events.pairs.is_empty() || (odd && !events.elements.is_empty()) {
        out.r_star += 1;
    }
    let free = q.free_axes();
    let big_sub = free.iter().any(|&i| spans_any_member(q, pts, &[i]))
        || free
            .iter()
            .enumerate()
            .any(|(x, &j)| free[x + 1..].iter().any(|&k| spans_any_member(q, pts, &[j, k])));
    if !big_sub {
        out.y_star += 1;
    }
    let mut ends = None;
    if sequential_points(q, pts).is_some() {
        out.sequential += 1;
        let e = endings_points(q, pts);
        if out.ending_histogram.len() <= e.len() {
            out.ending_histogram.resize(e.len() + 1, 0);
        }
        out.ending_histogram[e.len()] += 1;
        ends = Some(e);
    }
    if structure && !check_final_structure(q, pts, &events, ends.as_deref()) {
        out.structure_violations += 1;
    }
}

fn run_shard(
    dim: usize,
    size: usize,
    state: &mut ShardState,
    opts: &EnumerationOptions,
    shared: Option<(&Mutex<Checkpoint>, &Path)>,
) -> Result<()> {
    let q = hypercube(dim);
    let n = 1usize << dim;
    let verts: Vec<Vec<usize>> = (0..n).map(|v| vertex(v, dim)).collect();
    if state.next_rank >= state.end_rank {
        return Ok(());
    }
    let mut c = unrank_colex(state.next_rank, size);
    let mut pts: Vec<Vec<usize>> = Vec::with_capacity(size);
    let mut since = 0u64;
    while state.next_rank < state.end_rank {
        pts.clear();
        pts.extend(c.iter().map(|&v| verts[v].clone()));
        classify(&q, &pts, opts.structure_checks, &mut state.counts);
        state.next_rank += 1;
        since += 1;
        if state.next_rank < state.end_rank {
            next_colex(&mut c, n);
        }
        if since >= opts.checkpoint_every {
            since = 0;
            if let Some((cp, path)) = shared {
                let mut cp = cp.lock().expect("checkpoint lock");
                cp.shards[state.shard] = state.clone();
                cp.save(path)?;
            }
        }
    }
    if let Some((cp, path)) = shared {
        let mut cp = cp.lock().expect("checkpoint lock");
        cp.shards[state.shard] = state.clone();
        cp.save(path)?;
    }
    Ok(())
}

/// Enumerates every `size`-subset of `[2]^dim` in colex order of cell
/// indices, split into contiguous rank ranges. With a checkpoint path an
/// existing compatible file is resumed, and progress is written as it goes.
pub fn enumerate_counts(dim: usize, size: usize, opts: &EnumerationOptions) -> Result<EnumerationReport> {
    if dim > 7 {
        return Err(Error::GuardExceeded(format!("dim {dim} > 7")));
    }
    if dim == 7 && !opts.allow_dim7 {
        return Err(Error::GuardExceeded("dim 7 needs the explicit opt-in".into()));
    }
    let n = 1u64 << dim;
    let total = binom(n, size as u64);
    if total > opts.guard {
        return Err(Error::GuardExceeded(format!(
            "C({n}, {size}) = {total} subsets exceeds the guard of {}",
            opts.guard
        )));
    }
    let shards = opts.shards.max(1);
    let start = Instant::now();

    let fresh = || -> Vec<ShardState> {
        (0..shards)
            .map(|s| ShardState {
                shard: s,
                next_rank: total * s as u64 / shards as u64,
                end_rank: total * (s as u64 + 1) / shards as u64,
                counts: EnumerationCounts::default(),
            })
            .collect()
    };
    let mut states = match &opts.checkpoint {
        Some(path) if path.exists() => {
            let cp = Checkpoint::load(path)?;
            if cp.dim != dim || cp.size != size || cp.shards.len() != shards {
                return Err(Error::InvalidArgument(format!(
                    "checkpoint is for dim {}, size {}, {} shards",
                    cp.dim,
                    cp.size,
                    cp.shards.len()
                )));
            }
            cp.shards
        }
        _ => fresh(),
    };

    let shared = opts.checkpoint.as_ref().map(|path| {
        (
            Mutex::new(Checkpoint {
                version: CHECKPOINT_VERSION.into(),
                dim,
                size,
                shards: states.clone(),
            }),
            path.clone(),
        )
    });
    states
        .par_iter_mut()
        .map(|st| run_shard(dim, size, st, opts, shared.as_ref().map(|(m, p)| (m, p.as_path()))))
        .collect::<Result<Vec<()>>>()?;

    let mut counts = EnumerationCounts::default();
    for st in &states {
        counts.add(&st.counts);
    }
    Ok(EnumerationReport {
        dim,
        set_size: size,
        counts,
        enumerated_total: total,
        runtime_secs: start.elapsed().as_secs_f64(),
        checksum: params_checksum(dim, size),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_claims() {
        let r = enumerate_counts(3, 3, &EnumerationOptions::default()).unwrap();
        assert_eq!(r.counts.spanning, 32);
        assert_eq!(r.counts.r_star, 32);
        assert_eq!(r.counts.y_star, 0);
        let r = enumerate_counts(4, 3, &EnumerationOptions::default()).unwrap();
        assert_eq!(r.counts.spanning, 144);
        assert_eq!(r.counts.sequential, 144);
        assert_eq!(r.counts.r_star, 144);
        assert_eq!(r.counts.structure_violations, 0);
        assert_eq!(r.counts.ending_intersection_sum(1), 192);
        assert_eq!(r.counts.ending_intersection_sum(2), 48);
        assert_eq!(r.enumerated_total, 560);
    }

    #[test]
    fn trivial_dims() {
        let r = enumerate_counts(0, 1, &EnumerationOptions::default()).unwrap();
        assert_eq!((r.counts.spanning, r.counts.sequential), (1, 1));
        let r = enumerate_counts(2, 2, &EnumerationOptions::default()).unwrap();
        assert_eq!((r.counts.spanning, r.counts.sequential), (2, 2));
    }

    #[test]
    fn shards_agree() {
        let one = enumerate_counts(5, 4, &EnumerationOptions::default()).unwrap();
        let opts = EnumerationOptions {
            shards: 7,
            ..Default::default()
        };
        let many = enumerate_counts(5, 4, &opts).unwrap();
        assert_eq!(one.counts, many.counts);
        assert_eq!(one.counts.y_star, 0);
        assert_eq!(one.counts.spanning, one.counts.r_star + one.counts.y_star);
    }

    #[test]
    fn guard_and_opt_in() {
        assert!(matches!(
            enumerate_counts(7, 5, &EnumerationOptions::default()),
            Err(Error::GuardExceeded(_))
        ));
        let opts = EnumerationOptions {
            guard: 100,
            ..Default::default()
        };
        assert!(matches!(enumerate_counts(4, 3, &opts), Err(Error::GuardExceeded(_))));
    }

    #[test]
    fn checkpoint_resume() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.json");
        let opts = EnumerationOptions {
            shards: 2,
            checkpoint: Some(path.clone()),
            checkpoint_every: 100,
            ..Default::default()
        };
        let full = enumerate_counts(4, 3, &opts).unwrap();
        // Rewind shard 1 halfway and resume from the file.
        let mut cp = Checkpoint::load(&path).unwrap();
        let half = (cp.shards[1].end_rank + total_start(&cp)) / 2;
        let redo = enumerate_counts(
            4,
            3,
            &EnumerationOptions {
                checkpoint: None,
                ..opts.clone()
            },
        )
        .unwrap();
        assert_eq!(redo.counts, full.counts);
        cp.shards[1].next_rank = half;
        cp.shards[1].counts = partial(4, 3, total_start(&cp), half);
        cp.save(&path).unwrap();
        let resumed = enumerate_counts(4, 3, &opts).unwrap();
        assert_eq!(resumed.counts, full.counts);
        assert_eq!(Checkpoint::load(&path).unwrap().version, CHECKPOINT_VERSION);
    }

    fn total_start(cp: &Checkpoint) -> u64 {
        cp.shards[0].end_rank
    }

    fn partial(dim: usize, size: usize, from: u64, to: u64) -> EnumerationCounts {
        let mut st = ShardState {
            shard: 0,
            next_rank: from,
            end_rank: to,
            counts: EnumerationCounts::default(),
        };
        run_shard(dim, size, &mut st, &EnumerationOptions::default(), None).unwrap();
        st.counts
    }
}
