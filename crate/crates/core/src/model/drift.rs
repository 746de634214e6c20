use std::path::Path;

use serde::{Deserialize, Serialize};

use super::instance::SspInstance;
use super::solve::{policy_hitting_times, ssp_optimal_values, PolicyTable, DEFAULT_MAX_ITERS};
use crate::error::{Error, Result};

/// Piecewise-constant schedule of SSP instances over `K` episodes.
///
/// Segments are stored change-point compressed: segment `i` covers episodes
/// `starts[i] ..= starts[i + 1] - 1` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSequence {
    episodes: usize,
    starts: Vec<usize>,
    instances: Vec<SspInstance>,
}

impl DriftSequence {
    pub fn new(episodes: usize, segments: Vec<(usize, SspInstance)>) -> Result<Self> {
        if episodes == 0 {
            return Err(Error::InvalidSpec("sequence needs at least one episode".into()));
        }
        let Some((first_start, first)) = segments.first() else {
            return Err(Error::InvalidSpec("sequence needs at least one segment".into()));
        };
        if *first_start != 1 {
            return Err(Error::InvalidSpec(format!("first segment starts at {first_start}, not 1")));
        }
        for pair in segments.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::InvalidSpec("segment starts must strictly increase".into()));
            }
            if !pair[1].1.same_shape(first) {
                return Err(Error::InvalidSpec("segments disagree on S or A".into()));
            }
        }
        if let Some((last_start, _)) = segments.last() {
            if *last_start > episodes {
                return Err(Error::InvalidSpec(format!(
                    "segment starts at {last_start} beyond K = {episodes}"
                )));
            }
        }
        let (starts, instances) = segments.into_iter().unzip();
        Ok(Self { episodes, starts, instances })
    }

    pub fn stationary(episodes: usize, inst: SspInstance) -> Result<Self> {
        Self::new(episodes, vec![(1, inst)])
    }

    pub fn episodes(&self) -> usize {
        self.episodes
    }

    pub fn num_states(&self) -> usize {
        self.instances[0].num_states()
    }

    pub fn num_actions(&self) -> usize {
        self.instances[0].num_actions()
    }

    pub fn num_segments(&self) -> usize {
        self.instances.len()
    }

    pub fn segments(&self) -> impl Iterator<Item = (usize, &SspInstance)> {
        self.starts.iter().copied().zip(&self.instances)
    }

    pub fn segment(&self, i: usize) -> &SspInstance {
        &self.instances[i]
    }

    /// First episode of segment `i`.
    pub fn segment_start(&self, i: usize) -> usize {
        self.starts[i]
    }

    /// Index of the segment covering 1-based episode `k`.
    pub fn segment_index(&self, k: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.episodes);
        self.starts.partition_point(|&start| start <= k) - 1
    }

    pub fn instance_at(&self, k: usize) -> &SspInstance {
        &self.instances[self.segment_index(k)]
    }

    /// Keeps only the first `episodes` episodes.
    pub fn truncated(&self, episodes: usize) -> Result<Self> {
        let segments = self
            .segments()
            .filter(|(start, _)| *start <= episodes)
            .map(|(start, inst)| (start, inst.clone()))
            .collect();
        Self::new(episodes, segments)
    }

    /// Merges consecutive segments holding identical instances.
    pub fn compressed(self) -> Self {
        let mut starts = Vec::with_capacity(self.starts.len());
        let mut instances: Vec<SspInstance> = Vec::with_capacity(self.instances.len());
        for (start, inst) in self.starts.into_iter().zip(self.instances) {
            if instances.last() != Some(&inst) {
                starts.push(start);
                instances.push(inst);
            }
        }
        Self { episodes: self.episodes, starts, instances }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SequenceDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SequenceDoc = serde_json::from_str(text)?;
        doc.try_into()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct SegmentDoc {
    start: usize,
    cost: Vec<Vec<f64>>,
    trans: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct SequenceDoc {
    #[serde(rename = "K")]
    episodes: usize,
    segments: Vec<SegmentDoc>,
}

impl From<&DriftSequence> for SequenceDoc {
    fn from(seq: &DriftSequence) -> Self {
        Self {
            episodes: seq.episodes,
            segments: seq
                .segments()
                .map(|(start, inst)| SegmentDoc {
                    start,
                    cost: inst.cost_table(),
                    trans: inst.trans_table(),
                })
                .collect(),
        }
    }
}

impl TryFrom<SequenceDoc> for DriftSequence {
    type Error = Error;

    fn try_from(doc: SequenceDoc) -> Result<Self> {
        let segments = doc
            .segments
            .into_iter()
            .map(|seg| Ok((seg.start, SspInstance::from_tables(seg.cost, seg.trans)?)))
            .collect::<Result<Vec<_>>>()?;
        DriftSequence::new(doc.episodes, segments)
    }
}

/// Exact solution of one segment.
#[derive(Debug, Clone)]
pub struct SegmentSolution {
    /// `V⋆` over `S + 1` outcomes (goal entry `0`).
    pub values: Vec<f64>,
    pub policy: PolicyTable,
    /// Hitting times of `π⋆` over the `S` non-goal states.
    pub hitting_times: Vec<f64>,
}

pub fn solve_segments(seq: &DriftSequence, tol: f64) -> Result<Vec<SegmentSolution>> {
    seq.instances
        .iter()
        .map(|inst| {
            inst.validate().into_result()?;
            let (values, policy) = ssp_optimal_values(inst, tol, DEFAULT_MAX_ITERS)?;
            let hitting_times = policy_hitting_times(inst, &policy)?;
            Ok(SegmentSolution { values, policy, hitting_times })
        })
        .collect()
}

/// Drift budgets and difficulty scalars of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftStats {
    pub delta_c: f64,
    pub delta_p: f64,
    pub num_pieces: usize,
    pub b_star: f64,
    pub t_star: f64,
    pub t_max: f64,
}

impl DriftStats {
    pub fn from_solutions(seq: &DriftSequence, solutions: &[SegmentSolution]) -> Self {
        let mut delta_c = 0.0;
        let mut delta_p = 0.0;
        let mut num_pieces = 1;
        for pair in seq.instances.windows(2) {
            let dc = pair[0].cost_distance(&pair[1]);
            let dp = pair[0].trans_distance(&pair[1]);
            delta_c += dc;
            delta_p += dp;
            if pair[0] != pair[1] {
                num_pieces += 1;
            }
        }
        let n = seq.num_states();
        let b_star = solutions
            .iter()
            .flat_map(|sol| sol.values[..n].iter().copied())
            .fold(1.0, f64::max);
        let t_star = solutions.iter().map(|sol| sol.hitting_times[0]).fold(0.0, f64::max);
        let t_max = solutions
            .iter()
            .flat_map(|sol| sol.hitting_times.iter().copied())
            .fold(0.0, f64::max);
        Self { delta_c, delta_p, num_pieces, b_star, t_star, t_max }
    }
}

pub fn drift_stats(seq: &DriftSequence, tol: f64) -> Result<DriftStats> {
    let solutions = solve_segments(seq, tol)?;
    Ok(DriftStats::from_solutions(seq, &solutions))
}
