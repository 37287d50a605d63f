use serde::{Deserialize, Serialize};

/// One row of a convergence trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub iter: u64,
    pub epochs: f64,
    pub elapsed_s: f64,
    pub objective: f64,
    pub metric: Option<f64>,
}

/// Convergence trace of a single run plus an echo of what produced it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: serde_json::Value,
    pub metric_name: Option<String>,
    pub checkpoints: Vec<Checkpoint>,
}

impl RunRecord {
    pub fn best_objective(&self) -> Option<f64> {
        self.checkpoints
            .iter()
            .map(|c| c.objective)
            .min_by(|a, b| a.total_cmp(b))
    }

    pub fn last(&self) -> Option<&Checkpoint> {
        self.checkpoints.last()
    }
}

/// Which iterations get a checkpoint. The final iteration of a run is always
/// recorded regardless of the schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointSchedule {
    /// `1, ⌈r⌉, ⌈r²⌉, …`, strictly increasing.
    Geometric {
        ratio: f64,
    },
    Every {
        interval: u64,
    },
    At {
        iters: Vec<u64>,
    },
}

impl Default for CheckpointSchedule {
    fn default() -> Self {
        CheckpointSchedule::Geometric { ratio: 1.25 }
    }
}

impl CheckpointSchedule {
    /// Smallest scheduled iteration strictly greater than `t` (`t = 0` gives the first).
    pub fn next_after(&self, t: u64) -> Option<u64> {
        match self {
            CheckpointSchedule::Geometric { ratio } => {
                let mut c = 1u64;
                while c <= t {
                    let grown = (c as f64 * ratio).ceil();
                    c = if grown >= u64::MAX as f64 {
                        return None;
                    } else {
                        (grown as u64).max(c + 1)
                    };
                }
                Some(c)
            }
            CheckpointSchedule::Every { interval } => {
                let k = (*interval).max(1);
                Some((t / k + 1) * k)
            }
            CheckpointSchedule::At { iters } => iters.iter().copied().filter(|&c| c > t).min(),
        }
    }

    pub fn iters_up_to(&self, last: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut t = 0;
        while let Some(c) = self.next_after(t) {
            if c > last {
                break;
            }
            out.push(c);
            t = c;
        }
        out
    }
}
