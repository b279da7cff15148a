//! Parallel execution of stream plans.
//!
//! Streams are independent, so they run on a rayon pool and are merged in
//! stream order. The result is identical for any thread count.

use gfc_core::pathsim::{StreamPlan, Summary};
use gfc_core::RngStream;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{fmt_float, Table};

/// Draws of one plan, grouped by stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<T> {
    pub plan: StreamPlan,
    pub streams: Vec<Vec<T>>,
}

impl<T: Clone> Batch<T> {
    pub fn flatten(&self) -> Vec<T> {
        self.streams.iter().flatten().cloned().collect()
    }
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

pub fn run_parallel<T, F>(plan: StreamPlan, threads: usize, draw: F) -> Result<Batch<T>, CliError>
where
    T: Send,
    F: Fn(&mut RngStream) -> gfc_core::Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    let streams = pool.install(|| {
        (0..plan.streams())
            .into_par_iter()
            .map(|s| plan.run_stream(s, &draw))
            .collect::<gfc_core::Result<Vec<_>>>()
    })?;
    Ok(Batch { plan, streams })
}

impl<T> Batch<T> {
    /// `stream_id, draw_index, value` rows, `draw_index` counted within the
    /// stream.
    pub fn table_with(&self, fmt: impl Fn(&T) -> String) -> Table {
        let mut t = Table::new(&["stream_id", "draw_index", "value"]);
        for (s, xs) in self.streams.iter().enumerate() {
            for (i, x) in xs.iter().enumerate() {
                t.push(vec![s.to_string(), i.to_string(), fmt(x)]);
            }
        }
        t
    }
}

impl Batch<f64> {
    pub fn table(&self) -> Table {
        self.table_with(|x| fmt_float(*x))
    }

    pub fn summary(&self) -> BatchSummary {
        let s = Summary::of(&self.flatten());
        BatchSummary {
            seed: self.plan.seed,
            draws: self.plan.draws,
            streams: self.plan.streams(),
            per_stream: self.plan.per_stream,
            mean: s.mean,
            std: s.std,
            stderr: s.stderr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchSummary {
    pub seed: u64,
    pub draws: usize,
    pub streams: usize,
    pub per_stream: usize,
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use gfc_core::pathsim::sample_inverse_passage;
    use gfc_core::{BernsteinSpec, SimOptions};

    #[test]
    fn thread_count_does_not_change_results() {
        let spec = BernsteinSpec::Stable { alpha: 0.7 };
        let mut plan = StreamPlan::new(11, 1000);
        plan.per_stream = 128;
        let draw = |rng: &mut RngStream| sample_inverse_passage(&spec, 1.0, rng, &SimOptions::default());
        let one = run_parallel(plan, 1, draw).unwrap();
        let four = run_parallel(plan, 4, draw).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.flatten(), plan.run(draw).unwrap());
        assert_eq!(one.table().rows.len(), 1000);
    }
}
