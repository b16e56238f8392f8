//! Seeded synthetic update streams.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clusterer::UpdateEvent;
use crate::error::{Error, Result};
use crate::harness::stream::{MetricKind, Stream, StreamHeader};
use crate::metric::{euclidean, PointId};

/// Rejection-sampling attempts per point before giving up.
const PLACEMENT_ATTEMPTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GenMode {
    /// `n` insertions.
    InsertOnly,
    /// Fill to `n` active points, then alternately drop the oldest point and
    /// insert the next one from a recycled pool.
    SlidingWindow,
    /// Insert `n - 1` clustered points, then toggle one far point.
    AdversarialCycle,
    /// Random insertions and deletions with at most `n` active points.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenOptions {
    /// Maximum number of simultaneously active points.
    pub n: usize,
    pub k: usize,
    pub delta: u64,
    pub mode: GenMode,
    pub seed: u64,
    /// Events after the initial fill; the default depends on the mode.
    /// Ignored for `InsertOnly`.
    pub steps: Option<usize>,
    pub dim: usize,
    pub metric: MetricKind,
}

impl GenOptions {
    pub fn new(n: usize, k: usize, delta: u64, mode: GenMode, seed: u64) -> Self {
        GenOptions {
            n,
            k,
            delta,
            mode,
            seed,
            steps: None,
            dim: 2,
            metric: MetricKind::Euclidean,
        }
    }

    fn pool_size(&self) -> usize {
        match self.mode {
            GenMode::InsertOnly | GenMode::AdversarialCycle => self.n,
            GenMode::SlidingWindow | GenMode::Random => self.n + self.n.div_ceil(3),
        }
    }

    fn default_steps(&self) -> usize {
        match self.mode {
            GenMode::InsertOnly => 0,
            GenMode::SlidingWindow => 4 * self.n,
            GenMode::AdversarialCycle => 2 * self.n,
            GenMode::Random => 10 * self.n,
        }
    }
}

fn point_id(i: usize) -> PointId {
    PointId::new(format!("p{i:05}"))
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Place points one by one, each uniform in `[lo, hi]^dim` (rounded to
/// three decimals) and at distance within `[1, delta]` of every point
/// already placed.
fn place(
    rng: &mut ChaCha8Rng,
    placed: &mut Vec<Vec<f64>>,
    count: usize,
    dim: usize,
    (lo, hi): (f64, f64),
    delta: f64,
) -> Result<()> {
    for _ in 0..count {
        let mut ok = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let x: Vec<f64> = (0..dim).map(|_| round3(rng.gen_range(lo..=hi))).collect();
            if placed
                .iter()
                .all(|y| (1.0..=delta).contains(&euclidean(&x, y)))
            {
                placed.push(x);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Argument(format!(
                "could not place point {} of {count} at distance >= 1 within diameter {delta} in {dim} dimensions",
                placed.len() + 1
            )));
        }
    }
    Ok(())
}

pub fn generate_stream(opts: &GenOptions) -> Result<Stream> {
    if opts.n == 0 || opts.k == 0 || opts.delta == 0 || opts.dim == 0 {
        return Err(Error::Argument(
            "n, k, delta and dim must be positive".into(),
        ));
    }
    if opts.mode == GenMode::AdversarialCycle && (opts.n < 2 || opts.delta < 2) {
        return Err(Error::Argument(
            "adversarial-cycle needs n >= 2 and delta >= 2".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let delta = opts.delta as f64;
    // every pair inside the cube is within delta
    let side = delta / (opts.dim as f64).sqrt();
    let mut coords = Vec::new();
    let mut ids: Vec<PointId> = Vec::new();
    if opts.mode == GenMode::AdversarialCycle {
        coords.push(vec![0.0; opts.dim]);
        place(
            &mut rng,
            &mut coords,
            opts.n - 1,
            opts.dim,
            (side / 2.0, side),
            delta,
        )?;
        ids.push(PointId::new("x"));
        ids.extend((1..opts.n).map(point_id));
    } else {
        place(
            &mut rng,
            &mut coords,
            opts.pool_size(),
            opts.dim,
            (0.0, side),
            delta,
        )?;
        ids.extend((0..coords.len()).map(point_id));
    }

    let matrix_mode = opts.metric == MetricKind::Matrix;
    let insert = |i: usize| {
        let c = (!matrix_mode).then(|| coords[i].clone());
        UpdateEvent::Insert {
            id: ids[i].clone(),
            coords: c,
        }
    };
    let delete = |i: usize| UpdateEvent::Delete { id: ids[i].clone() };
    let steps = opts.steps.unwrap_or_else(|| opts.default_steps());
    let mut events = Vec::new();
    match opts.mode {
        GenMode::InsertOnly => events.extend((0..opts.n).map(insert)),
        GenMode::SlidingWindow => {
            let pool = coords.len();
            let mut window: VecDeque<usize> = (0..opts.n).collect();
            events.extend((0..opts.n).map(insert));
            let mut next = opts.n % pool;
            for s in 0..steps {
                if s % 2 == 0 {
                    events.push(delete(window.pop_front().expect("window is full")));
                } else {
                    events.push(insert(next));
                    window.push_back(next);
                    next = (next + 1) % pool;
                }
            }
        }
        GenMode::AdversarialCycle => {
            events.extend((1..opts.n).map(insert));
            for s in 0..steps {
                events.push(if s % 2 == 0 { insert(0) } else { delete(0) });
            }
        }
        GenMode::Random => {
            let mut active: Vec<usize> = Vec::new();
            let mut inactive: Vec<usize> = (0..coords.len()).collect();
            for _ in 0..steps {
                let grow = active.is_empty() || (active.len() < opts.n && rng.gen_bool(0.5));
                let (from, to) = if grow {
                    (&mut inactive, &mut active)
                } else {
                    (&mut active, &mut inactive)
                };
                let j = rng.gen_range(0..from.len());
                let p = from.swap_remove(j);
                to.push(p);
                events.push(if grow { insert(p) } else { delete(p) });
            }
        }
    }

    let header = if matrix_mode {
        let matrix = coords
            .iter()
            .map(|a| coords.iter().map(|b| euclidean(a, b)).collect())
            .collect();
        StreamHeader::matrix(opts.k, opts.delta, ids, matrix)
    } else {
        StreamHeader::euclidean(opts.k, opts.delta, opts.dim)
    };
    Ok(Stream { header, events })
}
