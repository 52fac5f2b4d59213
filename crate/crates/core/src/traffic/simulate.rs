use super::TrafficConfig;
use crate::markov::Kernel;
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Cumulative row probabilities for inverse-CDF sampling.
#[derive(Clone, Debug)]
pub struct SamplingTable {
    start: Vec<usize>,
    targets: Vec<u32>,
    cum: Vec<f64>,
}

impl SamplingTable {
    pub fn new<T: Scalar>(p: &Kernel<T>) -> Self {
        let mut start = vec![0];
        let mut targets = Vec::new();
        let mut cum = Vec::new();
        for u in 0..p.size() {
            let mut acc = 0.0;
            for &(v, x) in p.row(u) {
                acc += x.as_f64();
                targets.push(v as u32);
                cum.push(acc);
            }
            start.push(targets.len());
        }
        Self { start, targets, cum }
    }

    /// Next vertex from `u` given a uniform draw in `[0, 1)`.
    #[inline]
    pub fn next(&self, u: usize, r: f64) -> usize {
        let (lo, hi) = (self.start[u], self.start[u + 1]);
        let cum = &self.cum[lo..hi];
        // scale by the row total so round-off in the cumulative sum never
        // leaves a gap at the top
        let r = r * cum[cum.len() - 1];
        let k = cum.partition_point(|&c| c <= r).min(cum.len() - 1);
        self.targets[lo + k] as usize
    }

    pub fn sample<R: Rng + ?Sized>(&self, u: usize, rng: &mut R) -> usize {
        self.next(u, rng.random::<f64>())
    }
}

/// `k` walkers moving independently. Walker `i` draws from its own ChaCha
/// stream (`seed`, stream `i`), so results do not depend on thread count or
/// scheduling.
#[derive(Clone, Debug)]
pub struct Simulator {
    table: SamplingTable,
    n: usize,
    positions: Vec<u32>,
    rngs: Vec<ChaCha8Rng>,
    step: usize,
}

impl Simulator {
    /// Walkers are numbered vertex by vertex in index order.
    pub fn new<T: Scalar>(p: &Kernel<T>, init: &TrafficConfig, seed: u64) -> Self {
        assert_eq!(init.counts().len(), p.size(), "configuration does not match kernel");
        let positions: Vec<u32> = init
            .counts()
            .iter()
            .enumerate()
            .flat_map(|(v, &c)| std::iter::repeat_n(v as u32, c as usize))
            .collect();
        let rngs = (0..positions.len())
            .map(|i| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(i as u64);
                r
            })
            .collect();
        Self { table: SamplingTable::new(p), n: p.size(), positions, rngs, step: 0 }
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    pub fn walkers(&self) -> usize {
        self.positions.len()
    }

    /// Advances every walker by one transition.
    pub fn step(&mut self) {
        let table = &self.table;
        self.positions.par_iter_mut().zip(self.rngs.par_iter_mut()).with_min_len(1024).for_each(|(pos, rng)| {
            *pos = table.sample(*pos as usize, rng) as u32;
        });
        self.step += 1;
    }

    /// Walkers per vertex.
    pub fn counts(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.n];
        for &p in &self.positions {
            c[p as usize] += 1;
        }
        c
    }
}

/// Vertex counts at every step `0..=steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationRun {
    pub counts: Vec<Vec<u64>>,
}

impl SimulationRun {
    pub fn final_counts(&self) -> &[u64] {
        self.counts.last().expect("at least the initial step")
    }
}

pub fn simulate<T: Scalar>(p: &Kernel<T>, init: &TrafficConfig, steps: usize, seed: u64) -> SimulationRun {
    let mut sim = Simulator::new(p, init, seed);
    let mut counts = Vec::with_capacity(steps + 1);
    counts.push(sim.counts());
    for _ in 0..steps {
        sim.step();
        counts.push(sim.counts());
    }
    SimulationRun { counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;

    #[test]
    fn deterministic_cycle() {
        let p = Kernel::<f64>::from_rows(vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(0, 1.0)]]).unwrap();
        let run = simulate(&p, &TrafficConfig::point(3, 0, 1).unwrap(), 6, 9);
        let pos: Vec<usize> = run.counts.iter().map(|c| c.iter().position(|&x| x == 1).unwrap()).collect();
        assert_eq!(pos, vec![0, 1, 2, 0, 1, 2, 0]);
    }

    #[test]
    fn reproducible_and_conserving() {
        let p = toy::kernel();
        let init = TrafficConfig::point(5, 0, 3000).unwrap();
        let a = simulate(&p, &init, 40, 17);
        let b = simulate(&p, &init, 40, 17);
        assert_eq!(a, b);
        assert!(a.counts.iter().all(|c| c.iter().sum::<u64>() == 3000));
        let c = simulate(&p, &init, 40, 18);
        assert_ne!(a, c);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let p = toy::kernel();
        let init = TrafficConfig::point(5, 1, 5000).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| simulate(&p, &init, 20, 5));
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| simulate(&p, &init, 20, 5));
        assert_eq!(one, four);
    }

    #[test]
    fn sampling_table_edges() {
        let p = Kernel::<f64>::from_rows(vec![vec![(0, 0.25), (1, 0.75)], vec![(1, 1.0)]]).unwrap();
        let t = SamplingTable::new(&p);
        assert_eq!(t.next(0, 0.0), 0);
        assert_eq!(t.next(0, 0.2499), 0);
        assert_eq!(t.next(0, 0.25), 1);
        assert_eq!(t.next(0, 0.999_999_999), 1);
        assert_eq!(t.next(1, 0.5), 1);
    }
}
