use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GridConfig, RegularDataset};
use crate::geom::Cell;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Behavior {
    Stationary,
    /// Constant velocity with occasional small turns, bouncing off borders.
    Straight,
    RandomWalk,
}

/// Parameters of [`gen_synthetic`]. Behavior weights need not sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub num_objects: u32,
    pub num_instants: u32,
    pub width: u32,
    pub height: u32,
    pub stationary: f64,
    pub straight: f64,
    pub random_walk: f64,
    /// Per-instant probability that a straight mover adjusts its heading.
    pub turn_prob: f64,
    /// Largest per-instant displacement of a straight mover.
    pub max_speed: u32,
    /// Fraction of objects that go silent at times.
    pub gap_fraction: f64,
    /// Per-instant probability that a silent-prone object starts a gap.
    pub gap_prob: f64,
    pub max_gap: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_objects: 100,
            num_instants: 1000,
            width: 4096,
            height: 4096,
            stationary: 0.2,
            straight: 0.5,
            random_walk: 0.3,
            turn_prob: 0.02,
            max_speed: 2,
            gap_fraction: 0.2,
            gap_prob: 0.01,
            max_gap: 30,
            seed: 1,
        }
    }
}

impl SynthConfig {
    /// Behavior assigned to each object, in id order.
    pub fn behaviors(&self) -> Vec<Behavior> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let dist = self.behavior_dist();
        (0..self.num_objects).map(|_| pick(&dist, &mut rng)).collect()
    }

    fn behavior_dist(&self) -> Option<WeightedIndex<f64>> {
        WeightedIndex::new([self.stationary, self.straight, self.random_walk]).ok()
    }
}

fn pick(dist: &Option<WeightedIndex<f64>>, rng: &mut ChaCha8Rng) -> Behavior {
    match dist.as_ref().map(|d| d.sample(rng)) {
        Some(1) => Behavior::Straight,
        Some(2) => Behavior::RandomWalk,
        _ => Behavior::Stationary,
    }
}

/// Deterministic synthetic fleet on a `width x height` grid.
pub fn gen_synthetic(cfg: &SynthConfig) -> RegularDataset {
    let behaviors = cfg.behaviors();
    let n = cfg.num_instants as usize;
    let digits = cfg.num_objects.max(1).ilog10() as usize + 1;
    let mut ids = Vec::with_capacity(behaviors.len());
    let mut tracks = Vec::with_capacity(behaviors.len());
    for (o, &behavior) in behaviors.iter().enumerate() {
        // per-object stream so one object's draws never shift another's
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(o as u64 + 1);
        ids.push(format!("obj{o:0digits$}"));
        let path = walk(cfg, behavior, &mut rng);
        let visible = visibility(cfg, n, &mut rng);
        tracks.push(path.into_iter().zip(visible).map(|(c, v)| v.then_some(c)).collect());
    }
    RegularDataset {
        grid: GridConfig {
            width: cfg.width.max(1),
            height: cfg.height.max(1),
            ..GridConfig::default()
        },
        num_instants: cfg.num_instants,
        ids,
        tracks,
    }
}

fn walk(cfg: &SynthConfig, behavior: Behavior, rng: &mut ChaCha8Rng) -> Vec<Cell> {
    let (w, h) = (i64::from(cfg.width.max(1)), i64::from(cfg.height.max(1)));
    let mut x = rng.gen_range(0..w);
    let mut y = rng.gen_range(0..h);
    let speed = i64::from(cfg.max_speed.max(1));
    let mut v = loop {
        let v = (rng.gen_range(-speed..=speed), rng.gen_range(-speed..=speed));
        if v != (0, 0) {
            break v;
        }
    };
    let mut out = Vec::with_capacity(cfg.num_instants as usize);
    for t in 0..cfg.num_instants {
        if t > 0 {
            let (dx, dy) = match behavior {
                Behavior::Stationary => (0, 0),
                Behavior::RandomWalk => (rng.gen_range(-1..=1), rng.gen_range(-1..=1)),
                Behavior::Straight => {
                    if rng.gen_bool(cfg.turn_prob.clamp(0.0, 1.0)) {
                        let turned = if rng.gen_bool(0.5) {
                            (v.0 + rng.gen_range(-1..=1), v.1)
                        } else {
                            (v.0, v.1 + rng.gen_range(-1..=1))
                        };
                        if turned != (0, 0) && turned.0.abs() <= speed && turned.1.abs() <= speed {
                            v = turned;
                        }
                    }
                    if !(0..w).contains(&(x + v.0)) {
                        v.0 = -v.0;
                    }
                    if !(0..h).contains(&(y + v.1)) {
                        v.1 = -v.1;
                    }
                    v
                }
            };
            x = (x + dx).clamp(0, w - 1);
            y = (y + dy).clamp(0, h - 1);
        }
        out.push(Cell::new(x as u32, y as u32));
    }
    out
}

fn visibility(cfg: &SynthConfig, n: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut visible = vec![true; n];
    if n < 2 || !rng.gen_bool(cfg.gap_fraction.clamp(0.0, 1.0)) {
        return visible;
    }
    if rng.gen_bool(0.25) {
        let start = rng.gen_range(1..=n / 2);
        visible[..start].fill(false);
    }
    if rng.gen_bool(0.25) {
        let end = rng.gen_range(n / 2..n);
        visible[end..].fill(false);
    }
    let mut t = 0;
    while t < n {
        if cfg.max_gap > 0 && rng.gen_bool(cfg.gap_prob.clamp(0.0, 1.0)) {
            let len = rng.gen_range(1..=cfg.max_gap as usize);
            let end = (t + len).min(n);
            visible[t..end].fill(false);
            t = end;
        } else {
            t += 1;
        }
    }
    visible
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::movement::spiral_encode;
    use std::collections::HashSet;

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            num_objects: 40,
            num_instants: 300,
            width: 128,
            height: 96,
            gap_fraction: 0.5,
            gap_prob: 0.05,
            seed,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(gen_synthetic(&small(3)), gen_synthetic(&small(3)));
        assert_ne!(gen_synthetic(&small(3)), gen_synthetic(&small(4)));
    }

    #[test]
    fn valid_and_has_gaps() {
        let ds = gen_synthetic(&small(5));
        ds.validate().unwrap();
        assert_eq!(ds.num_objects(), 40);
        assert!(ds.tracks.iter().any(|t| t.iter().any(Option::is_none)));
    }

    #[test]
    fn straight_movers_use_few_codes() {
        let cfg = SynthConfig {
            straight: 1.0,
            stationary: 0.0,
            random_walk: 0.0,
            gap_fraction: 0.0,
            turn_prob: 0.005,
            width: 4096,
            height: 4096,
            ..small(9)
        };
        assert!(cfg.behaviors().iter().all(|&b| b == Behavior::Straight));
        let ds = gen_synthetic(&cfg);
        let mut dominated = 0;
        for track in &ds.tracks {
            let mut counts = std::collections::HashMap::new();
            for w in track.windows(2) {
                let (a, b) = (w[0].unwrap(), w[1].unwrap());
                let code = spiral_encode(i64::from(b.x) - i64::from(a.x), i64::from(b.y) - i64::from(a.y));
                *counts.entry(code).or_insert(0usize) += 1;
            }
            let mut c: Vec<usize> = counts.into_values().collect();
            c.sort_unstable_by(|a, b| b.cmp(a));
            if c.iter().take(3).sum::<usize>() * 10 >= 9 * (track.len() - 1) {
                dominated += 1;
            }
        }
        assert!(dominated * 10 >= ds.num_objects() * 8, "{dominated}");
    }

    #[test]
    fn no_gaps_when_disabled() {
        let ds = gen_synthetic(&SynthConfig {
            gap_fraction: 0.0,
            ..small(2)
        });
        assert!(ds.tracks.iter().flatten().all(Option::is_some));
        let ds = gen_synthetic(&SynthConfig {
            gap_prob: 0.0,
            gap_fraction: 1.0,
            ..small(2)
        });
        // late starts and early ends only
        for t in &ds.tracks {
            let present: Vec<usize> = (0..t.len()).filter(|&i| t[i].is_some()).collect();
            if let (Some(&a), Some(&b)) = (present.first(), present.last()) {
                assert_eq!(present.len(), b - a + 1);
            }
        }
        let ids: HashSet<_> = ds.ids.iter().collect();
        assert_eq!(ids.len(), ds.ids.len());
    }
}
