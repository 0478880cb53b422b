//! Independent recomputation of the noise model from Table 1 constants,
//! and the glue that feeds the same configuration to the library.

#![allow(dead_code)]

use eonjam::phy::{noise_breakdown, Channel, HopState, Physics};
use eonjam::spectrum::SlotBlock;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const H: f64 = 6.62607015e-34;
pub const NU: f64 = 1.93e14;
pub const DF: f64 = 12.5e9;
pub const P: f64 = 1e-3;

pub struct Consts {
    pub phi: f64,
    pub rho: f64,
    pub g0: f64,
}

pub fn consts() -> Consts {
    let alpha = 0.2 / (10.0 * std::f64::consts::LOG10_E) / 1000.0;
    let beta2 = 16e-24 / 1000.0;
    let gamma = 1.22 / 1000.0;
    let pi = std::f64::consts::PI;
    Consts {
        phi: 3.0 * gamma * gamma / (2.0 * pi * alpha * beta2),
        rho: pi * pi * beta2 / (2.0 * alpha),
        g0: ((alpha * 100_000.0).exp() - 1.0) * 10f64.powf(0.6) * H * NU,
    }
}

#[derive(Clone, Copy)]
pub struct Blk {
    pub start: usize,
    pub width: usize,
}

impl Blk {
    fn center(self) -> f64 {
        (self.start as f64 + self.width as f64 / 2.0) * DF
    }
    fn bw(self) -> f64 {
        self.width as f64 * DF
    }
    fn overlap(self, o: Blk) -> usize {
        let lo = self.start.max(o.start);
        let hi = (self.start + self.width).min(o.start + o.width);
        hi.saturating_sub(lo)
    }
}

pub struct Hop {
    pub spans: u32,
    pub others: Vec<Blk>,
    pub jammed: Vec<Blk>,
}

pub fn oracle_snr(c: &Consts, target: Blk, hops: &[Hop], eps_db: f64) -> f64 {
    let eps = P * (10f64.powf(eps_db / 10.0) - 1.0);
    let g = P / target.bw();
    let mut noise = 0.0;
    for hop in hops {
        let n = hop.spans as f64;
        noise += n * c.g0;

        let mut inner = g * g * (c.rho * target.bw() * target.bw()).asinh();
        for o in &hop.others {
            let go = P / o.bw();
            let f = (target.center() - o.center()).abs();
            inner += go * go * ((f + o.bw() / 2.0) / (f - o.bw() / 2.0)).ln();
        }
        noise += n * c.phi * g * inner;

        for j in &hop.jammed {
            let ov = target.overlap(*j);
            if ov > 0 {
                noise += eps / j.bw() * ov as f64 / target.width as f64;
            } else if eps > 0.0 {
                let f = (target.center() - j.center()).abs();
                let log = ((f + j.bw() / 2.0) / (f - j.bw() / 2.0)).ln();
                noise += n * c.phi * g * (eps * eps + 2.0 * eps * P) / (j.bw() * j.bw()) * log;
            }
        }
    }
    g / noise
}

pub fn random_case(rng: &mut ChaCha8Rng) -> (Blk, Vec<Hop>, f64) {
    let target = Blk {
        start: rng.random_range(0..300),
        width: rng.random_range(1..=8),
    };
    // up to three other channels, disjoint from the target and each other
    let mut others: Vec<Blk> = Vec::new();
    for _ in 0..rng.random_range(0..=3) {
        for _ in 0..50 {
            let b = Blk {
                start: rng.random_range(0..310),
                width: rng.random_range(1..=8),
            };
            if b.start + b.width <= 320
                && b.overlap(target) == 0
                && others.iter().all(|o| b.overlap(*o) == 0)
            {
                others.push(b);
                break;
            }
        }
    }
    let ranges: Vec<Blk> = (0..rng.random_range(0..=2))
        .map(|_| Blk {
            start: rng.random_range(0..310),
            width: 10,
        })
        .collect();
    let hops = (0..rng.random_range(1..=3))
        .map(|_| Hop {
            spans: rng.random_range(1..=3),
            others: others.iter().copied().filter(|_| rng.random_bool(0.7)).collect(),
            jammed: if rng.random_bool(0.5) {
                ranges.clone()
            } else {
                Vec::new()
            },
        })
        .collect();
    let eps = [0.0, 1.0, 3.0, 5.0][rng.random_range(0..4)];
    (target, hops, eps)
}

/// The library's SNR for the same configuration.
pub fn library_snr(physics: &Physics, target: Blk, hops: &[Hop], eps_db: f64) -> f64 {
    let eps_w = P * (10f64.powf(eps_db / 10.0) - 1.0);
    let tch = physics.channel(SlotBlock::new(target.start, target.width));
    let co: Vec<Vec<Channel>> = hops
        .iter()
        .map(|h| {
            h.others
                .iter()
                .map(|b| physics.channel(SlotBlock::new(b.start, b.width)))
                .collect()
        })
        .collect();
    let jam: Vec<Vec<Channel>> = hops
        .iter()
        .map(|h| {
            h.jammed
                .iter()
                .map(|b| Channel::new(SlotBlock::new(b.start, b.width), P + eps_w, &physics.params, true))
                .collect()
        })
        .collect();
    let states: Vec<HopState> = hops
        .iter()
        .enumerate()
        .map(|(i, h)| HopState {
            spans: h.spans,
            co_channels: &co[i],
            jammers: &jam[i],
        })
        .collect();
    noise_breakdown(&tch, &states, eps_w, physics).unwrap().snr()
}

/// Worst relative SNR error over `cases` random configurations.
pub fn worst_relative_error(seed: u64, cases: usize) -> f64 {
    use rand::SeedableRng;
    let physics = Physics::table1();
    let c = consts();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|_| {
            let (target, hops, eps_db) = random_case(&mut rng);
            let expected = oracle_snr(&c, target, &hops, eps_db);
            let got = library_snr(&physics, target, &hops, eps_db);
            (got - expected).abs() / expected
        })
        .fold(0.0, f64::max)
}
