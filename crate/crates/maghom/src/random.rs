//! Seeded Erdős–Rényi and flat-torus geometric random graphs.
//!
//! Draws come from ChaCha8 seeded by the caller's seed. Edge `i` of the
//! lexicographic pair order consumes the 64-bit word at stream position `i`
//! (point `i` consumes words `2i` and `2i+1`), so every draw is a pure function
//! of `(seed, index)`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("edge probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("exponent q must be finite and n at least 1")]
    Exponent,
    #[error("radius {0} must be finite and non-negative")]
    Radius(f64),
    #[error("area {0} must be finite and positive")]
    Area(f64),
    #[error("pi r^2 = {disc} exceeds the torus area {area}")]
    NotHomogeneous { disc: f64, area: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeDensity {
    P(f64),
    /// `p = n^{-q}`
    Q(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErParams {
    pub n: usize,
    pub density: EdgeDensity,
    pub seed: u64,
}

impl ErParams {
    pub fn new(n: usize, density: EdgeDensity, seed: u64) -> Result<Self, ModelError> {
        let params = ErParams { n, density, seed };
        params.p()?;
        Ok(params)
    }

    pub fn p(&self) -> Result<f64, ModelError> {
        let p = match self.density {
            EdgeDensity::P(p) => p,
            EdgeDensity::Q(q) => {
                if !q.is_finite() || self.n == 0 {
                    return Err(ModelError::Exponent);
                }
                (self.n as f64).powf(-q)
            }
        };
        if !(0.0..=1.0).contains(&p) {
            return Err(ModelError::Probability(p));
        }
        Ok(p)
    }

    pub fn header(&self) -> Vec<String> {
        let density = match self.density {
            EdgeDensity::P(p) => format!("p={p}"),
            EdgeDensity::Q(q) => format!("q={q}"),
        };
        vec![format!("model=er n={} {density} seed={}", self.n, self.seed)]
    }
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random mantissa bits, uniform on [0, 1)
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn sample_er(params: &ErParams) -> Result<Graph, ModelError> {
    let p = params.p()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if unit(&mut rng) < p {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::new(n, &edges).expect("sampled pairs are valid"))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RggParams {
    pub n: usize,
    pub r: f64,
    pub area: f64,
    pub seed: u64,
}

impl RggParams {
    /// Any finite `r >= 0` is accepted for sampling; the homogeneity bound is
    /// enforced only where the closed-form probabilities are requested.
    pub fn new(n: usize, r: f64, area: f64, seed: u64) -> Result<Self, ModelError> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(ModelError::Radius(r));
        }
        if !(area.is_finite() && area > 0.0) {
            return Err(ModelError::Area(area));
        }
        Ok(RggParams { n, r, area, seed })
    }

    /// Side length of the fundamental square.
    pub fn side(&self) -> f64 {
        self.area.sqrt()
    }

    pub fn header(&self) -> Vec<String> {
        vec![format!(
            "model=rgg n={} r={} area={} seed={}",
            self.n, self.r, self.area, self.seed
        )]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub points: Vec<(f64, f64)>,
}

impl PointCloud {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("idx,x,y\n");
        for (i, (x, y)) in self.points.iter().enumerate() {
            writeln!(s, "{i},{x:.16e},{y:.16e}").unwrap();
        }
        s
    }
}

/// Euclidean distance on the torus `[0, √A)²`, minimized over the nine shifts.
pub fn torus_distance(a: (f64, f64), b: (f64, f64), area: f64) -> f64 {
    let side = area.sqrt();
    let mut best = f64::INFINITY;
    for sx in [-1.0, 0.0, 1.0] {
        for sy in [-1.0, 0.0, 1.0] {
            let dx = a.0 - b.0 + sx * side;
            let dy = a.1 - b.1 + sy * side;
            best = best.min(dx.hypot(dy));
        }
    }
    best
}

pub fn sample_points(params: &RggParams) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let side = params.side();
    let points = (0..params.n)
        .map(|_| {
            let x = unit(&mut rng) * side;
            let y = unit(&mut rng) * side;
            (x, y)
        })
        .collect();
    PointCloud { points }
}

pub fn sample_rgg(params: &RggParams) -> (Graph, PointCloud) {
    let cloud = sample_points(params);
    let pts = &cloud.points;
    let mut edges = Vec::new();
    for u in 0..pts.len() {
        for v in u + 1..pts.len() {
            if torus_distance(pts[u], pts[v], params.area) <= params.r {
                edges.push((u, v));
            }
        }
    }
    (Graph::new(pts.len(), &edges).expect("sampled pairs are valid"), cloud)
}

/// `πr²/A`, the probability that two given vertices are adjacent.
pub fn edge_probability_rgg(params: &RggParams) -> Result<f64, ModelError> {
    let disc = PI * params.r * params.r;
    if disc > params.area {
        return Err(ModelError::NotHomogeneous { disc, area: params.area });
    }
    Ok(disc / params.area)
}

/// Probability that both edges of a 2-trail are present.
pub fn pair_probability_rgg(params: &RggParams) -> Result<f64, ModelError> {
    Ok(edge_probability_rgg(params)?.powi(2))
}

/// Probability that all `k` edges of a given eulerian k-trail are present.
pub fn trail_probability_rgg(params: &RggParams, k: u32) -> Result<f64, ModelError> {
    Ok(edge_probability_rgg(params)?.powi(k as i32))
}

/// Derives an independent seed for trial `t` of sweep cell `cell`.
pub fn trial_seed(seed: u64, cell: u64, t: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell);
    rng.set_word_pos(2 * t as u128);
    rng.gen()
}
