//! k-trails, their lengths, and chain-group bases for the three complexes.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{DistanceMatrix, Graph, UNREACHABLE};

/// Which chain complex a basis belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Theory {
    /// All k-trails.
    Mc,
    /// Trails with pairwise distinct landmarks.
    Emc,
    /// Quotient of the two: trails with a repeated landmark.
    Dmc,
}

impl Theory {
    pub const ALL: [Theory; 3] = [Theory::Mc, Theory::Emc, Theory::Dmc];

    pub fn name(self) -> &'static str {
        match self {
            Theory::Mc => "mc",
            Theory::Emc => "emc",
            Theory::Dmc => "dmc",
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theory {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mc" | "mh" => Ok(Theory::Mc),
            "emc" | "emh" => Ok(Theory::Emc),
            "dmc" | "dmh" => Ok(Theory::Dmc),
            other => Err(format!("unknown theory `{other}` (expected mc, emc or dmc)")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrailError {
    #[error("repeated consecutive landmark {0}")]
    RepeatedConsecutive(usize),
    #[error("basis for ({k},{l}) exceeds the cap of {cap} generators")]
    BudgetExceeded { k: usize, l: u32, cap: usize },
}

/// A tuple of landmarks together with its length.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trail {
    pub landmarks: Vec<usize>,
    pub length: u32,
}

impl Trail {
    /// Number of steps, i.e. one less than the number of landmarks.
    pub fn k(&self) -> usize {
        self.landmarks.len() - 1
    }

    pub fn is_eulerian(&self) -> bool {
        is_eulerian(&self.landmarks)
    }

    pub fn start(&self) -> usize {
        self.landmarks[0]
    }

    pub fn end(&self) -> usize {
        *self.landmarks.last().unwrap()
    }
}

impl fmt::Display for Trail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.landmarks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, " len={}", self.length)
    }
}

pub fn is_eulerian(landmarks: &[usize]) -> bool {
    landmarks
        .iter()
        .enumerate()
        .all(|(i, x)| !landmarks[i + 1..].contains(x))
}

/// Sum of consecutive distances, or [`UNREACHABLE`] if some step crosses components.
pub fn trail_length(d: &DistanceMatrix, landmarks: &[usize]) -> Result<u32, TrailError> {
    let mut total = 0u32;
    for w in landmarks.windows(2) {
        if w[0] == w[1] {
            return Err(TrailError::RepeatedConsecutive(w[0]));
        }
        match d.finite(w[0], w[1]) {
            Some(x) => total += x,
            None => return Ok(UNREACHABLE),
        }
    }
    Ok(total)
}

pub fn landmark_set(t: &Trail) -> BTreeSet<usize> {
    t.landmarks.iter().copied().collect()
}

/// Ordered generators of one chain group together with a reverse index.
#[derive(Clone, Debug)]
pub struct ChainBasis {
    pub theory: Theory,
    pub k: usize,
    pub l: u32,
    generators: Vec<Trail>,
    index: HashMap<Vec<usize>, usize>,
}

impl ChainBasis {
    fn from_generators(theory: Theory, k: usize, l: u32, generators: Vec<Trail>) -> Self {
        let index = generators
            .iter()
            .enumerate()
            .map(|(i, t)| (t.landmarks.clone(), i))
            .collect();
        ChainBasis {
            theory,
            k,
            l,
            generators,
            index,
        }
    }

    /// Basis with no generators, used for grades below zero.
    pub fn empty(theory: Theory, k: usize, l: u32) -> Self {
        Self::from_generators(theory, k, l, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Trail] {
        &self.generators
    }

    pub fn get(&self, i: usize) -> &Trail {
        &self.generators[i]
    }

    pub fn position(&self, landmarks: &[usize]) -> Option<usize> {
        self.index.get(landmarks).copied()
    }
}

/// Every generator of the requested theory in grade `(k, l)`, in lexicographic order.
pub fn enumerate_trails(g: &Graph, d: &DistanceMatrix, k: usize, l: u32, theory: Theory) -> ChainBasis {
    enumerate_trails_capped(g, d, k, l, theory, usize::MAX).expect("uncapped enumeration")
}

/// As [`enumerate_trails`], giving up once more than `cap` generators are found.
pub fn enumerate_trails_capped(
    g: &Graph,
    d: &DistanceMatrix,
    k: usize,
    l: u32,
    theory: Theory,
    cap: usize,
) -> Result<ChainBasis, TrailError> {
    if k as u64 > l as u64 || g.n() == 0 {
        return Ok(ChainBasis::from_generators(theory, k, l, Vec::new()));
    }
    let found = AtomicUsize::new(0);
    let over = AtomicBool::new(false);
    let per_start: Vec<Vec<Trail>> = (0..g.n())
        .into_par_iter()
        .map(|s| {
            let mut out = Vec::new();
            let mut walk = DfsState {
                g,
                d,
                k,
                l,
                theory,
                cap,
                found: &found,
                over: &over,
                prefix: vec![s],
                out: &mut out,
            };
            walk.extend(0);
            out
        })
        .collect();
    if over.load(Ordering::Relaxed) {
        return Err(TrailError::BudgetExceeded { k, l, cap });
    }
    let generators: Vec<Trail> = per_start.into_iter().flatten().collect();
    Ok(ChainBasis::from_generators(theory, k, l, generators))
}

struct DfsState<'a> {
    g: &'a Graph,
    d: &'a DistanceMatrix,
    k: usize,
    l: u32,
    theory: Theory,
    cap: usize,
    found: &'a AtomicUsize,
    over: &'a AtomicBool,
    prefix: Vec<usize>,
    out: &'a mut Vec<Trail>,
}

impl DfsState<'_> {
    fn extend(&mut self, acc: u32) {
        if self.over.load(Ordering::Relaxed) {
            return;
        }
        let depth = self.prefix.len() - 1;
        if depth == self.k {
            if acc != self.l {
                return;
            }
            let keep = match self.theory {
                Theory::Mc | Theory::Emc => true,
                Theory::Dmc => !is_eulerian(&self.prefix),
            };
            if keep {
                if self.found.fetch_add(1, Ordering::Relaxed) >= self.cap {
                    self.over.store(true, Ordering::Relaxed);
                    return;
                }
                self.out.push(Trail {
                    landmarks: self.prefix.clone(),
                    length: acc,
                });
            }
            return;
        }
        let last = *self.prefix.last().unwrap();
        // each remaining step costs at least one hop
        let steps_after = (self.k - depth - 1) as u32;
        let budget = self.l - acc - steps_after;
        if self.k as u32 == self.l {
            // on the diagonal every step is a single edge
            for i in 0..self.g.degree(last) {
                let v = self.g.neighbors(last)[i];
                self.try_step(v, acc + 1);
            }
        } else {
            for v in 0..self.g.n() {
                if v == last {
                    continue;
                }
                let dv = self.d.get(last, v);
                if dv == UNREACHABLE || dv > budget {
                    continue;
                }
                self.try_step(v, acc + dv);
            }
        }
    }

    fn try_step(&mut self, v: usize, acc: u32) {
        if self.theory == Theory::Emc && self.prefix.contains(&v) {
            return;
        }
        self.prefix.push(v);
        self.extend(acc);
        self.prefix.pop();
    }
}
