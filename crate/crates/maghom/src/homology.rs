//! Betti numbers, torsion and cross-checks between the three homology theories.

use num_bigint::BigInt;
use thiserror::Error;

use crate::chain::boundary_between;
use crate::graph::{DistanceMatrix, Graph};
use crate::linalg::{self, Column, LinalgError, SparseMatrix};
use crate::trail::{enumerate_trails, enumerate_trails_capped, is_eulerian, trail_length, ChainBasis, Theory, TrailError};

/// Default cap on the number of generators in a single chain group.
pub const DEFAULT_CAP: usize = 5_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HomologyError {
    #[error(transparent)]
    Budget(#[from] TrailError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Torsion {
    NotRequested,
    /// The incoming differential is too large for dense Smith normal form.
    Unknown,
    /// Invariant factors different from 1, ascending.
    Factors(Vec<BigInt>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyResult {
    pub theory: Theory,
    pub k: usize,
    pub l: u32,
    pub dim_source: usize,
    pub rank_out: usize,
    pub rank_in: usize,
    pub betti: usize,
    pub torsion: Torsion,
}

fn basis(g: &Graph, d: &DistanceMatrix, k: Option<usize>, l: u32, theory: Theory, cap: usize) -> Result<ChainBasis, HomologyError> {
    Ok(match k {
        Some(k) => enumerate_trails_capped(g, d, k, l, theory, cap)?,
        None => ChainBasis::empty(theory, 0, l),
    })
}

/// Homology of the chosen complex in bidegree `(k, l)`.
pub fn compute_homology(
    g: &Graph,
    d: &DistanceMatrix,
    k: usize,
    l: u32,
    theory: Theory,
    want_torsion: bool,
    cap: usize,
) -> Result<HomologyResult, HomologyError> {
    let here = basis(g, d, Some(k), l, theory, cap)?;
    let below = basis(g, d, k.checked_sub(1), l, theory, cap)?;
    let above = basis(g, d, Some(k + 1), l, theory, cap)?;
    let out = boundary_between(d, &here, &below);
    let incoming = boundary_between(d, &above, &here);
    let rank_out = linalg::matrix_rank_exact(&out);
    let rank_in = linalg::matrix_rank_exact(&incoming);
    let torsion = if !want_torsion {
        Torsion::NotRequested
    } else {
        match linalg::torsion_factors(&incoming) {
            Ok(f) => Torsion::Factors(f),
            Err(LinalgError::TooLarge { .. }) => Torsion::Unknown,
            Err(e) => return Err(e.into()),
        }
    };
    Ok(HomologyResult {
        theory,
        k,
        l,
        dim_source: here.len(),
        rank_out,
        rank_in,
        betti: here.len() - rank_out - rank_in,
        torsion,
    })
}

/// Kernel of the differential leaving `(k, l)`, as integral vectors over that basis.
pub fn cycle_basis(g: &Graph, d: &DistanceMatrix, k: usize, l: u32, theory: Theory) -> Result<(ChainBasis, Vec<Column>), HomologyError> {
    let here = enumerate_trails(g, d, k, l, theory);
    let below = basis(g, d, k.checked_sub(1), l, theory, usize::MAX)?;
    let m = boundary_between(d, &here, &below);
    Ok((here, linalg::kernel_basis(&m)?))
}

/// One node of the long exact sequence: the kernel of the map leaving the node
/// must have the dimension of the image of the map entering it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LesNode {
    pub group: String,
    pub k: usize,
    pub kernel_dim: usize,
    pub image_dim: usize,
}

impl LesNode {
    pub fn ok(&self) -> bool {
        self.kernel_dim == self.image_dim
    }
}

#[derive(Clone, Debug)]
pub struct LesReport {
    pub l: u32,
    pub nodes: Vec<LesNode>,
}

impl LesReport {
    pub fn passed(&self) -> bool {
        self.nodes.iter().all(LesNode::ok)
    }
}

struct Grade {
    basis: ChainBasis,
    cycles: SparseMatrix,
    /// Image of the incoming differential.
    boundaries: SparseMatrix,
}

impl Grade {
    fn betti(&self) -> usize {
        self.cycles.ncols() - linalg::matrix_rank_exact(&self.boundaries)
    }
}

fn grades(g: &Graph, d: &DistanceMatrix, l: u32, theory: Theory) -> Result<Vec<Grade>, HomologyError> {
    let top = l as usize + 1;
    let bases: Vec<ChainBasis> = (0..=top).map(|k| enumerate_trails(g, d, k, l, theory)).collect();
    let mut out = Vec::new();
    for k in 0..=top {
        let below = match k.checked_sub(1) {
            Some(j) => bases[j].clone(),
            None => ChainBasis::empty(theory, 0, l),
        };
        let cycles = linalg::kernel_basis(&boundary_between(d, &bases[k], &below))?;
        let boundaries = match bases.get(k + 1) {
            Some(up) => boundary_between(d, up, &bases[k]),
            None => SparseMatrix::zeros(bases[k].len(), 0),
        };
        out.push(Grade {
            basis: bases[k].clone(),
            cycles: SparseMatrix::new(bases[k].len(), cycles),
            boundaries,
        });
    }
    Ok(out)
}

/// Rank of the map induced on homology by a chain map `f` from the cycles
/// `z` into a target grade.
fn induced_rank(f_of_z: &SparseMatrix, target: &Grade) -> usize {
    let joint = f_of_z.hstack(&target.boundaries);
    linalg::matrix_rank_exact(&joint) - linalg::matrix_rank_exact(&target.boundaries)
}

/// Checks dimension bookkeeping of the long exact sequence
/// `EMH_k -> MH_k -> DMH_k -> EMH_{k-1}` at every node for length `l`.
pub fn les_consistency_check(g: &Graph, d: &DistanceMatrix, l: u32) -> Result<LesReport, HomologyError> {
    let e = grades(g, d, l, Theory::Emc)?;
    let m = grades(g, d, l, Theory::Mc)?;
    let q = grades(g, d, l, Theory::Dmc)?;
    let top = l as usize + 1;

    let mut iota = Vec::new();
    let mut pi = Vec::new();
    // delta[k] is the rank of DMH_k -> EMH_{k-1}
    let mut delta = vec![0usize; top + 2];
    for k in 0..=top {
        let into_mc = e[k]
            .cycles
            .map_rows(m[k].basis.len(), |r| m[k].basis.position(&e[k].basis.get(r).landmarks));
        iota.push(induced_rank(&into_mc, &m[k]));
        let onto_dmc = m[k]
            .cycles
            .map_rows(q[k].basis.len(), |r| q[k].basis.position(&m[k].basis.get(r).landmarks));
        pi.push(induced_rank(&onto_dmc, &q[k]));
        if k >= 1 {
            let conn = boundary_between(d, &q[k].basis, &e[k - 1].basis);
            delta[k] = induced_rank(&conn.multiply(&q[k].cycles), &e[k - 1]);
        }
    }

    let mut nodes = Vec::new();
    for k in 0..=top {
        nodes.push(LesNode {
            group: "EMH".into(),
            k,
            kernel_dim: e[k].betti() - iota[k],
            image_dim: delta[k + 1],
        });
        nodes.push(LesNode {
            group: "MH".into(),
            k,
            kernel_dim: m[k].betti() - pi[k],
            image_dim: iota[k],
        });
        nodes.push(LesNode {
            group: "DMH".into(),
            k,
            kernel_dim: q[k].betti() - delta[k],
            image_dim: pi[k],
        });
    }
    Ok(LesReport { l, nodes })
}

/// Outcome of [`verify_vanishing_consequences`]; `None` marks a check whose
/// precondition does not hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VanishingReport {
    pub k: usize,
    /// EMH_{m,m} vanishes for every 2 <= m <= k.
    pub precondition: bool,
    pub betti_mh: usize,
    pub edges: usize,
    pub back_and_forth: Option<bool>,
    pub mh_equals_two_edges: Option<bool>,
    pub betti_dmh: Option<usize>,
    pub mh_equals_dmh: Option<bool>,
}

impl VanishingReport {
    pub fn applicable(&self) -> bool {
        self.back_and_forth.is_some() || self.mh_equals_dmh.is_some()
    }

    pub fn passed(&self) -> bool {
        [self.back_and_forth, self.mh_equals_two_edges, self.mh_equals_dmh]
            .iter()
            .all(|c| c.unwrap_or(true))
    }
}

/// `(a, b, a, b, ...)` for some edge `{a, b}`.
pub fn is_back_and_forth(landmarks: &[usize]) -> bool {
    landmarks.len() >= 2 && landmarks.iter().enumerate().all(|(i, &x)| x == landmarks[i % 2])
}

fn emh_diagonal_vanishes(g: &Graph, d: &DistanceMatrix, m: usize) -> Result<bool, HomologyError> {
    let r = compute_homology(g, d, m, m as u32, Theory::Emc, false, DEFAULT_CAP)?;
    Ok(r.betti == 0)
}

/// Consequences of vanishing diagonal eulerian homology for the full and
/// discriminant theories in degree `(k, k)`.
pub fn verify_vanishing_consequences(g: &Graph, d: &DistanceMatrix, k: usize) -> Result<VanishingReport, HomologyError> {
    let l = k as u32;
    let mut precondition = true;
    for m in 2..=k {
        if !emh_diagonal_vanishes(g, d, m)? {
            precondition = false;
            break;
        }
    }
    let (_, cycles) = cycle_basis(g, d, k, l, Theory::Mc)?;
    let mc = enumerate_trails(g, d, k, l, Theory::Mc);
    let betti_mh = cycles.len();
    let mut report = VanishingReport {
        k,
        precondition,
        betti_mh,
        edges: g.edge_count(),
        back_and_forth: None,
        mh_equals_two_edges: None,
        betti_dmh: None,
        mh_equals_dmh: None,
    };
    if precondition && k >= 1 {
        report.back_and_forth = Some(
            cycles
                .iter()
                .all(|v| v.iter().all(|&(i, _)| is_back_and_forth(&mc.get(i).landmarks))),
        );
        report.mh_equals_two_edges = Some(betti_mh == 2 * g.edge_count());
    }
    let iso_applies = k >= 5 && emh_diagonal_vanishes(g, d, 2)? && emh_diagonal_vanishes(g, d, k)?;
    if iso_applies {
        let dmh = compute_homology(g, d, k, l, Theory::Dmc, false, DEFAULT_CAP)?.betti;
        report.betti_dmh = Some(dmh);
        report.mh_equals_dmh = Some(dmh == betti_mh);
    }
    Ok(report)
}

/// Result of [`check_lesnotsplit_criterion`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitVerdict {
    /// k-trails obtained by re-inserting one landmark of the input.
    pub witnesses: Vec<Vec<usize>>,
    /// Witnesses whose differential is exactly plus or minus the input trail.
    pub exact_witnesses: Vec<Vec<usize>>,
    /// Direct computation: the class of the input lies in the image of the full differential.
    pub trivial_in_mh: bool,
}

impl SplitVerdict {
    pub fn trivial_by_criterion(&self) -> bool {
        !self.witnesses.is_empty()
    }

    pub fn consistent(&self) -> bool {
        self.trivial_by_criterion() == self.trivial_in_mh
    }
}

/// Decides whether an eulerian class of grade `(k-1, k)` dies in the full theory,
/// by searching for a re-insertion witness and by direct computation.
pub fn check_lesnotsplit_criterion(g: &Graph, d: &DistanceMatrix, x: &[usize]) -> Result<SplitVerdict, HomologyError> {
    let fail = |m: &str| Err(HomologyError::Precondition(m.to_string()));
    if x.len() < 2 {
        return fail("trail needs at least two landmarks");
    }
    let k = x.len();
    let l = k as u32;
    if !is_eulerian(x) {
        return fail("trail has a repeated landmark");
    }
    if trail_length(d, x).ok() != Some(l) {
        return fail("trail length must exceed its degree by one");
    }
    let emc_here = enumerate_trails(g, d, k - 1, l, Theory::Emc);
    let emc_below = basis(g, d, k.checked_sub(2), l, Theory::Emc, usize::MAX)?;
    let pos = emc_here.position(x).expect("eulerian trail of matching length is a generator");
    let out = boundary_between(d, &emc_here, &emc_below);
    if !out.column(pos).is_empty() {
        return fail("trail is not a cycle");
    }
    let emc_up = enumerate_trails(g, d, k, l, Theory::Emc);
    if linalg::in_column_span(&boundary_between(d, &emc_up, &emc_here), &vec![(pos, 1)]) {
        return fail("class is already trivial in eulerian homology");
    }

    let mc_here = enumerate_trails(g, d, k - 1, l, Theory::Mc);
    let mc_up = enumerate_trails(g, d, k, l, Theory::Mc);
    let image = boundary_between(d, &mc_up, &mc_here);
    let target = mc_here.position(x).expect("generator of the full complex");
    let trivial_in_mh = linalg::in_column_span(&image, &vec![(target, 1)]);

    let mut witnesses = Vec::new();
    let mut exact_witnesses = Vec::new();
    for gap in 0..k - 1 {
        for i in 0..k {
            let between = if gap >= i { gap - i } else { i - gap - 1 };
            if between < 2 {
                continue;
            }
            let mut w = x.to_vec();
            w.insert(gap + 1, x[i]);
            if let Some(col) = mc_up.position(&w) {
                if image.column(col).len() == 1 && image.column(col)[0].0 == target {
                    exact_witnesses.push(w.clone());
                }
                witnesses.push(w);
            }
        }
    }
    Ok(SplitVerdict {
        witnesses,
        exact_witnesses,
        trivial_in_mh,
    })
}
