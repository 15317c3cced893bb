//! Brute-force oracles shared by the integration tests. Nothing here calls the
//! library's enumeration, face or rank code.
#![allow(dead_code)]

use maghom::graph::{Graph, UNREACHABLE};
use maghom::DistanceMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn toy() -> Graph {
    Graph::new(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap()
}

/// Graph of the relation example: (0,1,2,3,4) dies in the full theory.
pub fn relation_graph() -> Graph {
    Graph::new(5, &[(0, 1), (1, 2), (1, 3), (2, 3), (2, 4), (1, 4), (0, 2)]).unwrap()
}

/// Seven vertices where (0,1,3,4) survives in eulerian homology of degree 3.
pub fn lower_k_graph() -> Graph {
    Graph::new(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 5), (3, 5), (1, 6), (4, 6)]).unwrap()
}

pub fn random_graph(seed: u64, n_max: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=n_max);
    let p: f64 = rng.gen_range(0.2..0.8);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, &edges).unwrap()
}

/// Floyd–Warshall distances, independent of the BFS in the library.
pub fn oracle_distances(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.n();
    let mut d = vec![vec![UNREACHABLE; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
        for v in 0..n {
            if g.has_edge(u, v) {
                row[v] = 1;
            }
        }
    }
    for w in 0..n {
        for u in 0..n {
            for v in 0..n {
                if d[u][w] != UNREACHABLE && d[w][v] != UNREACHABLE && d[u][w] + d[w][v] < d[u][v] {
                    d[u][v] = d[u][w] + d[w][v];
                }
            }
        }
    }
    d
}

pub fn oracle_length(d: &[Vec<u32>], x: &[usize]) -> Option<u32> {
    let mut s = 0;
    for w in x.windows(2) {
        if w[0] == w[1] || d[w[0]][w[1]] == UNREACHABLE {
            return None;
        }
        s += d[w[0]][w[1]];
    }
    Some(s)
}

pub fn distinct(x: &[usize]) -> bool {
    (0..x.len()).all(|i| (i + 1..x.len()).all(|j| x[i] != x[j]))
}

/// All (k+1)-tuples of length `l`, by scanning every tuple in lexicographic order.
/// `filter` 0 = all, 1 = eulerian only, 2 = non-eulerian only.
pub fn oracle_trails(g: &Graph, k: usize, l: u32, filter: u8) -> Vec<Vec<usize>> {
    let d = oracle_distances(g);
    let n = g.n();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut x = vec![0usize; k + 1];
    loop {
        if oracle_length(&d, &x) == Some(l) {
            let e = distinct(&x);
            if filter == 0 || (filter == 1 && e) || (filter == 2 && !e) {
                out.push(x.clone());
            }
        }
        let mut i = k as isize;
        while i >= 0 && x[i as usize] == n - 1 {
            x[i as usize] = 0;
            i -= 1;
        }
        if i < 0 {
            break;
        }
        x[i as usize] += 1;
    }
    out
}

/// Dense boundary matrix built from whole-tuple length recomputation.
pub fn oracle_boundary(g: &Graph, src: &[Vec<usize>], tgt: &[Vec<usize>], l: u32) -> Vec<Vec<i64>> {
    let d = oracle_distances(g);
    let mut m = vec![vec![0i64; src.len()]; tgt.len()];
    for (c, x) in src.iter().enumerate() {
        for i in 1..x.len().saturating_sub(1) {
            let mut f = x.clone();
            f.remove(i);
            if oracle_length(&d, &f) != Some(l) {
                continue;
            }
            if let Some(r) = tgt.iter().position(|t| *t == f) {
                m[r][c] += if i % 2 == 0 { 1 } else { -1 };
            }
        }
    }
    m
}

/// Exact rank of a small dense integer matrix by Bareiss elimination in i128.
pub fn oracle_rank(m: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for j in c + 1..cols {
                a[r][j] = (a[r][j] * a[rank][c] - a[r][c] * a[rank][j]) / prev;
            }
            a[r][c] = 0;
        }
        prev = a[rank][c];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

pub fn landmarks(b: &maghom::ChainBasis) -> Vec<Vec<usize>> {
    b.generators().iter().map(|t| t.landmarks.clone()).collect()
}

pub fn dist(g: &Graph) -> DistanceMatrix {
    maghom::all_pairs_distances(g)
}
