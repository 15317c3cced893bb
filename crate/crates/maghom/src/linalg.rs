//! Sparse integer matrices: ranks over prime fields and the rationals,
//! integral kernel bases and Smith normal forms.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Primes used for the modular rank certificate.
pub const PRIMES: [u64; 2] = [2_305_843_009_213_693_951, 4_611_686_018_427_387_847];

/// Dense Smith normal form is only attempted up to this many rows and columns.
pub const SNF_MAX_DIM: usize = 2000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("kernel coefficient does not fit in 64 bits")]
    Overflow,
    #[error("matrix with {rows} rows and {cols} columns exceeds the cap of {cap}")]
    TooLarge { rows: usize, cols: usize, cap: usize },
    #[error("malformed matrix dump: {0}")]
    Parse(String),
}

/// Sparse column: `(row, value)` pairs sorted by row with no zero values.
pub type Column = Vec<(usize, i64)>;

/// Column-major sparse integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: Vec<Column>,
}

fn normalize(mut col: Column) -> Column {
    col.sort_unstable_by_key(|e| e.0);
    let mut out: Column = Vec::with_capacity(col.len());
    for (r, v) in col {
        match out.last_mut() {
            Some(last) if last.0 == r => last.1 += v,
            _ => out.push((r, v)),
        }
    }
    out.retain(|e| e.1 != 0);
    out
}

impl SparseMatrix {
    /// Builds a matrix; entries of a column may be unsorted and repeated, repeats are summed.
    pub fn new(rows: usize, cols: Vec<Column>) -> Self {
        let cols = cols
            .into_iter()
            .map(|c| {
                debug_assert!(c.iter().all(|e| e.0 < rows));
                normalize(c)
            })
            .collect();
        SparseMatrix { rows, cols }
    }

    pub fn zeros(rows: usize, ncols: usize) -> Self {
        SparseMatrix {
            rows,
            cols: vec![Vec::new(); ncols],
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn column(&self, c: usize) -> &Column {
        &self.cols[c]
    }

    pub fn columns(&self) -> &[Column] {
        &self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.cols[c]
            .binary_search_by_key(&r, |e| e.0)
            .map(|i| self.cols[c][i].1)
            .unwrap_or(0)
    }

    /// `self * rhs`.
    pub fn multiply(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols(), rhs.nrows(), "dimension mismatch");
        let cols = rhs
            .cols
            .iter()
            .map(|rc| {
                let mut acc = Vec::new();
                for &(mid, a) in rc {
                    acc.extend(self.cols[mid].iter().map(|&(r, b)| (r, a * b)));
                }
                acc
            })
            .collect();
        SparseMatrix::new(self.rows, cols)
    }

    /// Columns of `self` followed by those of `other`.
    pub fn hstack(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.rows, other.rows, "row mismatch");
        let mut cols = self.cols.clone();
        cols.extend(other.cols.iter().cloned());
        SparseMatrix { rows: self.rows, cols }
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, which: &[usize]) -> SparseMatrix {
        SparseMatrix {
            rows: self.rows,
            cols: which.iter().map(|&c| self.cols[c].clone()).collect(),
        }
    }

    /// Re-indexes rows through `map` (old row -> new row), dropping rows mapped to `None`.
    pub fn map_rows(&self, new_rows: usize, map: impl Fn(usize) -> Option<usize>) -> SparseMatrix {
        let cols = self
            .cols
            .iter()
            .map(|c| c.iter().filter_map(|&(r, v)| map(r).map(|nr| (nr, v))).collect())
            .collect();
        SparseMatrix::new(new_rows, cols)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut cols = vec![Vec::new(); self.rows];
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                cols[r].push((c, v));
            }
        }
        SparseMatrix {
            rows: self.cols.len(),
            cols,
        }
    }

    /// `rows cols nnz` header followed by `r c v` triplets sorted by `(c, r)`.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.rows, self.cols.len(), self.nnz());
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                let _ = writeln!(out, "{r} {c} {v}");
            }
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<SparseMatrix, LinalgError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let bad = |m: &str| LinalgError::Parse(m.to_string());
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("empty input"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("header")))
            .collect::<Result<_, _>>()?;
        let [rows, ncols, nnz] = header[..] else {
            return Err(bad("header needs three fields"));
        };
        let mut cols = vec![Vec::new(); ncols];
        let mut seen = 0;
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(line));
            }
            let r: usize = f[0].parse().map_err(|_| bad(line))?;
            let c: usize = f[1].parse().map_err(|_| bad(line))?;
            let v: i64 = f[2].parse().map_err(|_| bad(line))?;
            if r >= rows || c >= ncols {
                return Err(bad(line));
            }
            cols[c].push((r, v));
            seen += 1;
        }
        if seen != nnz {
            return Err(bad("entry count differs from header"));
        }
        Ok(SparseMatrix::new(rows, cols))
    }
}

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn to_mod(v: i64, p: u64) -> u64 {
    v.rem_euclid(p as i64) as u64
}

/// Rank over `Z/p`. Columns are eliminated sparsest first.
pub fn rank_mod_p(m: &SparseMatrix, p: u64) -> usize {
    let mut order: Vec<usize> = (0..m.ncols()).collect();
    order.sort_by_key(|&c| m.cols[c].len());
    let mut pivots: Vec<Option<Vec<(usize, u64)>>> = vec![None; m.nrows()];
    let mut rank = 0;
    let mut scratch = Vec::new();
    for c in order {
        let mut v: Vec<(usize, u64)> = m.cols[c]
            .iter()
            .map(|&(r, x)| (r, to_mod(x, p)))
            .filter(|e| e.1 != 0)
            .collect();
        while let Some(&(lead, a)) = v.first() {
            match &pivots[lead] {
                Some(piv) => {
                    // v -= a * piv, piv has leading coefficient 1
                    scratch.clear();
                    let (mut i, mut j) = (0, 0);
                    while i < v.len() || j < piv.len() {
                        let take_v = j >= piv.len() || (i < v.len() && v[i].0 < piv[j].0);
                        let take_p = i >= v.len() || (j < piv.len() && piv[j].0 < v[i].0);
                        if take_v {
                            scratch.push(v[i]);
                            i += 1;
                        } else if take_p {
                            scratch.push((piv[j].0, p - mulmod(a, piv[j].1, p)));
                            j += 1;
                        } else {
                            let x = (v[i].1 + p - mulmod(a, piv[j].1, p)) % p;
                            if x != 0 {
                                scratch.push((v[i].0, x));
                            }
                            i += 1;
                            j += 1;
                        }
                    }
                    std::mem::swap(&mut v, &mut scratch);
                }
                None => {
                    let inv = powmod(a, p - 2, p);
                    for e in &mut v {
                        e.1 = mulmod(e.1, inv, p);
                    }
                    pivots[lead] = Some(v);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

type BigColumn = Vec<(usize, BigInt)>;

/// `b*v - a*u` on sorted sparse vectors.
fn combine(v: &BigColumn, b: &BigInt, u: &BigColumn, a: &BigInt) -> BigColumn {
    let mut out = Vec::with_capacity(v.len() + u.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < u.len() {
        if j >= u.len() || (i < v.len() && v[i].0 < u[j].0) {
            out.push((v[i].0, b * &v[i].1));
            i += 1;
        } else if i >= v.len() || u[j].0 < v[i].0 {
            out.push((u[j].0, -(a * &u[j].1)));
            j += 1;
        } else {
            let x = b * &v[i].1 - a * &u[j].1;
            if !x.is_zero() {
                out.push((v[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn content(parts: &[&BigColumn]) -> BigInt {
    let mut g = BigInt::zero();
    for part in parts {
        for (_, x) in part.iter() {
            g = g.gcd(x);
            if g.is_one() {
                return g;
            }
        }
    }
    g
}

fn divide(v: &mut BigColumn, g: &BigInt) {
    for e in v.iter_mut() {
        e.1 /= g;
    }
}

fn big_column(c: &Column) -> BigColumn {
    c.iter().map(|&(r, x)| (r, BigInt::from(x))).collect()
}

/// Fraction-free column elimination over the integers. Returns the rank and,
/// if `track` is set, one integral kernel vector per column that reduced to zero.
fn integer_elimination(m: &SparseMatrix, track: bool) -> (usize, Vec<BigColumn>) {
    let mut pivots: Vec<Option<(BigColumn, BigColumn)>> = vec![None; m.nrows()];
    let mut rank = 0;
    let mut kernel = Vec::new();
    for c in 0..m.ncols() {
        let mut v = big_column(&m.cols[c]);
        let mut combo: BigColumn = if track { vec![(c, BigInt::one())] } else { Vec::new() };
        loop {
            let Some((lead, a)) = v.first().cloned() else {
                if track {
                    kernel.push(combo);
                }
                break;
            };
            match &pivots[lead] {
                Some((u, ucombo)) => {
                    let b = u[0].1.clone();
                    let g = a.gcd(&b);
                    let (a, b) = (&a / &g, &b / &g);
                    v = combine(&v, &b, u, &a);
                    if track {
                        combo = combine(&combo, &b, ucombo, &a);
                    }
                    let g = content(&[&v, &combo]);
                    if !g.is_zero() && !g.is_one() {
                        divide(&mut v, &g);
                        divide(&mut combo, &g);
                    }
                }
                None => {
                    pivots[lead] = Some((v, combo));
                    rank += 1;
                    break;
                }
            }
        }
    }
    (rank, kernel)
}

/// Rank over the rationals by fraction-free integer elimination.
pub fn rank_fraction_free(m: &SparseMatrix) -> usize {
    integer_elimination(m, false).0
}

/// Rank over the rationals: two modular ranks, with an exact recount if they disagree.
pub fn matrix_rank_exact(m: &SparseMatrix) -> usize {
    let r0 = rank_mod_p(m, PRIMES[0]);
    let r1 = rank_mod_p(m, PRIMES[1]);
    if r0 == r1 {
        r0
    } else {
        rank_fraction_free(m)
    }
}

/// Integral basis of the rational kernel. Each vector has content 1 and a
/// positive first nonzero coefficient, and is listed sparse by column index.
pub fn kernel_basis(m: &SparseMatrix) -> Result<Vec<Column>, LinalgError> {
    let (_, raw) = integer_elimination(m, true);
    raw.into_iter()
        .map(|mut v| {
            v.sort_by_key(|e| e.0);
            let g = content(&[&v]);
            let sign = if v[0].1.is_negative() { -BigInt::one() } else { BigInt::one() };
            let g = g * sign;
            v.into_iter()
                .map(|(i, x)| (&x / &g).to_i64().map(|y| (i, y)).ok_or(LinalgError::Overflow))
                .collect()
        })
        .collect()
}

/// True iff `v` lies in the rational span of the columns of `m`.
pub fn in_column_span(m: &SparseMatrix, v: &Column) -> bool {
    let extended = m.hstack(&SparseMatrix::new(m.nrows(), vec![v.clone()]));
    matrix_rank_exact(&extended) == matrix_rank_exact(m)
}

/// Connected blocks of the row/column incidence: each entry is `(rows, cols)`, both sorted.
/// Zero columns and zero rows are omitted.
pub fn blocks(m: &SparseMatrix) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = m.nrows() + m.ncols();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (c, col) in m.cols.iter().enumerate() {
        for &(r, _) in col {
            let (a, b) = (find(&mut parent, r), find(&mut parent, m.nrows() + c));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for (c, col) in m.cols.iter().enumerate() {
        if col.is_empty() {
            continue;
        }
        let root = find(&mut parent, m.nrows() + c);
        groups.entry(root).or_default().1.push(c);
        for &(r, _) in col {
            groups.entry(root).or_default().0.push(r);
        }
    }
    let mut out: Vec<_> = groups
        .into_values()
        .map(|(mut r, c)| {
            r.sort_unstable();
            r.dedup();
            (r, c)
        })
        .collect();
    out.sort_by_key(|b| b.1[0]);
    out
}

/// Nonzero diagonal of the Smith normal form of a dense integer matrix.
pub fn smith_diagonal(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, x) in row.iter().enumerate().skip(t) {
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        let mut clean = true;
        let p = a[t][t].clone();
        for i in t + 1..rows {
            if a[i][t].is_zero() {
                continue;
            }
            let q = a[i][t].div_floor(&p);
            for j in t..cols {
                let x = &q * &a[t][j];
                a[i][j] -= x;
            }
            clean &= a[i][t].is_zero();
        }
        for j in t + 1..cols {
            if a[t][j].is_zero() {
                continue;
            }
            let q = a[t][j].div_floor(&p);
            for row in a.iter_mut().skip(t) {
                let x = &q * &row[t];
                row[j] -= x;
            }
            clean &= a[t][j].is_zero();
        }
        if !clean {
            continue;
        }
        // the pivot must divide everything left over
        let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &p).is_zero()));
        if let Some(i) = offender {
            for j in t..cols {
                let x = a[i][j].clone();
                a[t][j] += x;
            }
            continue;
        }
        diag.push(p.abs());
        t += 1;
    }
    diag
}

/// Invariant factors different from 1 of the cokernel of `m`, or `TooLarge`.
pub fn torsion_factors(m: &SparseMatrix) -> Result<Vec<BigInt>, LinalgError> {
    if m.nrows() > SNF_MAX_DIM || m.ncols() > SNF_MAX_DIM {
        return Err(LinalgError::TooLarge {
            rows: m.nrows(),
            cols: m.ncols(),
            cap: SNF_MAX_DIM,
        });
    }
    let mut nontrivial = Vec::new();
    for (rows, cols) in blocks(m) {
        let dense: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| BigInt::from(m.get(r, c))).collect())
            .collect();
        nontrivial.extend(smith_diagonal(dense).into_iter().filter(|d| !d.is_one()));
    }
    // recombine per-block factors into the canonical divisibility chain
    let n = nontrivial.len();
    let mut diag = vec![vec![BigInt::zero(); n]; n];
    for (i, d) in nontrivial.into_iter().enumerate() {
        diag[i][i] = d;
    }
    let mut out: Vec<BigInt> = smith_diagonal(diag).into_iter().filter(|d| !d.is_one()).collect();
    out.sort();
    Ok(out)
}
