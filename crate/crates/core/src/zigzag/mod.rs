//! Zigzag persistence along the time axis.
//!
//! A sequence of complexes `K_1, ..., K_T` is interleaved with unions,
//!
//! ```text
//! K_1 -> U_1 <- K_2 -> U_2 <- ... <- K_T
//! ```
//!
//! and positions are encoded as `s = 1..=2T-1`: odd `s` is `K_{(s+1)/2}`,
//! even `s` is the union between two snapshots (time `s/2 + 1/2`).
//!
//! [`zigzag_persistence`] decomposes the homology module left to right. It
//! keeps a basis of the current homology group whose vectors generate the
//! interval summands still alive. Each arrow either kills summands (a forward
//! map with kernel, or classes outside the image of a backward map) or starts
//! new ones (cokernel of a forward map, kernel of a backward map). Which
//! summand absorbs a dependency is fixed by the order in which one interval
//! generator may be added to another without breaking the decomposition:
//! births through a backward arrow, latest first, then births at position 1
//! or through a forward arrow, earliest first. The dependent vector is always
//! charged to the greatest summand in this order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TmpError};
use crate::filtration::{clique_complex_of_edges, SimplicialComplex};
use crate::homology::{add_assign, HomologyBasis, SimplexTable};

pub mod oracle;

/// Position in the interleaved sequence, `1..=2T-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZigzagIndex(usize);

impl ZigzagIndex {
    pub fn new(encoded: usize, times: usize) -> Result<Self> {
        if encoded == 0 || encoded > 2 * times - 1 {
            return Err(TmpError::contract(format!(
                "zigzag index {encoded} outside 1..={}",
                2 * times - 1
            )));
        }
        Ok(ZigzagIndex(encoded))
    }

    /// Inverse of [`ZigzagIndex::time`]; `t` must be a positive multiple of 1/2.
    pub fn from_time(t: f64) -> Result<Self> {
        let s = 2.0 * t - 1.0;
        if !(s >= 1.0 && s.fract() == 0.0) {
            return Err(TmpError::validation(format!("{t} is not a zigzag time")));
        }
        Ok(ZigzagIndex(s as usize))
    }

    pub fn encoded(self) -> usize {
        self.0
    }

    /// `1, 1.5, 2, ...`
    pub fn time(self) -> f64 {
        (self.0 + 1) as f64 / 2.0
    }

    pub fn is_union(self) -> bool {
        self.0.is_multiple_of(2)
    }
}

impl fmt::Display for ZigzagIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.time())
    }
}

/// How the complex between two snapshots is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnionMode {
    /// Clique complex of the union of the two 1-skeleta.
    #[default]
    CliqueOfUnionGraph,
    /// Set union of the two complexes' simplices.
    SimplexUnion,
}

/// `K_1 -> U_1 <- K_2 -> ... <- K_T` with `U_t ⊇ K_t ∪ K_{t+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZigzagComplexSequence {
    complexes: Vec<SimplicialComplex>,
}

impl ZigzagComplexSequence {
    /// Interleaves snapshot complexes with unions. With the default mode the
    /// inputs are expected to be clique complexes.
    pub fn build(snapshots: Vec<SimplicialComplex>, mode: UnionMode) -> Result<Self> {
        let Some(first) = snapshots.first() else {
            return Err(TmpError::validation("zigzag sequence needs at least one complex"));
        };
        let maxdim = first.maxdim();
        if snapshots.iter().any(|c| c.maxdim() != maxdim) {
            return Err(TmpError::contract("complexes disagree on maxdim"));
        }
        let mut complexes = Vec::with_capacity(2 * snapshots.len() - 1);
        for (i, k) in snapshots.iter().enumerate() {
            if i > 0 {
                let prev = &snapshots[i - 1];
                let u = match mode {
                    UnionMode::SimplexUnion => prev.union(k),
                    UnionMode::CliqueOfUnionGraph => {
                        let (mut v, mut e) = prev.one_skeleton();
                        let (v2, e2) = k.one_skeleton();
                        v.extend(v2);
                        e.extend(e2);
                        v.sort_unstable();
                        v.dedup();
                        e.sort_unstable();
                        e.dedup();
                        clique_complex_of_edges(&v, &e, maxdim)
                    }
                };
                complexes.push(u);
            }
            complexes.push(k.clone());
        }
        Ok(ZigzagComplexSequence { complexes })
    }

    /// Takes an already interleaved sequence and checks the inclusions.
    pub fn from_interleaved(complexes: Vec<SimplicialComplex>) -> Result<Self> {
        if complexes.len().is_multiple_of(2) {
            return Err(TmpError::contract("interleaved sequence must have odd length"));
        }
        for s in (1..complexes.len()).step_by(2) {
            if !complexes[s - 1].is_subcomplex_of(&complexes[s]) || !complexes[s + 1].is_subcomplex_of(&complexes[s]) {
                return Err(TmpError::contract(format!("position {} does not contain its neighbours", s + 1)));
            }
        }
        Ok(ZigzagComplexSequence { complexes })
    }

    /// Number of snapshots `T`.
    pub fn times(&self) -> usize {
        self.complexes.len().div_ceil(2)
    }

    /// Number of positions `2T - 1`.
    pub fn len(&self) -> usize {
        self.complexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.complexes.is_empty()
    }

    pub fn maxdim(&self) -> usize {
        self.complexes[0].maxdim()
    }

    /// Complex at encoded position `s` (1-based).
    pub fn at(&self, s: usize) -> &SimplicialComplex {
        &self.complexes[s - 1]
    }

    pub fn complexes(&self) -> &[SimplicialComplex] {
        &self.complexes
    }

    pub fn reversed(&self) -> Self {
        ZigzagComplexSequence {
            complexes: self.complexes.iter().rev().cloned().collect(),
        }
    }
}

/// Closed interval `[birth, death]` of encoded positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub birth: usize,
    pub death: usize,
    /// Alive at the last position; the class never dies inside the window.
    pub right_open: bool,
}

impl Interval {
    pub fn contains(&self, s: usize) -> bool {
        self.birth <= s && s <= self.death
    }

    pub fn birth_time(&self) -> f64 {
        ZigzagIndex(self.birth).time()
    }

    pub fn death_time(&self) -> f64 {
        ZigzagIndex(self.death).time()
    }
}

/// Intervals of one homology dimension over positions `1..=length`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigzagDiagram {
    dim: usize,
    length: usize,
    intervals: Vec<Interval>,
}

impl ZigzagDiagram {
    pub fn new(dim: usize, length: usize, mut intervals: Vec<Interval>) -> Result<Self> {
        if length.is_multiple_of(2) {
            return Err(TmpError::contract("diagram length must be 2T-1"));
        }
        for iv in &intervals {
            if iv.birth == 0 || iv.birth > iv.death || iv.death > length {
                return Err(TmpError::contract(format!(
                    "invalid interval [{}, {}] on 1..={length}",
                    iv.birth, iv.death
                )));
            }
            if iv.right_open != (iv.death == length) {
                return Err(TmpError::contract("right_open flag must mark intervals ending at the last position"));
            }
        }
        intervals.sort_unstable();
        Ok(ZigzagDiagram { dim, length, intervals })
    }

    pub fn empty(dim: usize, times: usize) -> Self {
        ZigzagDiagram {
            dim,
            length: 2 * times - 1,
            intervals: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of positions `2T - 1`.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Number of snapshots `T`.
    pub fn times(&self) -> usize {
        self.length.div_ceil(2)
    }

    /// Sorted by (birth, death).
    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Number of intervals containing position `s`.
    pub fn rank_at(&self, s: usize) -> usize {
        self.intervals.iter().filter(|iv| iv.contains(s)).count()
    }

    /// `(birth, death)` on the time axis `1, 1.5, ..., T`.
    pub fn time_pairs(&self) -> Vec<(f64, f64)> {
        self.intervals.iter().map(|iv| (iv.birth_time(), iv.death_time())).collect()
    }

    /// Mirror image under time reversal: `[b, d] -> [n+1-d, n+1-b]`.
    pub fn reversed(&self) -> Self {
        let n = self.length;
        let intervals = self
            .intervals
            .iter()
            .map(|iv| Interval {
                birth: n + 1 - iv.death,
                death: n + 1 - iv.birth,
                right_open: iv.birth == 1,
            })
            .collect();
        ZigzagDiagram::new(self.dim, n, intervals).expect("mirrored intervals stay valid")
    }
}

struct Bar {
    birth: usize,
    cycle: Vec<usize>,
}

/// Births through a backward arrow (odd positions after the first) sort
/// below everything else, latest first; the rest sort by position.
fn absorb_order(birth: usize) -> (u8, isize) {
    if birth % 2 == 1 && birth > 1 {
        (0, -(birth as isize))
    } else {
        (1, birth as isize)
    }
}

/// Interval decomposition of `H_k` along the sequence, over GF(2).
pub fn zigzag_persistence(seq: &ZigzagComplexSequence, k: usize) -> Result<ZigzagDiagram> {
    if k >= seq.maxdim() {
        return Err(TmpError::contract(format!(
            "homology dimension {k} needs maxdim > {k}, sequence has {}",
            seq.maxdim()
        )));
    }
    let n = seq.len();
    let table = SimplexTable::new(seq.complexes());
    let basis_at = |s: usize| HomologyBasis::compute(&table, &table.ids_of(seq.at(s)), k);

    let mut finished: Vec<Interval> = Vec::new();
    let mut current = basis_at(1);
    let mut alive: Vec<Bar> = current
        .reps()
        .iter()
        .map(|z| Bar {
            birth: 1,
            cycle: z.clone(),
        })
        .collect();

    for s in 1..n {
        let next = basis_at(s + 1);
        alive.sort_by_key(|b| absorb_order(b.birth));
        if s % 2 == 1 {
            // forward: H(K) -> H(U)
            let mut echelon: std::collections::HashMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
            let mut survivors = Vec::with_capacity(alive.len());
            for mut bar in alive {
                let mut c = next.coords(&bar.cycle);
                while let Some(&low) = c.last() {
                    match echelon.get(&low) {
                        Some((coords, cycle)) => {
                            add_assign(&mut c, coords);
                            add_assign(&mut bar.cycle, cycle);
                        }
                        None => break,
                    }
                }
                match c.last() {
                    None => finished.push(Interval {
                        birth: bar.birth,
                        death: s,
                        right_open: false,
                    }),
                    Some(&low) => {
                        echelon.insert(low, (c, bar.cycle.clone()));
                        survivors.push(bar);
                    }
                }
            }
            for (i, rep) in next.reps().iter().enumerate() {
                let mut c = vec![i];
                while let Some(&low) = c.last() {
                    match echelon.get(&low) {
                        Some((coords, _)) => add_assign(&mut c, coords),
                        None => break,
                    }
                }
                if let Some(&low) = c.last() {
                    echelon.insert(low, (c, Vec::new()));
                    survivors.push(Bar {
                        birth: s + 1,
                        cycle: rep.clone(),
                    });
                }
            }
            alive = survivors;
        } else {
            // backward: H(K) at s+1 maps into H(U) at s
            let mut in_alive: std::collections::HashMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
            for (r, bar) in alive.iter().enumerate() {
                let mut c = current.coords(&bar.cycle);
                let mut combo = vec![r];
                while let Some(&low) = c.last() {
                    match in_alive.get(&low) {
                        Some((coords, other)) => {
                            add_assign(&mut c, coords);
                            add_assign(&mut combo, other);
                        }
                        None => break,
                    }
                }
                let low = *c.last().ok_or_else(|| {
                    TmpError::Consistency(format!("alive classes dependent at position {s}"))
                })?;
                in_alive.insert(low, (c, combo));
            }

            // pivot (max rank in absorb order) -> (combination of alive ranks, preimage cycle)
            let mut image: std::collections::HashMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
            let mut born = Vec::new();
            for rep in next.reps() {
                let mut c = current.coords(rep);
                let mut x = Vec::new();
                while let Some(&low) = c.last() {
                    let (coords, combo) = in_alive
                        .get(&low)
                        .ok_or_else(|| TmpError::Consistency(format!("alive classes do not span at position {s}")))?;
                    add_assign(&mut c, coords);
                    add_assign(&mut x, combo);
                }
                let mut u = rep.clone();
                while let Some(&p) = x.last() {
                    match image.get(&p) {
                        Some((other_x, other_u)) => {
                            add_assign(&mut x, other_x);
                            add_assign(&mut u, other_u);
                        }
                        None => break,
                    }
                }
                match x.last() {
                    None => born.push(Bar { birth: s + 1, cycle: u }),
                    Some(&p) => {
                        image.insert(p, (x, u));
                    }
                }
            }

            let mut survivors = Vec::with_capacity(next.rank());
            for (r, bar) in alive.into_iter().enumerate() {
                match image.remove(&r) {
                    Some((_, u)) => survivors.push(Bar {
                        birth: bar.birth,
                        cycle: u,
                    }),
                    None => finished.push(Interval {
                        birth: bar.birth,
                        death: s,
                        right_open: false,
                    }),
                }
            }
            survivors.extend(born);
            alive = survivors;
        }
        if alive.len() != next.rank() {
            return Err(TmpError::Consistency(format!(
                "tracked {} classes at position {} but rank is {}",
                alive.len(),
                s + 1,
                next.rank()
            )));
        }
        current = next;
    }

    finished.extend(alive.into_iter().map(|bar| Interval {
        birth: bar.birth,
        death: n,
        right_open: true,
    }));
    ZigzagDiagram::new(k, n, finished)
}

/// Diagrams for dimensions `0..maxdim` of one sequence.
pub fn zigzag_diagrams(seq: &ZigzagComplexSequence, dims: &[usize]) -> Result<Vec<ZigzagDiagram>> {
    dims.iter().map(|&k| zigzag_persistence(seq, k)).collect()
}
