//! Sparse GF(2) column reduction: Betti numbers, level-wise Betti curves and
//! homology bases with coordinates.
//!
//! Chains are sorted lists of simplex ids; addition is symmetric difference.

use std::collections::{BTreeSet, HashMap};

use crate::filtration::{FilteredComplex, Simplex, SimplicialComplex};

/// `a += b` over GF(2) for sorted index lists.
pub(crate) fn add_assign(a: &mut Vec<usize>, b: &[usize]) {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    *a = out;
}

/// Simplices of several complexes under one id space, ids in
/// (dimension, lexicographic) order.
#[derive(Debug, Clone)]
pub(crate) struct SimplexTable {
    simplices: Vec<Simplex>,
    ids: HashMap<Simplex, usize>,
    boundaries: Vec<Vec<usize>>,
}

impl SimplexTable {
    pub(crate) fn new<'a>(complexes: impl IntoIterator<Item = &'a SimplicialComplex>) -> Self {
        let all: BTreeSet<&Simplex> = complexes.into_iter().flat_map(|c| c.iter()).collect();
        let simplices: Vec<Simplex> = all.into_iter().cloned().collect();
        let ids: HashMap<Simplex, usize> = simplices.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let boundaries = simplices
            .iter()
            .map(|s| {
                let mut b: Vec<usize> = s.facets().map(|f| ids[&f]).collect();
                b.sort_unstable();
                b
            })
            .collect();
        SimplexTable {
            simplices,
            ids,
            boundaries,
        }
    }

    pub(crate) fn dim(&self, id: usize) -> usize {
        self.simplices[id].dim()
    }

    /// Sorted ids of a complex's simplices.
    pub(crate) fn ids_of(&self, c: &SimplicialComplex) -> Vec<usize> {
        let mut v: Vec<usize> = c.iter().map(|s| self.ids[s]).collect();
        v.sort_unstable();
        v
    }
}

/// Homology basis of one complex in dimension `k`, with the reduction table
/// needed to write any `k`-cycle in that basis.
#[derive(Debug, Clone)]
pub(crate) struct HomologyBasis {
    reps: Vec<Vec<usize>>,
    // low -> (chain, coordinates); boundaries carry empty coordinates
    table: HashMap<usize, (Vec<usize>, Vec<usize>)>,
}

impl HomologyBasis {
    /// `present` holds the sorted ids of a face-closed subset of `table`.
    pub(crate) fn compute(table: &SimplexTable, present: &[usize], k: usize) -> Self {
        let mut echelon: HashMap<usize, (Vec<usize>, Vec<usize>)> = HashMap::new();

        for &tau in present.iter().filter(|&&id| table.dim(id) == k + 1) {
            let mut col = table.boundaries[tau].clone();
            while let Some(&low) = col.last() {
                match echelon.get(&low) {
                    Some((other, _)) => add_assign(&mut col, other),
                    None => {
                        echelon.insert(low, (col, Vec::new()));
                        break;
                    }
                }
            }
        }

        // cycles of dimension k via reduction of ∂_k with the V matrix tracked
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut pivots: HashMap<usize, (Vec<usize>, Vec<usize>)> = HashMap::new();
        for &sigma in present.iter().filter(|&&id| table.dim(id) == k) {
            let mut col = if k == 0 { Vec::new() } else { table.boundaries[sigma].clone() };
            let mut v = vec![sigma];
            loop {
                let Some(&low) = col.last() else {
                    cycles.push(v);
                    break;
                };
                match pivots.get(&low) {
                    Some((other, other_v)) => {
                        add_assign(&mut col, other);
                        add_assign(&mut v, other_v);
                    }
                    None => {
                        pivots.insert(low, (col, v));
                        break;
                    }
                }
            }
        }

        let mut reps = Vec::new();
        for mut z in cycles {
            while let Some(&low) = z.last() {
                match echelon.get(&low) {
                    Some((other, _)) => add_assign(&mut z, other),
                    None => break,
                }
            }
            if let Some(&low) = z.last() {
                let idx = reps.len();
                reps.push(z.clone());
                echelon.insert(low, (z, vec![idx]));
            }
        }
        HomologyBasis { reps, table: echelon }
    }

    pub(crate) fn rank(&self) -> usize {
        self.reps.len()
    }

    pub(crate) fn reps(&self) -> &[Vec<usize>] {
        &self.reps
    }

    /// Coordinates of the class of cycle `z`, as the sorted set of basis
    /// indices with coefficient 1.
    ///
    /// # Panics
    /// If `z` is not a cycle of this complex.
    pub(crate) fn coords(&self, z: &[usize]) -> Vec<usize> {
        let mut z = z.to_vec();
        let mut coords = Vec::new();
        while let Some(&low) = z.last() {
            let (chain, c) = self.table.get(&low).expect("chain is not a cycle of this complex");
            add_assign(&mut z, chain);
            add_assign(&mut coords, c);
        }
        coords
    }
}

/// Betti numbers `β_0..=β_maxdim` over GF(2).
pub fn betti_numbers(c: &SimplicialComplex) -> Vec<usize> {
    let table = SimplexTable::new([c]);
    let maxdim = c.maxdim();
    let mut counts = vec![0usize; maxdim + 2];
    let mut ranks = vec![0usize; maxdim + 2];
    let mut pivots: HashMap<usize, Vec<usize>> = HashMap::new();
    for id in 0..table.simplices.len() {
        let d = table.dim(id);
        counts[d] += 1;
        if d == 0 {
            continue;
        }
        let mut col = table.boundaries[id].clone();
        while let Some(&low) = col.last() {
            match pivots.get(&low) {
                Some(other) => add_assign(&mut col, other),
                None => {
                    pivots.insert(low, col);
                    ranks[d] += 1;
                    break;
                }
            }
        }
    }
    (0..=maxdim).map(|k| counts[k] - ranks[k] - ranks[k + 1]).collect()
}

/// Betti numbers of every cell of a filtered complex from a single
/// persistence reduction. Returns `curves[k][j - 1] = β_k(cell(j))` for
/// `k < maxdim` and `j = 1..=levels`.
pub fn level_betti_curves(fc: &FilteredComplex, levels: usize) -> Vec<Vec<usize>> {
    let maxdim = fc.maxdim();
    let order = fc.simplices();
    let ids: HashMap<&Simplex, usize> = order.iter().enumerate().map(|(i, (s, _))| (s, i)).collect();
    // difference arrays over levels
    let mut diff = vec![vec![0i64; levels + 2]; maxdim];
    let mut pivots: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut paired = vec![false; order.len()];
    for (i, (s, level)) in order.iter().enumerate() {
        if *level > levels {
            break;
        }
        if s.dim() == 0 {
            continue;
        }
        let mut col: Vec<usize> = s.facets().map(|f| ids[&f]).collect();
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match pivots.get(&low) {
                Some(other) => add_assign(&mut col, other),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            paired[low] = true;
            paired[i] = true;
            let k = order[low].0.dim();
            let (birth, death) = (order[low].1, *level);
            if k < maxdim && birth < death {
                diff[k][birth] += 1;
                diff[k][death] -= 1;
            }
            pivots.insert(low, col);
        }
    }
    for (i, (s, level)) in order.iter().enumerate() {
        if !paired[i] && *level <= levels && s.dim() < maxdim {
            diff[s.dim()][*level] += 1;
        }
    }
    diff.into_iter()
        .map(|d| {
            let mut acc = 0i64;
            (1..=levels)
                .map(|j| {
                    acc += d[j];
                    acc as usize
                })
                .collect()
        })
        .collect()
}
