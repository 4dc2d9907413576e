//! Brute-force verifiers for zigzag persistence, built on dense GF(2)
//! linear algebra and sharing no code with the incremental decomposition.
//!
//! These are meant for desk-sized inputs: every homology group is handled
//! as an explicit quotient space and every limit/colimit as a dense system.

use std::collections::BTreeSet;

use crate::error::{Result, TmpError};
use crate::filtration::{Simplex, SimplicialComplex};

use super::{Interval, ZigzagComplexSequence, ZigzagDiagram};

/// Dense bit vector.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn zeros(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(64).max(1)],
        }
    }

    fn unit(len: usize, i: usize) -> Self {
        let mut b = Bits::zeros(len);
        b.flip(i);
        b
    }

    fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn xor(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    fn leading(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

/// Row-echelon basis where each row remembers which inputs it combines.
struct Span {
    rows: Vec<(Bits, Bits)>,
    tag_len: usize,
}

impl Span {
    fn new(tag_len: usize) -> Self {
        Span { rows: Vec::new(), tag_len }
    }

    /// Reduces `v`, returning the residue and the tag of the rows used.
    fn reduce(&self, mut v: Bits) -> (Bits, Bits) {
        let mut tag = Bits::zeros(self.tag_len);
        for (row, row_tag) in &self.rows {
            let lead = row.leading().expect("rows are nonzero");
            if v.get(lead) {
                v.xor(row);
                tag.xor(row_tag);
            }
        }
        (v, tag)
    }

    /// Adds `v` tagged `tag`; returns the combination of earlier tags that
    /// produced `v` when it is dependent.
    fn insert(&mut self, v: Bits, tag: Bits) -> Option<Bits> {
        let (residue, used) = self.reduce(v);
        let mut full_tag = tag;
        full_tag.xor(&used);
        if residue.is_zero() {
            return Some(full_tag);
        }
        let lead = residue.leading().unwrap();
        // keep rows fully reduced on their leading column
        for (row, row_tag) in self.rows.iter_mut() {
            if row.get(lead) {
                row.xor(&residue);
                row_tag.xor(&full_tag);
            }
        }
        self.rows.push((residue, full_tag));
        None
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

fn rank_of(vectors: impl IntoIterator<Item = Bits>) -> usize {
    let mut span = Span::new(1);
    for v in vectors {
        span.insert(v, Bits::zeros(1));
    }
    span.rank()
}

/// Basis of `ker(A)` for the linear map sending unit vector `i` to `images[i]`.
fn kernel(images: &[Bits]) -> Vec<Bits> {
    let n = images.len();
    let mut span = Span::new(n);
    images
        .iter()
        .enumerate()
        .filter_map(|(i, img)| span.insert(img.clone(), Bits::unit(n, i)))
        .collect()
}

/// Coordinates of simplices of a fixed dimension in a shared chain space.
struct ChainSpace {
    simplices: Vec<Simplex>,
}

impl ChainSpace {
    fn new<'a>(complexes: impl IntoIterator<Item = &'a SimplicialComplex>, k: usize) -> Self {
        let set: BTreeSet<&Simplex> = complexes
            .into_iter()
            .flat_map(|c| c.simplices_of_dim(k))
            .collect();
        ChainSpace {
            simplices: set.into_iter().cloned().collect(),
        }
    }

    fn len(&self) -> usize {
        self.simplices.len()
    }

    fn position(&self, s: &Simplex) -> usize {
        self.simplices.binary_search(s).expect("simplex in chain space")
    }

    fn boundary(&self, s: &Simplex, faces: &ChainSpace) -> Bits {
        let mut b = Bits::zeros(faces.len());
        for f in s.facets() {
            b.flip(faces.position(&f));
        }
        b
    }
}

/// `H_k` of one complex as an explicit quotient `Z_k / B_k` inside a shared
/// chain space.
struct Quotient {
    /// Echelon basis of B_k extended by the representatives.
    span: Span,
    reps: Vec<Bits>,
}

impl Quotient {
    fn new(c: &SimplicialComplex, k: usize, below: &ChainSpace, here: &ChainSpace, above: &ChainSpace) -> Self {
        let cells: Vec<&Simplex> = c.simplices_of_dim(k).collect();
        let cycles: Vec<Bits> = if k == 0 {
            cells.iter().map(|s| Bits::unit(here.len(), here.position(s))).collect()
        } else {
            let images: Vec<Bits> = cells.iter().map(|s| here.boundary(s, below)).collect();
            kernel(&images)
                .into_iter()
                .map(|combo| {
                    let mut z = Bits::zeros(here.len());
                    for (i, s) in cells.iter().enumerate() {
                        if combo.get(i) {
                            z.flip(here.position(s));
                        }
                    }
                    z
                })
                .collect()
        };
        // boundaries carry empty tags; representative j is tagged with bit j
        let tag_len = cycles.len();
        let mut span = Span::new(tag_len);
        for s in c.simplices_of_dim(k + 1) {
            span.insert(above.boundary(s, here), Bits::zeros(tag_len));
        }
        let mut reps = Vec::new();
        for z in cycles {
            if span.insert(z.clone(), Bits::unit(tag_len, reps.len())).is_none() {
                reps.push(z);
            }
        }
        Quotient { span, reps }
    }

    fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Coordinates of a cycle's class in the representative basis.
    fn coordinates(&self, z: &Bits) -> Result<Bits> {
        let (residue, tag) = self.span.reduce(z.clone());
        if !residue.is_zero() {
            return Err(TmpError::Consistency("chain is not a cycle of the target complex".into()));
        }
        Ok(tag)
    }
}

/// `dim H_k(c; GF(2))` from dense boundary-matrix ranks.
pub fn homology_dimension_oracle(c: &SimplicialComplex, k: usize) -> usize {
    let below = if k == 0 { ChainSpace { simplices: Vec::new() } } else { ChainSpace::new([c], k - 1) };
    let here = ChainSpace::new([c], k);
    let above = ChainSpace::new([c], k + 1);
    let rank_k = if k == 0 {
        0
    } else {
        rank_of(here.simplices.iter().map(|s| here.boundary(s, &below)))
    };
    let rank_k1 = rank_of(above.simplices.iter().map(|s| above.boundary(s, &here)));
    here.len() - rank_k - rank_k1
}

/// The homology zigzag module: a vector space per position and a matrix per
/// arrow (as images of basis vectors).
struct Module {
    dims: Vec<usize>,
    /// `arrows[s-1]` joins positions `s` and `s+1`; forward when `s` is odd.
    arrows: Vec<Vec<Bits>>,
}

impl Module {
    fn new(seq: &ZigzagComplexSequence, k: usize) -> Result<Self> {
        let all = seq.complexes();
        let below = if k == 0 { ChainSpace { simplices: Vec::new() } } else { ChainSpace::new(all, k - 1) };
        let here = ChainSpace::new(all, k);
        let above = ChainSpace::new(all, k + 1);
        let spaces: Vec<Quotient> = all.iter().map(|c| Quotient::new(c, k, &below, &here, &above)).collect();
        let mut arrows = Vec::new();
        for s in 0..spaces.len().saturating_sub(1) {
            let (src, dst) = if s % 2 == 0 { (&spaces[s], &spaces[s + 1]) } else { (&spaces[s + 1], &spaces[s]) };
            arrows.push(src.reps.iter().map(|z| dst.coordinates(z)).collect::<Result<Vec<_>>>()?);
        }
        Ok(Module {
            dims: spaces.iter().map(Quotient::dim).collect(),
            arrows,
        })
    }

    fn is_forward(s: usize) -> bool {
        s % 2 == 1
    }

    /// Rank of `lim -> colim` on positions `i..=j` (1-based).
    fn generalized_rank(&self, i: usize, j: usize) -> usize {
        let offsets: Vec<usize> = (i..=j)
            .scan(0, |acc, s| {
                let o = *acc;
                *acc += self.dims[s - 1];
                Some(o)
            })
            .collect();
        let total: usize = (i..=j).map(|s| self.dims[s - 1]).sum();
        let embed = |s: usize, v: &Bits, out: &mut Bits| {
            for a in 0..self.dims[s - 1] {
                if v.get(a) {
                    out.flip(offsets[s - i] + a);
                }
            }
        };

        // relations x_src ~ M x_src, one per arrow and source basis vector
        let mut relations = Vec::new();
        // constraint images for the limit, one row block per arrow
        let constraint_len: usize = (i..j)
            .map(|s| if Module::is_forward(s) { self.dims[s] } else { self.dims[s - 1] })
            .sum();
        let mut constraint_cols = vec![Bits::zeros(constraint_len); total];
        let mut row_offset = 0;
        for s in i..j {
            let matrix = &self.arrows[s - 1];
            let (src, dst) = if Module::is_forward(s) { (s, s + 1) } else { (s + 1, s) };
            for (a, image) in matrix.iter().enumerate() {
                let mut rel = Bits::zeros(total);
                rel.flip(offsets[src - i] + a);
                embed(dst, image, &mut rel);
                relations.push(rel);

                // x_src[a] contributes M e_a to the constraint block
                let col = &mut constraint_cols[offsets[src - i] + a];
                for b in 0..self.dims[dst - 1] {
                    if image.get(b) {
                        col.flip(row_offset + b);
                    }
                }
            }
            // and x_dst contributes itself
            for b in 0..self.dims[dst - 1] {
                constraint_cols[offsets[dst - i] + b].flip(row_offset + b);
            }
            row_offset += self.dims[dst - 1];
        }

        let limit = kernel(&constraint_cols);
        let base = rank_of(relations.iter().cloned());
        let images = limit.iter().map(|x| {
            // project the section to position i, then include in the direct sum
            let mut v = Bits::zeros(total);
            for a in 0..self.dims[i - 1] {
                if x.get(offsets[0] + a) {
                    v.flip(offsets[0] + a);
                }
            }
            v
        });
        rank_of(relations.iter().cloned().chain(images)) - base
    }
}

/// Number of interval summands whose support contains `[i, j]`, computed as
/// the rank of the canonical map from the limit to the colimit of the
/// module restricted to `[i, j]`.
pub fn generalized_rank_oracle(seq: &ZigzagComplexSequence, k: usize, i: usize, j: usize) -> Result<usize> {
    if i == 0 || i > j || j > seq.len() {
        return Err(TmpError::contract(format!("bad interval [{i}, {j}]")));
    }
    Ok(Module::new(seq, k)?.generalized_rank(i, j))
}

/// Interval decomposition by inclusion–exclusion over generalized ranks.
#[allow(clippy::needless_range_loop)]
pub fn interval_multiplicity_oracle(seq: &ZigzagComplexSequence, k: usize) -> Result<ZigzagDiagram> {
    let n = seq.len();
    let module = Module::new(seq, k)?;
    let mut rk = vec![vec![0i64; n + 2]; n + 2];
    for i in 1..=n {
        for j in i..=n {
            rk[i][j] = module.generalized_rank(i, j) as i64;
        }
    }
    let mut intervals = Vec::new();
    for b in 1..=n {
        for d in b..=n {
            let m = rk[b][d] - rk[b - 1][d] - rk[b][d + 1] + rk[b - 1][d + 1];
            if m < 0 {
                return Err(TmpError::Consistency(format!("negative multiplicity {m} at [{b}, {d}]")));
            }
            for _ in 0..m {
                intervals.push(Interval {
                    birth: b,
                    death: d,
                    right_open: d == n,
                });
            }
        }
    }
    let diagram = ZigzagDiagram::new(k, n, intervals)?;
    for s in 1..=n {
        if diagram.rank_at(s) != module.dims[s - 1] {
            return Err(TmpError::Consistency(format!("pointwise dimension mismatch at {s}")));
        }
    }
    Ok(diagram)
}
