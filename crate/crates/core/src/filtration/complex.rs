use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use crate::graph::{NodeId, Snapshot, TemporalGraph};

/// Dense integer ids for node labels. Ids follow label order, so sorting
/// simplices by id sequence is the same as sorting by label sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeIndex {
    labels: Vec<NodeId>,
    ids: HashMap<NodeId, u32>,
}

impl NodeIndex {
    pub fn new(labels: impl IntoIterator<Item = NodeId>) -> Self {
        let set: BTreeSet<NodeId> = labels.into_iter().collect();
        let labels: Vec<NodeId> = set.into_iter().collect();
        let ids = labels.iter().enumerate().map(|(i, l)| (l.clone(), i as u32)).collect();
        NodeIndex { labels, ids }
    }

    pub fn for_graph(tg: &TemporalGraph) -> Self {
        NodeIndex::new(tg.node_universe())
    }

    pub fn id(&self, label: &NodeId) -> Option<u32> {
        self.ids.get(label).copied()
    }

    pub fn label(&self, id: u32) -> &NodeId {
        &self.labels[id as usize]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// A simplex as its sorted vertex ids.
///
/// Ordered by dimension first, then lexicographically by vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Simplex(Vec<u32>);

impl Simplex {
    /// Sorts and deduplicates the vertices.
    pub fn new(mut vertices: Vec<u32>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Simplex(vertices)
    }

    pub(crate) fn from_sorted(vertices: Vec<u32>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex(vertices)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, in the order obtained by dropping vertex 0, 1, ...
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |skip| {
            Simplex(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Face-closed set of simplices of dimension at most `maxdim`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    simplices: BTreeSet<Simplex>,
    maxdim: usize,
}

impl SimplicialComplex {
    pub fn empty(maxdim: usize) -> Self {
        SimplicialComplex {
            simplices: BTreeSet::new(),
            maxdim,
        }
    }

    /// Closure of the given simplices under taking faces, truncated at `maxdim`.
    pub fn from_simplices(maxdim: usize, simplices: impl IntoIterator<Item = Simplex>) -> Self {
        let mut out = SimplicialComplex::empty(maxdim);
        let mut stack: Vec<Simplex> = simplices.into_iter().filter(|s| s.dim() <= maxdim).collect();
        while let Some(s) = stack.pop() {
            if out.simplices.contains(&s) {
                continue;
            }
            stack.extend(s.facets());
            out.simplices.insert(s);
        }
        out
    }

    /// Trusts the caller that the set is face-closed.
    pub(crate) fn from_closed_set(maxdim: usize, simplices: BTreeSet<Simplex>) -> Self {
        SimplicialComplex { simplices, maxdim }
    }

    pub fn maxdim(&self) -> usize {
        self.maxdim
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.simplices.contains(s)
    }

    /// Simplices in (dimension, lexicographic) order.
    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter()
    }

    pub fn simplices_of_dim(&self, k: usize) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().filter(move |s| s.dim() == k)
    }

    pub fn count_of_dim(&self, k: usize) -> usize {
        self.simplices_of_dim(k).count()
    }

    pub fn is_subcomplex_of(&self, other: &SimplicialComplex) -> bool {
        self.simplices.is_subset(&other.simplices)
    }

    pub fn is_face_closed(&self) -> bool {
        self.simplices
            .iter()
            .all(|s| s.facets().all(|f| self.simplices.contains(&f)))
    }

    /// Alternating count of simplices by dimension.
    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .map(|s| if s.dim() % 2 == 0 { 1 } else { -1 })
            .sum()
    }

    pub fn union(&self, other: &SimplicialComplex) -> SimplicialComplex {
        SimplicialComplex {
            simplices: self.simplices.union(&other.simplices).cloned().collect(),
            maxdim: self.maxdim.max(other.maxdim),
        }
    }

    /// Vertices and edges of the complex.
    pub fn one_skeleton(&self) -> (Vec<u32>, Vec<(u32, u32)>) {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for s in &self.simplices {
            match s.0.as_slice() {
                [v] => vertices.push(*v),
                [a, b] => edges.push((*a, *b)),
                _ => {}
            }
        }
        (vertices, edges)
    }
}

/// Undirected graph on vertex ids, each vertex and edge tagged with the first
/// filtration level at which it is present.
#[derive(Debug, Clone, Default)]
pub struct LevelGraph {
    vertices: Vec<(u32, usize)>,
    adjacency: HashMap<u32, Vec<(u32, usize)>>,
}

impl LevelGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, v: u32, level: usize) {
        self.vertices.push((v, level));
        self.adjacency.entry(v).or_default();
    }

    /// Both endpoints must already be vertices. The edge level is raised to
    /// the endpoint levels so that every cell stays a complex.
    pub fn add_edge(&mut self, a: u32, b: u32, level: usize) {
        debug_assert!(a != b);
        self.adjacency.get_mut(&a).expect("vertex added").push((b, level));
        self.adjacency.get_mut(&b).expect("vertex added").push((a, level));
    }

    fn finish(&mut self) -> HashMap<u32, usize> {
        self.vertices.sort_unstable();
        self.vertices.dedup_by_key(|v| v.0);
        let vlevel: HashMap<u32, usize> = self.vertices.iter().copied().collect();
        for (&v, nbrs) in self.adjacency.iter_mut() {
            nbrs.sort_unstable();
            nbrs.dedup_by_key(|n| n.0);
            for n in nbrs.iter_mut() {
                n.1 = n.1.max(vlevel[&v]).max(vlevel[&n.0]);
            }
        }
        vlevel
    }

    /// Every clique with at most `maxdim + 1` vertices together with its
    /// level: the maximum level over its vertices and edges.
    pub fn clique_filtration(mut self, maxdim: usize) -> FilteredComplex {
        let vlevel = self.finish();
        let mut out = Vec::new();
        let mut verts: Vec<u32> = vlevel.keys().copied().collect();
        verts.sort_unstable();
        let mut clique = Vec::with_capacity(maxdim + 1);
        for &v in &verts {
            let upper: Vec<(u32, usize)> = self.adjacency[&v].iter().copied().filter(|n| n.0 > v).collect();
            clique.clear();
            clique.push(v);
            self.extend_cliques(&mut clique, vlevel[&v], &upper, maxdim, &mut out);
        }
        FilteredComplex::new(maxdim, out)
    }

    fn extend_cliques(
        &self,
        clique: &mut Vec<u32>,
        level: usize,
        candidates: &[(u32, usize)],
        maxdim: usize,
        out: &mut Vec<(Simplex, usize)>,
    ) {
        out.push((Simplex::from_sorted(clique.clone()), level));
        if clique.len() > maxdim {
            return;
        }
        for (i, &(w, edge_level)) in candidates.iter().enumerate() {
            // candidates carry the max edge level from every clique vertex to w
            let next_level = level.max(edge_level);
            let nbrs = &self.adjacency[&w];
            let next: Vec<(u32, usize)> = candidates[i + 1..]
                .iter()
                .filter_map(|&(x, lx)| {
                    nbrs.binary_search_by_key(&x, |n| n.0)
                        .ok()
                        .map(|pos| (x, lx.max(nbrs[pos].1)))
                })
                .collect();
            clique.push(w);
            self.extend_cliques(clique, next_level, &next, maxdim, out);
            clique.pop();
        }
    }
}

/// Simplices with entry levels. The cell at level `j` holds every simplex
/// whose level is at most `j`, which is face-closed by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex {
    maxdim: usize,
    simplices: Vec<(Simplex, usize)>,
}

impl FilteredComplex {
    fn new(maxdim: usize, mut simplices: Vec<(Simplex, usize)>) -> Self {
        simplices.sort_unstable_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        FilteredComplex { maxdim, simplices }
    }

    pub fn maxdim(&self) -> usize {
        self.maxdim
    }

    /// Sorted by (level, dimension, vertices).
    pub fn simplices(&self) -> &[(Simplex, usize)] {
        &self.simplices
    }

    pub fn cell(&self, level: usize) -> SimplicialComplex {
        let set = self
            .simplices
            .iter()
            .take_while(|(_, l)| *l <= level)
            .map(|(s, _)| s.clone())
            .collect();
        SimplicialComplex::from_closed_set(self.maxdim, set)
    }
}

/// Clique (flag) complex of a graph on a shared vertex universe.
///
/// Labels of `g` missing from `index` are ignored.
pub fn clique_complex(g: &Snapshot, index: &NodeIndex, maxdim: usize) -> SimplicialComplex {
    let mut lg = LevelGraph::new();
    for n in g.nodes() {
        if let Some(id) = index.id(n) {
            lg.add_vertex(id, 0);
        }
    }
    for (e, _) in g.edges() {
        let (a, b) = e.endpoints();
        if let (Some(ia), Some(ib)) = (index.id(a), index.id(b)) {
            lg.add_edge(ia, ib, 0);
        }
    }
    lg.clique_filtration(maxdim).cell(0)
}

/// Clique complex of a graph given by vertex ids and edges.
pub fn clique_complex_of_edges(vertices: &[u32], edges: &[(u32, u32)], maxdim: usize) -> SimplicialComplex {
    let mut lg = LevelGraph::new();
    for &v in vertices {
        lg.add_vertex(v, 0);
    }
    for &(a, b) in edges {
        lg.add_edge(a, b, 0);
    }
    lg.clique_filtration(maxdim).cell(0)
}
