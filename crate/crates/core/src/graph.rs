//! Partially directed graphs and the structural queries shared by every other module.
//!
//! One representation covers skeletons, DAGs, essential graphs and the
//! intermediate states produced while propagating orientations. Every unordered
//! vertex pair is absent, undirected, or directed. Vertex ids are dense and
//! 0-based; iteration is always in ascending id order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VertexId {
    fn from(v: usize) -> Self {
        VertexId(v as u32)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// State of one unordered pair.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PairState {
    Absent,
    Undirected,
    Directed { tail: VertexId, head: VertexId },
}

/// Mark stored for an ordered pair `(u, v)`; `Out` means `u -> v`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
#[repr(u8)]
pub(crate) enum Mark {
    None = 0,
    Undirected = 1,
    Out = 2,
    In = 3,
}

/// Mixed graph with a dense pair-state lookup and sorted neighbor lists.
///
/// Graphs are immutable through the public API; edits go through
/// [`PdagBuilder`].
#[derive(Clone, PartialEq, Eq)]
pub struct Pdag {
    n: usize,
    marks: Vec<Mark>,
    adj: Arc<Vec<Vec<u32>>>,
    names: Option<Arc<Vec<String>>>,
}

impl fmt::Debug for Pdag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pdag(n={}", self.n)?;
        for (u, v) in self.directed_edges() {
            write!(f, ", {u}>{v}")?;
        }
        for (u, v) in self.undirected_edges() {
            write!(f, ", {u}-{v}")?;
        }
        write!(f, ")")
    }
}

impl Pdag {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Pdag {
            n,
            marks: vec![Mark::None; n * n],
            adj: Arc::new(vec![Vec::new(); n]),
            names: None,
        }
    }

    pub fn builder(n: usize) -> PdagBuilder {
        PdagBuilder { g: Pdag::empty(n) }
    }

    /// Copy-and-edit builder seeded with this graph.
    pub fn to_builder(&self) -> PdagBuilder {
        PdagBuilder { g: self.clone() }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.n).map(VertexId::from)
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref().map(Vec::as_slice)
    }

    /// Name of `v` if a name table is attached, else its id.
    pub fn label(&self, v: usize) -> String {
        match &self.names {
            Some(names) => names[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v.index() < self.n {
            Ok(())
        } else {
            Err(Error::InvalidVertex {
                id: v.index(),
                n: self.n,
            })
        }
    }

    #[inline]
    pub(crate) fn mark(&self, u: usize, v: usize) -> Mark {
        self.marks[u * self.n + v]
    }

    pub fn pair(&self, u: VertexId, v: VertexId) -> PairState {
        match self.mark(u.index(), v.index()) {
            Mark::None => PairState::Absent,
            Mark::Undirected => PairState::Undirected,
            Mark::Out => PairState::Directed { tail: u, head: v },
            Mark::In => PairState::Directed { tail: v, head: u },
        }
    }

    #[inline]
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.mark(u, v) != Mark::None
    }

    #[inline]
    pub fn is_undirected(&self, u: usize, v: usize) -> bool {
        self.mark(u, v) == Mark::Undirected
    }

    /// `true` iff `u -> v`.
    #[inline]
    pub fn has_arrow(&self, u: usize, v: usize) -> bool {
        self.mark(u, v) == Mark::Out
    }

    /// All neighbors of `v` regardless of edge type, ascending.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn parents(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v]
            .iter()
            .map(|&u| u as usize)
            .filter(move |&u| self.mark(u, v) == Mark::Out)
    }

    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v]
            .iter()
            .map(|&u| u as usize)
            .filter(move |&u| self.mark(v, u) == Mark::Out)
    }

    pub fn undirected_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v]
            .iter()
            .map(|&u| u as usize)
            .filter(move |&u| self.mark(v, u) == Mark::Undirected)
    }

    pub fn undirected_degree(&self, v: usize) -> usize {
        self.undirected_neighbors(v).count()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Directed edges `(tail, head)` in ascending order of tail then head.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if self.mark(u, v as usize) == Mark::Out {
                    out.push((u, v as usize));
                }
            }
        }
        out
    }

    /// Undirected pairs `(u, v)` with `u < v`, ascending.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for &v in &self.adj[u] {
                let v = v as usize;
                if u < v && self.mark(u, v) == Mark::Undirected {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn num_undirected(&self) -> usize {
        self.undirected_edges().len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// `true` iff there are no undirected pairs and no directed cycle.
    pub fn is_dag(&self) -> bool {
        self.undirected_edges().is_empty() && is_acyclic(self)
    }

    pub fn require_dag(&self) -> Result<()> {
        if let Some((u, v)) = self.undirected_edges().first() {
            return Err(Error::NotADag(format!("pair {u} - {v} is undirected")));
        }
        if let Some(cycle) = find_directed_cycle(self) {
            return Err(Error::Cycle(cycle.into_iter().map(|v| self.label(v)).collect()));
        }
        Ok(())
    }

    /// Same pairs, all undirected.
    pub fn skeleton(&self) -> Pdag {
        let mut g = self.clone();
        for m in g.marks.iter_mut() {
            if *m != Mark::None {
                *m = Mark::Undirected;
            }
        }
        g
    }

    /// Only the undirected pairs; directed pairs become absent.
    pub fn undirected_part(&self) -> Pdag {
        let mut g = Pdag::empty(self.n);
        g.names = self.names.clone();
        for (u, v) in self.undirected_edges() {
            g.insert_pair(u, v, Mark::Undirected);
        }
        g
    }

    /// Orient an existing pair as `u -> v`.
    #[inline]
    pub(crate) fn orient(&mut self, u: usize, v: usize) {
        debug_assert!(self.adjacent(u, v));
        let n = self.n;
        self.marks[u * n + v] = Mark::Out;
        self.marks[v * n + u] = Mark::In;
    }

    #[inline]
    pub(crate) fn set_undirected(&mut self, u: usize, v: usize) {
        debug_assert!(self.adjacent(u, v));
        let n = self.n;
        self.marks[u * n + v] = Mark::Undirected;
        self.marks[v * n + u] = Mark::Undirected;
    }

    pub(crate) fn insert_pair(&mut self, u: usize, v: usize, mark: Mark) {
        let n = self.n;
        if self.marks[u * n + v] == Mark::None {
            let adj = Arc::make_mut(&mut self.adj);
            let pos = adj[u].binary_search(&(v as u32)).unwrap_err();
            adj[u].insert(pos, v as u32);
            let pos = adj[v].binary_search(&(u as u32)).unwrap_err();
            adj[v].insert(pos, u as u32);
        }
        let back = match mark {
            Mark::Out => Mark::In,
            Mark::In => Mark::Out,
            m => m,
        };
        self.marks[u * n + v] = mark;
        self.marks[v * n + u] = back;
    }

    fn remove_pair(&mut self, u: usize, v: usize) {
        let n = self.n;
        if self.marks[u * n + v] == Mark::None {
            return;
        }
        self.marks[u * n + v] = Mark::None;
        self.marks[v * n + u] = Mark::None;
        let adj = Arc::make_mut(&mut self.adj);
        if let Ok(pos) = adj[u].binary_search(&(v as u32)) {
            adj[u].remove(pos);
        }
        if let Ok(pos) = adj[v].binary_search(&(u as u32)) {
            adj[v].remove(pos);
        }
    }
}

/// Copy-and-edit builder for [`Pdag`].
#[derive(Clone, Debug)]
pub struct PdagBuilder {
    g: Pdag,
}

impl PdagBuilder {
    fn check(&self, u: usize, v: usize) -> Result<()> {
        let n = self.g.n;
        for x in [u, v] {
            if x >= n {
                return Err(Error::InvalidVertex { id: x, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        Ok(())
    }

    /// Add `tail -> head`. Re-adding the same orientation is a no-op; any
    /// other existing state for the pair is a conflict.
    pub fn directed(&mut self, tail: usize, head: usize) -> Result<&mut Self> {
        self.check(tail, head)?;
        match self.g.mark(tail, head) {
            Mark::None => self.g.insert_pair(tail, head, Mark::Out),
            Mark::Out => {}
            _ => return Err(Error::ConflictingPair { a: tail, b: head }),
        }
        Ok(self)
    }

    pub fn undirected(&mut self, u: usize, v: usize) -> Result<&mut Self> {
        self.check(u, v)?;
        match self.g.mark(u, v) {
            Mark::None => self.g.insert_pair(u, v, Mark::Undirected),
            Mark::Undirected => {}
            _ => return Err(Error::ConflictingPair { a: u, b: v }),
        }
        Ok(self)
    }

    /// Overwrite the state of a pair unconditionally.
    pub fn set(&mut self, u: usize, v: usize, state: PairState) -> Result<&mut Self> {
        self.check(u, v)?;
        match state {
            PairState::Absent => self.g.remove_pair(u, v),
            PairState::Undirected => self.g.insert_pair(u, v, Mark::Undirected),
            PairState::Directed { tail, head } => {
                let (t, h) = (tail.index(), head.index());
                if !((t == u && h == v) || (t == v && h == u)) {
                    return Err(Error::InvalidParameter(format!(
                        "directed state {t} -> {h} does not match pair {{{u}, {v}}}"
                    )));
                }
                self.g.insert_pair(t, h, Mark::Out);
            }
        }
        Ok(self)
    }

    pub fn names(&mut self, names: Vec<String>) -> Result<&mut Self> {
        if names.len() != self.g.n {
            return Err(Error::InvalidParameter(format!(
                "name table has {} entries for {} vertices",
                names.len(),
                self.g.n
            )));
        }
        self.g.names = Some(Arc::new(names));
        Ok(self)
    }

    pub fn build(&self) -> Pdag {
        self.g.clone()
    }
}

/// A set of ordered pairs that never contains a pair together with its reverse.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirectedEdgeSet {
    edges: BTreeSet<(VertexId, VertexId)>,
}

impl DirectedEdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Result<Self> {
        let mut set = Self::new();
        for (t, h) in pairs {
            set.insert(t, h)?;
        }
        Ok(set)
    }

    /// Returns whether the edge was new. Fails if the reverse is present.
    pub fn insert(&mut self, tail: usize, head: usize) -> Result<bool> {
        if tail == head {
            return Err(Error::SelfLoop(tail));
        }
        if self.edges.contains(&(head.into(), tail.into())) {
            return Err(Error::ConflictingPair { a: tail, b: head });
        }
        Ok(self.edges.insert((tail.into(), head.into())))
    }

    pub fn contains(&self, tail: usize, head: usize) -> bool {
        self.edges.contains(&(tail.into(), head.into()))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(t, h)| (t.index(), h.index()))
    }

    pub fn extend(&mut self, other: &DirectedEdgeSet) -> Result<()> {
        for (t, h) in other.iter() {
            self.insert(t, h)?;
        }
        Ok(())
    }

    /// Every member's pair must exist in `g`'s skeleton.
    pub fn check_against(&self, g: &Pdag) -> Result<()> {
        for (t, h) in self.iter() {
            g.check_vertex(t.into())?;
            g.check_vertex(h.into())?;
            if !g.adjacent(t, h) {
                return Err(Error::InvalidParameter(format!(
                    "edge {t} -> {h} is not in the skeleton"
                )));
            }
        }
        Ok(())
    }
}

/// Ordered set of distinct intervention targets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InterventionSet {
    targets: Vec<VertexId>,
}

impl InterventionSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new<I: IntoIterator<Item = usize>>(targets: I) -> Result<Self> {
        let mut set = Self::empty();
        for v in targets {
            set.push(v)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, v: usize) -> Result<()> {
        if self.contains(v) {
            return Err(Error::DuplicateTarget(v));
        }
        self.targets.push(v.into());
        Ok(())
    }

    pub fn contains(&self, v: usize) -> bool {
        self.targets.iter().any(|t| t.index() == v)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().map(|t| t.index())
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.targets
    }

    /// This set followed by `v`.
    pub fn with(&self, v: usize) -> Result<Self> {
        let mut next = self.clone();
        next.push(v)?;
        Ok(next)
    }

    pub fn check_against(&self, g: &Pdag) -> Result<()> {
        self.targets.iter().try_for_each(|&v| g.check_vertex(v))
    }
}

/// Connected components of the undirected subgraph, isolated vertices
/// excluded, ordered by smallest contained id.
pub fn undirected_components(g: &Pdag) -> Vec<Vec<VertexId>> {
    let n = g.order();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] || g.undirected_degree(start) == 0 {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for w in g.undirected_neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp.into_iter().map(VertexId::from).collect());
    }
    out
}

fn require_undirected(g: &Pdag) -> Result<()> {
    match g.directed_edges().first() {
        Some(&(tail, head)) => Err(Error::NotUndirected { tail, head }),
        None => Ok(()),
    }
}

/// Perfect elimination ordering of an undirected graph, or `None` if the
/// graph has a hole.
///
/// The ordering is returned so that every vertex's neighbors appearing
/// *later* in it form a clique. Built by maximum-cardinality search (whose
/// visit order has the mirror property) followed by the clique check.
pub fn perfect_elimination_ordering(g: &Pdag) -> Result<Option<Vec<VertexId>>> {
    require_undirected(g)?;
    let n = g.order();
    let visit = maximum_cardinality_search(g);
    let mut pos = vec![0usize; n];
    for (i, &v) in visit.iter().enumerate() {
        pos[v] = i;
    }
    // Tarjan-Yannakakis check: for each v, let p be its latest-visited earlier
    // neighbor; every other earlier neighbor of v must be adjacent to p.
    for &v in &visit {
        let earlier: Vec<usize> = g
            .neighbors(v)
            .iter()
            .map(|&u| u as usize)
            .filter(|&u| pos[u] < pos[v])
            .collect();
        if let Some(&p) = earlier.iter().max_by_key(|&&u| pos[u]) {
            if earlier.iter().any(|&u| u != p && !g.adjacent(u, p)) {
                return Ok(None);
            }
        }
    }
    Ok(Some(visit.into_iter().rev().map(VertexId::from).collect()))
}

pub fn is_chordal(g: &Pdag) -> Result<bool> {
    Ok(perfect_elimination_ordering(g)?.is_some())
}

fn maximum_cardinality_search(g: &Pdag) -> Vec<usize> {
    let n = g.order();
    let mut weight = vec![0usize; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        // ties go to the smallest id
        let v = (0..n)
            .filter(|&v| !done[v])
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .expect("unvisited vertex remains");
        done[v] = true;
        order.push(v);
        for &u in g.neighbors(v) {
            if !done[u as usize] {
                weight[u as usize] += 1;
            }
        }
    }
    order
}

/// All triples `(a, b, c)` with `a -> b <- c`, `a < c`, and `a`, `c` nonadjacent.
pub fn v_structures(g: &Pdag) -> BTreeSet<(VertexId, VertexId, VertexId)> {
    let mut out = BTreeSet::new();
    for b in 0..g.order() {
        let parents: Vec<usize> = g.parents(b).collect();
        for (i, &a) in parents.iter().enumerate() {
            for &c in &parents[i + 1..] {
                if !g.adjacent(a, c) {
                    out.insert((a.into(), b.into(), c.into()));
                }
            }
        }
    }
    out
}

pub fn is_acyclic(g: &Pdag) -> bool {
    find_directed_cycle(g).is_none()
}

/// A directed cycle as a vertex sequence (closing edge implied), if any.
pub fn find_directed_cycle(g: &Pdag) -> Option<Vec<usize>> {
    #[derive(Copy, Clone, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let n = g.order();
    let mut color = vec![Color::White; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if color[root] != Color::White {
            continue;
        }
        // iterative DFS with explicit child cursors
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = Color::Grey;
        while let Some(&mut (u, ref mut cursor)) = stack.last_mut() {
            let nbrs = g.neighbors(u);
            let mut advanced = false;
            while *cursor < nbrs.len() {
                let w = nbrs[*cursor] as usize;
                *cursor += 1;
                if !g.has_arrow(u, w) {
                    continue;
                }
                match color[w] {
                    Color::White => {
                        color[w] = Color::Grey;
                        parent[w] = u;
                        stack.push((w, 0));
                        advanced = true;
                        break;
                    }
                    Color::Grey => {
                        let mut cycle = vec![u];
                        let mut x = u;
                        while x != w {
                            x = parent[x];
                            cycle.push(x);
                        }
                        cycle.reverse();
                        return Some(cycle);
                    }
                    Color::Black => {}
                }
            }
            if !advanced {
                color[u] = Color::Black;
                stack.pop();
            }
        }
    }
    None
}

/// Every edge of `dag` touching a target, with its true orientation.
pub fn incident_orientations(dag: &Pdag, targets: &InterventionSet) -> Result<DirectedEdgeSet> {
    targets.check_against(dag)?;
    let mut out = DirectedEdgeSet::new();
    for v in targets.iter() {
        for &u in dag.neighbors(v) {
            let u = u as usize;
            match dag.mark(v, u) {
                Mark::Out => out.insert(v, u)?,
                Mark::In => out.insert(u, v)?,
                _ => {
                    return Err(Error::NotADag(format!("pair {v} - {u} is undirected")));
                }
            };
        }
    }
    Ok(out)
}

/// Hop counts from `source` over undirected pairs; unreachable vertices are absent.
pub fn bfs_distances(g: &Pdag, source: VertexId) -> Result<BTreeMap<VertexId, usize>> {
    g.check_vertex(source)?;
    let mut dist = BTreeMap::new();
    dist.insert(source, 0);
    let mut queue = VecDeque::from([source.index()]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&VertexId::from(u)];
        for w in g.undirected_neighbors(u) {
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(w.into()) {
                e.insert(d + 1);
                queue.push_back(w);
            }
        }
    }
    Ok(dist)
}
