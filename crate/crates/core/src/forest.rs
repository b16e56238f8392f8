//! Leveled forest: a rooted forest whose leaves are the active points and
//! whose trees have all leaves at the same depth.
//!
//! Heights are stored per node and maintained by the mutators; the audit in
//! [`check_valid_triple`] recomputes everything from the parent pointers.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metric::{pow2, MetricUniverse, PointId, PointKey};
use crate::ranks::{check_separation, RankFunction};
use crate::validation::ValidationReport;

/// Forest node handle. Allocated from a monotone counter and never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u64);

impl NodeId {
    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Node {
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    height: u32,
    point: Option<PointKey>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LeveledForest {
    nodes: BTreeMap<NodeId, Node>,
    leaf_of: HashMap<PointKey, NodeId>,
    next_id: u64,
}

impl LeveledForest {
    pub fn new() -> Self {
        Self::default()
    }

    fn node(&self, v: NodeId) -> Result<&Node> {
        self.nodes.get(&v).ok_or_else(|| Error::unknown_node(v))
    }

    fn node_mut(&mut self, v: NodeId) -> Result<&mut Node> {
        self.nodes.get_mut(&v).ok_or_else(|| Error::unknown_node(v))
    }

    fn alloc(&mut self, node: Node) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.nodes.insert(id, node);
        id
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.nodes.contains_key(&v)
    }

    /// Live node ids in allocation order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn height(&self, v: NodeId) -> Result<u32> {
        Ok(self.node(v)?.height)
    }

    pub fn parent(&self, v: NodeId) -> Result<Option<NodeId>> {
        Ok(self.node(v)?.parent)
    }

    pub fn children(&self, v: NodeId) -> Result<&[NodeId]> {
        Ok(&self.node(v)?.children)
    }

    pub fn point_of(&self, v: NodeId) -> Option<PointKey> {
        self.nodes.get(&v).and_then(|n| n.point)
    }

    pub fn leaf(&self, p: PointKey) -> Option<NodeId> {
        self.leaf_of.get(&p).copied()
    }

    fn leaf_or_err(&self, p: PointKey) -> Result<NodeId> {
        self.leaf(p)
            .ok_or_else(|| Error::State(format!("point {p:?} is not a leaf of the forest")))
    }

    pub fn leaf_points(&self) -> impl Iterator<Item = PointKey> + '_ {
        self.leaf_of.keys().copied()
    }

    pub fn roots(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|(_, n)| n.parent.is_none())
            .map(|(&id, _)| id)
            .collect()
    }

    pub fn root_of(&self, v: NodeId) -> Result<NodeId> {
        let mut cur = v;
        while let Some(p) = self.node(cur)?.parent {
            cur = p;
        }
        Ok(cur)
    }

    /// Number of edges from the leaf of `p` to its root.
    pub fn path_len(&self, p: PointKey) -> Result<u32> {
        let root = self.root_of(self.leaf_or_err(p)?)?;
        self.height(root)
    }

    /// The unique ancestor of `p`'s leaf at height `h`; `h = 0` is the leaf.
    pub fn ancestor_at_height(&self, p: PointKey, h: u32) -> Result<NodeId> {
        let mut cur = self.leaf_or_err(p)?;
        loop {
            let node = self.node(cur)?;
            if node.height == h {
                return Ok(cur);
            }
            match node.parent {
                Some(parent) if node.height < h => cur = parent,
                _ => {
                    return Err(Error::State(format!(
                        "path above {p:?} ends at height {} < {h}",
                        node.height
                    )))
                }
            }
        }
    }

    /// True if `v` lies in the subtree rooted at `ancestor` (inclusive).
    pub fn in_subtree(&self, v: NodeId, ancestor: NodeId) -> bool {
        let Some(target_height) = self.nodes.get(&ancestor).map(|n| n.height) else {
            return false;
        };
        let mut cur = Some(v);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            match self.nodes.get(&c) {
                Some(n) if n.height < target_height => cur = n.parent,
                _ => return false,
            }
        }
        false
    }

    /// Leaves below `v` in depth-first order.
    pub fn subtree_leaves(&self, v: NodeId) -> Vec<PointKey> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(c) = stack.pop() {
            let Some(node) = self.nodes.get(&c) else {
                continue;
            };
            if let Some(p) = node.point {
                out.push(p);
            }
            stack.extend(node.children.iter().rev());
        }
        out
    }

    fn min_label_below<'u>(&self, v: NodeId, u: &'u MetricUniverse) -> Option<&'u PointId> {
        self.subtree_leaves(v).into_iter().map(|p| u.label(p)).min()
    }

    /// Children of `v` in canonical order: by least point label in the
    /// child's subtree, then by node id.
    pub fn ordered_children(&self, v: NodeId, u: &MetricUniverse) -> Result<Vec<NodeId>> {
        let mut keyed: Vec<_> = self
            .children(v)?
            .iter()
            .map(|&c| (self.min_label_below(c, u), c))
            .collect();
        keyed.sort();
        Ok(keyed.into_iter().map(|(_, c)| c).collect())
    }

    /// Add a leaf for `p` with a fresh chain of `len` nodes above it. Returns
    /// the root of the new tree (the leaf itself when `len = 0`).
    pub fn add_leaf_with_path(&mut self, p: PointKey, len: u32) -> Result<NodeId> {
        if self.leaf_of.contains_key(&p) {
            return Err(Error::State(format!("point {p:?} already has a leaf")));
        }
        let leaf = self.alloc(Node {
            parent: None,
            children: Vec::new(),
            height: 0,
            point: Some(p),
        });
        self.leaf_of.insert(p, leaf);
        let mut top = leaf;
        for h in 1..=len {
            let next = self.alloc(Node {
                parent: None,
                children: vec![top],
                height: h,
                point: None,
            });
            self.node_mut(top)?.parent = Some(next);
            top = next;
        }
        Ok(top)
    }

    /// Remove the edge from `u` to its parent `v`. With
    /// `delete_v_if_childless`, a parent left without children is deleted;
    /// such a parent must be a root.
    pub fn detach_edge(&mut self, u: NodeId, v: NodeId, delete_v_if_childless: bool) -> Result<()> {
        if self.node(u)?.parent != Some(v) {
            return Err(Error::State(format!("{v} is not the parent of {u}")));
        }
        let parent = self.node(v)?;
        let empties = parent.children.len() == 1;
        if delete_v_if_childless && empties && parent.parent.is_some() {
            return Err(Error::State(format!(
                "cannot delete {v}: it would leave its own parent with a short path"
            )));
        }
        self.node_mut(u)?.parent = None;
        let parent = self.node_mut(v)?;
        parent.children.retain(|&c| c != u);
        if delete_v_if_childless && empties {
            self.nodes.remove(&v);
        }
        Ok(())
    }

    /// Create a new root one level above the given roots, all of which must
    /// be roots of equal height.
    pub fn attach_new_parent(&mut self, roots: &[NodeId]) -> Result<NodeId> {
        let Some(&first) = roots.first() else {
            return Err(Error::State(
                "attach_new_parent needs at least one root".into(),
            ));
        };
        let h = self.height(first)?;
        for (i, &r) in roots.iter().enumerate() {
            let node = self.node(r)?;
            if node.parent.is_some() {
                return Err(Error::State(format!("{r} is not a root")));
            }
            if node.height != h {
                return Err(Error::State(format!(
                    "roots have unequal heights ({} vs {h})",
                    node.height
                )));
            }
            if roots[..i].contains(&r) {
                return Err(Error::State(format!("{r} listed twice")));
            }
        }
        let parent = self.alloc(Node {
            parent: None,
            children: roots.to_vec(),
            height: h + 1,
            point: None,
        });
        for &r in roots {
            self.node_mut(r)?.parent = Some(parent);
        }
        Ok(parent)
    }

    /// Remove the leaf of `p`, which must be an isolated root.
    pub fn remove_isolated_leaf(&mut self, p: PointKey) -> Result<()> {
        let leaf = self.leaf_or_err(p)?;
        if self.node(leaf)?.parent.is_some() {
            return Err(Error::State(format!("leaf of {p:?} still has a parent")));
        }
        self.nodes.remove(&leaf);
        self.leaf_of.remove(&p);
        Ok(())
    }

    /// Deterministic text dump: one line per node in allocation order.
    pub fn dump(&self, u: &MetricUniverse) -> String {
        let mut out = String::new();
        for (id, node) in &self.nodes {
            let parent = node
                .parent
                .map_or_else(|| "-".to_string(), |p| p.to_string());
            let point = node.point.map_or("-", |p| u.label(p).as_str());
            let _ = writeln!(out, "{id} h={} parent={parent} point={point}", node.height);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TripleViolation {
    /// The forest is not a leveled forest for the ranked point set.
    Structure(String),
    Separation {
        p: PointId,
        q: PointId,
    },
    RankExceedsPath {
        point: PointId,
        geometric: u32,
        smooth: u32,
        path: u32,
    },
    SmoothHolders {
        node: NodeId,
        height: u32,
        holders: Vec<PointId>,
    },
    GeometricHolders {
        child: NodeId,
        parent: NodeId,
        height: u32,
        holders: Vec<PointId>,
    },
    Spread {
        node: NodeId,
        height: u32,
        p: PointId,
        q: PointId,
        distance: f64,
    },
}

impl fmt::Display for TripleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TripleViolation::Structure(msg) => write!(f, "forest structure: {msg}"),
            TripleViolation::Separation { p, q } => write!(f, "separation fails for {p}, {q}"),
            TripleViolation::RankExceedsPath { point, geometric, smooth, path } => write!(
                f,
                "{point}: ranks (geometric {geometric}, smooth {smooth}) exceed path length {path}"
            ),
            TripleViolation::SmoothHolders { node, height, holders } => write!(
                f,
                "{node} (h={height}) has {} smooth holders {holders:?}, expected exactly one",
                holders.len()
            ),
            TripleViolation::GeometricHolders { child, parent, height, holders } => write!(
                f,
                "edge {child}->{parent} (h={height}) has {} geometric holders {holders:?}, expected exactly one",
                holders.len()
            ),
            TripleViolation::Spread { node, height, p, q, distance } => write!(
                f,
                "{node} (h={height}): d({p},{q}) = {distance} >= 2^{}",
                height + 1
            ),
        }
    }
}

fn structure_violations(f: &LeveledForest, ranked: &RankFunction) -> Vec<String> {
    let mut out = Vec::new();
    for (&id, node) in &f.nodes {
        if let Some(p) = node.parent {
            match f.nodes.get(&p) {
                None => out.push(format!("{id} points at missing parent {p}")),
                Some(pn) => {
                    if !pn.children.contains(&id) {
                        out.push(format!("{p} does not list child {id}"));
                    }
                    if pn.height != node.height + 1 {
                        out.push(format!(
                            "edge {id}->{p} joins heights {} and {}",
                            node.height, pn.height
                        ));
                    }
                }
            }
        }
        for &c in &node.children {
            match f.nodes.get(&c) {
                None => out.push(format!("{id} lists missing child {c}")),
                Some(cn) if cn.parent != Some(id) => {
                    out.push(format!("child {c} of {id} has parent {:?}", cn.parent))
                }
                _ => {}
            }
        }
        match node.point {
            Some(p) => {
                if !node.children.is_empty() || node.height != 0 {
                    out.push(format!("leaf {id} has children or nonzero height"));
                }
                if f.leaf_of.get(&p) != Some(&id) {
                    out.push(format!("leaf {id} is not registered for its point"));
                }
            }
            None => {
                if node.children.is_empty() {
                    out.push(format!("internal node {id} has no children"));
                }
                if node.height == 0 {
                    out.push(format!("internal node {id} has height 0"));
                }
            }
        }
    }
    // parent chains must terminate
    let limit = f.nodes.len();
    for &id in f.nodes.keys() {
        let mut cur = id;
        let mut steps = 0;
        while let Some(p) = f.nodes.get(&cur).and_then(|n| n.parent) {
            cur = p;
            steps += 1;
            if steps > limit {
                out.push(format!("cycle above {id}"));
                break;
            }
        }
    }
    for (&p, &leaf) in &f.leaf_of {
        if f.point_of(leaf) != Some(p) {
            out.push(format!("registered leaf {leaf} does not carry its point"));
        }
        if !ranked.contains(p) {
            out.push(format!("leaf {leaf} carries an unranked point"));
        }
    }
    for (p, _) in ranked.iter() {
        if !f.leaf_of.contains_key(&p) {
            out.push(format!("ranked point {p:?} has no leaf"));
        }
    }
    out
}

/// Leaves below every node, collected by walking up from each leaf.
fn leaves_below(f: &LeveledForest) -> HashMap<NodeId, Vec<PointKey>> {
    let mut below: HashMap<NodeId, Vec<PointKey>> = HashMap::with_capacity(f.node_count());
    for (&p, &leaf) in &f.leaf_of {
        let mut cur = Some(leaf);
        let mut steps = 0;
        while let Some(c) = cur {
            below.entry(c).or_default().push(p);
            cur = f.nodes.get(&c).and_then(|n| n.parent);
            steps += 1;
            if steps > f.node_count() {
                break;
            }
        }
    }
    below
}

fn sorted_labels(keys: impl IntoIterator<Item = PointKey>, u: &MetricUniverse) -> Vec<PointId> {
    let mut labels: Vec<_> = keys.into_iter().map(|p| u.label(p).clone()).collect();
    labels.sort();
    labels
}

/// Full audit of a (forest, geometric rank, smooth rank) triple: the leveled
/// forest conditions plus the five triple conditions. Structural breakage
/// is reported on its own, without the rank conditions that presuppose it.
pub fn check_valid_triple(
    f: &LeveledForest,
    xi_g: &RankFunction,
    xi_s: &RankFunction,
    u: &MetricUniverse,
) -> ValidationReport<TripleViolation> {
    let mut report = ValidationReport::new();
    let mut structure = structure_violations(f, xi_g);
    if !xi_g.same_domain(xi_s) {
        structure.push("geometric and smooth ranks have different domains".into());
    }
    if !structure.is_empty() {
        for msg in structure {
            report.push(TripleViolation::Structure(msg));
        }
        return report;
    }

    for (p, q) in check_separation(xi_g, u) {
        report.push(TripleViolation::Separation { p, q });
    }

    let mut points: Vec<_> = f.leaf_points().collect();
    points.sort_by(|&a, &b| u.cmp_labels(a, b));
    for &p in &points {
        let path = f.path_len(p).expect("structure checked");
        let (geometric, smooth) = (xi_g.rank(p), xi_s.rank(p));
        if geometric > path || smooth > path {
            report.push(TripleViolation::RankExceedsPath {
                point: u.label(p).clone(),
                geometric,
                smooth,
                path,
            });
        }
    }

    let below = leaves_below(f);
    for (&v, node) in &f.nodes {
        let leaves = &below[&v];
        let h = node.height;
        let smooth: Vec<_> = leaves
            .iter()
            .copied()
            .filter(|&p| xi_s.rank(p) >= h)
            .collect();
        if smooth.len() != 1 {
            report.push(TripleViolation::SmoothHolders {
                node: v,
                height: h,
                holders: sorted_labels(smooth, u),
            });
        }
        if let Some(parent) = node.parent {
            let ph = h + 1;
            let geo: Vec<_> = leaves
                .iter()
                .copied()
                .filter(|&p| xi_g.rank(p) >= ph)
                .collect();
            if geo.len() != 1 {
                report.push(TripleViolation::GeometricHolders {
                    child: v,
                    parent,
                    height: ph,
                    holders: sorted_labels(geo, u),
                });
            }
        }
        let mut high: Vec<_> = leaves
            .iter()
            .copied()
            .filter(|&p| xi_g.rank(p) >= h)
            .collect();
        high.sort_by(|&a, &b| u.cmp_labels(a, b));
        let limit = pow2(h + 1);
        for (i, &p) in high.iter().enumerate() {
            for &q in &high[i + 1..] {
                let distance = u.distance(p, q);
                if distance >= limit {
                    report.push(TripleViolation::Spread {
                        node: v,
                        height: h,
                        p: u.label(p).clone(),
                        q: u.label(q).clone(),
                        distance,
                    });
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiameterViolation {
    pub node: NodeId,
    pub height: u32,
    pub anchor: PointId,
    pub other: PointId,
    pub distance: f64,
    pub bound: f64,
}

impl fmt::Display for DiameterViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (h={}): d({},{}) = {} > {}",
            self.node, self.height, self.anchor, self.other, self.distance, self.bound
        )
    }
}

/// Largest distance allowed between a leaf of geometric rank at least
/// `h` and any other leaf under a common node of height `h`: `4 * 2^h - 4`.
pub fn subtree_distance_bound(h: u32) -> f64 {
    4.0 * pow2(h) - 4.0
}

/// For every node `v` and every leaf pair `(q, p)` below it with
/// geometric rank of `q` at least `h(v)`, check `d(q, p) <= 4 * 2^h(v) - 4`.
pub fn subtree_diameter_bound_check(
    f: &LeveledForest,
    xi_g: &RankFunction,
    u: &MetricUniverse,
) -> ValidationReport<DiameterViolation> {
    let mut report = ValidationReport::new();
    let below = leaves_below(f);
    for (&v, node) in &f.nodes {
        let Some(leaves) = below.get(&v) else {
            continue;
        };
        let h = node.height;
        let bound = subtree_distance_bound(h);
        let mut sorted = leaves.clone();
        sorted.sort_by(|&a, &b| u.cmp_labels(a, b));
        for &q in sorted
            .iter()
            .filter(|&&q| xi_g.get(q).is_some_and(|r| r >= h))
        {
            for &p in &sorted {
                if p == q {
                    continue;
                }
                let distance = u.distance(q, p);
                if distance > bound {
                    report.push(DiameterViolation {
                        node: v,
                        height: h,
                        anchor: u.label(q).clone(),
                        other: u.label(p).clone(),
                        distance,
                        bound,
                    });
                }
            }
        }
    }
    report
}
