//! Undirected simple graphs, edge-addition overlays and the text loaders.
//!
//! Nodes are dense ids `0..N`. Adjacency lists are kept sorted so that
//! membership tests and neighborhood intersections are merges over slices.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::BufRead;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Normalize an unordered pair so the smaller id comes first.
#[inline]
pub fn ordered(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Immutable undirected simple graph.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl Graph {
    /// Graph with `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Build from an edge iterator. Self-loops and duplicates are dropped.
    ///
    /// Panics if an endpoint is `>= n`.
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut edge_count = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Graph {
            adj,
            edge_count: edge_count / 2,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let start = list.partition_point(|&v| v <= u);
            list[start..].iter().map(move |&v| (u, v))
        })
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: v,
                node_count: self.node_count(),
            })
        }
    }

    /// Copy of this graph with `extra` edges inserted.
    pub fn with_added_edges(&self, extra: &[(NodeId, NodeId)]) -> Graph {
        if extra.is_empty() {
            return self.clone();
        }
        let mut adj = self.adj.clone();
        let mut added = 0;
        for &(u, v) in extra {
            if u == v {
                continue;
            }
            if let Err(pos) = adj[u].binary_search(&v) {
                adj[u].insert(pos, v);
                let pos = adj[v].binary_search(&u).unwrap_err();
                adj[v].insert(pos, u);
                added += 1;
            }
        }
        Graph {
            adj,
            edge_count: self.edge_count + added,
        }
    }

    /// Connected components, each sorted, listed by their smallest node.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.components().len() == 1
    }

    /// Hop distances from `source`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, source: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0) + 1;
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Subgraph induced by `nodes`; node `i` of the result is `nodes[i]`.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> Graph {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, &v) in nodes.iter().enumerate() {
            index.insert(v, i);
        }
        let edges = nodes.iter().enumerate().flat_map(|(i, &v)| {
            let index = &index;
            self.adj[v]
                .iter()
                .filter_map(move |w| index.get(w).map(|&j| (i, j)))
        });
        Graph::from_edges(nodes.len(), edges)
    }
}

/// A base graph plus a set of added edges, queried as `(V, E ∪ E')`.
///
/// The base graph is never touched; dropping the overlay restores it.
#[derive(Clone, Debug)]
pub struct EdgeOverlay<'a> {
    base: &'a Graph,
    added: Vec<(NodeId, NodeId)>,
    extra: HashMap<NodeId, Vec<NodeId>>,
}

impl<'a> EdgeOverlay<'a> {
    pub fn new(base: &'a Graph) -> Self {
        EdgeOverlay {
            base,
            added: Vec::new(),
            extra: HashMap::new(),
        }
    }

    pub fn base(&self) -> &'a Graph {
        self.base
    }

    /// Add an edge. Returns `Ok(false)` when the edge is already present.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<bool> {
        self.base.check_node(u)?;
        self.base.check_node(v)?;
        if u == v {
            return Err(Error::InvalidInput(format!("self-loop on node {u}")));
        }
        if self.has_edge(u, v) {
            return Ok(false);
        }
        self.added.push(ordered(u, v));
        for (a, b) in [(u, v), (v, u)] {
            let list = self.extra.entry(a).or_default();
            let pos = list.binary_search(&b).unwrap_err();
            list.insert(pos, b);
        }
        Ok(true)
    }

    /// Added edges in insertion order.
    pub fn added_edges(&self) -> &[(NodeId, NodeId)] {
        &self.added
    }

    pub fn node_count(&self) -> usize {
        self.base.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.base.edge_count() + self.added.len()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.base.degree(v) + self.extra.get(&v).map_or(0, Vec::len)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.base.has_edge(u, v)
            || self
                .extra
                .get(&u)
                .is_some_and(|l| l.binary_search(&v).is_ok())
    }

    /// Neighbors of `v` in sorted order.
    pub fn neighbors(&self, v: NodeId) -> Vec<NodeId> {
        let base = self.base.neighbors(v);
        match self.extra.get(&v) {
            None => base.to_vec(),
            Some(extra) => {
                let mut out = Vec::with_capacity(base.len() + extra.len());
                let (mut i, mut j) = (0, 0);
                while i < base.len() || j < extra.len() {
                    if j == extra.len() || (i < base.len() && base[i] < extra[j]) {
                        out.push(base[i]);
                        i += 1;
                    } else {
                        out.push(extra[j]);
                        j += 1;
                    }
                }
                out
            }
        }
    }

    /// Freeze into a standalone graph for detector calls.
    pub fn materialize(&self) -> Graph {
        self.base.with_added_edges(&self.added)
    }
}

/// Counts collected while parsing a text graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LoadReport {
    /// Edge records read, before deduplication (a directed listing counts each direction).
    pub edge_records: usize,
    pub duplicate_edges: usize,
    pub self_loops: usize,
}

/// A parsed graph together with its original node labels.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// Original token of each dense node id.
    pub names: Vec<String>,
    /// Optional per-node class (GML `value`), by dense id.
    pub classes: Option<Vec<String>>,
    pub report: LoadReport,
}

impl LoadedGraph {
    pub fn index_of(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name)
    }
}

struct Interner {
    index: HashMap<String, NodeId>,
    names: Vec<String>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            index: HashMap::new(),
            names: Vec::new(),
        }
    }

    fn id(&mut self, token: &str) -> NodeId {
        if let Some(&i) = self.index.get(token) {
            return i;
        }
        let i = self.names.len();
        self.index.insert(token.to_string(), i);
        self.names.push(token.to_string());
        i
    }
}

fn build_loaded(raw: Vec<(NodeId, NodeId)>, names: Vec<String>) -> LoadedGraph {
    let mut report = LoadReport {
        edge_records: raw.len(),
        ..LoadReport::default()
    };
    let mut seen = std::collections::HashSet::with_capacity(raw.len());
    let mut edges = Vec::with_capacity(raw.len());
    for (u, v) in raw {
        if u == v {
            report.self_loops += 1;
        } else if !seen.insert(ordered(u, v)) {
            report.duplicate_edges += 1;
        } else {
            edges.push((u, v));
        }
    }
    LoadedGraph {
        graph: Graph::from_edges(names.len(), edges),
        names,
        classes: None,
        report,
    }
}

/// Parse a whitespace-separated edge list.
///
/// Lines starting with `#` and blank lines are skipped. Node tokens are
/// re-indexed densely in order of first appearance; directed listings are
/// symmetrized, with the collapsed reverse edges counted as duplicates.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<LoadedGraph> {
    let mut interner = Interner::new();
    let mut raw = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => {
                let u = interner.id(a);
                let v = interner.id(b);
                raw.push((u, v));
            }
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected two node tokens, got {trimmed:?}"),
                })
            }
        }
    }
    if raw.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Ok(build_loaded(raw, interner.names))
}

#[derive(Debug, Clone)]
enum GmlValue {
    Atom(String),
    List(Vec<(String, GmlValue)>),
}

struct GmlLexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    text: &'a str,
    line: usize,
}

impl<'a> GmlLexer<'a> {
    fn next_token(&mut self) -> Result<Option<(String, usize)>> {
        loop {
            let Some(&(start, c)) = self.chars.peek() else {
                return Ok(None);
            };
            if c == '\n' {
                self.line += 1;
                self.chars.next();
            } else if c.is_whitespace() {
                self.chars.next();
            } else if c == '#' {
                while let Some(&(_, c)) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.chars.next();
                }
            } else if c == '"' {
                self.chars.next();
                let line = self.line;
                let mut s = String::new();
                loop {
                    match self.chars.next() {
                        Some((_, '"')) => break,
                        Some((_, ch)) => {
                            if ch == '\n' {
                                self.line += 1;
                            }
                            s.push(ch)
                        }
                        None => {
                            return Err(Error::Parse {
                                line,
                                message: "unterminated string".into(),
                            })
                        }
                    }
                }
                return Ok(Some((format!("\"{s}"), line)));
            } else if c == '[' || c == ']' {
                self.chars.next();
                return Ok(Some((c.to_string(), self.line)));
            } else {
                let mut end = start;
                while let Some(&(i, ch)) = self.chars.peek() {
                    if ch.is_whitespace() || ch == '[' || ch == ']' {
                        break;
                    }
                    end = i + ch.len_utf8();
                    self.chars.next();
                }
                return Ok(Some((self.text[start..end].to_string(), self.line)));
            }
        }
    }
}

fn parse_gml_list(lex: &mut GmlLexer<'_>, nested: bool) -> Result<Vec<(String, GmlValue)>> {
    let mut out = Vec::new();
    loop {
        let Some((key, line)) = lex.next_token()? else {
            if nested {
                return Err(Error::Parse {
                    line: lex.line,
                    message: "unexpected end of input inside list".into(),
                });
            }
            return Ok(out);
        };
        if key == "]" {
            if nested {
                return Ok(out);
            }
            return Err(Error::Parse {
                line,
                message: "unbalanced ']'".into(),
            });
        }
        let Some((value, vline)) = lex.next_token()? else {
            return Err(Error::Parse {
                line,
                message: format!("key {key:?} has no value"),
            });
        };
        let value = match value.as_str() {
            "[" => GmlValue::List(parse_gml_list(lex, true)?),
            "]" => {
                return Err(Error::Parse {
                    line: vline,
                    message: format!("key {key:?} has no value"),
                })
            }
            _ => GmlValue::Atom(value.trim_start_matches('"').to_string()),
        };
        out.push((key, value));
    }
}

fn gml_atom<'v>(items: &'v [(String, GmlValue)], key: &str) -> Option<&'v str> {
    items.iter().find_map(|(k, v)| match v {
        GmlValue::Atom(s) if k == key => Some(s.as_str()),
        _ => None,
    })
}

/// Parse a GML document with `node [ id .. label .. value .. ]` and
/// `edge [ source .. target .. ]` blocks.
///
/// Node names are the `label` when present, else the `id`. The optional
/// `value` attribute becomes the node class.
pub fn load_gml(text: &str) -> Result<LoadedGraph> {
    let mut lex = GmlLexer {
        chars: text.char_indices().peekable(),
        text,
        line: 1,
    };
    let top = parse_gml_list(&mut lex, false)?;
    let graph = top
        .iter()
        .find_map(|(k, v)| match v {
            GmlValue::List(items) if k == "graph" => Some(items),
            _ => None,
        })
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "no graph block".into(),
        })?;

    let mut ids: BTreeMap<String, NodeId> = BTreeMap::new();
    let mut names = Vec::new();
    let mut classes = Vec::new();
    let mut any_class = false;
    let mut raw = Vec::new();
    for (key, value) in graph {
        let GmlValue::List(items) = value else {
            continue;
        };
        match key.as_str() {
            "node" => {
                let id = gml_atom(items, "id").ok_or_else(|| Error::Parse {
                    line: 0,
                    message: "node without id".into(),
                })?;
                if ids.contains_key(id) {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("duplicate node id {id}"),
                    });
                }
                ids.insert(id.to_string(), names.len());
                names.push(gml_atom(items, "label").unwrap_or(id).to_string());
                let class = gml_atom(items, "value").map(str::to_string);
                any_class |= class.is_some();
                classes.push(class);
            }
            "edge" => {
                let s = gml_atom(items, "source");
                let t = gml_atom(items, "target");
                match (s, t) {
                    (Some(s), Some(t)) => raw.push((s.to_string(), t.to_string())),
                    _ => {
                        return Err(Error::Parse {
                            line: 0,
                            message: "edge without source/target".into(),
                        })
                    }
                }
            }
            _ => {}
        }
    }
    let mut edges = Vec::with_capacity(raw.len());
    for (s, t) in raw {
        let lookup = |x: &str| {
            ids.get(x).copied().ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("edge references unknown node {x}"),
            })
        };
        edges.push((lookup(&s)?, lookup(&t)?));
    }
    if names.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut loaded = build_loaded(edges, names);
    if any_class {
        loaded.classes = Some(classes.into_iter().map(|c| c.unwrap_or_default()).collect());
    }
    Ok(loaded)
}

/// Induced subgraph plus the original id of every new node.
#[derive(Clone, Debug)]
pub struct Subgraph {
    pub graph: Graph,
    pub original: Vec<NodeId>,
}

/// Largest connected component, re-indexed in increasing original id.
///
/// Ties between equally large components go to the one holding the
/// smallest original node id.
pub fn largest_connected_component(g: &Graph) -> Result<Subgraph> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    // components() lists components by smallest member, so the first
    // maximum wins ties.
    let comps = g.components();
    let mut best = 0;
    for (i, c) in comps.iter().enumerate() {
        if c.len() > comps[best].len() {
            best = i;
        }
    }
    let nodes = comps.into_iter().nth(best).unwrap_or_default();
    Ok(Subgraph {
        graph: g.induced_subgraph(&nodes),
        original: nodes,
    })
}

/// Sorted neighborhood of `v` including `v` itself.
pub fn closed_neighborhood(g: &Graph, v: NodeId) -> Vec<NodeId> {
    let mut out = g.neighbors(v).to_vec();
    let pos = out.binary_search(&v).unwrap_or_else(|p| p);
    out.insert(pos, v);
    out
}

/// Size of the intersection of two sorted slices.
pub fn sorted_intersection_len(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Jaccard coefficient of the closed neighborhoods of `i` and `j`.
pub fn jaccard_neighborhood(g: &Graph, i: NodeId, j: NodeId) -> f64 {
    if i == j {
        return 1.0;
    }
    let a = closed_neighborhood(g, i);
    let b = closed_neighborhood(g, j);
    let inter = sorted_intersection_len(&a, &b);
    inter as f64 / (a.len() + b.len() - inter) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1)))
    }

    #[test]
    fn edge_list_basic() {
        let g = load_edge_list("0 1\n1 2\n".as_bytes()).unwrap();
        assert_eq!(g.graph.node_count(), 3);
        assert_eq!(g.graph.edge_count(), 2);
    }

    #[test]
    fn edge_list_dedup_and_comments() {
        let g = load_edge_list("a b\nb a\n# c\n".as_bytes()).unwrap();
        assert_eq!(g.graph.node_count(), 2);
        assert_eq!(g.graph.edge_count(), 1);
        assert_eq!(g.report.duplicate_edges, 1);
        assert_eq!(g.report.edge_records, 2);
        assert_eq!(g.names, vec!["a", "b"]);
    }

    #[test]
    fn edge_list_self_loops_counted() {
        let g = load_edge_list("x x\nx y\n".as_bytes()).unwrap();
        assert_eq!(g.report.self_loops, 1);
        assert_eq!(g.graph.edge_count(), 1);
    }

    #[test]
    fn edge_list_errors() {
        match load_edge_list("0 1\n0 1 2\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            load_edge_list("# nothing\n".as_bytes()),
            Err(Error::EmptyGraph)
        ));
        assert!(matches!(
            load_edge_list("lonely\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn gml_with_values() {
        let text = r#"graph
[
  directed 0
  node [ id 0 label "A" value 1 ]
  node [ id 1 label "B" value 2 ]
  node [ id 5 label "C" value 1 ]
  edge [ source 0 target 1 ]
  edge [ source 1 target 5 ]
  edge [ source 5 target 1 ]
]"#;
        let g = load_gml(text).unwrap();
        assert_eq!(g.graph.node_count(), 3);
        assert_eq!(g.graph.edge_count(), 2);
        assert_eq!(g.names, vec!["A", "B", "C"]);
        assert_eq!(g.classes.unwrap(), vec!["1", "2", "1"]);
        assert_eq!(g.report.duplicate_edges, 1);
    }

    #[test]
    fn gml_unknown_node_is_error() {
        let text = "graph [ node [ id 0 ] edge [ source 0 target 3 ] ]";
        assert!(load_gml(text).is_err());
    }

    #[test]
    fn lcc_tie_break_prefers_smallest_id() {
        let g = Graph::from_edges(6, [(3, 4), (4, 5), (3, 5), (0, 1), (1, 2), (0, 2)]);
        let sub = largest_connected_component(&g).unwrap();
        assert_eq!(sub.original, vec![0, 1, 2]);
        assert_eq!(sub.graph.edge_count(), 3);
    }

    #[test]
    fn lcc_of_connected_graph_is_identity() {
        let g = path(5);
        let sub = largest_connected_component(&g).unwrap();
        assert_eq!(sub.graph, g);
        assert!(largest_connected_component(&Graph::empty(0)).is_err());
    }

    #[test]
    fn jaccard_examples() {
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]);
        assert_eq!(jaccard_neighborhood(&tri, 0, 2), 1.0);
        let p = path(3);
        assert!((jaccard_neighborhood(&p, 0, 2) - 1.0 / 3.0).abs() < 1e-15);
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]);
        assert_eq!(jaccard_neighborhood(&star, 0, 1), 0.5);
        assert_eq!(jaccard_neighborhood(&star, 2, 2), 1.0);
    }

    #[test]
    fn overlay_queries() {
        let g = path(4);
        let mut o = EdgeOverlay::new(&g);
        assert!(o.add_edge(0, 3).unwrap());
        assert!(!o.add_edge(3, 0).unwrap());
        assert!(!o.add_edge(0, 1).unwrap());
        assert!(o.add_edge(0, 2).unwrap());
        assert_eq!(o.neighbors(0), vec![1, 2, 3]);
        assert_eq!(o.degree(0), 3);
        assert_eq!(o.edge_count(), 5);
        assert!(o.has_edge(3, 0));
        assert!(o.add_edge(1, 1).is_err());
        let m = o.materialize();
        assert_eq!(m.edge_count(), 5);
        assert_eq!(m.neighbors(0), &[1, 2, 3]);
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn edges_iterator_is_canonical() {
        let g = Graph::from_edges(4, [(2, 1), (3, 0), (1, 0)]);
        let e: Vec<_> = g.edges().collect();
        assert_eq!(e, vec![(0, 1), (0, 3), (1, 2)]);
    }
}
