//! Network graph, fiber span structure and fixed shortest-path routing.
//!
//! A topology document is line oriented:
//!
//! ```text
//! # comment
//! nodes: A B C
//! link: A B 100
//! link: B C 250
//! ```
//!
//! Every `link:` line describes one undirected fiber and yields two directed
//! links, each of which owns its own slot grid.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;

use thiserror::Error;

/// Index of a node in declaration order.
pub type NodeIndex = usize;

/// Identifier of a directed link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub usize);

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing `nodes:` header")]
    MissingNodes,
    #[error("line {line}: link endpoint `{node}` is not a declared node")]
    DanglingEndpoint { line: usize, node: String },
    #[error("line {line}: link length must be positive, got {length}")]
    NonPositiveLength { line: usize, length: f64 },
    #[error("span length must be positive, got {0}")]
    InvalidSpanLength(f64),
    #[error("topology is disconnected: `{0}` is unreachable from `{1}`")]
    Disconnected(String, String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("source and destination are both `{0}`")]
    SameEndpoints(String),
    #[error("no path from `{0}` to `{1}`")]
    NoPath(String, String),
}

/// One direction of a fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: LinkId,
    pub source: NodeIndex,
    pub destination: NodeIndex,
    pub length_km: f64,
    /// Number of amplified spans, `ceil(length / span length)`.
    pub span_count: u32,
    /// The opposite direction of the same fiber.
    pub reverse: LinkId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub source: NodeIndex,
    pub destination: NodeIndex,
    pub links: Vec<LinkId>,
}

impl Route {
    pub fn uses(&self, link: LinkId) -> bool {
        self.links.contains(&link)
    }
}

#[derive(Debug, Clone)]
pub struct Topology {
    nodes: Vec<String>,
    links: Vec<Link>,
    by_name: HashMap<String, NodeIndex>,
    adjacency: Vec<Vec<LinkId>>,
    span_length_km: f64,
}

/// Number of spans needed to cover `length_km` with spans of `span_length_km`.
pub fn span_count(length_km: f64, span_length_km: f64) -> u32 {
    ((length_km / span_length_km).ceil() as u32).max(1)
}

impl Topology {
    /// Builds a topology from node names and undirected `(a, b, length_km)` fibers.
    pub fn new(
        nodes: Vec<String>,
        fibers: &[(String, String, f64)],
        span_length_km: f64,
    ) -> Result<Self, TopologyError> {
        if !(span_length_km > 0.0) {
            return Err(TopologyError::InvalidSpanLength(span_length_km));
        }
        let by_name: HashMap<String, NodeIndex> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut links = Vec::with_capacity(fibers.len() * 2);
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (line, (a, b, length)) in fibers.iter().enumerate() {
            let lookup = |n: &String| {
                by_name
                    .get(n)
                    .copied()
                    .ok_or_else(|| TopologyError::DanglingEndpoint {
                        line: line + 1,
                        node: n.clone(),
                    })
            };
            let (s, d) = (lookup(a)?, lookup(b)?);
            if !(*length > 0.0) || !length.is_finite() {
                return Err(TopologyError::NonPositiveLength {
                    line: line + 1,
                    length: *length,
                });
            }
            let spans = span_count(*length, span_length_km);
            let fwd = LinkId(links.len());
            let bwd = LinkId(links.len() + 1);
            links.push(Link {
                id: fwd,
                source: s,
                destination: d,
                length_km: *length,
                span_count: spans,
                reverse: bwd,
            });
            links.push(Link {
                id: bwd,
                source: d,
                destination: s,
                length_km: *length,
                span_count: spans,
                reverse: fwd,
            });
            adjacency[s].push(fwd);
            adjacency[d].push(bwd);
        }
        let topo = Topology {
            nodes,
            links,
            by_name,
            adjacency,
            span_length_km,
        };
        topo.check_connected()?;
        Ok(topo)
    }

    fn check_connected(&self) -> Result<(), TopologyError> {
        if self.nodes.is_empty() {
            return Err(TopologyError::MissingNodes);
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for l in &self.adjacency[n] {
                let d = self.links[l.0].destination;
                if !seen[d] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(TopologyError::Disconnected(
                self.nodes[i].clone(),
                self.nodes[0].clone(),
            )),
            None => Ok(()),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    pub fn span_length_km(&self) -> f64 {
        self.span_length_km
    }

    pub fn node_index(&self, name: &str) -> Result<NodeIndex, TopologyError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| TopologyError::UnknownNode(name.to_string()))
    }

    pub fn node_name(&self, index: NodeIndex) -> &str {
        &self.nodes[index]
    }

    /// Human readable `src->dst` label of a directed link.
    pub fn link_name(&self, id: LinkId) -> String {
        let l = self.link(id);
        format!("{}->{}", self.nodes[l.source], self.nodes[l.destination])
    }

    /// Finds a directed link by its `src->dst` (or `src-dst`) label.
    pub fn find_link(&self, label: &str) -> Option<LinkId> {
        let (a, b) = label
            .split_once("->")
            .or_else(|| label.split_once('-'))?;
        let (s, d) = (
            self.by_name.get(a.trim())?,
            self.by_name.get(b.trim())?,
        );
        self.adjacency[*s]
            .iter()
            .copied()
            .find(|l| self.links[l.0].destination == *d)
    }

    pub fn route_length_km(&self, route: &Route) -> f64 {
        route.links.iter().map(|l| self.link(*l).length_km).sum()
    }

    pub fn route_spans(&self, route: &Route) -> u32 {
        route.links.iter().map(|l| self.link(*l).span_count).sum()
    }

    /// Node sequence visited by a route.
    pub fn route_nodes(&self, route: &Route) -> Vec<NodeIndex> {
        let mut seq = vec![route.source];
        seq.extend(route.links.iter().map(|l| self.link(*l).destination));
        seq
    }

    /// Minimum-length route between two nodes.
    ///
    /// Equal-length paths are ordered by their node sequence (node indices in
    /// declaration order), computed from the lower-indexed endpoint; the route
    /// for the opposite direction is the same path reversed.
    pub fn shortest_path(
        &self,
        source: NodeIndex,
        destination: NodeIndex,
    ) -> Result<Route, TopologyError> {
        if source >= self.nodes.len() {
            return Err(TopologyError::UnknownNode(source.to_string()));
        }
        if destination >= self.nodes.len() {
            return Err(TopologyError::UnknownNode(destination.to_string()));
        }
        if source == destination {
            return Err(TopologyError::SameEndpoints(self.nodes[source].clone()));
        }
        let (lo, hi) = (source.min(destination), source.max(destination));
        let nodes = self
            .dijkstra(lo, hi)
            .ok_or_else(|| TopologyError::NoPath(self.nodes[lo].clone(), self.nodes[hi].clone()))?;
        let nodes: Vec<NodeIndex> = if source == lo {
            nodes
        } else {
            nodes.into_iter().rev().collect()
        };
        let links = nodes
            .windows(2)
            .map(|w| {
                self.adjacency[w[0]]
                    .iter()
                    .copied()
                    .filter(|l| self.links[l.0].destination == w[1])
                    .min_by(|a, b| {
                        self.links[a.0]
                            .length_km
                            .total_cmp(&self.links[b.0].length_km)
                    })
                    .expect("consecutive path nodes are adjacent")
            })
            .collect();
        Ok(Route {
            source,
            destination,
            links,
        })
    }

    /// Dijkstra over labels `(distance, node sequence)`; returns the node sequence.
    fn dijkstra(&self, source: NodeIndex, destination: NodeIndex) -> Option<Vec<NodeIndex>> {
        #[derive(PartialEq)]
        struct Label {
            dist: f64,
            path: Vec<NodeIndex>,
        }
        impl Eq for Label {}
        impl Ord for Label {
            fn cmp(&self, other: &Self) -> Ordering {
                // reversed: BinaryHeap is a max-heap
                other
                    .dist
                    .total_cmp(&self.dist)
                    .then_with(|| other.path.cmp(&self.path))
            }
        }
        impl PartialOrd for Label {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let mut best: Vec<Option<Label>> = (0..self.nodes.len()).map(|_| None).collect();
        let mut done = vec![false; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        heap.push(Label {
            dist: 0.0,
            path: vec![source],
        });
        while let Some(label) = heap.pop() {
            let node = *label.path.last().unwrap();
            if done[node] {
                continue;
            }
            done[node] = true;
            if node == destination {
                return Some(label.path);
            }
            for l in &self.adjacency[node] {
                let link = &self.links[l.0];
                let next = link.destination;
                if done[next] {
                    continue;
                }
                let mut path = label.path.clone();
                path.push(next);
                let cand = Label {
                    dist: label.dist + link.length_km,
                    path,
                };
                let better = match &best[next] {
                    None => true,
                    Some(b) => cand > *b,
                };
                if better {
                    best[next] = Some(Label {
                        dist: cand.dist,
                        path: cand.path.clone(),
                    });
                    heap.push(cand);
                }
            }
        }
        None
    }

    /// Shortest routes for every ordered node pair.
    pub fn route_table(&self) -> Result<RouteTable, TopologyError> {
        let n = self.nodes.len();
        let mut routes = BTreeMap::new();
        for s in 0..n {
            for d in 0..n {
                if s != d {
                    routes.insert((s, d), self.shortest_path(s, d)?);
                }
            }
        }
        Ok(RouteTable { routes })
    }
}

/// Fixed route per ordered node pair, computed once.
#[derive(Debug, Clone)]
pub struct RouteTable {
    routes: BTreeMap<(NodeIndex, NodeIndex), Route>,
}

impl RouteTable {
    pub fn get(&self, source: NodeIndex, destination: NodeIndex) -> Option<&Route> {
        self.routes.get(&(source, destination))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Route> {
        self.routes.values()
    }
}

/// Parses a topology document (see module docs).
pub fn load_topology(document: &str, span_length_km: f64) -> Result<Topology, TopologyError> {
    let mut nodes: Option<Vec<String>> = None;
    let mut fibers = Vec::new();
    let mut fiber_lines = Vec::new();
    for (i, raw) in document.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |message: &str| TopologyError::Malformed {
            line: line_no,
            message: message.to_string(),
        };
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| malformed("expected `nodes:` or `link:`"))?;
        match key.trim() {
            "nodes" => {
                if nodes.is_some() {
                    return Err(malformed("duplicate `nodes:` header"));
                }
                let list: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if list.is_empty() {
                    return Err(malformed("empty node list"));
                }
                let mut sorted = list.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != list.len() {
                    return Err(malformed("duplicate node id"));
                }
                nodes = Some(list);
            }
            "link" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(malformed("expected `link: <src> <dst> <length_km>`"));
                }
                let length: f64 = parts[2]
                    .parse()
                    .map_err(|_| malformed("length is not a number"))?;
                if parts[0] == parts[1] {
                    return Err(malformed("self loop"));
                }
                fibers.push((parts[0].to_string(), parts[1].to_string(), length));
                fiber_lines.push(line_no);
            }
            other => return Err(malformed(&format!("unknown key `{other}`"))),
        }
    }
    let nodes = nodes.ok_or(TopologyError::MissingNodes)?;
    // map the per-fiber error position back to the document line
    Topology::new(nodes, &fibers, span_length_km).map_err(|e| match e {
        TopologyError::DanglingEndpoint { line, node } => TopologyError::DanglingEndpoint {
            line: fiber_lines[line - 1],
            node,
        },
        TopologyError::NonPositiveLength { line, length } => TopologyError::NonPositiveLength {
            line: fiber_lines[line - 1],
            length,
        },
        other => other,
    })
}

/// The 14-node, 21-fiber NSFNet shipped with the simulator.
pub const NSFNET: &str = include_str!("../../../data/nsfnet.topo");
