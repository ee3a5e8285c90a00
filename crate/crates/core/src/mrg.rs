//! Multi-task relational graph (MRG) over the clauses of a document.
//!
//! Each clause i contributes three nodes: a cause node `c_i`, a tag node
//! `t_i` and an emotion node `e_i`, so a document of n clauses yields 3n
//! nodes. Edges are local (clause distance at most gamma) and typed by the
//! task pair plus, for tag-emotion edges, the signed clause distance.
//! Message passing reads edges source-to-target, and the graph is
//! direction-symmetric: every edge has a reverse with the mirrored type.
//!
//! Ablation variants:
//! * `full` - the complete typed rule set.
//! * `owm` - one-way message passing; edges leaving tag nodes toward cause
//!   or emotion nodes are removed.
//! * `norel` - full topology, all edges collapsed to one untyped kind.
//! * `fcg` - local same-task edges plus tag nodes fully connected to every
//!   cause and emotion node, all untyped.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which of the three per-clause prediction tasks a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Task {
    Cause,
    Tag,
    Emotion,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Cause, Task::Tag, Task::Emotion];

    /// Stable rank used for matrix stacking: cause 0, tag 1, emotion 2.
    pub fn rank(self) -> usize {
        match self {
            Task::Cause => 0,
            Task::Tag => 1,
            Task::Emotion => 2,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            Task::Cause => "c",
            Task::Tag => "t",
            Task::Emotion => "e",
        }
    }
}

/// A node of the graph: one task slot of one clause (1-based index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub task: Task,
    pub clause_index: usize,
}

impl NodeId {
    pub fn new(task: Task, clause_index: usize) -> Self {
        NodeId { task, clause_index }
    }
}

/// Nodes order by clause first, then cause < tag < emotion, which fixes the
/// neighbor ordering used everywhere.
impl Ord for NodeId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.clause_index, self.task).cmp(&(other.clause_index, other.task))
    }
}

impl PartialOrd for NodeId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.task.letter(), self.clause_index)
    }
}

/// Edge type. Same-task edges and the same-clause cause/tag link carry no
/// distance; tag-emotion edges carry the signed clause distance of the
/// target relative to the source. `Untyped` is the single kind used by the
/// `norel` and `fcg` variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    CauseCause,
    TagTag,
    EmotionEmotion,
    CauseTag,
    TagCause,
    TagEmotion(i64),
    EmotionTag(i64),
    Untyped,
}

impl Relation {
    /// Every relation kind a variant can use, in a fixed order. Counts
    /// 5 + 2(2γ+1) for the typed variants; `owm` drops the kinds whose
    /// edges it deletes, and the untyped variants use a single kind.
    pub fn all(gamma: usize, variant: MrgVariant) -> Vec<Relation> {
        let g = gamma as i64;
        match variant {
            MrgVariant::Norel | MrgVariant::Fcg => vec![Relation::Untyped],
            MrgVariant::Full | MrgVariant::Owm => {
                let mut kinds = vec![
                    Relation::CauseCause,
                    Relation::TagTag,
                    Relation::EmotionEmotion,
                    Relation::CauseTag,
                ];
                if variant == MrgVariant::Full {
                    kinds.push(Relation::TagCause);
                    kinds.extend((-g..=g).map(Relation::TagEmotion));
                }
                kinds.extend((-g..=g).map(Relation::EmotionTag));
                kinds
            }
        }
    }

    /// The kind carried by the reverse of an edge of this kind.
    pub fn reverse(self) -> Relation {
        match self {
            Relation::CauseTag => Relation::TagCause,
            Relation::TagCause => Relation::CauseTag,
            Relation::TagEmotion(d) => Relation::EmotionTag(-d),
            Relation::EmotionTag(d) => Relation::TagEmotion(-d),
            same_task_or_untyped => same_task_or_untyped,
        }
    }

    /// Short stable name, used for parameter keys and DOT labels.
    pub fn label(self) -> String {
        match self {
            Relation::CauseCause => "cc".into(),
            Relation::TagTag => "tt".into(),
            Relation::EmotionEmotion => "ee".into(),
            Relation::CauseTag => "ct".into(),
            Relation::TagCause => "tc".into(),
            Relation::TagEmotion(d) => format!("te{d:+}"),
            Relation::EmotionTag(d) => format!("et{d:+}"),
            Relation::Untyped => "untyped".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MrgVariant {
    Full,
    Owm,
    Norel,
    Fcg,
}

impl MrgVariant {
    pub const ALL: [MrgVariant; 4] =
        [MrgVariant::Full, MrgVariant::Owm, MrgVariant::Norel, MrgVariant::Fcg];
}

impl fmt::Display for MrgVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MrgVariant::Full => "full",
            MrgVariant::Owm => "owm",
            MrgVariant::Norel => "norel",
            MrgVariant::Fcg => "fcg",
        };
        f.write_str(name)
    }
}

impl FromStr for MrgVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(MrgVariant::Full),
            "owm" => Ok(MrgVariant::Owm),
            "norel" => Ok(MrgVariant::Norel),
            "fcg" => Ok(MrgVariant::Fcg),
            other => Err(format!(
                "unknown graph variant '{other}' (expected full, owm, norel or fcg)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub relation: Relation,
}

/// The graph for a document of `n` clauses. Construction is purely
/// structural, so a graph depends only on `(n, gamma, variant)` and can be
/// cached and shared freely; it is immutable afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mrg {
    pub n: usize,
    pub gamma: usize,
    pub variant: MrgVariant,
    pub edges: BTreeSet<Edge>,
}

/// Relation kind for an ordered node pair under the `full` rules, if the
/// pair is connected. Self links (same clause, same task) are never edges;
/// that path is the separate self weight of the graph transformation.
fn full_relation(source: NodeId, target: NodeId, gamma: i64) -> Option<Relation> {
    let rdis = target.clause_index as i64 - source.clause_index as i64;
    match (source.task, target.task) {
        (a, b) if a == b => {
            (rdis != 0 && rdis.abs() <= gamma).then(|| match a {
                Task::Cause => Relation::CauseCause,
                Task::Tag => Relation::TagTag,
                Task::Emotion => Relation::EmotionEmotion,
            })
        }
        (Task::Cause, Task::Tag) => (rdis == 0).then_some(Relation::CauseTag),
        (Task::Tag, Task::Cause) => (rdis == 0).then_some(Relation::TagCause),
        (Task::Tag, Task::Emotion) => (rdis.abs() <= gamma).then_some(Relation::TagEmotion(rdis)),
        (Task::Emotion, Task::Tag) => (rdis.abs() <= gamma).then_some(Relation::EmotionTag(rdis)),
        _ => None,
    }
}

impl Mrg {
    pub fn build(n: usize, gamma: usize, variant: MrgVariant) -> Mrg {
        assert!(n >= 1, "graph needs at least one clause");
        assert!(gamma >= 1, "span limit must be at least 1");
        let g = gamma as i64;
        let mut edges = BTreeSet::new();
        for source in Self::node_iter(n) {
            for target in Self::node_iter(n) {
                let relation = match variant {
                    MrgVariant::Full => full_relation(source, target, g),
                    MrgVariant::Owm => full_relation(source, target, g).filter(|_| {
                        !(source.task == Task::Tag && target.task != Task::Tag)
                    }),
                    MrgVariant::Norel => {
                        full_relation(source, target, g).map(|_| Relation::Untyped)
                    }
                    MrgVariant::Fcg => {
                        let rdis = target.clause_index as i64 - source.clause_index as i64;
                        let connected = match (source.task, target.task) {
                            (a, b) if a == b => rdis != 0 && rdis.abs() <= g,
                            (Task::Tag, _) | (_, Task::Tag) => true,
                            _ => false,
                        };
                        connected.then_some(Relation::Untyped)
                    }
                };
                if let Some(relation) = relation {
                    edges.insert(Edge { source, target, relation });
                }
            }
        }
        Mrg { n, gamma, variant, edges }
    }

    fn node_iter(n: usize) -> impl Iterator<Item = NodeId> {
        (1..=n).flat_map(|i| Task::ALL.into_iter().map(move |t| NodeId::new(t, i)))
    }

    /// All 3n nodes in clause-major order.
    pub fn nodes(&self) -> Vec<NodeId> {
        Self::node_iter(self.n).collect()
    }

    /// Row of a node in the stacked 3n-row state matrix: task-major, so
    /// cause rows come first, then tag, then emotion.
    pub fn node_index(&self, node: NodeId) -> usize {
        node.task.rank() * self.n + (node.clause_index - 1)
    }

    /// Sources of all edges into `node` under `relation`, ordered by clause
    /// index then task.
    pub fn neighbors(&self, node: NodeId, relation: Relation) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .edges
            .iter()
            .filter(|e| e.target == node && e.relation == relation)
            .map(|e| e.source)
            .collect();
        out.sort();
        out
    }

    /// DOT rendering with one line per node and per edge.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph mrg {\n");
        for node in self.nodes() {
            out.push_str(&format!("  {node};\n"));
        }
        for edge in &self.edges {
            out.push_str(&format!(
                "  {} -> {} [label=\"{}\"];\n",
                edge.source,
                edge.target,
                edge.relation.label()
            ));
        }
        out.push_str("}\n");
        out
    }

    /// Edge list as JSON rows `[source_task, source_idx, target_task,
    /// target_idx, relation]`.
    pub fn to_edge_list_json(&self) -> String {
        let rows: Vec<(String, usize, String, usize, String)> = self
            .edges
            .iter()
            .map(|e| {
                (
                    e.source.task.letter().to_string(),
                    e.source.clause_index,
                    e.target.task.letter().to_string(),
                    e.target.clause_index,
                    e.relation.label(),
                )
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("edge list serialization cannot fail")
    }
}
