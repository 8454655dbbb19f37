//! The cell search space: 15,625 cells over a fixed 4-node DAG with six
//! edges, each carrying one of five operators.
//!
//! Canonical indices are the base-5 value of the edge list, first edge most
//! significant. [`BenchmarkOrder`] provides the shuffled listing that
//! experiment ranges such as `[0, 899]` are taken from.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_EDGES: usize = 6;
pub const NUM_OPERATORS: usize = 5;
pub const NUM_ARCHITECTURES: usize = 15_625;
pub const NUM_VARIANTS: usize = 15;
pub const ENCODING_LEN: usize = NUM_EDGES * NUM_OPERATORS;
pub const CHANNEL_WIDTHS: [u32; 3] = [16, 32, 64];

/// Source and target node of every edge, in canonical edge order.
pub const EDGE_NODES: [(usize, usize); NUM_EDGES] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    None,
    SkipConnect,
    Conv1x1,
    Conv3x3,
    AvgPool3x3,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; NUM_OPERATORS] = [
        OperatorKind::None,
        OperatorKind::SkipConnect,
        OperatorKind::Conv1x1,
        OperatorKind::Conv3x3,
        OperatorKind::AvgPool3x3,
    ];

    /// Position in the fixed operator order.
    pub fn order(self) -> usize {
        self as usize
    }

    pub fn from_order(order: usize) -> Option<Self> {
        Self::ALL.get(order).copied()
    }

    pub fn is_conv(self) -> bool {
        matches!(self, OperatorKind::Conv1x1 | OperatorKind::Conv3x3)
    }

    /// Operator name as written in NAS-Bench-201 architecture strings.
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::None => "none",
            OperatorKind::SkipConnect => "skip_connect",
            OperatorKind::Conv1x1 => "nor_conv_1x1",
            OperatorKind::Conv3x3 => "nor_conv_3x3",
            OperatorKind::AvgPool3x3 => "avg_pool_3x3",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Structural(format!("unknown operator `{s}`")))
    }
}

/// One cell of the search space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellArchitecture {
    index: usize,
    edges: [OperatorKind; NUM_EDGES],
}

impl CellArchitecture {
    pub fn from_edges(edges: [OperatorKind; NUM_EDGES]) -> Self {
        let index = edges.iter().fold(0usize, |acc, op| acc * NUM_OPERATORS + op.order());
        CellArchitecture { index, edges }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn edges(&self) -> &[OperatorKind; NUM_EDGES] {
        &self.edges
    }

    pub fn count(&self, kind: OperatorKind) -> usize {
        self.edges.iter().filter(|&&e| e == kind).count()
    }

    /// Fraction of non-`none` edges that are convolutions; zero for an
    /// empty cell.
    pub fn fusable_fraction(&self) -> f64 {
        let active = NUM_EDGES - self.count(OperatorKind::None);
        if active == 0 {
            return 0.0;
        }
        let convs = self.edges.iter().filter(|e| e.is_conv()).count();
        convs as f64 / active as f64
    }
}

/// NAS-Bench-201 string form, e.g. `|nor_conv_3x3~0|+|none~0|skip_connect~1|+|...|`.
impl fmt::Display for CellArchitecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.edges;
        write!(
            f,
            "|{}~0|+|{}~0|{}~1|+|{}~0|{}~1|{}~2|",
            e[0], e[1], e[3], e[2], e[4], e[5]
        )
    }
}

impl FromStr for CellArchitecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let nodes: Vec<&str> = s.trim().trim_matches('|').split("|+|").collect();
        if nodes.len() != 3 {
            return Err(Error::Structural(format!(
                "expected 3 node groups in `{s}`, found {}",
                nodes.len()
            )));
        }
        let mut edges = [OperatorKind::None; NUM_EDGES];
        let mut seen = [false; NUM_EDGES];
        for (node_minus_one, group) in nodes.iter().enumerate() {
            let target = node_minus_one + 1;
            for token in group.split('|') {
                let (op, src) = token
                    .split_once('~')
                    .ok_or_else(|| Error::Structural(format!("malformed edge `{token}`")))?;
                let src: usize = src
                    .parse()
                    .map_err(|_| Error::Structural(format!("malformed source in `{token}`")))?;
                let slot = EDGE_NODES
                    .iter()
                    .position(|&(a, b)| a == src && b == target)
                    .ok_or_else(|| Error::Structural(format!("no edge {src}->{target}")))?;
                if seen[slot] {
                    return Err(Error::Structural(format!("edge {src}->{target} repeated")));
                }
                seen[slot] = true;
                edges[slot] = op.parse()?;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Structural(format!("missing edges in `{s}`")));
        }
        Ok(CellArchitecture::from_edges(edges))
    }
}

/// Expands `index` into its base-5 edge list.
pub fn architecture_from_index(index: usize) -> Result<CellArchitecture> {
    if index >= NUM_ARCHITECTURES {
        return Err(Error::Range(format!(
            "architecture index {index} outside [0, {}]",
            NUM_ARCHITECTURES - 1
        )));
    }
    let mut edges = [OperatorKind::None; NUM_EDGES];
    let mut rest = index;
    for slot in edges.iter_mut().rev() {
        *slot = OperatorKind::ALL[rest % NUM_OPERATORS];
        rest /= NUM_OPERATORS;
    }
    Ok(CellArchitecture { index, edges })
}

/// Every architecture in canonical order.
pub fn all_architectures() -> impl Iterator<Item = CellArchitecture> {
    (0..NUM_ARCHITECTURES).map(|i| architecture_from_index(i).expect("in range"))
}

/// Per-edge one-hot encoding: six blocks of five.
pub fn encode_architecture(arch: &CellArchitecture) -> [f64; ENCODING_LEN] {
    let mut out = [0.0; ENCODING_LEN];
    for (e, op) in arch.edges.iter().enumerate() {
        out[e * NUM_OPERATORS + op.order()] = 1.0;
    }
    out
}

/// An operator kind at one of the three channel widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperatorVariant {
    kind: OperatorKind,
    channels: u32,
}

impl OperatorVariant {
    pub fn new(kind: OperatorKind, channels: u32) -> Result<Self> {
        if !CHANNEL_WIDTHS.contains(&channels) {
            return Err(Error::Structural(format!(
                "channel width {channels} not one of {CHANNEL_WIDTHS:?}"
            )));
        }
        Ok(OperatorVariant { kind, channels })
    }

    pub fn from_index(index: usize) -> Result<Self> {
        if index >= NUM_VARIANTS {
            return Err(Error::Structural(format!("variant index {index} outside [0, 14]")));
        }
        Ok(OperatorVariant {
            kind: OperatorKind::ALL[index / 3],
            channels: CHANNEL_WIDTHS[index % 3],
        })
    }

    pub fn all() -> impl Iterator<Item = OperatorVariant> {
        (0..NUM_VARIANTS).map(|i| OperatorVariant::from_index(i).expect("in range"))
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn channels(&self) -> u32 {
        self.channels
    }

    /// Stage this width belongs to (0, 1 or 2).
    pub fn stage(&self) -> usize {
        CHANNEL_WIDTHS
            .iter()
            .position(|&c| c == self.channels)
            .expect("validated width")
    }

    pub fn index(&self) -> usize {
        self.kind.order() * 3 + self.stage()
    }
}

impl fmt::Display for OperatorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.kind, self.channels)
    }
}

/// Macro skeleton: three stages of widths 16/32/64, each repeating the cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroConfig {
    cells_per_stage: usize,
}

impl MacroConfig {
    pub const STAGES: usize = 3;

    pub fn new(cells_per_stage: usize) -> Result<Self> {
        if cells_per_stage == 0 {
            return Err(Error::Range("cells_per_stage must be positive".into()));
        }
        Ok(MacroConfig { cells_per_stage })
    }

    pub fn cells_per_stage(&self) -> usize {
        self.cells_per_stage
    }
}

impl Default for MacroConfig {
    fn default() -> Self {
        MacroConfig { cells_per_stage: 5 }
    }
}

/// Number of occurrences of each operator variant in the full network,
/// indexed by variant index. `none` edges contribute nothing.
pub fn operator_multiset(arch: &CellArchitecture, macro_cfg: &MacroConfig) -> [u32; NUM_VARIANTS] {
    let mut counts = [0u32; NUM_VARIANTS];
    for op in arch.edges.iter().filter(|&&op| op != OperatorKind::None) {
        for stage in 0..MacroConfig::STAGES {
            counts[op.order() * 3 + stage] += macro_cfg.cells_per_stage as u32;
        }
    }
    counts
}

/// Fixed shuffled listing of the search space.
///
/// Position `p` maps to canonical index `4093 * p mod 15625`. The multiplier
/// is coprime to 5, so the map is a bijection, and consecutive positions
/// spread over all edge digits. Position 0 is the all-`none` cell.
#[derive(Debug, Clone, Copy, Default)]
pub struct BenchmarkOrder;

impl BenchmarkOrder {
    const MULTIPLIER: u64 = 4093;
    const INVERSE: u64 = 10082;

    pub fn canonical_index(position: usize) -> Result<usize> {
        if position >= NUM_ARCHITECTURES {
            return Err(Error::Range(format!(
                "benchmark position {position} outside [0, {}]",
                NUM_ARCHITECTURES - 1
            )));
        }
        Ok(((position as u64 * Self::MULTIPLIER) % NUM_ARCHITECTURES as u64) as usize)
    }

    pub fn position_of(canonical: usize) -> Result<usize> {
        if canonical >= NUM_ARCHITECTURES {
            return Err(Error::Range(format!(
                "architecture index {canonical} outside [0, {}]",
                NUM_ARCHITECTURES - 1
            )));
        }
        Ok(((canonical as u64 * Self::INVERSE) % NUM_ARCHITECTURES as u64) as usize)
    }

    pub fn architecture_at(position: usize) -> Result<CellArchitecture> {
        architecture_from_index(Self::canonical_index(position)?)
    }

    /// Canonical indices of positions `lo..=hi`.
    pub fn canonical_range(range: PositionRange) -> Result<Vec<usize>> {
        (range.lo..=range.hi).map(Self::canonical_index).collect()
    }
}

/// Inclusive range of benchmark positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct PositionRange {
    pub lo: usize,
    pub hi: usize,
}

impl PositionRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi || hi >= NUM_ARCHITECTURES {
            return Err(Error::Range(format!(
                "range [{lo}, {hi}] is not within [0, {}]",
                NUM_ARCHITECTURES - 1
            )));
        }
        Ok(PositionRange { lo, hi })
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlaps(&self, other: &PositionRange) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

impl TryFrom<[usize; 2]> for PositionRange {
    type Error = Error;

    fn try_from(v: [usize; 2]) -> Result<Self> {
        PositionRange::new(v[0], v[1])
    }
}

impl From<PositionRange> for [usize; 2] {
    fn from(r: PositionRange) -> Self {
        [r.lo, r.hi]
    }
}

impl fmt::Display for PositionRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for PositionRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| Error::Range(format!("expected `lo..hi`, got `{s}`")))?;
        let lo = lo
            .trim()
            .parse()
            .map_err(|_| Error::Range(format!("bad bound in `{s}`")))?;
        let hi = hi
            .trim()
            .parse()
            .map_err(|_| Error::Range(format!("bad bound in `{s}`")))?;
        PositionRange::new(lo, hi)
    }
}
