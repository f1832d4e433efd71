use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of a mode inside one [`CircuitState`](super::CircuitState). Ids are never reused,
/// so a measured mode keeps its id as a dead slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RecordId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolId(pub u32);

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// What a symbol stands for.
///
/// Vacuum symbols are tagged with the mode that introduced them, so the pair
/// `VacX(m)`/`VacY(m)` is canonically conjugate and everything else commutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymbolKind {
    SignalX,
    SignalY,
    VacX(ModeId),
    VacY(ModeId),
    Record(RecordId),
}

/// One independent quadrature noise source or measurement record.
///
/// Ordering is by id first, which is creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub id: SymbolId,
    pub kind: SymbolKind,
}

impl Symbol {
    pub fn is_record(&self) -> bool {
        matches!(self.kind, SymbolKind::Record(_))
    }

    pub fn is_signal(&self) -> bool {
        matches!(self.kind, SymbolKind::SignalX | SymbolKind::SignalY)
    }

    /// Label of the canonical pair this symbol belongs to, if any.
    pub(crate) fn pair(&self) -> Option<(PairKey, Quadrature)> {
        match self.kind {
            SymbolKind::SignalX => Some((PairKey::Signal, Quadrature::X)),
            SymbolKind::SignalY => Some((PairKey::Signal, Quadrature::Y)),
            SymbolKind::VacX(m) => Some((PairKey::Vacuum(m), Quadrature::X)),
            SymbolKind::VacY(m) => Some((PairKey::Vacuum(m), Quadrature::Y)),
            SymbolKind::Record(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum PairKey {
    Signal,
    Vacuum(ModeId),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SymbolKind::SignalX => write!(f, "x_in"),
            SymbolKind::SignalY => write!(f, "y_in"),
            SymbolKind::VacX(m) => write!(f, "x0_{}", m.0),
            SymbolKind::VacY(m) => write!(f, "y0_{}", m.0),
            SymbolKind::Record(r) => write!(f, "rec_{}", r.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quadrature {
    X,
    Y,
}

impl Quadrature {
    pub const BOTH: [Quadrature; 2] = [Quadrature::X, Quadrature::Y];
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quadrature::X => write!(f, "x"),
            Quadrature::Y => write!(f, "y"),
        }
    }
}
