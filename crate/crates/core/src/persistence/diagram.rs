use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::graph::FiltrationWeight;

/// Death coordinate of a persistence point. Essential classes never die.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Death {
    Finite(FiltrationWeight),
    Infinite,
}

impl Death {
    pub fn finite(self) -> Option<FiltrationWeight> {
        match self {
            Death::Finite(w) => Some(w),
            Death::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Death::Infinite)
    }

    /// The death as a float, with infinity replaced by `cap`.
    pub fn capped(self, cap: f64) -> f64 {
        match self {
            Death::Finite(w) => w.get(),
            Death::Infinite => cap,
        }
    }
}

impl Ord for Death {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Death::Finite(a), Death::Finite(b)) => a.cmp(b),
            (Death::Finite(_), Death::Infinite) => Ordering::Less,
            (Death::Infinite, Death::Finite(_)) => Ordering::Greater,
            (Death::Infinite, Death::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Death {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Death {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Death::Finite(w) => w.fmt(f),
            Death::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Death {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Death::Finite(w) => s.serialize_f64(w.get()),
            Death::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Death {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => FiltrationWeight::new(x)
                .map(Death::Finite)
                .map_err(de::Error::custom),
            Repr::Str(s) if s == "inf" || s == "+inf" || s == "Infinity" => Ok(Death::Infinite),
            Repr::Str(s) => Err(de::Error::custom(format!("bad death value `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PdPoint {
    pub birth: FiltrationWeight,
    pub death: Death,
}

impl PdPoint {
    pub fn new(birth: FiltrationWeight, death: Death) -> Self {
        debug_assert!(death.finite().is_none_or(|d| birth <= d));
        PdPoint { birth, death }
    }

    pub fn essential(birth: FiltrationWeight) -> Self {
        PdPoint {
            birth,
            death: Death::Infinite,
        }
    }

    pub fn finite(birth: FiltrationWeight, death: FiltrationWeight) -> Self {
        PdPoint::new(birth, Death::Finite(death))
    }

    pub fn persistence(&self) -> f64 {
        match self.death {
            Death::Finite(d) => d.get() - self.birth.get(),
            Death::Infinite => f64::INFINITY,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.death == Death::Finite(self.birth)
    }
}

impl Serialize for PdPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&self.birth.get())?;
        seq.serialize_element(&self.death)?;
        seq.end()
    }
}

impl<'de> Deserialize<'de> for PdPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (birth, death): (FiltrationWeight, Death) = Deserialize::deserialize(d)?;
        if death.finite().is_some_and(|dv| dv < birth) {
            return Err(de::Error::custom("death precedes birth"));
        }
        Ok(PdPoint { birth, death })
    }
}

/// A multiset of persistence points in one homological dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub dim: u8,
    pub points: Vec<PdPoint>,
}

impl PersistenceDiagram {
    pub fn new(dim: u8, points: Vec<PdPoint>) -> Self {
        PersistenceDiagram { dim, points }
    }

    pub fn empty(dim: u8) -> Self {
        PersistenceDiagram::new(dim, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in ascending (birth, death) order, the canonical form used
    /// for multiset comparison and serialization.
    pub fn sorted(mut self) -> Self {
        // integer key with the same order as `PdPoint::cmp`
        self.points.sort_unstable_by_key(|p| {
            let death = p.death.finite().map_or(u64::MAX, FiltrationWeight::to_bits);
            ((p.birth.to_bits() as u128) << 64) | death as u128
        });
        self
    }

    /// Drops the zero-persistence points.
    pub fn positive(&self) -> Self {
        PersistenceDiagram::new(
            self.dim,
            self.points
                .iter()
                .copied()
                .filter(|p| !p.is_diagonal())
                .collect(),
        )
    }

    pub fn multiset_eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.points.len() == other.points.len()
            && self.clone().sorted().points == other.clone().sorted().points
    }

    pub fn essential_count(&self) -> usize {
        self.points.iter().filter(|p| p.death.is_infinite()).count()
    }

    /// `(birth, death)` pairs with infinite deaths replaced by `cap`.
    pub fn capped(&self, cap: f64) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.birth.get(), p.death.capped(cap).max(p.birth.get())))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointClass {
    /// Born and later merged into an older component.
    Paired,
    /// Never dies.
    Unpaired,
    /// Dies at its own birth.
    Disappearing,
}

impl PointClass {
    pub fn of(point: &PdPoint) -> Self {
        match point.death {
            Death::Infinite => PointClass::Unpaired,
            Death::Finite(d) if d > point.birth => PointClass::Paired,
            Death::Finite(_) => PointClass::Disappearing,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgePoint {
    pub point: PdPoint,
    pub class: PointClass,
}

impl EdgePoint {
    pub fn new(point: PdPoint) -> Self {
        EdgePoint {
            point,
            class: PointClass::of(&point),
        }
    }
}

/// One degree-0 point per original edge, indexed by edge id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgePointMap {
    entries: Vec<EdgePoint>,
}

impl EdgePointMap {
    pub fn new(entries: Vec<EdgePoint>) -> Self {
        EdgePointMap { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, edge: usize) -> &EdgePoint {
        &self.entries[edge]
    }

    pub fn entries(&self) -> &[EdgePoint] {
        &self.entries
    }

    pub fn count(&self, class: PointClass) -> usize {
        self.entries.iter().filter(|e| e.class == class).count()
    }

    pub fn as_diagram(&self) -> PersistenceDiagram {
        PersistenceDiagram::new(0, self.entries.iter().map(|e| e.point).collect())
    }
}

impl Serialize for EdgePointMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.entries.len()))?;
        for (id, e) in self.entries.iter().enumerate() {
            map.serialize_entry(&id.to_string(), e)?;
        }
        map.end()
    }
}
