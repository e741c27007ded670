//! The staggered cell-board external field and its zero-temperature
//! energetics.
//!
//! The plane is tiled by `L1 x L2` rectangular cells colored like a
//! chess board; the external field takes the value `+h` on white cells
//! and `-h` on black cells. An infinite axis means the field is
//! constant along that direction (stripe models).

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One cell dimension: a finite positive length or infinite extent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellSize {
    Finite(u32),
    Infinite,
}

impl CellSize {
    pub fn finite(len: u32) -> Result<Self> {
        if len == 0 {
            return Err(Error::Parameter("cell size must be >= 1".into()));
        }
        Ok(CellSize::Finite(len))
    }

    /// Cell index of a lattice coordinate along this axis.
    ///
    /// Uses floored division so the chess-board pattern continues
    /// correctly through negative coordinates; an infinite axis puts
    /// every coordinate in cell 0.
    pub fn cell_index(&self, coord: i64) -> i64 {
        match self {
            CellSize::Finite(l) => coord.div_euclid(i64::from(*l)),
            CellSize::Infinite => 0,
        }
    }

    /// `1/L`, with `1/inf = 0`.
    pub fn inv(&self) -> f64 {
        match self {
            CellSize::Finite(l) => 1.0 / f64::from(*l),
            CellSize::Infinite => 0.0,
        }
    }

    /// Field period along this axis (`2 L`), if the axis is finite.
    pub fn period(&self) -> Option<i64> {
        match self {
            CellSize::Finite(l) => Some(2 * i64::from(*l)),
            CellSize::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, CellSize::Finite(_))
    }

    /// Parses either a positive integer or the token `inf`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") {
            return Ok(CellSize::Infinite);
        }
        let len: u32 = t
            .parse()
            .map_err(|_| Error::Parameter(format!("cell size must be a positive integer or \"inf\", got {t:?}")))?;
        CellSize::finite(len)
    }
}

impl fmt::Display for CellSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellSize::Finite(l) => write!(f, "{l}"),
            CellSize::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for CellSize {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CellSize::Finite(l) => serializer.serialize_u32(*l),
            CellSize::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for CellSize {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct CellSizeVisitor;

        impl Visitor<'_> for CellSizeVisitor {
            type Value = CellSize;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive integer or the string \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<CellSize, E> {
                let len = u32::try_from(v).map_err(|_| E::custom("cell size too large"))?;
                CellSize::finite(len).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<CellSize, E> {
                if v <= 0 {
                    return Err(E::custom("cell size must be >= 1"));
                }
                self.visit_u64(v as u64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<CellSize, E> {
                CellSize::parse(v).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(CellSizeVisitor)
    }
}

/// Cell sizes plus field amplitude; generates the staggered field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    #[serde(rename = "L1")]
    pub l1: CellSize,
    #[serde(rename = "L2")]
    pub l2: CellSize,
    pub h: f64,
}

impl FieldSpec {
    pub fn new(l1: CellSize, l2: CellSize, h: f64) -> Result<Self> {
        if !h.is_finite() || h < 0.0 {
            return Err(Error::Parameter(format!("field amplitude h must be finite and >= 0, got {h}")));
        }
        Ok(FieldSpec { l1, l2, h })
    }

    /// Sign of the field at a lattice site: `+1` on white cells,
    /// `-1` on black cells.
    pub fn sign_at(&self, site: (i64, i64)) -> i8 {
        let cells = self.l1.cell_index(site.0) + self.l2.cell_index(site.1);
        if cells.rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }

    /// Field value `h(s)` at a lattice site.
    pub fn value_at(&self, site: (i64, i64)) -> f64 {
        // Normalizing -0.0 to +0.0 keeps h = 0 placements identical.
        f64::from(self.sign_at(site)) * self.h + 0.0
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(L1={}, L2={}, h={})", self.l1, self.l2, self.h)
    }
}

/// Coupling constant plus field specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Ferromagnetic coupling J > 0.
    #[serde(rename = "J")]
    pub j: f64,
    pub field: FieldSpec,
}

impl ModelParams {
    pub fn new(j: f64, field: FieldSpec) -> Result<Self> {
        if !j.is_finite() || j <= 0.0 {
            return Err(Error::Parameter(format!("coupling J must be finite and > 0, got {j}")));
        }
        Ok(ModelParams { j, field })
    }
}

/// The three periodic candidate ground states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundStateKind {
    /// All spins `+1`.
    Plus,
    /// All spins `-1`.
    Minus,
    /// Spins follow the cell coloring: `+1` on white, `-1` on black.
    CellBoard,
}

impl GroundStateKind {
    /// Spin of this configuration at a lattice site.
    pub fn spin_at(&self, site: (i64, i64), spec: &FieldSpec) -> i8 {
        match self {
            GroundStateKind::Plus => 1,
            GroundStateKind::Minus => -1,
            GroundStateKind::CellBoard => spec.sign_at(site),
        }
    }
}

/// Critical field `h_c = 2J/L1 + 2J/L2` separating the constant
/// ground-state regime from the cell-board one.
pub fn critical_field(j: f64, l1: CellSize, l2: CellSize) -> f64 {
    2.0 * j * (l1.inv() + l2.inv())
}

/// Per-site energy of a periodic candidate ground state, closed form.
///
/// `e(+-) = -2J` and `e(cell-board) = -2J + 2J(1/L1 + 1/L2) - h`, so
/// the two cross exactly at `h = h_c`. When both axes are infinite the
/// field is the constant `+h` and the constant configurations pick up
/// a field term of `-+h` per site.
pub fn energy_density(kind: GroundStateKind, params: &ModelParams) -> f64 {
    let j = params.j;
    let field = &params.field;
    let uniform = !field.l1.is_finite() && !field.l2.is_finite();
    match kind {
        GroundStateKind::Plus => {
            if uniform {
                -2.0 * j - field.h
            } else {
                -2.0 * j
            }
        }
        GroundStateKind::Minus => {
            if uniform {
                -2.0 * j + field.h
            } else {
                -2.0 * j
            }
        }
        GroundStateKind::CellBoard => {
            -2.0 * j + 2.0 * j * (field.l1.inv() + field.l2.inv()) - field.h
        }
    }
}
