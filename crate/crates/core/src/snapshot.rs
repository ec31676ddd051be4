//! Snapshot files: `{time, curves: [{winding, nodes: [[x1, x2], ...]}]}`.
//! Floats are written in shortest round-trip form, so a chain survives a
//! write/read cycle bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contour::{Chain, Curve};
use crate::error::{Error, Result};
use crate::point::PlanePoint;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotCurve {
    pub winding: i64,
    pub nodes: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub time: f64,
    pub curves: Vec<SnapshotCurve>,
}

impl Snapshot {
    pub fn from_chain(time: f64, chain: &Chain) -> Self {
        Snapshot {
            time,
            curves: chain
                .curves()
                .iter()
                .map(|c| SnapshotCurve {
                    winding: c.winding(),
                    nodes: c.nodes().iter().map(|p| [p.x1, p.x2]).collect(),
                })
                .collect(),
        }
    }

    pub fn to_chain(&self) -> Result<Chain> {
        if !self.time.is_finite() {
            return Err(Error::InvalidChain("snapshot time is not finite".into()));
        }
        let curves = self
            .curves
            .iter()
            .map(|c| Curve::new(c.nodes.iter().map(|&[a, b]| PlanePoint::new(a, b)).collect(), c.winding))
            .collect::<Result<Vec<_>>>()?;
        Chain::new(curves)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("snapshot serialization cannot fail")
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

/// Parse a snapshot document straight into a validated chain.
pub fn parse_chain(text: &str) -> Result<(f64, Chain)> {
    let s = Snapshot::from_json_str(text)?;
    Ok((s.time, s.to_chain()?))
}
