use serde::{Deserialize, Serialize, Serializer};

use super::{bound_coefficient_am, chain_sobolev_norm, chord_arc_f, patch_area, separation, weights_s_chain};
use crate::contour::{Chain, SobolevIndex};
use crate::error::Result;
use crate::kernel::Alpha;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Smallest lattice window for F_j.
    pub j_window: usize,
    /// Golden-section refinement of the discrete F maximum.
    pub refine: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            j_window: 3,
            refine: true,
        }
    }
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn finite_or_null_vec<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&if x.is_finite() { Some(*x) } else { None })?;
    }
    seq.end()
}

/// One time level of monitored quantities. Non-finite values become
/// `null` in JSON and `inf` in CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    #[serde(rename = "F_inf", serialize_with = "finite_or_null")]
    pub f_inf: f64,
    /// Free-space part of F (no lattice images).
    #[serde(rename = "F0_inf", serialize_with = "finite_or_null")]
    pub f0_inf: f64,
    #[serde(rename = "S_n", serialize_with = "finite_or_null_vec")]
    pub s_n: Vec<f64>,
    #[serde(serialize_with = "finite_or_null")]
    pub sobolev_m: f64,
    #[serde(rename = "energy_S", serialize_with = "finite_or_null")]
    pub energy_s: f64,
    #[serde(serialize_with = "finite_or_null_vec")]
    pub area: Vec<f64>,
    #[serde(serialize_with = "finite_or_null")]
    pub separation: f64,
    #[serde(rename = "A_m", serialize_with = "finite_or_null")]
    pub a_m: f64,
}

fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl DiagnosticsRecord {
    pub fn compute(chain: &Chain, time: f64, alpha: Alpha, m: SobolevIndex, cfg: &DiagnosticsConfig) -> Result<Self> {
        let m = m.get();
        let f = chord_arc_f(chain, cfg.j_window, cfg.refine)?;
        let sobolev_m = chain_sobolev_norm(chain, m)?;
        let s_n = (0..=m).map(|n| weights_s_chain(chain, n, f.f_inf, alpha)).collect();
        Ok(DiagnosticsRecord {
            time,
            f_inf: f.f_inf,
            f0_inf: f.f0_inf,
            s_n,
            sobolev_m,
            energy_s: f.f_inf + sobolev_m * sobolev_m,
            area: patch_area(chain)?,
            separation: separation(chain),
            a_m: bound_coefficient_am(chain, m, alpha, f.f_inf)?,
        })
    }

    /// CSV header for a chain of `curves` curves and Sobolev index `m`.
    /// Column order: time, F_inf, F0_inf, sobolev_m, energy_S, separation, A_m, S_0..S_m, area_0..
    pub fn csv_header(m: usize, curves: usize) -> String {
        let mut cols: Vec<String> = ["time", "F_inf", "F0_inf", "sobolev_m", "energy_S", "separation", "A_m"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        cols.extend((0..=m).map(|n| format!("S_{n}")));
        cols.extend((0..curves).map(|k| format!("area_{k}")));
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut vals = vec![
            fmt_num(self.time),
            fmt_num(self.f_inf),
            fmt_num(self.f0_inf),
            fmt_num(self.sobolev_m),
            fmt_num(self.energy_s),
            fmt_num(self.separation),
            fmt_num(self.a_m),
        ];
        vals.extend(self.s_n.iter().map(|&v| fmt_num(v)));
        vals.extend(self.area.iter().map(|&v| fmt_num(v)));
        vals.join(",")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("record serializes")
    }
}
