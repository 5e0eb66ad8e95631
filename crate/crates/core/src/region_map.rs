//! Region maps over a parameter plane, with CSV and SVG export.
//!
//! Two planes are supported: `(μ, p)` at fixed `(n, α)`, and `(w, p)` at fixed `n`
//! where every `w` is pushed through [`flrw_to_model`]. Both exports are
//! byte-deterministic for a fixed configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, RegionLabel};
use crate::error::{Error, Result};
use crate::exponents::{self, flrw_to_model, FlrwParams, ModelParams};

/// Samples `k·step` for integer `k` lying in `[min, max]` (or `(min, max]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub step: f64,
    pub include_min: bool,
}

impl AxisSpec {
    pub fn new(name: &str, min: f64, max: f64, step: f64, include_min: bool) -> Self {
        Self { name: name.to_string(), min, max, step, include_min }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Grid(format!("bad axis {}: step must be positive", self.name)));
        }
        let eps = 1e-9;
        let lo = (self.min / self.step - eps).ceil() as i64;
        let hi = (self.max / self.step + eps).floor() as i64;
        let values: Vec<f64> = (lo..=hi)
            .map(|k| k as f64 * self.step)
            .filter(|&v| self.include_min || (v - self.min).abs() > eps * self.step)
            .collect();
        if values.is_empty() {
            return Err(Error::Grid(format!("axis {} has no samples", self.name)));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "plane", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapPlane {
    /// Axis 1 is `μ`, axis 2 is `p`.
    MuP { n: u32, alpha: f64 },
    /// Axis 1 is `w`, axis 2 is `p`.
    WP { n: u32 },
}

impl MapPlane {
    pub fn params_at(&self, axis1: f64) -> Result<ModelParams> {
        match *self {
            MapPlane::MuP { n, alpha } => ModelParams::new(n, alpha, axis1),
            MapPlane::WP { n } => flrw_to_model(&FlrwParams::new(n, axis1)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub plane: MapPlane,
    pub axis1: AxisSpec,
    pub axis2: AxisSpec,
}

impl MapConfig {
    /// `n = 2, α = 0.6`, `μ ∈ [0, 3]`, `p ∈ (1, 4]`, step 0.01.
    pub fn fig1() -> Self {
        Self {
            plane: MapPlane::MuP { n: 2, alpha: 0.6 },
            axis1: AxisSpec::new("mu", 0.0, 3.0, 0.01, true),
            axis2: AxisSpec::new("p", 1.0, 4.0, 0.01, false),
        }
    }

    /// `n = 3`, `w ∈ (-1/3, 1]`, `p ∈ (1, 3]`, step 0.005.
    pub fn fig2() -> Self {
        Self {
            plane: MapPlane::WP { n: 3 },
            axis1: AxisSpec::new("w", -1.0 / 3.0, 1.0, 0.005, false),
            axis2: AxisSpec::new("p", 1.0, 3.0, 0.005, false),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub label: RegionLabel,
    /// Exponent of the bound the label stands for.
    pub best_exponent: Option<f64>,
}

/// `(name, color, samples)` of an overlay curve.
type Curve = (&'static str, &'static str, Vec<(f64, f64)>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub config: MapConfig,
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    /// Row-major with axis 1 outer: `cells[i1 * axis2.len() + i2]`.
    pub cells: Vec<Cell>,
}

/// Classifies every grid point. Columns are evaluated in parallel.
pub fn region_map(config: &MapConfig) -> Result<RegionMap> {
    let axis1 = config.axis1.values()?;
    let axis2 = config.axis2.values()?;
    let columns: Vec<Vec<Cell>> = axis1
        .par_iter()
        .map(|&a| {
            let params = config.plane.params_at(a)?;
            axis2
                .iter()
                .map(|&p| {
                    let label = bounds::classify(&params, p)?;
                    let bound = bounds::labeled_bound(&params, p, label)?;
                    Ok(Cell { label, best_exponent: bound.applicable.then_some(bound.eps_exponent) })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(RegionMap { config: config.clone(), axis1, axis2, cells: columns.concat() })
}

impl RegionMap {
    pub fn cell(&self, i1: usize, i2: usize) -> &Cell {
        &self.cells[i1 * self.axis2.len() + i2]
    }

    pub fn counts(&self) -> BTreeMap<RegionLabel, usize> {
        let mut counts: BTreeMap<RegionLabel, usize> =
            RegionLabel::ALL.iter().map(|&l| (l, 0)).collect();
        for c in &self.cells {
            *counts.entry(c.label).or_default() += 1;
        }
        counts
    }

    pub fn nearest(&self, a1: f64, a2: f64) -> (usize, usize) {
        let near = |axis: &[f64], v: f64| {
            (0..axis.len())
                .min_by(|&i, &j| (axis[i] - v).abs().total_cmp(&(axis[j] - v).abs()))
                .unwrap_or(0)
        };
        (near(&self.axis1, a1), near(&self.axis2, a2))
    }

    /// Labels present in the `(2r+1)²` block of cells around `(i1, i2)`.
    pub fn labels_near(&self, i1: usize, i2: usize, radius: usize) -> Vec<RegionLabel> {
        let mut labels = Vec::new();
        for a in i1.saturating_sub(radius)..=(i1 + radius).min(self.axis1.len() - 1) {
            for b in i2.saturating_sub(radius)..=(i2 + radius).min(self.axis2.len() - 1) {
                let l = self.cell(a, b).label;
                if !labels.contains(&l) {
                    labels.push(l);
                }
            }
        }
        labels.sort();
        labels
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis1,axis2,label,best_exponent\n");
        for (i1, a1) in self.axis1.iter().enumerate() {
            for (i2, a2) in self.axis2.iter().enumerate() {
                let cell = self.cell(i1, i2);
                let best = cell.best_exponent.map(|e| e.to_string()).unwrap_or_default();
                let _ = writeln!(out, "{a1},{a2},{},{best}", cell.label);
            }
        }
        out
    }

    /// Heatmap of the labels with the critical and threshold curves overlaid.
    pub fn to_svg(&self) -> String {
        const W: f64 = 760.0;
        const H: f64 = 560.0;
        const X0: f64 = 70.0;
        const Y0: f64 = 40.0;
        const PW: f64 = 500.0;
        const PH: f64 = 460.0;

        let n1 = self.axis1.len();
        let n2 = self.axis2.len();
        let cw = PW / n1 as f64;
        let ch = PH / n2 as f64;
        let (a1_lo, a1_hi) = (self.axis1[0] - 0.5 * self.config.axis1.step, self.axis1[n1 - 1] + 0.5 * self.config.axis1.step);
        let (a2_lo, a2_hi) = (self.axis2[0] - 0.5 * self.config.axis2.step, self.axis2[n2 - 1] + 0.5 * self.config.axis2.step);
        let sx = |v: f64| X0 + (v - a1_lo) / (a1_hi - a1_lo) * PW;
        let sy = |v: f64| Y0 + PH - (v - a2_lo) / (a2_hi - a2_lo) * PH;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
        for i1 in 0..n1 {
            let mut start = 0;
            while start < n2 {
                let label = self.cell(i1, start).label;
                let mut end = start + 1;
                while end < n2 && self.cell(i1, end).label == label {
                    end += 1;
                }
                let x = X0 + i1 as f64 * cw;
                let y = Y0 + PH - end as f64 * ch;
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.3}" y="{y:.3}" width="{cw:.3}" height="{:.3}" fill="{}"/>"#,
                    (end - start) as f64 * ch,
                    label_color(label)
                );
                start = end;
            }
        }
        let _ = writeln!(s, "</g>");

        for (name, color, curve) in self.curves() {
            for segment in split_segments(&curve, a2_lo, a2_hi) {
                if segment.len() < 2 {
                    continue;
                }
                let pts: Vec<String> =
                    segment.iter().map(|&(a, b)| format!("{:.3},{:.3}", sx(a), sy(b))).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline data-curve="{name}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    pts.join(" ")
                );
            }
        }

        let _ = writeln!(
            s,
            r#"<rect x="{X0}" y="{Y0}" width="{PW}" height="{PH}" fill="none" stroke="black"/>"#
        );
        for k in 0..=5 {
            let v1 = a1_lo + (a1_hi - a1_lo) * k as f64 / 5.0;
            let v2 = a2_lo + (a2_hi - a2_lo) * k as f64 / 5.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{v1:.2}</text>"#,
                sx(v1),
                Y0 + PH + 16.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{v2:.2}</text>"#,
                X0 - 6.0,
                sy(v2) + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            X0 + PW / 2.0,
            Y0 + PH + 36.0,
            self.config.axis1.name
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{:.3}" text-anchor="middle" transform="rotate(-90 20 {:.3})">{}</text>"#,
            Y0 + PH / 2.0,
            Y0 + PH / 2.0,
            self.config.axis2.name
        );
        let title = match self.config.plane {
            MapPlane::MuP { n, alpha } => format!("Blow-up regions, n = {n}, alpha = {alpha}"),
            MapPlane::WP { n } => format!("Blow-up regions, n = {n}"),
        };
        let _ = writeln!(s, r#"<text x="{X0}" y="24" font-size="14">{title}</text>"#);

        let lx = X0 + PW + 20.0;
        for (k, label) in RegionLabel::ALL.iter().enumerate() {
            let y = Y0 + 20.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{lx}" y="{y}" width="14" height="14" fill="{}" stroke="black" stroke-width="0.5"/>"#,
                label_color(*label)
            );
            let _ = writeln!(s, r#"<text x="{}" y="{}">{label}</text>"#, lx + 20.0, y + 11.0);
        }
        for (k, (name, color, _)) in self.curves().iter().enumerate() {
            let y = Y0 + 20.0 * (RegionLabel::ALL.len() + 1 + k) as f64 + 7.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="1.5"/>"#,
                lx + 14.0
            );
            let _ = writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, lx + 20.0, y + 4.0);
        }
        s.push_str("</svg>\n");
        s
    }

    /// `(name, color, samples)` of the p_F, p_c and threshold curves along axis 1.
    fn curves(&self) -> Vec<Curve> {
        let mut pf = Vec::new();
        let mut pc = Vec::new();
        let mut tha = Vec::new();
        let mut thc = Vec::new();
        for &a in &self.axis1 {
            let Ok(params) = self.config.plane.params_at(a) else { continue };
            pf.push((a, params.fujita()));
            pc.push((a, exponents::p_c(&params).map(|r| r.or_infinity()).unwrap_or(f64::INFINITY)));
            tha.push((a, bounds::threshold_a(&params)));
            thc.push((a, bounds::threshold_c(&params)));
        }
        vec![
            ("p_F", "#000000", pf),
            ("p_c", "#7f3c8d", pc),
            ("threshold A", "#555555", tha),
            ("threshold C", "#999999", thc),
        ]
    }
}

fn split_segments(curve: &[(f64, f64)], lo: f64, hi: f64) -> Vec<Vec<(f64, f64)>> {
    let mut out = vec![Vec::new()];
    for &(a, b) in curve {
        if b.is_finite() && b >= lo && b <= hi {
            out.last_mut().expect("nonempty").push((a, b));
        } else if !out.last().expect("nonempty").is_empty() {
            out.push(Vec::new());
        }
    }
    out
}

fn label_color(label: RegionLabel) -> &'static str {
    match label {
        RegionLabel::A => "#4e79a7",
        RegionLabel::B => "#f28e2b",
        RegionLabel::C => "#59a14f",
        RegionLabel::CriticalFujita => "#e15759",
        RegionLabel::CriticalPc => "#b07aa1",
        RegionLabel::Unclassified => "#eeeeee",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_sampling() {
        let a = AxisSpec::new("p", 1.0, 4.0, 0.01, false);
        let v = a.values().unwrap();
        assert_eq!(v.len(), 300);
        assert!((v[0] - 1.01).abs() < 1e-12);
        assert!((v[299] - 4.0).abs() < 1e-12);
        let w = AxisSpec::new("w", -1.0 / 3.0, 1.0, 0.005, false).values().unwrap();
        assert!(w[0] > -1.0 / 3.0);
        assert_eq!(w.len(), 267);
        assert!(AxisSpec::new("x", 0.11, 0.19, 0.1, true).values().is_err());
        assert!(AxisSpec::new("x", 0.0, 1.0, 0.0, true).values().is_err());
    }

    #[test]
    fn single_cell_region_c() {
        let config = MapConfig {
            plane: MapPlane::MuP { n: 2, alpha: 0.6 },
            axis1: AxisSpec::new("mu", 2.0, 2.0, 0.5, true),
            axis2: AxisSpec::new("p", 2.0, 2.0, 0.5, true),
        };
        let map = region_map(&config).unwrap();
        assert_eq!(map.cells.len(), 1);
        assert_eq!(map.cells[0].label, RegionLabel::C);
        assert_eq!(map.to_csv(), "axis1,axis2,label,best_exponent\n2,2,C,0.8333333333333334\n");
    }

    #[test]
    fn cell_count_is_product_of_axes() {
        let map = region_map(&MapConfig::fig1()).unwrap();
        assert_eq!(map.cells.len(), map.axis1.len() * map.axis2.len());
        assert_eq!(map.axis1.len(), 301);
    }

    #[test]
    fn inadmissible_axis_is_an_error() {
        let mut config = MapConfig::fig2();
        config.axis1 = AxisSpec::new("w", -0.5, 1.0, 0.1, true);
        assert!(region_map(&config).is_err());
    }

    #[test]
    fn svg_is_deterministic_and_closed() {
        let mut config = MapConfig::fig1();
        config.axis1.step = 0.1;
        config.axis2.step = 0.1;
        let map = region_map(&config).unwrap();
        let a = map.to_svg();
        assert_eq!(a, region_map(&config).unwrap().to_svg());
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("data-curve=\"p_F\""));
    }
}
