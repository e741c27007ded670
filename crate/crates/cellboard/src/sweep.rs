//! Parameter-grid scans and uniqueness-curve extraction.
//!
//! Boundary temperatures are located by scanning a grid and bisecting
//! the topmost bracket rather than assuming monotonicity; additional
//! brackets, or a criterion still above threshold at the top of the
//! scan, are reported instead of silently clamped.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::criteria::{
    dc_gamma, dp_p, ds_gamma_with, Criterion, DsOptions, DsOutcome, PlacementMode, ThermoPoint,
    DC_THRESHOLD, DS_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::field::{CellSize, FieldSpec};
use crate::parallel::map_indexed;

/// Default bisection tolerance for boundary temperatures.
pub const DEFAULT_REFINE_TOL: f64 = 1e-6;

/// A uniform one-dimensional grid `start + k * step`, `k = 0..count-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Grid1D {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() || !step.is_finite() || step <= 0.0 {
            return Err(Error::Parameter(format!(
                "grid must have finite start and positive step, got start={start}, step={step}"
            )));
        }
        if count == 0 {
            return Err(Error::Parameter("grid must contain at least one point".into()));
        }
        let last = start + (count - 1) as f64 * step;
        if !last.is_finite() {
            return Err(Error::Parameter("grid endpoint overflows".into()));
        }
        Ok(Grid1D { start, step, count })
    }

    pub fn value(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|k| self.value(k))
    }

    pub fn last(&self) -> f64 {
        self.value(self.count - 1)
    }

    /// Temperature grid used by the percolation and single-site scans:
    /// step 0.001, 7001 points.
    pub fn coarse_temperature() -> Self {
        Grid1D { start: 0.0, step: 0.001, count: 7001 }
    }

    /// Field grid used by the percolation and single-site scans:
    /// step 0.1, 46 points.
    pub fn coarse_field() -> Self {
        Grid1D { start: 0.0, step: 0.1, count: 46 }
    }

    /// Temperature grid used by the window-criterion scans:
    /// step 0.002, 205 points starting at 0.002.
    pub fn window_temperature() -> Self {
        Grid1D { start: 0.002, step: 0.002, count: 205 }
    }

    /// Field grid used by the window-criterion scans: step 0.05,
    /// 80 points starting at 0.05.
    pub fn window_field() -> Self {
        Grid1D { start: 0.05, step: 0.05, count: 80 }
    }
}

/// One sample of a uniqueness boundary. The swept axis is always
/// present; the located axis is `None` when no grid value satisfies
/// the criterion (or the boundary lies outside the scan, in which case
/// `value` records the criterion at the scan edge).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub h: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub value: Option<f64>,
}

/// Identifies what produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Dp,
    Dc,
    Ds,
    Overlay,
}

impl CurveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveKind::Dp => "dp",
            CurveKind::Dc => "dc",
            CurveKind::Ds => "ds",
            CurveKind::Overlay => "overlay",
        }
    }
}

impl From<Criterion> for CurveKind {
    fn from(c: Criterion) -> Self {
        match c {
            Criterion::Dp => CurveKind::Dp,
            Criterion::Dc => CurveKind::Dc,
            Criterion::Ds => CurveKind::Ds,
        }
    }
}

/// Everything needed to regenerate a curve deterministically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: Option<String>,
    pub version: String,
    pub params: serde_json::Value,
    pub grids: serde_json::Value,
    pub tolerances: serde_json::Value,
    pub placement_mode: Option<String>,
    pub timestamp: Option<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Manifest {
    fn new(params: serde_json::Value, grids: serde_json::Value, tolerances: serde_json::Value) -> Self {
        Manifest {
            command: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            params,
            grids,
            tolerances,
            placement_mode: None,
            timestamp: None,
            warnings: Vec::new(),
        }
    }
}

/// An ordered set of boundary samples plus its provenance record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curve {
    pub criterion: CurveKind,
    pub n: usize,
    #[serde(rename = "L1")]
    pub l1: CellSize,
    #[serde(rename = "L2")]
    pub l2: CellSize,
    #[serde(rename = "J")]
    pub j: f64,
    pub threshold: f64,
    pub points: Vec<CurvePoint>,
    pub manifest: Manifest,
}

/// Result of scanning a criterion over a descending temperature grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum BoundaryScan {
    /// Bisected boundary: largest temperature where the criterion
    /// still reaches the threshold.
    Root {
        location: f64,
        value: f64,
        extra_brackets: usize,
    },
    /// The criterion stays below threshold on the whole scan.
    AllBelow,
    /// The criterion is at or above threshold at the top of the scan;
    /// the boundary lies beyond the grid.
    TruncatedHigh { value_at_top: f64, extra_brackets: usize },
}

/// Locates the largest temperature at which `f(T) >= threshold`,
/// refined by bisection to `tol`. Grid points with `T <= 0` are not
/// evaluable and are skipped.
pub(crate) fn scan_boundary_from_above<F: Fn(f64) -> f64>(
    f: F,
    grid: &Grid1D,
    threshold: f64,
    tol: f64,
) -> Result<BoundaryScan> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::Parameter(format!("refine tolerance must be positive, got {tol}")));
    }
    let samples: Vec<(f64, f64)> = grid
        .values()
        .filter(|&t| t > 0.0)
        .map(|t| (t, f(t)))
        .collect();
    if samples.is_empty() {
        return Err(Error::Parameter("scan grid contains no positive temperatures".into()));
    }
    let above: Vec<bool> = samples.iter().map(|&(_, v)| v >= threshold).collect();
    let transitions = above.windows(2).filter(|w| w[0] != w[1]).count();
    if !above.iter().any(|&a| a) {
        return Ok(BoundaryScan::AllBelow);
    }
    let top = samples.len() - 1;
    if above[top] {
        return Ok(BoundaryScan::TruncatedHigh {
            value_at_top: samples[top].1,
            extra_brackets: transitions,
        });
    }
    // Topmost bracket: largest k with f above threshold and the next
    // point below.
    let k = (0..top).rev().find(|&k| above[k] && !above[k + 1]).expect("a bracket must exist");
    let (mut lo, mut hi) = (samples[k].0, samples[k + 1].0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let location = 0.5 * (lo + hi);
    Ok(BoundaryScan::Root {
        location,
        value: f(location),
        extra_brackets: transitions - 1,
    })
}

#[allow(clippy::too_many_arguments)]
fn boundary_curve_over_field<F>(
    kind: CurveKind,
    threshold: f64,
    j: f64,
    h_grid: &Grid1D,
    t_grid: &Grid1D,
    refine_tol: f64,
    criterion_at: F,
    mut manifest: Manifest,
) -> Result<Curve>
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
{
    let results = map_indexed(h_grid.count, |k| {
        let h = h_grid.value(k);
        let scan = scan_boundary_from_above(|t| criterion_at(h, t), t_grid, threshold, refine_tol)?;
        let (point, notes) = match scan {
            BoundaryScan::Root { location, value, extra_brackets } => {
                let mut notes = Vec::new();
                if extra_brackets > 0 {
                    notes.push(format!(
                        "h={h}: {extra_brackets} additional threshold crossing(s) below the reported boundary"
                    ));
                }
                (CurvePoint { h: Some(h), t: Some(location), value: Some(value) }, notes)
            }
            BoundaryScan::AllBelow => (CurvePoint { h: Some(h), t: None, value: None }, Vec::new()),
            BoundaryScan::TruncatedHigh { value_at_top, extra_brackets } => {
                let mut notes = vec![format!(
                    "h={h}: criterion still at/above threshold at the largest scanned T; boundary truncated"
                )];
                if extra_brackets > 0 {
                    notes.push(format!("h={h}: {extra_brackets} additional threshold crossing(s) in scan"));
                }
                (CurvePoint { h: Some(h), t: None, value: Some(value_at_top) }, notes)
            }
        };
        Ok((point, notes))
    });
    let mut points = Vec::with_capacity(h_grid.count);
    for r in results {
        let (point, notes) = r?;
        points.push(point);
        manifest.warnings.extend(notes);
    }
    if t_grid.values().any(|t| t <= 0.0) {
        manifest
            .warnings
            .push("temperature grid points with T <= 0 were excluded from evaluation".to_string());
    }
    Ok(Curve {
        criterion: kind,
        n: 1,
        l1: CellSize::Finite(1),
        l2: CellSize::Finite(1),
        j,
        threshold,
        points,
        manifest,
    })
}

/// Boundary temperatures for the disagreement-percolation criterion:
/// for every grid `h`, the largest `T` with `p >= pc_bound`, or "none"
/// when the criterion passes on the whole scan.
pub fn dp_curve(
    j: f64,
    h_grid: &Grid1D,
    t_grid: &Grid1D,
    pc_bound: f64,
    refine_tol: f64,
) -> Result<Curve> {
    if !j.is_finite() || j <= 0.0 {
        return Err(Error::Parameter(format!("coupling J must be finite and > 0, got {j}")));
    }
    if !pc_bound.is_finite() || pc_bound <= 0.0 || pc_bound >= 1.0 {
        return Err(Error::Parameter(format!(
            "percolation bound must lie in (0, 1), got {pc_bound}"
        )));
    }
    let manifest = Manifest::new(
        json!({ "criterion": "dp", "J": j, "pc_bound": pc_bound }),
        json!({ "h": h_grid, "T": t_grid }),
        json!({ "refine_tol": refine_tol }),
    );
    boundary_curve_over_field(
        CurveKind::Dp,
        pc_bound,
        j,
        h_grid,
        t_grid,
        refine_tol,
        |h, t| dp_p(&ThermoPoint { j, h, t }),
        manifest,
    )
}

/// Boundary temperatures for the single-site criterion: the root of
/// `gamma = 1/4` per grid `h`.
pub fn dc_curve(j: f64, h_grid: &Grid1D, t_grid: &Grid1D, refine_tol: f64) -> Result<Curve> {
    if !j.is_finite() || j <= 0.0 {
        return Err(Error::Parameter(format!("coupling J must be finite and > 0, got {j}")));
    }
    let manifest = Manifest::new(
        json!({ "criterion": "dc", "J": j }),
        json!({ "h": h_grid, "T": t_grid }),
        json!({ "refine_tol": refine_tol }),
    );
    boundary_curve_over_field(
        CurveKind::Dc,
        DC_THRESHOLD,
        j,
        h_grid,
        t_grid,
        refine_tol,
        |h, t| dc_gamma(&ThermoPoint { j, h, t }),
        manifest,
    )
}

/// Options shared by the window-criterion line extractions.
#[derive(Debug, Clone, Copy)]
pub struct DsLineOptions {
    pub placement_mode: PlacementMode,
    pub allow_large: bool,
}

impl Default for DsLineOptions {
    fn default() -> Self {
        DsLineOptions {
            placement_mode: PlacementMode::FullPeriod,
            allow_large: false,
        }
    }
}

fn ds_manifest(
    n: usize,
    j: f64,
    l1: CellSize,
    l2: CellSize,
    outer: (&str, &Grid1D),
    inner: (&str, &Grid1D),
    options: &DsLineOptions,
) -> Manifest {
    let mut manifest = Manifest::new(
        json!({
            "criterion": "ds",
            "J": j,
            "n": n,
            "L1": l1,
            "L2": l2,
            "threshold": DS_THRESHOLD,
        }),
        json!({ outer.0: outer.1, inner.0: inner.1 }),
        json!({}),
    );
    manifest.placement_mode = Some(options.placement_mode.to_string());
    manifest
}

fn ds_options(line: &DsLineOptions, short_circuit: bool) -> DsOptions {
    DsOptions {
        allow_large: line.allow_large,
        placement_mode: line.placement_mode,
        short_circuit,
    }
}

/// For every temperature in `t_grid`, the smallest grid `h` whose
/// window constant drops below 1, or "none" when no grid field
/// achieves uniqueness.
///
/// Failing grid points short-circuit their placement maxima; the value
/// reported for the accepted field is exact because no placement of a
/// passing point ever reaches the threshold.
pub fn ds_h_line(
    n: usize,
    j: f64,
    l1: CellSize,
    l2: CellSize,
    t_grid: &Grid1D,
    h_grid: &Grid1D,
    options: &DsLineOptions,
) -> Result<Curve> {
    if t_grid.values().any(|t| t <= 0.0) {
        return Err(Error::Parameter(
            "line extraction requires a strictly positive temperature grid".into(),
        ));
    }
    let opts = ds_options(options, true);
    let results = map_indexed(t_grid.count, |kt| {
        let t = t_grid.value(kt);
        for h in h_grid.values().filter(|&h| h >= 0.0) {
            let point = ThermoPoint { j, h, t };
            let spec = FieldSpec { l1, l2, h };
            match ds_gamma_with(n, &point, &spec, &opts)? {
                DsOutcome::Exact(v) if v < DS_THRESHOLD => {
                    return Ok(CurvePoint { h: Some(h), t: Some(t), value: Some(v) });
                }
                _ => {}
            }
        }
        Ok(CurvePoint { h: None, t: Some(t), value: None })
    });
    let mut manifest = ds_manifest(n, j, l1, l2, ("T", t_grid), ("h", h_grid), options);
    if h_grid.start > 0.0 {
        manifest.warnings.push(format!(
            "field grid starts at {}; h = 0 is not scanned",
            h_grid.start
        ));
    }
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Curve {
        criterion: CurveKind::Ds,
        n,
        l1,
        l2,
        j,
        threshold: DS_THRESHOLD,
        points,
        manifest,
    })
}

/// For every field in `h_grid`, the smallest grid temperature whose
/// window constant drops below 1, or "none".
pub fn ds_t_line(
    n: usize,
    j: f64,
    l1: CellSize,
    l2: CellSize,
    h_grid: &Grid1D,
    t_grid: &Grid1D,
    options: &DsLineOptions,
) -> Result<Curve> {
    if t_grid.values().any(|t| t <= 0.0) {
        return Err(Error::Parameter(
            "line extraction requires a strictly positive temperature grid".into(),
        ));
    }
    let opts = ds_options(options, true);
    let results = map_indexed(h_grid.count, |kh| {
        let h = h_grid.value(kh);
        if h < 0.0 {
            return Ok(CurvePoint { h: Some(h), t: None, value: None });
        }
        for t in t_grid.values() {
            let point = ThermoPoint { j, h, t };
            let spec = FieldSpec { l1, l2, h };
            match ds_gamma_with(n, &point, &spec, &opts)? {
                DsOutcome::Exact(v) if v < DS_THRESHOLD => {
                    return Ok(CurvePoint { h: Some(h), t: Some(t), value: Some(v) });
                }
                _ => {}
            }
        }
        Ok(CurvePoint { h: Some(h), t: None, value: None })
    });
    let manifest = ds_manifest(n, j, l1, l2, ("h", h_grid), ("T", t_grid), options);
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Curve {
        criterion: CurveKind::Ds,
        n,
        l1,
        l2,
        j,
        threshold: DS_THRESHOLD,
        points,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::dc_gamma;
    use crate::parallel::run_with_threads;

    fn fin(l: u32) -> CellSize {
        CellSize::Finite(l)
    }

    #[test]
    fn default_grids_match_published_ranges() {
        let t = Grid1D::coarse_temperature();
        assert_eq!(t.count, 7001);
        assert!((t.last() - 7.0).abs() < 1e-12);
        let h = Grid1D::coarse_field();
        assert_eq!(h.count, 46);
        assert!((h.last() - 4.5).abs() < 1e-12);
        let t2 = Grid1D::window_temperature();
        assert_eq!(t2.count, 205);
        assert!((t2.value(0) - 0.002).abs() < 1e-15);
        assert!((t2.last() - 0.41).abs() < 1e-12);
        let h2 = Grid1D::window_field();
        assert_eq!(h2.count, 80);
        assert!((h2.last() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(0.0, 0.0, 5).is_err());
        assert!(Grid1D::new(0.0, -0.1, 5).is_err());
        assert!(Grid1D::new(0.0, 0.1, 0).is_err());
        assert!(Grid1D::new(f64::NAN, 0.1, 5).is_err());
    }

    #[test]
    fn scan_finds_the_topmost_bracket() {
        // Crosses the threshold twice: above on [2, 4], below outside.
        let f = |t: f64| if (2.0..=4.0).contains(&t) { 1.0 } else { 0.0 };
        let grid = Grid1D::new(0.5, 0.5, 12).unwrap();
        match scan_boundary_from_above(f, &grid, 0.5, 1e-9).unwrap() {
            BoundaryScan::Root { location, extra_brackets, .. } => {
                assert!((location - 4.0).abs() < 1e-6);
                assert_eq!(extra_brackets, 1);
            }
            other => panic!("unexpected scan outcome {other:?}"),
        }
    }

    #[test]
    fn scan_reports_all_below_and_truncation() {
        let grid = Grid1D::new(0.1, 0.1, 10).unwrap();
        assert_eq!(
            scan_boundary_from_above(|_| 0.1, &grid, 0.5, 1e-9).unwrap(),
            BoundaryScan::AllBelow
        );
        match scan_boundary_from_above(|_| 0.9, &grid, 0.5, 1e-9).unwrap() {
            BoundaryScan::TruncatedHigh { value_at_top, .. } => assert_eq!(value_at_top, 0.9),
            other => panic!("unexpected scan outcome {other:?}"),
        }
    }

    #[test]
    fn scan_skips_nonpositive_temperatures() {
        // Grid starting at 0; the T = 0 point must not be evaluated.
        let grid = Grid1D::new(0.0, 1.0, 5).unwrap();
        let scan = scan_boundary_from_above(
            |t| {
                assert!(t > 0.0);
                2.0 / t
            },
            &grid,
            1.0,
            1e-9,
        )
        .unwrap();
        match scan {
            BoundaryScan::Root { location, .. } => assert!((location - 2.0).abs() < 1e-6),
            other => panic!("unexpected scan outcome {other:?}"),
        }
    }

    #[test]
    fn dp_curve_none_above_critical_field() {
        let h_grid = Grid1D::new(4.0, 0.25, 3).unwrap();
        let curve = dp_curve(1.0, &h_grid, &Grid1D::coarse_temperature(), 0.556, 1e-6).unwrap();
        assert_eq!(curve.points.len(), 3);
        for p in &curve.points {
            assert!(p.t.is_none());
            assert!(p.value.is_none());
        }
    }

    #[test]
    fn dp_curve_zero_field_root() {
        let h_grid = Grid1D::new(0.0, 0.1, 1).unwrap();
        let curve = dp_curve(1.0, &h_grid, &Grid1D::coarse_temperature(), 0.556, 1e-6).unwrap();
        let t = curve.points[0].t.unwrap();
        // tanh(4J/T) = 0.556 at the boundary.
        let expected = 4.0 / 0.556f64.atanh();
        assert!((t - expected).abs() < 2e-6, "{t} vs {expected}");
    }

    #[test]
    fn dp_curve_monotone_in_field() {
        let curve = dp_curve(
            1.0,
            &Grid1D::coarse_field(),
            &Grid1D::coarse_temperature(),
            0.556,
            1e-6,
        )
        .unwrap();
        let mut last = f64::INFINITY;
        for p in &curve.points {
            let h = p.h.unwrap();
            if h < 4.0 {
                let t = p.t.expect("boundary must exist below the critical field");
                assert!(t <= last + 2e-6, "boundary must not increase with h");
                last = t;
            } else {
                assert!(p.t.is_none());
            }
        }
    }

    #[test]
    fn dp_curve_validates_parameters() {
        let g = Grid1D::new(0.0, 0.1, 2).unwrap();
        assert!(dp_curve(0.0, &g, &g, 0.5, 1e-6).is_err());
        assert!(dp_curve(1.0, &g, &Grid1D::coarse_temperature(), 1.2, 1e-6).is_err());
        assert!(dp_curve(1.0, &g, &Grid1D::coarse_temperature(), 0.5, -1.0).is_err());
    }

    #[test]
    fn dp_truncation_is_flagged() {
        let h_grid = Grid1D::new(0.0, 0.1, 1).unwrap();
        let t_grid = Grid1D::new(0.2, 0.2, 5).unwrap(); // tops out at T = 1
        let curve = dp_curve(1.0, &h_grid, &t_grid, 0.556, 1e-6).unwrap();
        let p = &curve.points[0];
        assert!(p.t.is_none());
        let v = p.value.unwrap();
        assert!(v >= 0.556, "truncated point must record the scan-edge value");
        assert!(curve.manifest.warnings.iter().any(|w| w.contains("truncated")));
    }

    #[test]
    fn dc_curve_closed_form_anchors() {
        let h_grid = Grid1D::new(0.0, 1.0, 2).unwrap(); // h = 0, 1
        let curve = dc_curve(1.0, &h_grid, &Grid1D::coarse_temperature(), 1e-6).unwrap();
        let t0 = curve.points[0].t.unwrap();
        let t1 = curve.points[1].t.unwrap();
        assert!((t0 - 4.0 / 3.0f64.ln()).abs() < 1e-5);
        assert!((t1 - 2.0 / (5.0f64 / 3.0).ln()).abs() < 1e-5);
    }

    #[test]
    fn dc_curve_symmetry() {
        let tol = 1e-6;
        let t_grid = Grid1D::coarse_temperature();
        let boundary = |h: f64| {
            let g = Grid1D::new(h, 1.0, 1).unwrap();
            dc_curve(1.0, &g, &t_grid, tol).unwrap().points[0].t.unwrap()
        };
        for h in [0.0, 0.3, 0.7, 1.0, 1.6] {
            let base = boundary(h);
            for other in [2.0 - h, h + 2.0, 4.0 - h] {
                assert!((base - boundary(other)).abs() <= 2.0 * tol, "h={h} vs {other}");
            }
        }
    }

    #[test]
    fn refined_roots_bracket_the_threshold() {
        let tol = 1e-6;
        let h_grid = Grid1D::new(0.0, 0.5, 4).unwrap();
        let curve = dc_curve(1.0, &h_grid, &Grid1D::coarse_temperature(), tol).unwrap();
        for p in &curve.points {
            let (h, t) = (p.h.unwrap(), p.t.unwrap());
            let below = dc_gamma(&ThermoPoint { j: 1.0, h, t: t - tol });
            let above = dc_gamma(&ThermoPoint { j: 1.0, h, t: t + tol });
            assert!(below >= DC_THRESHOLD && DC_THRESHOLD >= above, "h={h}: {below} .. {above}");
        }
    }

    #[test]
    fn ds_line_with_unit_window_matches_the_single_site_criterion() {
        let j = 1.0;
        let t_grid = Grid1D::new(3.0, 0.1, 13).unwrap(); // T in [3.0, 4.2]
        let h_grid = Grid1D::new(0.0, 0.25, 17).unwrap(); // h in [0, 4]
        let line = ds_h_line(1, j, fin(1), fin(1), &t_grid, &h_grid, &DsLineOptions::default()).unwrap();
        for (kt, p) in line.points.iter().enumerate() {
            let t = t_grid.value(kt);
            let expected = h_grid
                .values()
                .find(|&h| dc_gamma(&ThermoPoint { j, h, t }) < DC_THRESHOLD);
            assert_eq!(p.h, expected, "T={t}");
            if let Some(v) = p.value {
                let g = dc_gamma(&ThermoPoint { j, h: p.h.unwrap(), t });
                assert!((v - 4.0 * g).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ds_lines_for_n2_agree_across_cell_sizes() {
        let t_grid = Grid1D::new(0.1, 0.1, 4).unwrap();
        let h_grid = Grid1D::new(0.2, 0.2, 15).unwrap();
        let a = ds_h_line(2, 1.0, fin(1), fin(1), &t_grid, &h_grid, &DsLineOptions::default()).unwrap();
        let b = ds_h_line(2, 1.0, fin(2), fin(2), &t_grid, &h_grid, &DsLineOptions::default()).unwrap();
        for (pa, pb) in a.points.iter().zip(&b.points) {
            assert_eq!(pa.h, pb.h);
            if let (Some(va), Some(vb)) = (pa.value, pb.value) {
                assert!((va - vb).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ds_t_line_stripe_heights_agree() {
        let h_grid = Grid1D::new(0.5, 0.5, 4).unwrap(); // h in [0.5, 2.0]
        let t_grid = Grid1D::new(0.05, 0.05, 10).unwrap();
        let lines: Vec<_> = [2u32, 3, 4]
            .into_iter()
            .map(|l2| {
                ds_t_line(
                    3,
                    1.0,
                    CellSize::Infinite,
                    fin(l2),
                    &h_grid,
                    &t_grid,
                    &DsLineOptions::default(),
                )
                .unwrap()
            })
            .collect();
        for other in &lines[1..] {
            for (pa, pb) in lines[0].points.iter().zip(&other.points) {
                assert_eq!(pa.t, pb.t, "h={:?}", pa.h);
            }
        }
    }

    #[test]
    fn ds_line_rejects_nonpositive_temperature_grids() {
        let bad = Grid1D::new(0.0, 0.1, 5).unwrap();
        let good = Grid1D::new(0.1, 0.1, 5).unwrap();
        assert!(ds_h_line(1, 1.0, fin(1), fin(1), &bad, &good, &DsLineOptions::default()).is_err());
        assert!(ds_t_line(1, 1.0, fin(1), fin(1), &good, &bad, &DsLineOptions::default()).is_err());
    }

    #[test]
    fn curves_are_identical_across_thread_counts() {
        let h_grid = Grid1D::new(0.0, 0.5, 9).unwrap();
        let t_grid = Grid1D::coarse_temperature();
        let one = run_with_threads(Some(1), || dp_curve(1.0, &h_grid, &t_grid, 0.556, 1e-6).unwrap());
        let four = run_with_threads(Some(4), || dp_curve(1.0, &h_grid, &t_grid, 0.556, 1e-6).unwrap());
        assert_eq!(one.points, four.points);
    }
}
