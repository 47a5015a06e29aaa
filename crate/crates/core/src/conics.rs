//! Node and boundary curves of the `n = 4` chart density, and its
//! stationary points.
//!
//! With chart coordinates `(x, y) = (λ₁, λ₂)` every curve is a conic:
//!
//! * `Q1`: `λ₁` coincides with one of the tail eigenvalues,
//! * `Q2`: the same for `λ₂`,
//! * `Q3`: the smaller tail eigenvalue vanishes,
//! * `Q4`: the two tail eigenvalues coincide. This is also the outer limit of
//!   the realizable region, reported a second time as `Outer`.

use serde::{Deserialize, Serialize};

use crate::ensemble::{peak_locations, ChartPoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConicLabel {
    Q1,
    Q2,
    Q3,
    Q4,
    Outer,
}

/// `a x² + b xy + c y² + d x + e y + f = 0` with its ellipse geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicDescriptor {
    pub label: ConicLabel,
    /// `[a, b, c, d, e, f]`.
    pub coefficients: [f64; 6],
    pub center: [f64; 2],
    /// Angle of the first semi-axis against the `x` axis.
    pub rotation: f64,
    /// Semi-axis along `rotation`, then the perpendicular one.
    pub semi_axes: [f64; 2],
}

impl ConicDescriptor {
    fn from_coefficients(label: ConicLabel, k: [f64; 6]) -> Result<Self> {
        let [a, b, c, d, e, f] = k;
        let det = 4.0 * a * c - b * b;
        if det <= 0.0 {
            return Err(Error::NumericalFailure(format!("{label:?} is not an ellipse")));
        }
        let cx = (b * e - 2.0 * c * d) / det;
        let cy = (b * d - 2.0 * a * e) / det;
        let rotation = 0.5 * b.atan2(a - c);
        let (cos, sin) = (rotation.cos(), rotation.sin());
        let along = a * cos * cos + b * cos * sin + c * sin * sin;
        let across = a * sin * sin - b * cos * sin + c * cos * cos;
        let f0 = a * cx * cx + b * cx * cy + c * cy * cy + d * cx + e * cy + f;
        let axis = |w: f64| (-f0 / w).max(0.0).sqrt();
        Ok(Self {
            label,
            coefficients: k,
            center: [cx, cy],
            rotation,
            semi_axes: [axis(along), axis(across)],
        })
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        let [a, b, c, d, e, f] = self.coefficients;
        a * x * x + b * x * y + c * y * y + d * x + e * y + f
    }

    /// Point at parameter `t ∈ [0, 2π)` on the curve.
    pub fn point(&self, t: f64) -> [f64; 2] {
        let (cos, sin) = (self.rotation.cos(), self.rotation.sin());
        let (u, v) = (self.semi_axes[0] * t.cos(), self.semi_axes[1] * t.sin());
        [self.center[0] + u * cos - v * sin, self.center[1] + u * sin + v * cos]
    }

    pub fn is_degenerate(&self) -> bool {
        self.semi_axes[0] == 0.0 && self.semi_axes[1] == 0.0
    }
}

fn check_purity(purity: f64) -> Result<()> {
    if !(purity > 0.25 && purity <= 1.0) {
        return Err(Error::invalid(format!("purity {purity} outside (1/4, 1]")));
    }
    Ok(())
}

/// The node and boundary conics at purity `P`. `Q3` is omitted for `P < 1/3`,
/// where the purity sphere does not reach any face of the simplex, and is a
/// single point at `P = 1/3`.
pub fn boundary_conics(purity: f64) -> Result<Vec<ConicDescriptor>> {
    check_purity(purity)?;
    let p = purity;
    let q1 = [3.0, 2.0, 1.0, -2.0, -1.0, 0.5 * (1.0 - p)];
    let q2 = [1.0, 2.0, 3.0, -1.0, -2.0, 0.5 * (1.0 - p)];
    let q3 = [2.0, 2.0, 2.0, -2.0, -2.0, 1.0 - p];
    let q4 = [3.0, 2.0, 3.0, -2.0, -2.0, 1.0 - 2.0 * p];
    let mut out = vec![
        ConicDescriptor::from_coefficients(ConicLabel::Q1, q1)?,
        ConicDescriptor::from_coefficients(ConicLabel::Q2, q2)?,
    ];
    if p >= 1.0 / 3.0 {
        let mut c = ConicDescriptor::from_coefficients(ConicLabel::Q3, q3)?;
        if (p - 1.0 / 3.0).abs() < 1e-15 {
            c.semi_axes = [0.0, 0.0];
        }
        out.push(c);
    }
    out.push(ConicDescriptor::from_coefficients(ConicLabel::Q4, q4)?);
    out.push(ConicDescriptor::from_coefficients(ConicLabel::Outer, q4)?);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationaryKind {
    /// Three eigenvalues equal to `Λ₋`: the global maximum.
    DegenerateMaximum,
    /// Three eigenvalues equal to `Λ₊`.
    DegeneratePlus,
    Saddle,
    /// The `Λ₋` configuration with the large eigenvalue moved into the chart;
    /// lies on the outer ellipse.
    EdgeMaximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub kind: StationaryKind,
    pub point: [f64; 2],
    pub physical: bool,
    /// Strictly inside the realizable region, where the stationarity
    /// residuals apply.
    pub interior: bool,
}

/// Residuals of the two stationarity conditions of `Π λ` on the chart:
/// `(λ₁ - λ₂)(2λ₁ + 2λ₂ - 1)` and `s₂ + s₁² - 3s₁/2 + (1 - P)/2`.
pub fn stationarity_residuals(point: [f64; 2], purity: f64) -> [f64; 2] {
    let [x, y] = point;
    let s1 = x + y;
    let s2 = x * x + y * y;
    [(x - y) * (2.0 * s1 - 1.0), s2 + s1 * s1 - 1.5 * s1 + 0.5 * (1.0 - purity)]
}

fn physical(point: [f64; 2], purity: f64) -> bool {
    ChartPoint::new(&point, purity).map(|c| c.physical).unwrap_or(false)
}

/// Labeled stationary points for `n = 4`. Not claimed to be a complete
/// classification.
pub fn stationary_points(purity: f64) -> Result<Vec<StationaryPoint>> {
    check_purity(purity)?;
    let pk = peak_locations(4, purity)?;
    let lm = pk.minus;
    let lp = pk.plus;
    let mut out = vec![
        StationaryPoint {
            kind: StationaryKind::DegenerateMaximum,
            point: [lm, lm],
            physical: true,
            interior: true,
        },
        StationaryPoint {
            kind: StationaryKind::DegeneratePlus,
            point: [lp, lp],
            physical: pk.plus_physical,
            interior: true,
        },
    ];
    let w = (4.0 * purity - 1.0).sqrt();
    for s in [[(1.0 + w) / 4.0, (1.0 - w) / 4.0], [(1.0 - w) / 4.0, (1.0 + w) / 4.0]] {
        out.push(StationaryPoint {
            kind: StationaryKind::Saddle,
            point: s,
            physical: physical(s, purity),
            interior: true,
        });
    }
    let big = 1.0 - 3.0 * lm;
    for e in [[lm, big], [big, lm]] {
        out.push(StationaryPoint {
            kind: StationaryKind::EdgeMaximum,
            point: e,
            physical: true,
            interior: false,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{unnormalized_density, StaticEnsembleSpec};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn find(list: &[ConicDescriptor], label: ConicLabel) -> Option<&ConicDescriptor> {
        list.iter().find(|c| c.label == label)
    }

    #[test]
    fn q3_geometry_at_reference_purity() {
        let conics = boundary_conics(0.4).unwrap();
        let q3 = find(&conics, ConicLabel::Q3).unwrap();
        assert!((q3.center[0] - 1.0 / 3.0).abs() < 1e-15 && (q3.center[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((q3.rotation - FRAC_PI_4).abs() < 1e-15);
        assert!((q3.semi_axes[0] - 0.2f64.sqrt() / 3.0).abs() < 1e-12);
        assert!((q3.semi_axes[1] - (0.2f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((q3.semi_axes[0] - 0.149_071).abs() < 1e-6);
        assert!((q3.semi_axes[1] - 0.258_199).abs() < 1e-6);
    }

    #[test]
    fn q3_absent_below_one_third_and_a_point_at_it() {
        assert!(find(&boundary_conics(0.3).unwrap(), ConicLabel::Q3).is_none());
        let at = boundary_conics(1.0 / 3.0).unwrap();
        let q3 = find(&at, ConicLabel::Q3).unwrap();
        assert!(q3.is_degenerate());
        assert!((q3.center[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn q1_and_q4_geometry() {
        let p = 0.4;
        let conics = boundary_conics(p).unwrap();
        let q1 = find(&conics, ConicLabel::Q1).unwrap();
        assert!((q1.center[0] - 0.25).abs() < 1e-15 && (q1.center[1] - 0.25).abs() < 1e-15);
        assert!((q1.rotation - FRAC_PI_8).abs() < 1e-15);
        let r = (4.0 * p - 1.0).sqrt() / 4.0;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((q1.semi_axes[0] - r / (1.0 + s).sqrt()).abs() < 1e-14);
        assert!((q1.semi_axes[1] - r / (1.0 - s).sqrt()).abs() < 1e-14);
        let q4 = find(&conics, ConicLabel::Q4).unwrap();
        assert!((q4.center[0] - 0.25).abs() < 1e-15 && (q4.center[1] - 0.25).abs() < 1e-15);
        assert!((q4.rotation - FRAC_PI_4).abs() < 1e-15);
        assert!((q4.semi_axes[0] - ((4.0 * p - 1.0) / 8.0).sqrt()).abs() < 1e-14);
        assert!((q4.semi_axes[1] - ((4.0 * p - 1.0) / 4.0).sqrt()).abs() < 1e-14);
        let q2 = find(&conics, ConicLabel::Q2).unwrap();
        for t in [0.1, 1.0, 2.5] {
            let [x, y] = q1.point(t);
            assert!(q2.evaluate(y, x).abs() < 1e-14);
        }
    }

    #[test]
    fn parametrized_points_lie_on_their_curves() {
        for p in [0.3, 0.4, 0.7, 1.0] {
            for c in boundary_conics(p).unwrap() {
                for k in 0..50 {
                    let [x, y] = c.point(k as f64 * 0.1257);
                    assert!(c.evaluate(x, y).abs() < 1e-14, "{:?} at P={p}", c.label);
                }
            }
        }
    }

    #[test]
    fn conics_match_their_eigenvalue_meaning() {
        let p = 0.55;
        let conics = boundary_conics(p).unwrap();
        for c in &conics {
            for k in 0..100 {
                let [x, y] = c.point(k as f64 * 0.0628);
                let Ok(pt) = ChartPoint::new(&[x, y], p) else { continue };
                let (t3, t4) = pt.recovered;
                let hit = match c.label {
                    ConicLabel::Q1 => (x - t3).abs().min((x - t4).abs()),
                    ConicLabel::Q2 => (y - t3).abs().min((y - t4).abs()),
                    ConicLabel::Q3 => t3.abs().min(t4.abs()),
                    ConicLabel::Q4 | ConicLabel::Outer => t4 - t3,
                };
                assert!(hit < 1e-6, "{:?}: {hit}", c.label);
            }
        }
    }

    #[test]
    fn density_vanishes_on_conics() {
        let p = 0.4;
        let spec = StaticEnsembleSpec::purity(4, 16, p).unwrap();
        let scale = {
            let l = peak_locations(4, p).unwrap().minus;
            unnormalized_density(&[l + 0.03, l - 0.02], &spec).unwrap()
        };
        for c in boundary_conics(p).unwrap() {
            for k in 0..100 {
                let [x, y] = c.point(k as f64 * std::f64::consts::TAU / 100.0);
                let v = unnormalized_density(&[x, y], &spec).unwrap();
                assert!(v < 1e-14 * scale, "{:?} at ({x}, {y}): {v}", c.label);
            }
        }
        for k in 0..100 {
            let t = k as f64 / 100.0 * 0.45;
            assert_eq!(unnormalized_density(&[t, t], &spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn plus_solution_physicality() {
        let at = |p: f64| {
            stationary_points(p)
                .unwrap()
                .into_iter()
                .find(|s| s.kind == StationaryKind::DegeneratePlus)
                .unwrap()
        };
        assert!(at(0.3).physical);
        assert!(!at(0.6).physical);
    }

    #[test]
    fn interior_points_satisfy_stationarity() {
        for p in [0.28, 0.3, 0.4, 0.6, 0.9] {
            for s in stationary_points(p).unwrap() {
                let r = stationarity_residuals(s.point, p);
                if s.interior {
                    assert!(r[0].abs() < 1e-10 && r[1].abs() < 1e-10, "{s:?} at P={p}");
                }
            }
        }
    }

    #[test]
    fn saddles_physical_up_to_one_half() {
        let saddle = |p: f64| {
            stationary_points(p).unwrap().into_iter().find(|s| s.kind == StationaryKind::Saddle).unwrap()
        };
        assert!(saddle(0.45).physical);
        assert!(!saddle(0.55).physical);
    }

    #[test]
    fn edge_maxima_on_outer_ellipse() {
        let p = 0.4;
        let outer = boundary_conics(p).unwrap().into_iter().find(|c| c.label == ConicLabel::Outer).unwrap();
        for s in stationary_points(p).unwrap() {
            if s.kind == StationaryKind::EdgeMaximum {
                assert!(outer.evaluate(s.point[0], s.point[1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_out_of_range_purity() {
        assert!(boundary_conics(0.2).is_err());
        assert!(stationary_points(1.2).is_err());
    }
}
