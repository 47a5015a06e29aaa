//! Geometry of four-level spectra at fixed purity.
//!
//! An orthogonal change of basis maps the trace direction to the fourth axis,
//! so spectra of purity `P` lie on a sphere of radius `√(P - 1/4)` in the
//! remaining three coordinates. The sphere is flattened by an equal-area
//! azimuthal map with the pole on the third rotated axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const S2: f64 = std::f64::consts::SQRT_2;

/// Rows are an orthonormal basis whose last row is the trace direction.
pub fn rotation_matrix() -> [[f64; 4]; 4] {
    let s6 = 6f64.sqrt();
    let s3 = 3f64.sqrt();
    [
        [1.0 / S2, -1.0 / S2, 0.0, 0.0],
        [1.0 / s6, 1.0 / s6, -s6 / 3.0, 0.0],
        [1.0 / (2.0 * s3), 1.0 / (2.0 * s3), 1.0 / (2.0 * s3), -s3 / 2.0],
        [0.5, 0.5, 0.5, 0.5],
    ]
}

/// Rotated coordinates of a spectrum, without the constant trace component.
pub fn rotate(lambda: &[f64; 4]) -> [f64; 3] {
    let r = rotation_matrix();
    let mut out = [0.0; 3];
    for (k, row) in r.iter().take(3).enumerate() {
        out[k] = row.iter().zip(lambda).map(|(a, b)| a * b).sum();
    }
    out
}

/// Spectrum with unit trace at rotated coordinates `y`.
pub fn unrotate(y: &[f64; 3]) -> [f64; 4] {
    let r = rotation_matrix();
    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|k| r[k][i] * y[k]).sum::<f64>() + 0.5 * r[3][i];
    }
    out
}

/// Sphere radius at purity `P`.
pub fn sphere_radius(purity: f64) -> Result<f64> {
    if !(0.25..=1.0).contains(&purity) {
        return Err(Error::invalid(format!("purity must lie in [1/4, 1], got {purity}")));
    }
    Ok((purity - 0.25).sqrt())
}

/// Normals `c_i` of the faces `λ_i = 0`; the physical side is `c_i · y >= -1/4`.
pub fn face_normals() -> [[f64; 3]; 4] {
    let r = rotation_matrix();
    let mut out = [[0.0; 3]; 4];
    for (i, n) in out.iter_mut().enumerate() {
        for k in 0..3 {
            n[k] = r[k][i];
        }
    }
    out
}

/// Distance from the center to every face.
pub fn inradius() -> f64 {
    (1.0f64 / 12.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalCoords {
    /// Polar angle from the pole, in `[0, π]`.
    pub theta: f64,
    /// Azimuth in `(-π, π]`.
    pub phi: f64,
}

pub fn to_spherical(y: &[f64; 3]) -> SphericalCoords {
    let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    let theta = if r > 0.0 { (y[2] / r).clamp(-1.0, 1.0).acos() } else { 0.0 };
    SphericalCoords { theta, phi: y[1].atan2(y[0]) }
}

/// Equal-area map of the unit sphere onto the unit disk, `R = sin(θ/2)`.
pub fn isometric_projection(c: SphericalCoords) -> [f64; 2] {
    let radius = (0.5 * c.theta).sin();
    [radius * c.phi.cos(), radius * c.phi.sin()]
}

/// Inverse of [`isometric_projection`] for points of the closed unit disk.
pub fn inverse_projection(p: [f64; 2]) -> Option<SphericalCoords> {
    let radius = (p[0] * p[0] + p[1] * p[1]).sqrt();
    if radius > 1.0 {
        return None;
    }
    Some(SphericalCoords { theta: 2.0 * radius.asin(), phi: p[1].atan2(p[0]) })
}

/// Disk coordinates of a spectrum.
pub fn project_spectrum(lambda: &[f64; 4]) -> [f64; 2] {
    isometric_projection(to_spherical(&rotate(lambda)))
}

fn spectrum_at(purity: f64, c: SphericalCoords) -> [f64; 4] {
    let r = (purity - 0.25).max(0.0).sqrt();
    let (st, ct) = c.theta.sin_cos();
    let (sp, cp) = c.phi.sin_cos();
    unrotate(&[r * st * cp, r * st * sp, r * ct])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    /// `λ_i = 0`.
    Face(usize),
    /// `λ_i = λ_j`, a zero of the level-repulsion factor.
    Node(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCurve {
    pub kind: CurveKind,
    /// Disk coordinates along the curve.
    pub points: Vec<[f64; 2]>,
    /// Whether each point is a physical spectrum.
    pub physical: Vec<bool>,
}

/// Intersection of the purity sphere with the faces and node planes, traced
/// as circles and mapped to the disk.
pub fn trace_region_curves(purity: f64, points_per_curve: usize) -> Result<Vec<RegionCurve>> {
    let r = sphere_radius(purity)?;
    if points_per_curve < 3 {
        return Err(Error::invalid("need at least 3 points per curve"));
    }
    let mut planes: Vec<(CurveKind, [f64; 3], f64)> = Vec::new();
    for (i, c) in face_normals().iter().enumerate() {
        planes.push((CurveKind::Face(i), *c, -0.25));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let (ci, cj) = (face_normals()[i], face_normals()[j]);
            planes.push((CurveKind::Node(i, j), [ci[0] - cj[0], ci[1] - cj[1], ci[2] - cj[2]], 0.0));
        }
    }
    let mut out = Vec::new();
    for (kind, n, d) in planes {
        if let Some(curve) = circle(kind, n, d, r, purity, points_per_curve) {
            out.push(curve);
        }
    }
    Ok(out)
}

/// Circle `{|y| = r, n·y = d}`, if nonempty.
fn circle(kind: CurveKind, n: [f64; 3], d: f64, r: f64, purity: f64, count: usize) -> Option<RegionCurve> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let u = [n[0] / norm, n[1] / norm, n[2] / norm];
    let offset = d / norm;
    let rho2 = r * r - offset * offset;
    if rho2 < 0.0 {
        return None;
    }
    let rho = rho2.sqrt();
    // any vector not parallel to u seeds the in-plane basis
    let seed = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = seed[0] * u[0] + seed[1] * u[1] + seed[2] * u[2];
    let mut a = [seed[0] - dot * u[0], seed[1] - dot * u[1], seed[2] - dot * u[2]];
    let an = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    a.iter_mut().for_each(|x| *x /= an);
    let b = [u[1] * a[2] - u[2] * a[1], u[2] * a[0] - u[0] * a[2], u[0] * a[1] - u[1] * a[0]];
    let mut points = Vec::with_capacity(count);
    let mut physical = Vec::with_capacity(count);
    for k in 0..count {
        let t = std::f64::consts::TAU * k as f64 / (count - 1) as f64;
        let (s, c) = t.sin_cos();
        let y = [
            offset * u[0] + rho * (c * a[0] + s * b[0]),
            offset * u[1] + rho * (c * a[1] + s * b[1]),
            offset * u[2] + rho * (c * a[2] + s * b[2]),
        ];
        let coords = to_spherical(&y);
        points.push(isometric_projection(coords));
        physical.push(spectrum_at(purity, coords).iter().all(|&l| l >= -1e-12));
    }
    Some(RegionCurve { kind, points, physical })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskCell {
    pub x: f64,
    pub y: f64,
    pub physical: bool,
    /// Physical with ascending eigenvalues.
    pub ordered: bool,
}

/// Classifies a `grid × grid` lattice over `[-1, 1]²`; points outside the
/// unit disk are skipped.
pub fn region_mask(purity: f64, grid: usize) -> Result<Vec<MaskCell>> {
    sphere_radius(purity)?;
    if grid < 2 {
        return Err(Error::invalid("mask grid needs at least 2 points per axis"));
    }
    let mut out = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let x = -1.0 + 2.0 * i as f64 / (grid - 1) as f64;
            let y = -1.0 + 2.0 * j as f64 / (grid - 1) as f64;
            let Some(c) = inverse_projection([x, y]) else { continue };
            let lam = spectrum_at(purity, c);
            let physical = lam.iter().all(|&l| l >= 0.0);
            let ordered = physical && lam.windows(2).all(|w| w[0] <= w[1]);
            out.push(MaskCell { x, y, physical, ordered });
        }
    }
    Ok(out)
}
