//! Evaluation grids, slice extraction, and reconstruction error metrics.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{greens_field, Position3, Scene, SphereRegion};
use crate::ridge::{estimate_field, EstimatorState};
use crate::C64;

/// NMSE values are clamped here so identical fields report a finite score.
pub const NMSE_FLOOR_DB: f64 = -300.0;

/// Evaluation points inside the target region, in deterministic order.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    points: Vec<Position3>,
    pub spacing: f64,
}

impl EvalGrid {
    pub fn points(&self) -> &[Position3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Uniform lattice centered on the region, keeping points with
/// ‖p − c‖ ≤ radius. Iteration order is x-major, then y, then z, so the
/// grid is reproducible across runs.
pub fn make_grid(region: &SphereRegion, spacing: f64) -> Result<EvalGrid> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidParameter { what: "grid spacing must be finite and > 0" });
    }
    if !(region.radius > 0.0) {
        return Err(Error::InvalidParameter { what: "region radius must be > 0" });
    }
    let n = libm::floor(region.radius / spacing) as i64;
    let c = region.center;
    let mut points = Vec::new();
    for ix in -n..=n {
        for iy in -n..=n {
            for iz in -n..=n {
                let p = Position3::new(
                    c.x + ix as f64 * spacing,
                    c.y + iy as f64 * spacing,
                    c.z + iz as f64 * spacing,
                );
                if region.contains(&p) {
                    points.push(p);
                }
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(EvalGrid { points, spacing })
}

/// Normalized mean squared error in dB:
/// 10·log10(Σ|u_true − u_est|² / Σ|u_true|²), floored at −300 dB.
pub fn nmse(u_true: &[C64], u_est: &[C64]) -> Result<f64> {
    if u_true.len() != u_est.len() {
        return Err(Error::DimensionMismatch { expected: u_true.len(), got: u_est.len() });
    }
    if u_true.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let denom: f64 = u_true.iter().map(|u| u.norm_sqr()).sum();
    if !(denom > 0.0) {
        return Err(Error::ZeroTrueField);
    }
    let num: f64 = u_true
        .iter()
        .zip(u_est.iter())
        .map(|(t, e)| (t - e).norm_sqr())
        .sum();
    if num == 0.0 {
        return Ok(NMSE_FLOOR_DB);
    }
    Ok((10.0 * libm::log10(num / denom)).max(NMSE_FLOOR_DB))
}

/// True field sampled on a grid.
pub fn true_field(scene: &Scene, grid: &EvalGrid, frequency: f64) -> Result<Vec<C64>> {
    grid.points
        .iter()
        .map(|p| greens_field(scene, p, frequency))
        .collect()
}

/// Reconstructed field sampled on a grid.
pub fn estimated_field(state: &EstimatorState, grid: &EvalGrid) -> Vec<C64> {
    grid.points.iter().map(|p| estimate_field(state, p)).collect()
}

/// Axis-aligned cutting plane, e.g. `Axis::Z` at offset 0 is the z = 0 plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            _ => Err(Error::InvalidParameter { what: "plane axis must be x, y, or z" }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSpec {
    pub axis: Axis,
    pub offset: f64,
}

/// One sample of a planar error map. `u` and `v` are the in-plane
/// coordinates of the two remaining axes in x, y, z order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicePoint {
    pub u: f64,
    pub v: f64,
    pub position: Position3,
    pub u_true: C64,
    pub u_est: C64,
    /// |u_true − u_est|² / Σ|u_true|², summed over the slice.
    pub norm_error: f64,
}

/// Planar cut of the reconstruction error through the target region.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSlice {
    pub plane: PlaneSpec,
    pub frequency: f64,
    pub points: Vec<SlicePoint>,
}

impl FieldSlice {
    /// NMSE of the slice alone, in dB.
    pub fn nmse_db(&self) -> Result<f64> {
        let t: Vec<C64> = self.points.iter().map(|p| p.u_true).collect();
        let e: Vec<C64> = self.points.iter().map(|p| p.u_est).collect();
        nmse(&t, &e)
    }
}

/// Samples true and reconstructed fields on a lattice in the cutting plane,
/// restricted to the region's circular cross-section.
pub fn error_slice(
    state: &EstimatorState,
    scene: &Scene,
    plane: &PlaneSpec,
    frequency: f64,
    spacing: f64,
) -> Result<FieldSlice> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidParameter { what: "slice spacing must be finite and > 0" });
    }
    let region = &scene.target_region;
    let c = region.center;
    let center_along = match plane.axis {
        Axis::X => c.x,
        Axis::Y => c.y,
        Axis::Z => c.z,
    };
    if (plane.offset - center_along).abs() > region.radius {
        return Err(Error::EmptyGrid);
    }

    let n = libm::floor(region.radius / spacing) as i64;
    let mut raw = Vec::new();
    for iu in -n..=n {
        for iv in -n..=n {
            let (u0, v0) = match plane.axis {
                Axis::X => (c.y, c.z),
                Axis::Y => (c.x, c.z),
                Axis::Z => (c.x, c.y),
            };
            let u = u0 + iu as f64 * spacing;
            let v = v0 + iv as f64 * spacing;
            let p = match plane.axis {
                Axis::X => Position3::new(plane.offset, u, v),
                Axis::Y => Position3::new(u, plane.offset, v),
                Axis::Z => Position3::new(u, v, plane.offset),
            };
            if region.contains(&p) {
                raw.push((u, v, p));
            }
        }
    }
    if raw.is_empty() {
        return Err(Error::EmptyGrid);
    }

    let mut trues = Vec::with_capacity(raw.len());
    let mut ests = Vec::with_capacity(raw.len());
    for (_, _, p) in &raw {
        trues.push(greens_field(scene, p, frequency)?);
        ests.push(estimate_field(state, p));
    }
    let denom: f64 = trues.iter().map(|t| t.norm_sqr()).sum();
    if !(denom > 0.0) {
        return Err(Error::ZeroTrueField);
    }

    let points = raw
        .into_iter()
        .zip(trues.into_iter().zip(ests))
        .map(|((u, v, position), (u_true, u_est))| SlicePoint {
            u,
            v,
            position,
            u_true,
            u_est,
            norm_error: (u_true - u_est).norm_sqr() / denom,
        })
        .collect();
    Ok(FieldSlice { plane: *plane, frequency, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointSource;
    use approx::assert_relative_eq;

    fn region() -> SphereRegion {
        SphereRegion { center: Position3::new(0.0, 0.0, 0.0), radius: 0.5 }
    }

    fn scene() -> Scene {
        Scene::new(
            alloc::vec![PointSource {
                position: Position3::new(2.5, 0.0, 0.0),
                amplitude: C64::new(20.0, 0.0),
            }],
            340.0,
            region(),
        )
        .unwrap()
    }

    #[test]
    fn grid_points_inside_region_and_reproducible() {
        let g = make_grid(&region(), 0.1).unwrap();
        assert!(!g.is_empty());
        for p in g.points() {
            assert!(region().contains(p));
        }
        let g2 = make_grid(&region(), 0.1).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn grid_count_matches_direct_enumeration() {
        // radius 0.5, spacing 0.25: offsets in {-0.5, -0.25, 0, 0.25, 0.5},
        // keep ‖p‖ ≤ 0.5; count by brute force over the 5³ lattice.
        let g = make_grid(&region(), 0.25).unwrap();
        let mut count = 0;
        for ix in -2i32..=2 {
            for iy in -2i32..=2 {
                for iz in -2i32..=2 {
                    let r2 = (ix * ix + iy * iy + iz * iz) as f64 * 0.0625;
                    if r2 <= 0.25 + 1e-12 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(g.len(), count);
    }

    #[test]
    fn grid_rejects_bad_spacing() {
        assert!(make_grid(&region(), 0.0).is_err());
        assert!(make_grid(&region(), -1.0).is_err());
        assert!(make_grid(&region(), f64::NAN).is_err());
    }

    #[test]
    fn coarse_spacing_still_contains_center() {
        // spacing larger than the radius leaves only the center point
        let g = make_grid(&region(), 10.0).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.points()[0], region().center);
    }

    #[test]
    fn nmse_identical_fields_hits_floor() {
        let u = alloc::vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.25)];
        assert_eq!(nmse(&u, &u).unwrap(), NMSE_FLOOR_DB);
    }

    #[test]
    fn nmse_zero_estimate_is_zero_db() {
        let u = alloc::vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.25)];
        let z = alloc::vec![C64::new(0.0, 0.0); 2];
        assert_relative_eq!(nmse(&u, &z).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn nmse_hand_value() {
        // num = |1−0.5|² = 0.25, denom = 1 → −10·log10(4) ≈ −6.0206
        let t = alloc::vec![C64::new(1.0, 0.0)];
        let e = alloc::vec![C64::new(0.5, 0.0)];
        assert_relative_eq!(nmse(&t, &e).unwrap(), -10.0 * libm::log10(4.0), epsilon = 1e-12);
    }

    #[test]
    fn nmse_errors() {
        let t = alloc::vec![C64::new(1.0, 0.0)];
        let e = alloc::vec![C64::new(1.0, 0.0); 2];
        assert!(matches!(nmse(&t, &e), Err(Error::DimensionMismatch { .. })));
        let z = alloc::vec![C64::new(0.0, 0.0)];
        assert!(matches!(nmse(&z, &t), Err(Error::ZeroTrueField)));
        assert!(matches!(nmse(&[], &[]), Err(Error::EmptyGrid)));
    }

    #[test]
    fn true_field_matches_pointwise_greens() {
        let sc = scene();
        let g = make_grid(&region(), 0.2).unwrap();
        let u = true_field(&sc, &g, 900.0).unwrap();
        for (p, v) in g.points().iter().zip(u.iter()) {
            assert_eq!(*v, greens_field(&sc, p, 900.0).unwrap());
        }
    }

    #[test]
    fn slice_points_lie_on_plane_inside_region() {
        let sc = scene();
        let bank = crate::kernels::default_bank(2, 2, sc.wavenumber(900.0)).unwrap();
        let mics = crate::geometry::spherical_layer_layout(
            5,
            0.4,
            crate::geometry::PointSet::Fibonacci,
        )
        .unwrap();
        let state = EstimatorState::new(
            alloc::vec![C64::new(0.1, 0.0); 5],
            bank,
            alloc::vec![0.25; 4],
            mics.positions().to_vec(),
        )
        .unwrap();
        let plane = PlaneSpec { axis: Axis::Z, offset: 0.0 };
        let slice = error_slice(&state, &sc, &plane, 900.0, 0.1).unwrap();
        assert!(!slice.points.is_empty());
        let mut total = 0.0;
        for p in &slice.points {
            assert_eq!(p.position.z, 0.0);
            assert!(region().contains(&p.position));
            assert_eq!(p.position.x, p.u);
            assert_eq!(p.position.y, p.v);
            assert!(p.norm_error >= 0.0);
            total += p.norm_error;
        }
        // Σ norm_error = Σ|err|²/Σ|true|² = 10^(slice NMSE/10)
        let db = slice.nmse_db().unwrap();
        assert_relative_eq!(10.0 * libm::log10(total), db, epsilon = 1e-9);
    }

    #[test]
    fn slice_outside_region_is_rejected() {
        let sc = scene();
        let bank = crate::kernels::default_bank(2, 2, sc.wavenumber(900.0)).unwrap();
        let state = EstimatorState::new(
            alloc::vec![C64::new(0.1, 0.0)],
            bank,
            alloc::vec![0.25; 4],
            alloc::vec![Position3::new(0.0, 0.0, 0.0)],
        )
        .unwrap();
        let plane = PlaneSpec { axis: Axis::Z, offset: 2.0 };
        assert!(matches!(
            error_slice(&state, &sc, &plane, 900.0, 0.1),
            Err(Error::EmptyGrid)
        ));
    }

    #[test]
    fn axis_parse_roundtrip() {
        for (s, a) in [("x", Axis::X), ("y", Axis::Y), ("z", Axis::Z)] {
            assert_eq!(Axis::parse(s).unwrap(), a);
            assert_eq!(Axis::parse(a.name()).unwrap(), a);
        }
        assert!(Axis::parse("w").is_err());
    }
}
