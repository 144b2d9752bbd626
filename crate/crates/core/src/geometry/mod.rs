//! Tank shape, mixture volume and the moving mixture surface.
//!
//! Depth `z` is measured downwards from the top of the tank (`z = 0`) to the
//! bottom (`z = B`). The mixture occupies `zbar(t) < z < B`, so its volume is
//! `V(zbar) = ∫_zbar^B A(ξ) dξ`.

mod schedule;
mod trajectory;

pub use schedule::{ModelKind, Stage, StageSchedule};
pub use trajectory::{surface_trajectory, SurfaceTrajectory};

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Number of intervals in the cached volume table.
pub const VOLUME_TABLE_INTERVALS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AreaProfile {
    /// Constant cross-sectional area (m²).
    Cylinder { area: f64 },
    /// Circular cross-section whose radius varies linearly from `r_top` at
    /// `z = 0` to `r_bottom` at `z = B` (m).
    LinearRadius { r_top: f64, r_bottom: f64 },
}

#[derive(Clone, Debug)]
pub struct TankGeometry {
    depth: f64,
    profile: AreaProfile,
    /// `V(z_i)` at `z_i = i·B/VOLUME_TABLE_INTERVALS`, strictly decreasing.
    table: Vec<f64>,
}

impl PartialEq for TankGeometry {
    fn eq(&self, other: &Self) -> bool {
        self.depth == other.depth && self.profile == other.profile
    }
}

impl TankGeometry {
    pub fn new(profile: AreaProfile, depth: f64) -> Result<Self> {
        if !(depth.is_finite() && depth > 0.0) {
            return Err(Error::Config(format!("tank depth must be positive, got {depth}")));
        }
        match profile {
            AreaProfile::Cylinder { area } => {
                if !(area.is_finite() && area > 0.0) {
                    return Err(Error::Config(format!("tank area must be positive, got {area}")));
                }
            }
            AreaProfile::LinearRadius { r_top, r_bottom } => {
                if !(r_top.is_finite() && r_bottom.is_finite() && r_top > 0.0 && r_bottom > 0.0) {
                    return Err(Error::Config(format!(
                        "cone radii must be positive, got r_top = {r_top}, r_bottom = {r_bottom}"
                    )));
                }
            }
        }
        let mut geometry = TankGeometry {
            depth,
            profile,
            table: Vec::new(),
        };
        geometry.table = (0..=VOLUME_TABLE_INTERVALS)
            .map(|i| geometry.volume_unchecked(geometry.table_node(i)))
            .collect();
        Ok(geometry)
    }

    pub fn cylinder(area: f64, depth: f64) -> Result<Self> {
        Self::new(AreaProfile::Cylinder { area }, depth)
    }

    pub fn cone(r_top: f64, r_bottom: f64, depth: f64) -> Result<Self> {
        Self::new(AreaProfile::LinearRadius { r_top, r_bottom }, depth)
    }

    /// Truncated cone with prescribed total volume whose mixture volume at
    /// depth `z_ref` equals `volume_at_ref`.
    ///
    /// For a fixed radius ratio `k = r_bottom / r_top` the fraction
    /// `V(z_ref) / V(0)` does not depend on the scale, so `k` is found by
    /// bisection and `r_top` follows from the total volume.
    pub fn cone_matching(
        depth: f64,
        total_volume: f64,
        z_ref: f64,
        volume_at_ref: f64,
    ) -> Result<Self> {
        if !(0.0 < z_ref && z_ref < depth) || !(0.0 < volume_at_ref && volume_at_ref < total_volume) {
            return Err(Error::Config(
                "cone constraints need 0 < z_ref < depth and 0 < V(z_ref) < V(0)".into(),
            ));
        }
        let target = volume_at_ref / total_volume;
        let unit_volume = |k: f64, z: f64| linear_radius_volume(1.0, k, depth, z);
        let residual = |k: f64| unit_volume(k, z_ref) / unit_volume(k, 0.0) - target;

        let (mut lo, mut hi) = (1e-9, 1e3);
        if residual(lo) * residual(hi) > 0.0 {
            return Err(Error::Config(
                "no truncated cone satisfies the requested volume constraints".into(),
            ));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if residual(lo) * residual(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        let k = 0.5 * (lo + hi);
        let r_top = (total_volume / unit_volume(k, 0.0)).sqrt();
        Self::cone(r_top, k * r_top, depth)
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn profile(&self) -> AreaProfile {
        self.profile
    }

    /// Cross-sectional area; below the bottom the area is continued as `A(B)`.
    pub fn area(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, self.depth);
        match self.profile {
            AreaProfile::Cylinder { area } => area,
            AreaProfile::LinearRadius { r_top, r_bottom } => {
                let r = r_top + (r_bottom - r_top) * z / self.depth;
                PI * r * r
            }
        }
    }

    pub fn total_volume(&self) -> f64 {
        self.table[0]
    }

    /// Mixture volume below depth `z`.
    pub fn volume_at(&self, z: f64) -> Result<f64> {
        if !(0.0..=self.depth).contains(&z) {
            return Err(Error::domain("depth z", z, 0.0, self.depth));
        }
        Ok(self.volume_unchecked(z))
    }

    /// Volume of the slab `a ≤ z ≤ b`.
    pub fn volume_between(&self, a: f64, b: f64) -> f64 {
        self.volume_unchecked(a) - self.volume_unchecked(b)
    }

    pub(crate) fn volume_unchecked(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, self.depth);
        match self.profile {
            AreaProfile::Cylinder { area } => area * (self.depth - z),
            AreaProfile::LinearRadius { r_top, r_bottom } => {
                linear_radius_volume(r_top, r_bottom, self.depth, z)
            }
        }
    }

    /// Inverse of [`volume_at`](Self::volume_at): the surface depth holding
    /// `volume` m³ of mixture.
    pub fn depth_at_volume(&self, volume: f64) -> Result<f64> {
        let total = self.total_volume();
        if !(0.0..=total).contains(&volume) {
            return Err(Error::domain("volume", volume, 0.0, total));
        }
        if let AreaProfile::Cylinder { area } = self.profile {
            return Ok((self.depth - volume / area).clamp(0.0, self.depth));
        }

        // table is decreasing: find i with table[i] >= volume >= table[i + 1]
        let i = self
            .table
            .partition_point(|&v| v >= volume)
            .saturating_sub(1)
            .min(VOLUME_TABLE_INTERVALS - 1);
        let (mut lo, mut hi) = (self.table_node(i), self.table_node(i + 1));
        let mut z = lo + (hi - lo) * (self.table[i] - volume) / (self.table[i] - self.table[i + 1]);
        for _ in 0..60 {
            let g = self.volume_unchecked(z) - volume;
            if g > 0.0 {
                lo = z;
            } else {
                hi = z;
            }
            let mut next = z + g / self.area(z);
            if !(lo..=hi).contains(&next) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - z).abs();
            z = next;
            if step <= 1e-15 * self.depth {
                break;
            }
        }
        Ok(z)
    }

    fn table_node(&self, i: usize) -> f64 {
        self.depth * i as f64 / VOLUME_TABLE_INTERVALS as f64
    }
}

/// `∫_z^B π (r_top + c ξ)² dξ` with `c = (r_bottom - r_top) / B`, expanded so
/// that the cylinder limit `c → 0` loses no precision.
fn linear_radius_volume(r_top: f64, r_bottom: f64, depth: f64, z: f64) -> f64 {
    let c = (r_bottom - r_top) / depth;
    let a = r_top;
    PI * (a * a * (depth - z)
        + a * c * (depth * depth - z * z)
        + c * c * (depth.powi(3) - z.powi(3)) / 3.0)
}
