//! Magnitude profiles `r ↦ Mag(N_r(X))` on `[0, L]` and their L¹ distance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::magnitude::magnitude_of_table;
use crate::space::PointCloud;

/// Step function with left-closed pieces `[radii[i], radii[i+1])`; the last
/// piece runs to `scale` inclusive. `radii[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagnitudeProfile {
    pub scale: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl MagnitudeProfile {
    pub fn new(scale: f64, radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let ok = scale > 0.0
            && scale.is_finite()
            && !radii.is_empty()
            && radii.len() == values.len()
            && radii[0] == 0.0
            && radii.windows(2).all(|w| w[0] < w[1])
            && radii.last().is_some_and(|&r| r <= scale)
            && values.iter().all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidArgument(
                "profile needs radii starting at 0, strictly increasing, within [0, L], one value each".into(),
            ));
        }
        Ok(MagnitudeProfile { scale, radii, values })
    }

    pub fn value_at(&self, r: f64) -> f64 {
        let i = self.radii.partition_point(|&x| x <= r);
        if i == 0 {
            0.0
        } else {
            self.values[i - 1]
        }
    }
}

/// Profile about the barycenter, or about `center` if given.
pub fn magnitude_profile(
    cloud: &PointCloud,
    scale: f64,
    center: Option<&[f64]>,
) -> Result<MagnitudeProfile> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale L must be positive, got {scale}")));
    }
    let center = match center {
        Some(c) if !cloud.is_empty() && c.len() != cloud.dim() => {
            return Err(Error::DimensionMismatch { expected: cloud.dim(), found: c.len() })
        }
        Some(c) => c.to_vec(),
        None => cloud.barycenter(),
    };
    let dist: Vec<f64> = (0..cloud.len()).map(|i| cloud.distance_to(i, &center)).collect();
    let mut radii: Vec<f64> = std::iter::once(0.0)
        .chain(dist.iter().copied().filter(|&r| r <= scale))
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let values = radii
        .iter()
        .map(|&r| {
            let members: Vec<usize> = (0..cloud.len()).filter(|&i| dist[i] <= r).collect();
            let table: Vec<Vec<f64>> = members
                .iter()
                .map(|&a| members.iter().map(|&b| cloud.distance(a, b)).collect())
                .collect();
            magnitude_of_table(&table)
        })
        .collect::<Result<_>>()?;
    MagnitudeProfile::new(scale, radii, values)
}

/// `∫_0^L |P₁(r) − P₂(r)| dr`, exact for step functions.
pub fn profile_l1_distance(p: &MagnitudeProfile, q: &MagnitudeProfile) -> Result<f64> {
    if p.scale != q.scale {
        return Err(Error::ScaleMismatch { left: p.scale, right: q.scale });
    }
    let mut grid: Vec<f64> = p.radii.iter().chain(&q.radii).copied().collect();
    grid.push(p.scale);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid
        .windows(2)
        .map(|w| (w[1] - w[0]) * (p.value_at(w[0]) - q.value_at(w[0])).abs())
        .sum())
}
