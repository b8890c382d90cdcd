//! Mapping node values between uniform rectilinear grids.
//!
//! Each target node gathers a weighted sum of source nodes. Weights are
//! computed per axis and combined as a tensor product; target coordinates
//! outside the source hull are clamped onto it. A scalar source is
//! broadcast to every target node.

use serde::{Deserialize, Serialize};

use crate::bmi::{GridDescriptor, GridKind};
use crate::scalar::Scalar;

use super::units::UnitConversion;
use super::MediatorError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapMethod {
    Nearest,
    Bilinear,
}

/// Precomputed gather weights; immutable once built.
#[derive(Debug, Clone)]
pub struct GridMapPlan<S> {
    pub source: GridDescriptor<S>,
    pub target: GridDescriptor<S>,
    pub method: MapMethod,
    // entries of target node k live in offsets[k]..offsets[k + 1]
    offsets: Vec<usize>,
    indices: Vec<usize>,
    weights: Vec<S>,
}

impl<S: Scalar> GridMapPlan<S> {
    /// Source indices and weights feeding one target node.
    pub fn entries(&self, target_node: usize) -> impl Iterator<Item = (usize, S)> + '_ {
        let range = self.offsets[target_node]..self.offsets[target_node + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn target_len(&self) -> usize {
        self.offsets.len() - 1
    }

    fn from_axis_entries(
        source: GridDescriptor<S>,
        target: GridDescriptor<S>,
        method: MapMethod,
        axes: &[Vec<Vec<(usize, S)>>],
    ) -> Self {
        let mut offsets = vec![0];
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        match axes {
            [a0] => {
                for entries in a0 {
                    for &(i, w) in entries {
                        indices.push(i);
                        weights.push(w);
                    }
                    offsets.push(indices.len());
                }
            }
            [a0, a1] => {
                let n1 = source.shape[1];
                for rows in a0 {
                    for cols in a1 {
                        for &(i, wi) in rows {
                            for &(j, wj) in cols {
                                indices.push(i * n1 + j);
                                weights.push(wi * wj);
                            }
                        }
                        offsets.push(indices.len());
                    }
                }
            }
            _ => unreachable!("rank checked by build_map"),
        }
        GridMapPlan {
            source,
            target,
            method,
            offsets,
            indices,
            weights,
        }
    }
}

fn broadcast<S: Scalar>(
    source: &GridDescriptor<S>,
    target: &GridDescriptor<S>,
    method: MapMethod,
) -> GridMapPlan<S> {
    let n = target.size();
    GridMapPlan {
        source: source.clone(),
        target: target.clone(),
        method,
        offsets: (0..=n).collect(),
        indices: vec![0; n],
        weights: vec![S::one(); n],
    }
}

// Fractional source index of each target coordinate along one axis,
// clamped to [0, n - 1].
fn axis_positions<S: Scalar>(
    source: &GridDescriptor<S>,
    target: &GridDescriptor<S>,
    axis: usize,
    length_scale: S,
) -> Vec<S> {
    let n_src = source.shape[axis];
    let upper = S::of((n_src - 1) as f64);
    (0..target.shape[axis])
        .map(|k| {
            let coord =
                (target.origin[axis] + target.spacing[axis] * S::of(k as f64)) * length_scale;
            let f = (coord - source.origin[axis]) / source.spacing[axis];
            f.max(S::zero()).min(upper)
        })
        .collect()
}

fn bilinear_axis<S: Scalar>(positions: &[S], n_src: usize) -> Vec<Vec<(usize, S)>> {
    positions
        .iter()
        .map(|&f| {
            if n_src == 1 {
                return vec![(0, S::one())];
            }
            let i0 = f.floor().to_usize().unwrap_or(0).min(n_src - 2);
            let w = f - S::of(i0 as f64);
            vec![(i0, S::one() - w), (i0 + 1, w)]
        })
        .collect()
}

fn nearest_axis<S: Scalar>(positions: &[S], n_src: usize) -> Vec<Vec<(usize, S)>> {
    let half = S::of(0.5);
    positions
        .iter()
        .map(|&f| {
            // exact halves round down, toward the lower index
            let i = (f - half).ceil().max(S::zero()).to_usize().unwrap_or(0);
            vec![(i.min(n_src - 1), S::one())]
        })
        .collect()
}

pub fn build_map<S: Scalar>(
    source: &GridDescriptor<S>,
    target: &GridDescriptor<S>,
    method: MapMethod,
) -> Result<GridMapPlan<S>, MediatorError> {
    match (source.kind, target.kind) {
        (GridKind::Scalar, _) => return Ok(broadcast(source, target, method)),
        (GridKind::UniformRectilinear, GridKind::Scalar) => {
            return Err(MediatorError::Mapping(
                "cannot map a field onto a scalar grid".to_string(),
            ))
        }
        _ => {}
    }
    if source.rank() != target.rank() {
        return Err(MediatorError::Mapping(format!(
            "rank mismatch: source rank {} vs target rank {}",
            source.rank(),
            target.rank()
        )));
    }
    if source.rank() == 0 || source.rank() > 2 {
        return Err(MediatorError::Mapping(format!(
            "unsupported rank {}",
            source.rank()
        )));
    }
    let length_scale = if source.units == target.units {
        S::one()
    } else {
        let c = UnitConversion::parse_between(&target.units, &source.units)?;
        if c.offset != 0.0 {
            return Err(MediatorError::UnsupportedUnits(target.units.clone()));
        }
        S::of(c.scale)
    };
    let axes: Vec<_> = (0..source.rank())
        .map(|axis| {
            let positions = axis_positions(source, target, axis, length_scale);
            match method {
                MapMethod::Bilinear => bilinear_axis(&positions, source.shape[axis]),
                MapMethod::Nearest => nearest_axis(&positions, source.shape[axis]),
            }
        })
        .collect();
    Ok(GridMapPlan::from_axis_entries(
        source.clone(),
        target.clone(),
        method,
        &axes,
    ))
}

pub fn apply_map<S: Scalar>(plan: &GridMapPlan<S>, values: &[S]) -> Result<Vec<S>, MediatorError> {
    if values.len() != plan.source.size() {
        return Err(MediatorError::Mapping(format!(
            "buffer has {} values, source grid has {}",
            values.len(),
            plan.source.size()
        )));
    }
    Ok((0..plan.target_len())
        .map(|k| {
            plan.entries(k)
                .fold(S::zero(), |acc, (i, w)| acc + w * values[i])
        })
        .collect())
}
