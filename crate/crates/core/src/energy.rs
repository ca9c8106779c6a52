//! Discrete energies on averaged fields and the polygonal curve oracle.

use rayon::prelude::*;

use crate::curvature::{CurvatureKind, CurvatureModel};
use crate::error::{Error, Result};
use crate::grid::{apply_averaging, flat, AveragedField, FluxField, GridSpec};
use crate::scalar::Scalar;

/// Value of the volume-centered energy `δx²δθ Σ h(θ_k, σ̂_j)`.
///
/// Volumes are evaluated on their aligned part `(max(0, σ̂ˣ·θ̲_k), σ̂ᶿ)`; how far
/// the field is from alignment is reported in `misalignment`. Volumes where the
/// TSC integrand is infinite (no length, nonzero turning) are left out of the
/// sum and counted in `singular`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport<T> {
    pub energy: T,
    pub misalignment: T,
    pub singular: usize,
}

/// Total variation, absolute curvature and squared curvature of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics<T> {
    pub h_tv: T,
    pub h_ac: T,
    pub h_sc: T,
    /// Volumes with `σ̂ˣ = 0` and `σ̂ᶿ ≠ 0`, left out of `h_sc`.
    pub sc_singular: usize,
}

pub fn discrete_energy<T: Scalar>(
    sigma: &FluxField<T>,
    grid: &GridSpec<T>,
    model: &CurvatureModel<T>,
) -> Result<EnergyReport<T>> {
    let avg = apply_averaging(sigma, grid)?;
    averaged_energy(&avg, grid, model)
}

pub fn averaged_energy<T: Scalar>(
    sigma_hat: &AveragedField<T>,
    grid: &GridSpec<T>,
    model: &CurvatureModel<T>,
) -> Result<EnergyReport<T>> {
    sigma_hat.check(grid)?;
    let vals = flat(&sigma_hat.vals);
    let plane = grid.nx() * grid.ny();
    let parts: Vec<(T, T, usize)> = vals
        .par_chunks(plane)
        .enumerate()
        .map(|(k, slice)| {
            let th = grid.theta(k);
            let (c, s) = (th.cos(), th.sin());
            let mut sum = T::zero();
            let mut mis = T::zero();
            let mut singular = 0;
            for v in slice {
                let along = v[0] * c + v[1] * s;
                let across = (-v[0] * s + v[1] * c).abs();
                mis = mis.max(across + (-along).max(T::zero()));
                let h = model.h_aligned(along, v[2]);
                if h.is_finite() {
                    sum = sum + h;
                } else {
                    singular += 1;
                }
            }
            (sum, mis, singular)
        })
        .collect();
    let mut report = EnergyReport {
        energy: T::zero(),
        misalignment: T::zero(),
        singular: 0,
    };
    for (sum, mis, singular) in parts {
        report.energy = report.energy + sum;
        report.misalignment = report.misalignment.max(mis);
        report.singular += singular;
    }
    report.energy = report.energy * grid.cell_measure();
    Ok(report)
}

pub fn diagnostics<T: Scalar>(sigma_hat: &AveragedField<T>, grid: &GridSpec<T>) -> Result<Diagnostics<T>> {
    sigma_hat.check(grid)?;
    let vals = flat(&sigma_hat.vals);
    let plane = grid.nx() * grid.ny();
    let parts: Vec<(T, T, T, usize)> = vals
        .par_chunks(plane)
        .map(|slice| {
            let (mut tv, mut ac, mut sc, mut singular) = (T::zero(), T::zero(), T::zero(), 0);
            for v in slice {
                let len = (v[0] * v[0] + v[1] * v[1]).sqrt();
                tv = tv + len;
                ac = ac + v[2].abs();
                if len > T::zero() {
                    sc = sc + v[2] * v[2] / len;
                } else if v[2] != T::zero() {
                    singular += 1;
                }
            }
            (tv, ac, sc, singular)
        })
        .collect();
    let m = grid.cell_measure();
    let mut d = Diagnostics {
        h_tv: T::zero(),
        h_ac: T::zero(),
        h_sc: T::zero(),
        sc_singular: 0,
    };
    for (tv, ac, sc, singular) in parts {
        d.h_tv = d.h_tv + tv;
        d.h_ac = d.h_ac + ac;
        d.h_sc = d.h_sc + sc;
        d.sc_singular += singular;
    }
    d.h_tv = d.h_tv * m;
    d.h_ac = d.h_ac * m;
    d.h_sc = d.h_sc * m;
    Ok(d)
}

/// Both sides of the growth bound `Σ h(σ̂) ≥ γ Σ |σ̂|`, evaluated on the aligned
/// part of every volume and weighted by `δx²δθ`. Singular volumes count as `+∞`
/// on the left.
pub fn growth_bound_sides<T: Scalar>(
    sigma_hat: &AveragedField<T>,
    grid: &GridSpec<T>,
    model: &CurvatureModel<T>,
) -> Result<(T, T)> {
    sigma_hat.check(grid)?;
    let gamma = model.growth_constant();
    let (mut lhs, mut rhs) = (T::zero(), T::zero());
    for ((k, _, _), v) in sigma_hat.vals.indexed_iter() {
        let th = grid.theta(k);
        let along = (v[0] * th.cos() + v[1] * th.sin()).max(T::zero());
        lhs = lhs + model.h_aligned(along, v[2]);
        rhs = rhs + (along * along + v[2] * v[2]).sqrt();
    }
    let m = grid.cell_measure();
    Ok((lhs * m, gamma * rhs * m))
}

/// Polygonal curve in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricCurve<T> {
    samples: Vec<[T; 2]>,
    closed: bool,
}

impl<T: Scalar> ParametricCurve<T> {
    pub fn new(samples: Vec<[T; 2]>, closed: bool) -> Result<Self> {
        let min = if closed { 3 } else { 2 };
        if samples.len() < min {
            return Err(Error::DegenerateCurve(format!(
                "need at least {min} samples, got {}",
                samples.len()
            )));
        }
        let curve = Self { samples, closed };
        if curve.edges().any(|(a, b)| a == b) {
            return Err(Error::DegenerateCurve("repeated consecutive sample".into()));
        }
        Ok(curve)
    }

    /// Regular `n`-gon of circumradius `r` centered at the origin, counterclockwise.
    pub fn regular_polygon(n: usize, r: T) -> Result<Self> {
        let step = T::two() * T::PI() / T::from_count(n.max(1));
        let samples = (0..n)
            .map(|m| {
                let a = T::from_count(m) * step;
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        Self::new(samples, true)
    }

    pub fn samples(&self) -> &[[T; 2]] {
        &self.samples
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    fn edges(&self) -> impl Iterator<Item = ([T; 2], [T; 2])> + '_ {
        let n = self.samples.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |m| (self.samples[m], self.samples[(m + 1) % n]))
    }
}

/// Energy `∫ f(κ) ds` of a polygon, with curvature concentrated at the vertices.
///
/// Each vertex carries its turning angle `Δθ` over the length `ℓ_v`, the mean of
/// its two adjacent edges: TAC adds `α|Δθ|`, TSC adds `α²Δθ²/ℓ_v`, and TRV
/// replaces the length `ℓ_v` by `√(ℓ_v² + α²Δθ²)`.
pub fn curve_energy<T: Scalar>(curve: &ParametricCurve<T>, model: &CurvatureModel<T>) -> Result<T> {
    let dirs: Vec<[T; 2]> = curve.edges().map(|(a, b)| [b[0] - a[0], b[1] - a[1]]).collect();
    let lens: Vec<T> = dirs.iter().map(|d| (d[0] * d[0] + d[1] * d[1]).sqrt()).collect();
    if lens.iter().any(|&l| !(l > T::zero())) {
        return Err(Error::DegenerateCurve("zero-length edge".into()));
    }
    let ne = dirs.len();
    // vertex v sits between edge v-1 and edge v
    let vertices: Vec<(T, T)> = if curve.closed {
        (0..ne)
            .map(|v| ((v + ne - 1) % ne, v))
            .map(|(a, b)| turn(&dirs, &lens, a, b))
            .collect()
    } else {
        (1..ne).map(|v| turn(&dirs, &lens, v - 1, v)).collect()
    };
    let length: T = lens.iter().copied().sum();
    let alpha = model.alpha();
    let energy = match model.kind() {
        CurvatureKind::Tac => length + alpha * vertices.iter().map(|&(d, _)| d.abs()).sum::<T>(),
        CurvatureKind::Tsc => length + alpha * alpha * vertices.iter().map(|&(d, l)| d * d / l).sum::<T>(),
        CurvatureKind::Trv => {
            let ends = if curve.closed {
                T::zero()
            } else {
                T::half() * (lens[0] + lens[ne - 1])
            };
            ends + vertices
                .iter()
                .map(|&(d, l)| (l * l + alpha * alpha * d * d).sqrt())
                .sum::<T>()
        }
    };
    Ok(energy)
}

/// Signed turning angle from edge `a` to edge `b` and the vertex length.
fn turn<T: Scalar>(dirs: &[[T; 2]], lens: &[T], a: usize, b: usize) -> (T, T) {
    let (p, q) = (dirs[a], dirs[b]);
    let cross = p[0] * q[1] - p[1] * q[0];
    let dot = p[0] * q[0] + p[1] * q[1];
    (cross.atan2(dot), T::half() * (lens[a] + lens[b]))
}
