//! Staggered 2D/3D grid: pixels live on the vertices of the spatial squares,
//! fluxes live on the facets of the roto-translation volumes.
//!
//! Index conventions (all zero based, storage `[k, j, i]` with `i` fastest):
//!
//! * pixel `(i, j)`, `0 <= i < n1`, `0 <= j < n2`, located at `((i + ½)δx, (j + ½)δx)`;
//! * volume `(i, j, k)`, `0 <= i < n1 - 1`, `0 <= j < n2 - 1`, `0 <= k < nθ`,
//!   centered at `((i + 1)δx, (j + 1)δx, kδθ)`;
//! * `σ¹[k, j, i]` sits on the facet `x1 = (i + ½)δx` (lower facet of volume `i`,
//!   upper facet of volume `i - 1`), likewise `σ²[k, j, i]` on `x2 = (j + ½)δx`;
//! * `σθ[k, j, i]` sits on the lower θ-facet of volume `k`, i.e. at `(k - ½)δθ`.
//!   The upper facet of volume `nθ - 1` is facet `0`.
//! * edge `e1[j, i]` joins pixels `(i, j)` and `(i, j + 1)`, edge `e2[j, i]`
//!   joins pixels `(i, j)` and `(i + 1, j)`.

use std::borrow::Cow;

use ndarray::{Array2, Array3, ArrayBase, Dimension, OwnedRepr};
use rayon::prelude::*;

use crate::error::{check_shape, Error, Result};
use crate::scalar::Scalar;

/// Grid sizes and steps. `dtheta` is always `2π / ntheta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    n1: usize,
    n2: usize,
    ntheta: usize,
    dx: T,
    dtheta: T,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(n1: usize, n2: usize, ntheta: usize, dx: T) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2x2 pixels, got {n1}x{n2}")));
        }
        if ntheta < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 orientations, got {ntheta}"
            )));
        }
        if !(dx > T::zero()) || !dx.is_finite() {
            return Err(Error::InvalidGrid(format!("spatial step must be positive, got {dx}")));
        }
        let dtheta = T::two() * T::PI() / T::from_count(ntheta);
        Ok(Self {
            n1,
            n2,
            ntheta,
            dx,
            dtheta,
        })
    }

    /// Unit spatial step, the setting used by every experiment driver.
    pub fn unit(n1: usize, n2: usize, ntheta: usize) -> Result<Self> {
        Self::new(n1, n2, ntheta, T::one())
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn dtheta(&self) -> T {
        self.dtheta
    }

    /// Volumes along x1.
    pub fn nx(&self) -> usize {
        self.n1 - 1
    }

    /// Volumes along x2.
    pub fn ny(&self) -> usize {
        self.n2 - 1
    }

    /// Center angle of orientation slice `k`.
    pub fn theta(&self, k: usize) -> T {
        T::from_count(k) * self.dtheta
    }

    /// Quadrature weight `δx²δθ` of one volume.
    pub fn cell_measure(&self) -> T {
        self.dx * self.dx * self.dtheta
    }

    pub fn image_dims(&self) -> [usize; 2] {
        [self.n2, self.n1]
    }

    pub fn volume_dims(&self) -> [usize; 3] {
        [self.ntheta, self.n2 - 1, self.n1 - 1]
    }

    pub fn s1_dims(&self) -> [usize; 3] {
        [self.ntheta, self.n2 - 1, self.n1]
    }

    pub fn s2_dims(&self) -> [usize; 3] {
        [self.ntheta, self.n2, self.n1 - 1]
    }

    pub fn st_dims(&self) -> [usize; 3] {
        self.volume_dims()
    }

    pub fn e1_dims(&self) -> [usize; 2] {
        [self.n2 - 1, self.n1]
    }

    pub fn e2_dims(&self) -> [usize; 2] {
        [self.n2, self.n1 - 1]
    }

    pub fn volume_count(&self) -> usize {
        self.ntheta * (self.n1 - 1) * (self.n2 - 1)
    }

    /// Same grid with the two spatial axes exchanged.
    pub fn transposed(&self) -> Self {
        Self {
            n1: self.n2,
            n2: self.n1,
            ..*self
        }
    }
}

/// Discrete image, `values[[j, i]]` is pixel `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    pub values: Array2<T>,
}

impl<T: Scalar> Image<T> {
    pub fn new(values: Array2<T>) -> Self {
        Self { values }
    }

    pub fn zeros<G: Scalar>(grid: &GridSpec<G>) -> Self {
        Self::filled(grid, T::zero())
    }

    pub fn filled<G: Scalar>(grid: &GridSpec<G>, v: T) -> Self {
        Self {
            values: Array2::from_elem(grid.image_dims(), v),
        }
    }

    pub fn width(&self) -> usize {
        self.values.ncols()
    }

    pub fn height(&self) -> usize {
        self.values.nrows()
    }

    pub fn check(&self, grid: &GridSpec<T>) -> Result<()> {
        check_shape("image", &grid.image_dims(), self.values.shape())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[[j, i]]
    }

    pub fn transposed(&self) -> Self {
        Self::new(self.values.t().to_owned())
    }
}

/// Facet fluxes `(σ¹, σ², σθ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxField<T> {
    pub s1: Array3<T>,
    pub s2: Array3<T>,
    pub st: Array3<T>,
}

impl<T: Scalar> FluxField<T> {
    pub fn zeros(grid: &GridSpec<T>) -> Self {
        Self {
            s1: Array3::zeros(grid.s1_dims()),
            s2: Array3::zeros(grid.s2_dims()),
            st: Array3::zeros(grid.st_dims()),
        }
    }

    pub fn check(&self, grid: &GridSpec<T>) -> Result<()> {
        check_shape("sigma^1", &grid.s1_dims(), self.s1.shape())?;
        check_shape("sigma^2", &grid.s2_dims(), self.s2.shape())?;
        check_shape("sigma^theta", &grid.st_dims(), self.st.shape())
    }

    pub fn dot(&self, other: &Self) -> T {
        dot(&self.s1, &other.s1) + dot(&self.s2, &other.s2) + dot(&self.st, &other.st)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.s1).max(max_abs(&self.s2)).max(max_abs(&self.st))
    }

    pub fn is_finite(&self) -> bool {
        self.s1
            .iter()
            .chain(self.s2.iter())
            .chain(self.st.iter())
            .all(|v| v.is_finite())
    }
}

/// Per-volume 3-vectors, the volume-centered quadrature values `σ̂ = 𝒜σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedField<T> {
    pub vals: Array3<[T; 3]>,
}

impl<T: Scalar> AveragedField<T> {
    pub fn zeros(grid: &GridSpec<T>) -> Self {
        Self {
            vals: Array3::from_elem(grid.volume_dims(), [T::zero(); 3]),
        }
    }

    pub fn check(&self, grid: &GridSpec<T>) -> Result<()> {
        check_shape("averaged field", &grid.volume_dims(), self.vals.shape())
    }

    pub fn dot(&self, other: &Self) -> T {
        self.vals
            .iter()
            .zip(other.vals.iter())
            .map(|(a, b)| a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
            .sum()
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }
}

/// Values on the pixel edges `𝓘¹ ∪ 𝓘²`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField<T> {
    pub e1: Array2<T>,
    pub e2: Array2<T>,
}

impl<T: Scalar> EdgeField<T> {
    pub fn zeros(grid: &GridSpec<T>) -> Self {
        Self {
            e1: Array2::zeros(grid.e1_dims()),
            e2: Array2::zeros(grid.e2_dims()),
        }
    }

    pub fn check(&self, grid: &GridSpec<T>) -> Result<()> {
        check_shape("edge field e1", &grid.e1_dims(), self.e1.shape())?;
        check_shape("edge field e2", &grid.e2_dims(), self.e2.shape())
    }

    pub fn dot(&self, other: &Self) -> T {
        dot(&self.e1, &other.e1) + dot(&self.e2, &other.e2)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.e1).max(max_abs(&self.e2))
    }

    /// `self - other`, elementwise.
    pub fn sub(&self, other: &Self) -> Self {
        Self {
            e1: &self.e1 - &other.e1,
            e2: &self.e2 - &other.e2,
        }
    }
}

pub(crate) fn dot<T: Scalar, D: Dimension>(a: &ArrayBase<OwnedRepr<T>, D>, b: &ArrayBase<OwnedRepr<T>, D>) -> T {
    a.iter().zip(b.iter()).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn max_abs<T: Scalar, D: Dimension>(a: &ArrayBase<OwnedRepr<T>, D>) -> T {
    a.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// Contiguous row-major view of an owned array, copying only if the layout is not standard.
pub(crate) fn flat<T: Clone, D: Dimension>(a: &ArrayBase<OwnedRepr<T>, D>) -> Cow<'_, [T]> {
    match a.as_slice() {
        Some(s) => Cow::Borrowed(s),
        None => Cow::Owned(a.iter().cloned().collect()),
    }
}

/// `𝒟σ`: finite-volume divergence of each volume, periodic in θ.
pub fn apply_divergence<T: Scalar>(sigma: &FluxField<T>, grid: &GridSpec<T>) -> Result<Array3<T>> {
    sigma.check(grid)?;
    let mut out = Array3::zeros(grid.volume_dims());
    divergence_into(sigma, grid, out.as_slice_mut().expect("fresh array"));
    Ok(out)
}

pub(crate) fn divergence_into<T: Scalar>(sigma: &FluxField<T>, grid: &GridSpec<T>, out: &mut [T]) {
    let (n1, n2, nt) = (grid.n1, grid.n2, grid.ntheta);
    let (nx, ny) = (n1 - 1, n2 - 1);
    let s1 = flat(&sigma.s1);
    let s2 = flat(&sigma.s2);
    let st = flat(&sigma.st);
    let idx = T::one() / grid.dx;
    let idt = T::one() / grid.dtheta;
    out.par_chunks_mut(nx * ny).enumerate().for_each(|(k, o)| {
        let kp = (k + 1) % nt;
        for j in 0..ny {
            let r1 = (k * ny + j) * n1;
            let r2lo = (k * n2 + j) * nx;
            let r2hi = r2lo + nx;
            let rt = (k * ny + j) * nx;
            let rtp = (kp * ny + j) * nx;
            for i in 0..nx {
                let d1 = s1[r1 + i + 1] - s1[r1 + i];
                let d2 = s2[r2hi + i] - s2[r2lo + i];
                let d3 = st[rtp + i] - st[rt + i];
                o[j * nx + i] = (d1 + d2) * idx + d3 * idt;
            }
        }
    });
}

/// `𝒫σ`: θ-integrated spatial fluxes on the pixel edges.
pub fn apply_projection<T: Scalar>(sigma: &FluxField<T>, grid: &GridSpec<T>) -> Result<EdgeField<T>> {
    sigma.check(grid)?;
    let mut out = EdgeField::zeros(grid);
    projection_into(sigma, grid, &mut out);
    Ok(out)
}

pub(crate) fn projection_into<T: Scalar>(sigma: &FluxField<T>, grid: &GridSpec<T>, out: &mut EdgeField<T>) {
    let nt = grid.ntheta;
    let s1 = flat(&sigma.s1);
    let s2 = flat(&sigma.s2);
    let dt = grid.dtheta;
    let sum_over_k = |src: &[T], dst: &mut [T]| {
        let plane = dst.len();
        dst.par_iter_mut().enumerate().for_each(|(e, d)| {
            let mut acc = T::zero();
            for k in 0..nt {
                acc = acc + src[k * plane + e];
            }
            *d = dt * acc;
        });
    };
    sum_over_k(&s1, out.e1.as_slice_mut().expect("standard layout"));
    sum_over_k(&s2, out.e2.as_slice_mut().expect("standard layout"));
}

/// `𝒢u`: rotated discrete gradient, `e1 = ∂₂u`, `e2 = -∂₁u`.
pub fn apply_gradient<T: Scalar>(u: &Image<T>, grid: &GridSpec<T>) -> Result<EdgeField<T>> {
    u.check(grid)?;
    let mut out = EdgeField::zeros(grid);
    gradient_into(&u.values, grid, &mut out);
    Ok(out)
}

pub(crate) fn gradient_into<T: Scalar>(u: &Array2<T>, grid: &GridSpec<T>, out: &mut EdgeField<T>) {
    let (n1, n2) = (grid.n1, grid.n2);
    let idx = T::one() / grid.dx;
    let uf = flat(u);
    let e1 = out.e1.as_slice_mut().expect("standard layout");
    for j in 0..n2 - 1 {
        for i in 0..n1 {
            e1[j * n1 + i] = (uf[(j + 1) * n1 + i] - uf[j * n1 + i]) * idx;
        }
    }
    let e2 = out.e2.as_slice_mut().expect("standard layout");
    for j in 0..n2 {
        for i in 0..n1 - 1 {
            e2[j * (n1 - 1) + i] = -(uf[j * n1 + i + 1] - uf[j * n1 + i]) * idx;
        }
    }
}

/// `𝒜σ`: average of opposite facet fluxes, the value of the RT field at each volume center.
pub fn apply_averaging<T: Scalar>(sigma: &FluxField<T>, grid: &GridSpec<T>) -> Result<AveragedField<T>> {
    sigma.check(grid)?;
    let mut out = AveragedField::zeros(grid);
    averaging_into(sigma, grid, out.vals.as_slice_mut().expect("fresh array"));
    Ok(out)
}

pub(crate) fn averaging_into<T: Scalar>(sigma: &FluxField<T>, grid: &GridSpec<T>, out: &mut [[T; 3]]) {
    let (n1, n2, nt) = (grid.n1, grid.n2, grid.ntheta);
    let (nx, ny) = (n1 - 1, n2 - 1);
    let s1 = flat(&sigma.s1);
    let s2 = flat(&sigma.s2);
    let st = flat(&sigma.st);
    let h = T::half();
    out.par_chunks_mut(nx * ny).enumerate().for_each(|(k, o)| {
        let kp = (k + 1) % nt;
        for j in 0..ny {
            let r1 = (k * ny + j) * n1;
            let r2lo = (k * n2 + j) * nx;
            let r2hi = r2lo + nx;
            let rt = (k * ny + j) * nx;
            let rtp = (kp * ny + j) * nx;
            for i in 0..nx {
                o[j * nx + i] = [
                    h * (s1[r1 + i] + s1[r1 + i + 1]),
                    h * (s2[r2lo + i] + s2[r2hi + i]),
                    h * (st[rt + i] + st[rtp + i]),
                ];
            }
        }
    });
}

/// `𝒟*φ`.
pub fn adjoint_divergence<T: Scalar>(phi: &Array3<T>, grid: &GridSpec<T>) -> Result<FluxField<T>> {
    check_shape("phi", &grid.volume_dims(), phi.shape())?;
    let mut out = FluxField::zeros(grid);
    let (n1, n2, nt) = (grid.n1, grid.n2, grid.ntheta);
    let (nx, ny) = (n1 - 1, n2 - 1);
    let p = flat(phi);
    let idx = T::one() / grid.dx;
    let idt = T::one() / grid.dtheta;
    let at = |k: usize, j: usize, i: usize| p[(k * ny + j) * nx + i];
    for k in 0..nt {
        let km = (k + nt - 1) % nt;
        for j in 0..ny {
            for i in 0..n1 {
                let mut v = T::zero();
                if i >= 1 {
                    v = v + at(k, j, i - 1);
                }
                if i < nx {
                    v = v - at(k, j, i);
                }
                out.s1[[k, j, i]] = v * idx;
            }
        }
        for j in 0..n2 {
            for i in 0..nx {
                let mut v = T::zero();
                if j >= 1 {
                    v = v + at(k, j - 1, i);
                }
                if j < ny {
                    v = v - at(k, j, i);
                }
                out.s2[[k, j, i]] = v * idx;
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                out.st[[k, j, i]] = (at(km, j, i) - at(k, j, i)) * idt;
            }
        }
    }
    Ok(out)
}

/// `𝒫*ψ`: every orientation of a facet column receives `δθ ψ`.
pub fn adjoint_projection<T: Scalar>(psi: &EdgeField<T>, grid: &GridSpec<T>) -> Result<FluxField<T>> {
    psi.check(grid)?;
    let mut out = FluxField::zeros(grid);
    let dt = grid.dtheta;
    for k in 0..grid.ntheta {
        out.s1
            .index_axis_mut(ndarray::Axis(0), k)
            .zip_mut_with(&psi.e1, |o, &e| *o = dt * e);
        out.s2
            .index_axis_mut(ndarray::Axis(0), k)
            .zip_mut_with(&psi.e2, |o, &e| *o = dt * e);
    }
    Ok(out)
}

/// `𝒢*ψ`.
pub fn adjoint_gradient<T: Scalar>(psi: &EdgeField<T>, grid: &GridSpec<T>) -> Result<Image<T>> {
    psi.check(grid)?;
    let mut out = Array2::zeros(grid.image_dims());
    adjoint_gradient_into(psi, grid, out.as_slice_mut().expect("fresh array"));
    Ok(Image::new(out))
}

pub(crate) fn adjoint_gradient_into<T: Scalar>(psi: &EdgeField<T>, grid: &GridSpec<T>, out: &mut [T]) {
    let (n1, n2) = (grid.n1, grid.n2);
    let e1 = flat(&psi.e1);
    let e2 = flat(&psi.e2);
    let idx = T::one() / grid.dx;
    for j in 0..n2 {
        for i in 0..n1 {
            let mut v = T::zero();
            if j >= 1 {
                v = v + e1[(j - 1) * n1 + i];
            }
            if j + 1 < n2 {
                v = v - e1[j * n1 + i];
            }
            if i >= 1 {
                v = v - e2[j * (n1 - 1) + i - 1];
            }
            if i + 1 < n1 {
                v = v + e2[j * (n1 - 1) + i];
            }
            out[j * n1 + i] = v * idx;
        }
    }
}

/// `𝒜*ξ`: each facet collects half of the matching component of its adjacent volumes.
pub fn adjoint_averaging<T: Scalar>(xi: &AveragedField<T>, grid: &GridSpec<T>) -> Result<FluxField<T>> {
    xi.check(grid)?;
    let mut out = FluxField::zeros(grid);
    let (n1, n2, nt) = (grid.n1, grid.n2, grid.ntheta);
    let (nx, ny) = (n1 - 1, n2 - 1);
    let x = flat(&xi.vals);
    let at = |k: usize, j: usize, i: usize| x[(k * ny + j) * nx + i];
    let h = T::half();
    for k in 0..nt {
        let km = (k + nt - 1) % nt;
        for j in 0..ny {
            for i in 0..n1 {
                let mut v = T::zero();
                if i >= 1 {
                    v = v + at(k, j, i - 1)[0];
                }
                if i < nx {
                    v = v + at(k, j, i)[0];
                }
                out.s1[[k, j, i]] = h * v;
            }
        }
        for j in 0..n2 {
            for i in 0..nx {
                let mut v = T::zero();
                if j >= 1 {
                    v = v + at(k, j - 1, i)[1];
                }
                if j < ny {
                    v = v + at(k, j, i)[1];
                }
                out.s2[[k, j, i]] = h * v;
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                out.st[[k, j, i]] = h * (at(km, j, i)[2] + at(k, j, i)[2]);
            }
        }
    }
    Ok(out)
}

/// Raviart-Thomas interpolant of `sigma` at `(x1, x2, theta)`.
///
/// Each component is the linear interpolation of its two facet fluxes along
/// its own axis inside the volume containing the point.
pub fn rt_eval<T: Scalar>(sigma: &FluxField<T>, grid: &GridSpec<T>, x1: T, x2: T, theta: T) -> Result<[T; 3]> {
    sigma.check(grid)?;
    let (nx, ny, nt) = (grid.nx(), grid.ny(), grid.ntheta);
    let h = T::half();
    let lo = h * grid.dx;
    let hi1 = (T::from_count(grid.n1) - h) * grid.dx;
    let hi2 = (T::from_count(grid.n2) - h) * grid.dx;
    let inside = |x: T, hi: T| x.is_finite() && x >= lo && x <= hi;
    if !inside(x1, hi1) || !inside(x2, hi2) || !theta.is_finite() {
        return Err(Error::OutsideDomain {
            x1: x1.to_f64_lossy(),
            x2: x2.to_f64_lossy(),
        });
    }
    // position in facet units: facet m of axis 1 sits at coordinate m
    let locate = |x: T, n: usize| {
        let q = x / grid.dx - h;
        let m = q.floor().to_usize().unwrap_or(0).min(n - 1);
        (m, q - T::from_count(m))
    };
    let (i, t1) = locate(x1, nx);
    let (j, t2) = locate(x2, ny);

    let two_pi = T::two() * T::PI();
    let mut th = theta % two_pi;
    if th < T::zero() {
        th = th + two_pi;
    }
    let q = th / grid.dtheta + h;
    let raw = q.floor();
    let t3 = q - raw;
    let k = raw.to_usize().unwrap_or(0) % nt;
    let kp = (k + 1) % nt;

    let lerp = |a: T, b: T, t: T| a * (T::one() - t) + b * t;
    Ok([
        lerp(sigma.s1[[k, j, i]], sigma.s1[[k, j, i + 1]], t1),
        lerp(sigma.s2[[k, j, i]], sigma.s2[[k, j + 1, i]], t2),
        lerp(sigma.st[[k, j, i]], sigma.st[[kp, j, i]], t3),
    ])
}
