//! Convex data fidelity terms `G(u)` and their proximal maps with per-pixel steps.

use ndarray::{Array2, Zip};

use crate::error::{check_shape, Error, Result};
use crate::grid::{GridSpec, Image};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum DataTerm<T> {
    /// Equality constraints `u = u⁰` outside the inpainting domain; `free` marks the domain.
    Inpaint { reference: Image<T>, free: Array2<bool> },
    /// Linear force `Σ uᵢwᵢ` plus the box constraint `u ∈ [0, 1]`.
    ForceBox { force: Image<T> },
    /// `λ/2 ‖u - f‖²`.
    L2 { reference: Image<T>, lambda: T },
    /// `λ ‖u - f‖₁`.
    L1 { reference: Image<T>, lambda: T },
}

impl<T: Scalar> DataTerm<T> {
    pub fn inpaint(reference: Image<T>, free: Array2<bool>) -> Result<Self> {
        check_shape("inpainting mask", reference.values.shape(), free.shape())?;
        Ok(DataTerm::Inpaint { reference, free })
    }

    /// Shape regularization force `w = λ(½ - u⁰)`.
    pub fn shape_force(reference: &Image<T>, lambda: T) -> Result<Self> {
        check_weight(lambda)?;
        Ok(DataTerm::ForceBox {
            force: Image::new(reference.values.mapv(|u0| lambda * (T::half() - u0))),
        })
    }

    pub fn l2(reference: Image<T>, lambda: T) -> Result<Self> {
        check_weight(lambda)?;
        Ok(DataTerm::L2 { reference, lambda })
    }

    pub fn l1(reference: Image<T>, lambda: T) -> Result<Self> {
        check_weight(lambda)?;
        Ok(DataTerm::L1 { reference, lambda })
    }

    pub fn check(&self, grid: &GridSpec<T>) -> Result<()> {
        match self {
            DataTerm::Inpaint { reference, free } => {
                reference.check(grid)?;
                check_shape("inpainting mask", &grid.image_dims(), free.shape())
            }
            DataTerm::ForceBox { force } => force.check(grid),
            DataTerm::L2 { reference, .. } | DataTerm::L1 { reference, .. } => reference.check(grid),
        }
    }

    /// Solver starting image: gray inside an inpainting domain, the data elsewhere.
    pub fn initial_image(&self) -> Image<T> {
        match self {
            DataTerm::Inpaint { reference, free } => {
                let mut u = reference.clone();
                Zip::from(&mut u.values).and(free).for_each(|v, &f| {
                    if f {
                        *v = T::half();
                    }
                });
                u
            }
            DataTerm::ForceBox { force } => Image::new(force.values.mapv(|_| T::half())),
            DataTerm::L2 { reference, .. } | DataTerm::L1 { reference, .. } => reference.clone(),
        }
    }

    /// True when no pixel is tied to data, which leaves the problem without a unique solution.
    pub fn is_unconstrained(&self) -> bool {
        match self {
            DataTerm::Inpaint { free, .. } => free.iter().all(|&f| f),
            DataTerm::ForceBox { force } => force.values.iter().all(|&w| w == T::zero()),
            DataTerm::L2 { lambda, .. } | DataTerm::L1 { lambda, .. } => *lambda == T::zero(),
        }
    }

    /// Scalar prox of pixel `idx = [j, i]`.
    #[inline]
    pub fn prox_pixel(&self, idx: [usize; 2], v: T, tau: T) -> T {
        match self {
            DataTerm::Inpaint { reference, free } => {
                if free[idx] {
                    v
                } else {
                    reference.values[idx]
                }
            }
            DataTerm::ForceBox { force } => (v - tau * force.values[idx]).max(T::zero()).min(T::one()),
            DataTerm::L2 { reference, lambda } => {
                let tl = tau * *lambda;
                (v + tl * reference.values[idx]) / (T::one() + tl)
            }
            DataTerm::L1 { reference, lambda } => {
                let f = reference.values[idx];
                let d = v - f;
                let mag = (d.abs() - tau * *lambda).max(T::zero());
                f + mag * d.signum()
            }
        }
    }

    /// `argmin_u G(u) + Σ (uᵢ - vᵢ)² / (2τᵢ)`.
    pub fn prox(&self, v: &Image<T>, tau: &Array2<T>) -> Result<Image<T>> {
        let dims = self.dims();
        check_shape("prox input", &dims, v.values.shape())?;
        check_shape("prox steps", &dims, tau.shape())?;
        if tau.iter().any(|&t| !(t > T::zero())) {
            return Err(Error::InvalidParameter("prox steps must be positive".into()));
        }
        let mut out = v.values.clone();
        Zip::indexed(&mut out).and(tau).for_each(|(j, i), o, &t| {
            *o = self.prox_pixel([j, i], *o, t);
        });
        Ok(Image::new(out))
    }

    /// `G(u)`; indicator violations give `+∞`.
    pub fn value(&self, u: &Image<T>) -> T {
        match self {
            DataTerm::Inpaint { reference, free } => {
                let ok = Zip::from(&u.values)
                    .and(&reference.values)
                    .and(free)
                    .fold(true, |acc, &a, &b, &f| acc && (f || a == b));
                if ok {
                    T::zero()
                } else {
                    T::infinity()
                }
            }
            DataTerm::ForceBox { force } => {
                if u.values.iter().any(|&x| x < T::zero() || x > T::one()) {
                    return T::infinity();
                }
                Zip::from(&u.values)
                    .and(&force.values)
                    .fold(T::zero(), |acc, &x, &w| acc + x * w)
            }
            DataTerm::L2 { reference, lambda } => {
                let s = Zip::from(&u.values)
                    .and(&reference.values)
                    .fold(T::zero(), |acc, &x, &f| acc + (x - f) * (x - f));
                T::half() * *lambda * s
            }
            DataTerm::L1 { reference, lambda } => {
                let s = Zip::from(&u.values)
                    .and(&reference.values)
                    .fold(T::zero(), |acc, &x, &f| acc + (x - f).abs());
                *lambda * s
            }
        }
    }

    fn dims(&self) -> Vec<usize> {
        match self {
            DataTerm::Inpaint { reference, .. } | DataTerm::L2 { reference, .. } | DataTerm::L1 { reference, .. } => {
                reference.values.shape().to_vec()
            }
            DataTerm::ForceBox { force } => force.values.shape().to_vec(),
        }
    }
}

fn check_weight<T: Scalar>(lambda: T) -> Result<()> {
    if lambda >= T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "data weight must be nonnegative, got {lambda}"
        )))
    }
}
