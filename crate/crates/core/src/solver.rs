//! Preconditioned primal-dual iterations for
//! `min_{u,σ} Σ h(θ_k, (𝒜σ)_j) + G(u)` subject to `𝒟σ = 0`, `𝒫σ = 𝒢u`.

use std::fmt::Write as _;
use std::io::Write;

use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curvature::CurvatureModel;
use crate::data_term::DataTerm;
use crate::energy::averaged_energy;
use crate::error::{check_shape, Error, Result};
use crate::grid::{
    adjoint_gradient_into, apply_averaging, apply_divergence, apply_gradient, apply_projection, max_abs, AveragedField,
    EdgeField, FluxField, GridSpec, Image,
};
use crate::scalar::Scalar;

/// Spatial facets pinned to zero flux. `true` marks a pinned facet.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMask {
    pub s1: Array3<bool>,
    pub s2: Array3<bool>,
}

impl FieldMask {
    /// Pins every orientation of the facets whose edge joins two pinned pixels.
    pub fn from_pixels<T: Scalar>(pinned: &Array2<bool>, grid: &GridSpec<T>) -> Result<Self> {
        check_shape("field mask", &grid.image_dims(), pinned.shape())?;
        let s1 = Array3::from_shape_fn(grid.s1_dims(), |(_, j, i)| pinned[[j, i]] && pinned[[j + 1, i]]);
        let s2 = Array3::from_shape_fn(grid.s2_dims(), |(_, j, i)| pinned[[j, i]] && pinned[[j, i + 1]]);
        Ok(Self { s1, s2 })
    }

    pub fn check<T: Scalar>(&self, grid: &GridSpec<T>) -> Result<()> {
        check_shape("field mask s1", &grid.s1_dims(), self.s1.shape())?;
        check_shape("field mask s2", &grid.s2_dims(), self.s2.shape())
    }

    pub fn pinned_count(&self) -> usize {
        self.s1.iter().chain(self.s2.iter()).filter(|&&p| p).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub max_iters: usize,
    pub check_every: usize,
    /// Tolerance on `‖𝒟σ‖_∞`.
    pub tol_div: T,
    /// Tolerance on `‖𝒫σ - 𝒢u‖_∞`.
    pub tol_consistency: T,
    /// Energy change between two checks, relative to `max(|E|, 1)`, below which the energy counts as stagnant.
    pub energy_rtol: T,
    /// Extrapolation weight in `(0, 1]`.
    pub overrelax: T,
    /// Exponent `a ∈ [0, 2]` of the diagonal preconditioner.
    pub precond_power: T,
    /// Factor `c > 0` multiplying all primal steps and dividing all dual steps.
    pub step_balance: T,
    pub seed: u64,
    /// Amplitude of a uniform random perturbation of the initial flux; `0` starts cold.
    pub init_perturbation: T,
    pub field_mask: Option<FieldMask>,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            check_every: 100,
            tol_div: T::lit(1e-3),
            tol_consistency: T::lit(1e-3),
            energy_rtol: T::lit(1e-6),
            overrelax: T::one(),
            precond_power: T::one(),
            step_balance: T::one(),
            seed: 0,
            init_perturbation: T::zero(),
            field_mask: None,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self, grid: &GridSpec<T>) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.check_every == 0 {
            return bad("check_every must be positive");
        }
        if !(self.tol_div > T::zero() && self.tol_consistency > T::zero() && self.energy_rtol > T::zero()) {
            return bad("tolerances must be positive");
        }
        if !(self.overrelax > T::zero() && self.overrelax <= T::one()) {
            return bad("overrelax must lie in (0, 1]");
        }
        if !(self.precond_power >= T::zero() && self.precond_power <= T::two()) {
            return bad("precond_power must lie in [0, 2]");
        }
        if !(self.step_balance > T::zero() && self.step_balance.is_finite()) {
            return bad("step_balance must be positive");
        }
        if !(self.init_perturbation >= T::zero()) {
            return bad("init_perturbation must be nonnegative");
        }
        if let Some(mask) = &self.field_mask {
            mask.check(grid)?;
        }
        Ok(())
    }
}

/// Diagonal step sizes, one per primal column and dual row of the stacked operator.
///
/// Every `ξ` row has the same two entries of weight `½`, so its step is a single
/// scalar and the projection onto `H(θ)` stays Euclidean.
#[derive(Debug, Clone, PartialEq)]
pub struct Preconditioner<T> {
    pub tau_s1: Array3<T>,
    pub tau_s2: Array3<T>,
    pub tau_st: Array3<T>,
    pub tau_u: Array2<T>,
    pub sigma_phi: Array3<T>,
    pub sigma_xi: T,
    pub sigma_psi: EdgeField<T>,
}

impl<T: Scalar> Preconditioner<T> {
    /// Scales primal steps by `c` and dual steps by `1/c`; products `τ·s` are unchanged.
    pub fn balanced(mut self, c: T) -> Self {
        for t in [&mut self.tau_s1, &mut self.tau_s2, &mut self.tau_st] {
            t.mapv_inplace(|v| v * c);
        }
        self.tau_u.mapv_inplace(|v| v * c);
        self.sigma_phi.mapv_inplace(|v| v / c);
        self.sigma_xi = self.sigma_xi / c;
        self.sigma_psi.e1.mapv_inplace(|v| v / c);
        self.sigma_psi.e2.mapv_inplace(|v| v / c);
        self
    }
}

fn inv<T: Scalar>(sum: T) -> T {
    if sum > T::zero() {
        T::one() / sum
    } else {
        T::zero()
    }
}

pub fn assemble_preconditioners<T: Scalar>(grid: &GridSpec<T>, power: T) -> Result<Preconditioner<T>> {
    if !(power >= T::zero() && power <= T::two()) {
        return Err(Error::InvalidParameter(format!(
            "precond_power must lie in [0, 2], got {power}"
        )));
    }
    let (n1, n2, nt) = (grid.n1(), grid.n2(), grid.ntheta());
    let (nx, ny) = (grid.nx(), grid.ny());
    let wd = T::one() / grid.dx();
    let wt = T::one() / grid.dtheta();
    let wa = T::half();
    let wp = grid.dtheta();
    let col = |w: T| w.powf(T::two() - power);
    let row = |w: T| w.powf(power);
    let count = |a: bool, b: bool| T::from_count(a as usize + b as usize);

    let tau_s1 = Array3::from_shape_fn(grid.s1_dims(), |(_, _, i)| {
        inv(count(i >= 1, i < nx) * (col(wd) + col(wa)) + col(wp))
    });
    let tau_s2 = Array3::from_shape_fn(grid.s2_dims(), |(_, j, _)| {
        inv(count(j >= 1, j < ny) * (col(wd) + col(wa)) + col(wp))
    });
    let tau_st = Array3::from_elem(grid.st_dims(), inv(T::two() * (col(wt) + col(wa))));
    let tau_u = Array2::from_shape_fn(grid.image_dims(), |(j, i)| {
        inv((count(j >= 1, j + 1 < n2) + count(i >= 1, i + 1 < n1)) * col(wd))
    });
    let sigma_phi = Array3::from_elem(grid.volume_dims(), inv(T::lit(4.0) * row(wd) + T::two() * row(wt)));
    let sigma_xi = inv(T::two() * row(wa));
    let psi_step = inv(T::from_count(nt) * row(wp) + T::two() * row(wd));
    let sigma_psi = EdgeField {
        e1: Array2::from_elem(grid.e1_dims(), psi_step),
        e2: Array2::from_elem(grid.e2_dims(), psi_step),
    };
    Ok(Preconditioner {
        tau_s1,
        tau_s2,
        tau_st,
        tau_u,
        sigma_phi,
        sigma_xi,
        sigma_psi,
    })
}

/// Primal, dual and extrapolated variables of the iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<T> {
    pub u: Image<T>,
    pub u_bar: Image<T>,
    pub sigma: FluxField<T>,
    pub sigma_bar: FluxField<T>,
    pub phi: Array3<T>,
    pub xi: AveragedField<T>,
    pub psi: EdgeField<T>,
    pub iteration: usize,
}

impl<T: Scalar> SolverState<T> {
    /// Zero fluxes and duals, image `u0`. A positive `init_perturbation` in
    /// `config` adds seeded uniform noise to the free fluxes.
    pub fn new(u0: &Image<T>, grid: &GridSpec<T>, config: &SolverConfig<T>) -> Result<Self> {
        u0.check(grid)?;
        let mut sigma = FluxField::zeros(grid);
        if config.init_perturbation > T::zero() {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let a = config.init_perturbation.to_f64_lossy();
            for v in sigma
                .s1
                .iter_mut()
                .chain(sigma.s2.iter_mut())
                .chain(sigma.st.iter_mut())
            {
                *v = T::lit(rng.random_range(-a..=a));
            }
            if let Some(mask) = &config.field_mask {
                apply_mask(&mut sigma, mask);
            }
        }
        let u0 = Image::new(u0.values.as_standard_layout().into_owned());
        Ok(Self {
            u_bar: u0.clone(),
            u: u0,
            sigma_bar: sigma.clone(),
            sigma,
            phi: Array3::zeros(grid.volume_dims()),
            xi: AveragedField::zeros(grid),
            psi: EdgeField::zeros(grid),
            iteration: 0,
        })
    }

    /// One preconditioned primal-dual step: dual ascent at the extrapolated
    /// point, primal descent, then extrapolation.
    pub fn iterate(
        &mut self,
        pre: &Preconditioner<T>,
        config: &SolverConfig<T>,
        grid: &GridSpec<T>,
        model: &CurvatureModel<T>,
        term: &DataTerm<T>,
    ) -> Result<()> {
        self.dual_step(pre, grid, model)?;
        self.primal_step(pre, config, grid, term);
        self.iteration += 1;
        Ok(())
    }

    fn dual_step(&mut self, pre: &Preconditioner<T>, grid: &GridSpec<T>, model: &CurvatureModel<T>) -> Result<()> {
        let (n1, n2, nt) = (grid.n1(), grid.n2(), grid.ntheta());
        let (nx, ny) = (grid.nx(), grid.ny());
        let plane = nx * ny;
        let idx = T::one() / grid.dx();
        let idt = T::one() / grid.dtheta();
        let h = T::half();
        let s1 = self.sigma_bar.s1.as_slice().expect("standard layout");
        let s2 = self.sigma_bar.s2.as_slice().expect("standard layout");
        let st = self.sigma_bar.st.as_slice().expect("standard layout");

        let phi = self.phi.as_slice_mut().expect("standard layout");
        let sphi = pre.sigma_phi.as_slice().expect("standard layout");
        let xi = self.xi.vals.as_slice_mut().expect("standard layout");
        let sxi = pre.sigma_xi;
        phi.par_chunks_mut(plane)
            .zip(xi.par_chunks_mut(plane))
            .zip(sphi.par_chunks(plane))
            .enumerate()
            .try_for_each(|(k, ((phi_k, xi_k), sphi_k))| -> Result<()> {
                let kp = (k + 1) % nt;
                let th = grid.theta(k);
                let (c, s) = (th.cos(), th.sin());
                for j in 0..ny {
                    let r1 = (k * ny + j) * n1;
                    let r2lo = (k * n2 + j) * nx;
                    let r2hi = r2lo + nx;
                    let rt = (k * ny + j) * nx;
                    let rtp = (kp * ny + j) * nx;
                    for i in 0..nx {
                        let (a1, b1) = (s1[r1 + i], s1[r1 + i + 1]);
                        let (a2, b2) = (s2[r2lo + i], s2[r2hi + i]);
                        let (a3, b3) = (st[rt + i], st[rtp + i]);
                        let v = j * nx + i;
                        let div = (b1 - a1 + b2 - a2) * idx + (b3 - a3) * idt;
                        phi_k[v] = phi_k[v] + sphi_k[v] * div;
                        let x = xi_k[v];
                        let eta = [
                            x[0] + sxi * h * (a1 + b1),
                            x[1] + sxi * h * (a2 + b2),
                            x[2] + sxi * h * (a3 + b3),
                        ];
                        xi_k[v] = model.project_h_dir(c, s, eta)?;
                    }
                }
                Ok(())
            })?;

        let dt = grid.dtheta();
        let u = self.u_bar.values.as_slice().expect("standard layout");
        let psi1 = self.psi.e1.as_slice_mut().expect("standard layout");
        let sp1 = pre.sigma_psi.e1.as_slice().expect("standard layout");
        let e1_plane = ny * n1;
        psi1.par_iter_mut().enumerate().for_each(|(e, p)| {
            let (j, i) = (e / n1, e % n1);
            let mut acc = T::zero();
            for k in 0..nt {
                acc = acc + s1[k * e1_plane + e];
            }
            let grad = (u[(j + 1) * n1 + i] - u[j * n1 + i]) * idx;
            *p = *p + sp1[e] * (dt * acc - grad);
        });
        let psi2 = self.psi.e2.as_slice_mut().expect("standard layout");
        let sp2 = pre.sigma_psi.e2.as_slice().expect("standard layout");
        let e2_plane = n2 * nx;
        psi2.par_iter_mut().enumerate().for_each(|(e, p)| {
            let (j, i) = (e / nx, e % nx);
            let mut acc = T::zero();
            for k in 0..nt {
                acc = acc + s2[k * e2_plane + e];
            }
            let grad = -(u[j * n1 + i + 1] - u[j * n1 + i]) * idx;
            *p = *p + sp2[e] * (dt * acc - grad);
        });
        Ok(())
    }

    fn primal_step(
        &mut self,
        pre: &Preconditioner<T>,
        config: &SolverConfig<T>,
        grid: &GridSpec<T>,
        term: &DataTerm<T>,
    ) {
        let (n1, n2, nt) = (grid.n1(), grid.n2(), grid.ntheta());
        let (nx, ny) = (grid.nx(), grid.ny());
        let idx = T::one() / grid.dx();
        let idt = T::one() / grid.dtheta();
        let dt = grid.dtheta();
        let h = T::half();
        let theta = config.overrelax;
        let phi = self.phi.as_slice().expect("standard layout");
        let xi = self.xi.vals.as_slice().expect("standard layout");
        let psi1 = self.psi.e1.as_slice().expect("standard layout");
        let psi2 = self.psi.e2.as_slice().expect("standard layout");
        let vol = |k: usize, j: usize, i: usize| (k * ny + j) * nx + i;
        let mask1 = config
            .field_mask
            .as_ref()
            .map(|m| m.s1.as_slice().expect("standard layout"));
        let mask2 = config
            .field_mask
            .as_ref()
            .map(|m| m.s2.as_slice().expect("standard layout"));
        let update = |x: &mut T, xb: &mut T, tau: T, g: T, pinned: bool| {
            let old = *x;
            let new = if pinned { T::zero() } else { old - tau * g };
            *x = new;
            *xb = new + theta * (new - old);
        };

        let p1 = ny * n1;
        let s1 = self.sigma.s1.as_slice_mut().expect("standard layout");
        let b1 = self.sigma_bar.s1.as_slice_mut().expect("standard layout");
        let t1 = pre.tau_s1.as_slice().expect("standard layout");
        s1.par_chunks_mut(p1)
            .zip(b1.par_chunks_mut(p1))
            .enumerate()
            .for_each(|(k, (sk, bk))| {
                for j in 0..ny {
                    for i in 0..n1 {
                        let mut g = dt * psi1[j * n1 + i];
                        if i >= 1 {
                            let v = vol(k, j, i - 1);
                            g = g + phi[v] * idx + h * xi[v][0];
                        }
                        if i < nx {
                            let v = vol(k, j, i);
                            g = g - phi[v] * idx + h * xi[v][0];
                        }
                        let f = j * n1 + i;
                        let pinned = mask1.is_some_and(|m| m[k * p1 + f]);
                        update(&mut sk[f], &mut bk[f], t1[k * p1 + f], g, pinned);
                    }
                }
            });

        let p2 = n2 * nx;
        let s2 = self.sigma.s2.as_slice_mut().expect("standard layout");
        let b2 = self.sigma_bar.s2.as_slice_mut().expect("standard layout");
        let t2 = pre.tau_s2.as_slice().expect("standard layout");
        s2.par_chunks_mut(p2)
            .zip(b2.par_chunks_mut(p2))
            .enumerate()
            .for_each(|(k, (sk, bk))| {
                for j in 0..n2 {
                    for i in 0..nx {
                        let mut g = dt * psi2[j * nx + i];
                        if j >= 1 {
                            let v = vol(k, j - 1, i);
                            g = g + phi[v] * idx + h * xi[v][1];
                        }
                        if j < ny {
                            let v = vol(k, j, i);
                            g = g - phi[v] * idx + h * xi[v][1];
                        }
                        let f = j * nx + i;
                        let pinned = mask2.is_some_and(|m| m[k * p2 + f]);
                        update(&mut sk[f], &mut bk[f], t2[k * p2 + f], g, pinned);
                    }
                }
            });

        let p3 = ny * nx;
        let s3 = self.sigma.st.as_slice_mut().expect("standard layout");
        let b3 = self.sigma_bar.st.as_slice_mut().expect("standard layout");
        let t3 = pre.tau_st.as_slice().expect("standard layout");
        s3.par_chunks_mut(p3)
            .zip(b3.par_chunks_mut(p3))
            .enumerate()
            .for_each(|(k, (sk, bk))| {
                let km = (k + nt - 1) % nt;
                for f in 0..p3 {
                    let (lo, hi) = (km * p3 + f, k * p3 + f);
                    let g = (phi[lo] - phi[hi]) * idt + h * (xi[lo][2] + xi[hi][2]);
                    update(&mut sk[f], &mut bk[f], t3[k * p3 + f], g, false);
                }
            });

        let mut gstar = vec![T::zero(); n1 * n2];
        adjoint_gradient_into(&self.psi, grid, &mut gstar);
        let u = self.u.values.as_slice_mut().expect("standard layout");
        let ub = self.u_bar.values.as_slice_mut().expect("standard layout");
        let tu = pre.tau_u.as_slice().expect("standard layout");
        for p in 0..n1 * n2 {
            let old = u[p];
            let new = term.prox_pixel([p / n1, p % n1], old + tu[p] * gstar[p], tu[p]);
            u[p] = new;
            ub[p] = new + theta * (new - old);
        }
    }

    /// Largest violation of `ξ_j ∈ H(θ_k)` over all volumes.
    pub fn dual_violation(&self, grid: &GridSpec<T>, model: &CurvatureModel<T>) -> T {
        self.xi.vals.indexed_iter().fold(T::zero(), |m, ((k, _, _), &x)| {
            m.max(model.h_violation(grid.theta(k), x))
        })
    }
}

fn apply_mask<T: Scalar>(sigma: &mut FluxField<T>, mask: &FieldMask) {
    ndarray::Zip::from(&mut sigma.s1).and(&mask.s1).for_each(|v, &p| {
        if p {
            *v = T::zero();
        }
    });
    ndarray::Zip::from(&mut sigma.s2).and(&mask.s2).for_each(|v, &p| {
        if p {
            *v = T::zero();
        }
    });
}

/// Residuals and energy of one convergence check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckRecord<T> {
    pub iteration: usize,
    /// `δx²δθ (Σ h̄(𝒜σ) + G(u))`.
    pub energy: T,
    pub div_residual: T,
    pub consistency_residual: T,
    pub misalignment: T,
    pub dual_violation: T,
    pub singular: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    pub records: Vec<CheckRecord<T>>,
    pub converged: bool,
    pub iterations: usize,
    /// Largest dual infeasibility seen at any check.
    pub max_dual_violation: T,
}

impl<T: Scalar> ConvergenceReport<T> {
    pub fn last(&self) -> Option<&CheckRecord<T>> {
        self.records.last()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,energy,div_res,cons_res\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e}",
                r.iteration, r.energy, r.div_residual, r.consistency_residual
            );
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Output of [`solve`].
#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub u: Image<T>,
    pub sigma: FluxField<T>,
    pub xi: AveragedField<T>,
    pub report: ConvergenceReport<T>,
}

/// Evaluates residuals, energy and dual feasibility of a state.
pub fn check_state<T: Scalar>(
    state: &SolverState<T>,
    grid: &GridSpec<T>,
    model: &CurvatureModel<T>,
    term: &DataTerm<T>,
) -> Result<CheckRecord<T>> {
    let div = apply_divergence(&state.sigma, grid)?;
    let cons = apply_projection(&state.sigma, grid)?.sub(&apply_gradient(&state.u, grid)?);
    let avg = apply_averaging(&state.sigma, grid)?;
    let e = averaged_energy(&avg, grid, model)?;
    let data = term.value(&state.u) * grid.cell_measure();
    Ok(CheckRecord {
        iteration: state.iteration,
        energy: e.energy + data,
        div_residual: max_abs(&div),
        consistency_residual: cons.max_abs(),
        misalignment: e.misalignment,
        dual_violation: state.dual_violation(grid, model),
        singular: e.singular,
    })
}

/// Iterates from `u0` until both constraint residuals are within tolerance and
/// the energy has stagnated over one check interval, or `max_iters` is reached.
pub fn solve<T: Scalar>(
    u0: &Image<T>,
    grid: &GridSpec<T>,
    model: &CurvatureModel<T>,
    term: &DataTerm<T>,
    config: &SolverConfig<T>,
) -> Result<Solution<T>> {
    config.validate(grid)?;
    term.check(grid)?;
    let pre = assemble_preconditioners(grid, config.precond_power)?.balanced(config.step_balance);
    let mut state = SolverState::new(u0, grid, config)?;
    let mut report = ConvergenceReport {
        records: Vec::new(),
        converged: false,
        iterations: 0,
        max_dual_violation: T::zero(),
    };
    let mut prev_energy: Option<T> = None;
    loop {
        let done_iters = state.iteration >= config.max_iters;
        let at_check = state.iteration % config.check_every == 0 || done_iters;
        if at_check {
            let rec = check_state(&state, grid, model, term)?;
            if !rec.energy.is_finite() || !rec.div_residual.is_finite() || !rec.consistency_residual.is_finite() {
                return Err(Error::Diverged {
                    iteration: state.iteration,
                    detail: format!(
                        "energy {}, div residual {}, consistency residual {}",
                        rec.energy, rec.div_residual, rec.consistency_residual
                    ),
                });
            }
            report.max_dual_violation = report.max_dual_violation.max(rec.dual_violation);
            report.records.push(rec);
            let feasible = rec.div_residual <= config.tol_div && rec.consistency_residual <= config.tol_consistency;
            let stagnant = prev_energy
                .is_some_and(|p| (rec.energy - p).abs() <= config.energy_rtol * rec.energy.abs().max(T::one()));
            if feasible && stagnant {
                report.converged = true;
                break;
            }
            if done_iters {
                break;
            }
            prev_energy = Some(rec.energy);
        }
        state.iterate(&pre, config, grid, model, term)?;
    }
    report.iterations = state.iteration;
    Ok(Solution {
        u: state.u,
        sigma: state.sigma,
        xi: state.xi,
        report,
    })
}

/// Regularizer value at a fixed image: the lifted energy of the cheapest field
/// consistent with `u`, found by solving with every pixel pinned.
///
/// The returned value is the energy of the final iterate; the report tells
/// whether the constraints were met to the configured tolerances.
pub fn lifted_energy<T: Scalar>(
    u: &Image<T>,
    grid: &GridSpec<T>,
    model: &CurvatureModel<T>,
    config: &SolverConfig<T>,
) -> Result<(T, ConvergenceReport<T>)> {
    let term = DataTerm::inpaint(u.clone(), Array2::from_elem(grid.image_dims(), false))?;
    let sol = solve(u, grid, model, &term, config)?;
    let energy = sol.report.last().map_or(T::zero(), |r| r.energy);
    Ok((energy, sol.report))
}
