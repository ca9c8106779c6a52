//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtvar::*;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_flux(g: &Grid, r: &mut ChaCha8Rng) -> Flux {
    let mut f = Flux::zeros(g);
    for v in f.s1.iter_mut().chain(f.s2.iter_mut()).chain(f.st.iter_mut()) {
        *v = r.random_range(-1.0..1.0);
    }
    f
}

pub fn random_volumes(g: &Grid, r: &mut ChaCha8Rng) -> Array3<f64> {
    Array3::from_shape_fn(g.volume_dims(), |_| r.random_range(-1.0..1.0))
}

pub fn random_averaged(g: &Grid, r: &mut ChaCha8Rng) -> Averaged {
    Averaged {
        vals: Array3::from_shape_fn(g.volume_dims(), |_| {
            [
                r.random_range(-1.0..1.0),
                r.random_range(-1.0..1.0),
                r.random_range(-1.0..1.0),
            ]
        }),
    }
}

pub fn random_edges(g: &Grid, r: &mut ChaCha8Rng) -> Edges {
    Edges {
        e1: Array2::from_shape_fn(g.e1_dims(), |_| r.random_range(-1.0..1.0)),
        e2: Array2::from_shape_fn(g.e2_dims(), |_| r.random_range(-1.0..1.0)),
    }
}

pub fn random_image(g: &Grid, r: &mut ChaCha8Rng) -> Img {
    Img::new(Array2::from_shape_fn(g.image_dims(), |_| r.random_range(0.0..1.0)))
}

/// Dense operators written from one-based stencils: pixel `(i, j)` with
/// `1 ≤ i ≤ N1`, `1 ≤ j ≤ N2`, volume `(i, j, k)` with `i < N1`, `j < N2`,
/// `1 ≤ k ≤ Nθ`. Unknowns are ordered `[σ¹, σ², σθ, u]`, each block in
/// `(k, j, i)` lexicographic order with `i` fastest.
pub struct DenseProblem {
    pub n1: usize,
    pub n2: usize,
    pub nt: usize,
    pub dx: f64,
    pub dt: f64,
    /// Rows: `φ` (one per volume), then `ξ¹, ξ², ξθ` blocks, then `ψ¹`, `ψ²`.
    pub k: Vec<Vec<f64>>,
    pub n_vol: usize,
    pub n_e1: usize,
    pub n_e2: usize,
    pub n_s1: usize,
    pub n_s2: usize,
    pub n_st: usize,
    pub n_u: usize,
}

impl DenseProblem {
    pub fn new(n1: usize, n2: usize, nt: usize, dx: f64) -> Self {
        let dt = 2.0 * std::f64::consts::PI / nt as f64;
        let n_vol = (n1 - 1) * (n2 - 1) * nt;
        let n_s1 = n1 * (n2 - 1) * nt;
        let n_s2 = (n1 - 1) * n2 * nt;
        let n_st = n_vol;
        let n_u = n1 * n2;
        let n_e1 = n1 * (n2 - 1);
        let n_e2 = (n1 - 1) * n2;
        let cols = n_s1 + n_s2 + n_st + n_u;
        let rows = n_vol * 4 + n_e1 + n_e2;
        let mut k = vec![vec![0.0; cols]; rows];

        // one-based index helpers
        let s1 = |i: usize, j: usize, kk: usize| ((kk - 1) * (n2 - 1) + (j - 1)) * n1 + (i - 1);
        let s2 = |i: usize, j: usize, kk: usize| n_s1 + ((kk - 1) * n2 + (j - 1)) * (n1 - 1) + (i - 1);
        let st = |i: usize, j: usize, kk: usize| n_s1 + n_s2 + ((kk - 1) * (n2 - 1) + (j - 1)) * (n1 - 1) + (i - 1);
        let u = |i: usize, j: usize| n_s1 + n_s2 + n_st + (j - 1) * n1 + (i - 1);
        let vol = |i: usize, j: usize, kk: usize| ((kk - 1) * (n2 - 1) + (j - 1)) * (n1 - 1) + (i - 1);
        let e1 = |i: usize, j: usize| 4 * n_vol + (j - 1) * n1 + (i - 1);
        let e2 = |i: usize, j: usize| 4 * n_vol + n_e1 + (j - 1) * (n1 - 1) + (i - 1);
        let next = |kk: usize| if kk == nt { 1 } else { kk + 1 };

        for kk in 1..=nt {
            for j in 1..n2 {
                for i in 1..n1 {
                    let r = vol(i, j, kk);
                    // divergence
                    k[r][s1(i + 1, j, kk)] += 1.0 / dx;
                    k[r][s1(i, j, kk)] -= 1.0 / dx;
                    k[r][s2(i, j + 1, kk)] += 1.0 / dx;
                    k[r][s2(i, j, kk)] -= 1.0 / dx;
                    k[r][st(i, j, next(kk))] += 1.0 / dt;
                    k[r][st(i, j, kk)] -= 1.0 / dt;
                    // averaging
                    k[n_vol + r][s1(i, j, kk)] += 0.5;
                    k[n_vol + r][s1(i + 1, j, kk)] += 0.5;
                    k[2 * n_vol + r][s2(i, j, kk)] += 0.5;
                    k[2 * n_vol + r][s2(i, j + 1, kk)] += 0.5;
                    k[3 * n_vol + r][st(i, j, kk)] += 0.5;
                    k[3 * n_vol + r][st(i, j, next(kk))] += 0.5;
                }
            }
        }
        for j in 1..n2 {
            for i in 1..=n1 {
                let r = e1(i, j);
                for kk in 1..=nt {
                    k[r][s1(i, j, kk)] += dt;
                }
                // minus the rotated gradient: e1 = ∂₂u
                k[r][u(i, j + 1)] -= 1.0 / dx;
                k[r][u(i, j)] += 1.0 / dx;
            }
        }
        for j in 1..=n2 {
            for i in 1..n1 {
                let r = e2(i, j);
                for kk in 1..=nt {
                    k[r][s2(i, j, kk)] += dt;
                }
                // e2 = -∂₁u
                k[r][u(i + 1, j)] += 1.0 / dx;
                k[r][u(i, j)] -= 1.0 / dx;
            }
        }
        Self {
            n1,
            n2,
            nt,
            dx,
            dt,
            k,
            n_vol,
            n_e1,
            n_e2,
            n_s1,
            n_s2,
            n_st,
            n_u,
        }
    }

    pub fn rows(&self) -> usize {
        self.k.len()
    }

    pub fn cols(&self) -> usize {
        self.k[0].len()
    }

    /// `(τ per column, s per row)` from absolute row and column sums.
    pub fn steps(&self, a: f64) -> (Vec<f64>, Vec<f64>) {
        let inv = |s: f64| if s > 0.0 { 1.0 / s } else { 0.0 };
        let tau = (0..self.cols())
            .map(|c| {
                inv(self
                    .k
                    .iter()
                    .map(|row| row[c].abs())
                    .filter(|&v| v > 0.0)
                    .map(|v| v.powf(2.0 - a))
                    .sum())
            })
            .collect();
        let s = self
            .k
            .iter()
            .map(|row| inv(row.iter().filter(|v| **v != 0.0).map(|v| v.abs().powf(a)).sum()))
            .collect();
        (tau, s)
    }

    pub fn pack_primal(&self, sigma: &Flux, u: &Img) -> Vec<f64> {
        sigma
            .s1
            .iter()
            .chain(sigma.s2.iter())
            .chain(sigma.st.iter())
            .chain(u.values.iter())
            .copied()
            .collect()
    }

    pub fn pack_dual(&self, phi: &Array3<f64>, xi: &Averaged, psi: &Edges) -> Vec<f64> {
        let mut y: Vec<f64> = phi.iter().copied().collect();
        for c in 0..3 {
            y.extend(xi.vals.iter().map(|v| v[c]));
        }
        y.extend(psi.e1.iter());
        y.extend(psi.e2.iter());
        y
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.k
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        (0..self.cols())
            .map(|c| self.k.iter().zip(y).map(|(row, v)| row[c] * v).sum())
            .collect()
    }

    /// One preconditioned primal-dual step on packed vectors.
    #[allow(clippy::too_many_arguments)]
    pub fn step(
        &self,
        x: &mut [f64],
        x_bar: &mut [f64],
        y: &mut [f64],
        model: &Model,
        term: &Term,
        pinned: &[bool],
        a: f64,
        theta: f64,
    ) {
        let (tau, s) = self.steps(a);
        let kx = self.apply(x_bar);
        for r in 0..self.rows() {
            y[r] += s[r] * kx[r];
        }
        let nv = self.n_vol;
        for v in 0..nv {
            let kk = v / ((self.n1 - 1) * (self.n2 - 1));
            let th = kk as f64 * self.dt;
            let p = model.project_h(th, [y[nv + v], y[2 * nv + v], y[3 * nv + v]]).unwrap();
            y[nv + v] = p[0];
            y[2 * nv + v] = p[1];
            y[3 * nv + v] = p[2];
        }
        let kty = self.apply_t(y);
        let old = x.to_vec();
        let nsig = self.n_s1 + self.n_s2 + self.n_st;
        for c in 0..nsig {
            x[c] = if pinned[c] { 0.0 } else { x[c] - tau[c] * kty[c] };
        }
        for p in 0..self.n_u {
            let c = nsig + p;
            let v = x[c] - tau[c] * kty[c];
            x[c] = term.prox_pixel([p / self.n1, p % self.n1], v, tau[c]);
        }
        for c in 0..x.len() {
            x_bar[c] = x[c] + theta * (x[c] - old[c]);
        }
    }
}

/// Brute-force projection onto the profile `{(x, t): x ≤ -f*(t)}`.
///
/// The boundary is the graph `x = b(t)`; outside points project onto the
/// nearest graph point, found by a dense scan in `t` refined by golden
/// section. TAC and TRV additionally have the rays `{|t| = α, x ≤ b(±α)}`.
pub fn oracle_profile(model: &Model, x: f64, t: f64) -> (f64, f64) {
    let a = model.alpha();
    let b = |s: f64| -model.conjugate_eval(s);
    if x <= b(t) {
        return (x, t);
    }
    let mut cands: Vec<(f64, f64)> = Vec::new();
    let (lo, hi) = match model.kind() {
        CurvatureKind::Tac | CurvatureKind::Trv => (-a, a),
        CurvatureKind::Tsc => {
            // the graph point (b(t), t) is at distance x - b(t), so the nearest one is no farther
            let d = x - b(t);
            (t - d, t + d)
        }
    };
    if matches!(model.kind(), CurvatureKind::Tac | CurvatureKind::Trv) {
        for sgn in [-1.0, 1.0] {
            let te = sgn * a;
            cands.push((x.min(b(te)), te));
        }
    }
    let dist2 = |s: f64| (x - b(s)).powi(2) + (t - s).powi(2);
    let n = 4000;
    let h = (hi - lo) / n as f64;
    let best = (0..=n).map(|m| lo + m as f64 * h).fold((f64::INFINITY, lo), |acc, s| {
        let d = dist2(s);
        if d < acc.0 {
            (d, s)
        } else {
            acc
        }
    });
    let (mut l, mut r) = ((best.1 - h).max(lo), (best.1 + h).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = r - g * (r - l);
        let m2 = l + g * (r - l);
        if dist2(m1) < dist2(m2) {
            r = m2;
        } else {
            l = m1;
        }
    }
    let s = 0.5 * (l + r);
    cands.push((b(s), s));
    cands
        .into_iter()
        .min_by(|p, q| {
            let dp = (p.0 - x).powi(2) + (p.1 - t).powi(2);
            let dq = (q.0 - x).powi(2) + (q.1 - t).powi(2);
            dp.total_cmp(&dq)
        })
        .unwrap()
}
