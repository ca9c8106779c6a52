//! Curvature models and the dual sets `H(θ)` they induce.
//!
//! For a convex curvature penalty `f`, the lifted integrand `h(θ, p)` is the
//! support function of `H(θ) = {ξ : ξˣ·θ̲ ≤ -f*(ξᶿ)}`. Projection onto `H(θ)`
//! reduces to a projection onto the 2D profile `P = {(a, b) : a ≤ -f*(b)}`
//! in the coordinates `a = ξˣ·θ̲`, `b = ξᶿ`; the component of `ξˣ`
//! orthogonal to `θ̲` is left untouched.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which curvature penalty `f` is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurvatureKind {
    /// Total absolute curvature, `f(t) = 1 + α|t|`.
    Tac,
    /// Total roto-translational variation, `f(t) = √(1 + α²t²)`.
    Trv,
    /// Total squared curvature (elastica), `f(t) = 1 + α²t²`.
    Tsc,
}

impl fmt::Display for CurvatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurvatureKind::Tac => "tac",
            CurvatureKind::Trv => "trv",
            CurvatureKind::Tsc => "tsc",
        })
    }
}

impl FromStr for CurvatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tac" => Ok(CurvatureKind::Tac),
            "trv" => Ok(CurvatureKind::Trv),
            "tsc" => Ok(CurvatureKind::Tsc),
            other => Err(Error::InvalidParameter(format!("unknown curvature model `{other}`"))),
        }
    }
}

/// Point of the profile plane: `xi_x_theta = ξˣ·θ̲`, `xi_theta = ξᶿ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint<T> {
    pub xi_x_theta: T,
    pub xi_theta: T,
}

impl<T> ProfilePoint<T> {
    pub fn new(xi_x_theta: T, xi_theta: T) -> Self {
        Self { xi_x_theta, xi_theta }
    }
}

const NEWTON_MAX_ITERS: usize = 50;
const BISECTION_MAX_ITERS: usize = 200;

/// Initial multiplier used when no tighter upper bracket is known.
const LAMBDA_INIT: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureModel<T> {
    kind: CurvatureKind,
    alpha: T,
}

impl<T: Scalar> CurvatureModel<T> {
    pub fn new(kind: CurvatureKind, alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "curvature weight must be positive and finite, got {alpha}"
            )));
        }
        Ok(Self { kind, alpha })
    }

    pub fn tac(alpha: T) -> Result<Self> {
        Self::new(CurvatureKind::Tac, alpha)
    }

    pub fn trv(alpha: T) -> Result<Self> {
        Self::new(CurvatureKind::Trv, alpha)
    }

    pub fn tsc(alpha: T) -> Result<Self> {
        Self::new(CurvatureKind::Tsc, alpha)
    }

    pub fn kind(&self) -> CurvatureKind {
        self.kind
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// The curvature penalty `f(t)`.
    pub fn f(&self, t: T) -> T {
        let a = self.alpha;
        match self.kind {
            CurvatureKind::Tac => T::one() + a * t.abs(),
            CurvatureKind::Trv => (T::one() + a * a * t * t).sqrt(),
            CurvatureKind::Tsc => T::one() + a * a * t * t,
        }
    }

    /// Convex conjugate `f*(s)`, `+∞` outside its domain.
    pub fn conjugate_eval(&self, s: T) -> T {
        let a = self.alpha;
        match self.kind {
            CurvatureKind::Tac => {
                if s.abs() <= a {
                    -T::one()
                } else {
                    T::infinity()
                }
            }
            CurvatureKind::Trv => {
                if s.abs() <= a {
                    let r = s / a;
                    -(T::one() - r * r).sqrt()
                } else {
                    T::infinity()
                }
            }
            CurvatureKind::Tsc => {
                let r = s / (T::two() * a);
                r * r - T::one()
            }
        }
    }

    /// Lifted integrand evaluated on the aligned part: `s ≥ 0` is the length
    /// component along `θ̲`, `t` the angular component. This is the
    /// perspective `s f(t/s)` with the recession function at `s = 0`.
    pub fn h_aligned(&self, s: T, t: T) -> T {
        let a = self.alpha;
        let s = s.max(T::zero());
        match self.kind {
            CurvatureKind::Tac => s + a * t.abs(),
            CurvatureKind::Trv => (s * s + a * a * t * t).sqrt(),
            CurvatureKind::Tsc => {
                if s > T::zero() {
                    s + a * a * t * t / s
                } else if t == T::zero() {
                    T::zero()
                } else {
                    T::infinity()
                }
            }
        }
    }

    /// `h(θ, p)`; `+∞` unless `pˣ` is a nonnegative multiple of `θ̲`.
    pub fn h_eval(&self, theta: T, p: [T; 3]) -> T {
        let (c, s) = (theta.cos(), theta.sin());
        let norm = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let along = p[0] * c + p[1] * s;
        let across = (-p[0] * s + p[1] * c).abs();
        let tol = T::lit(1e-12) * norm;
        if across > tol || along < -tol {
            return T::infinity();
        }
        self.h_aligned(norm, p[2])
    }

    /// Constant `γ` with `f(t) ≥ γ√(1 + t²)` for all `t`, hence `h(θ, p) ≥ γ|p|`
    /// on aligned vectors.
    pub fn growth_constant(&self) -> T {
        let a = self.alpha;
        match self.kind {
            CurvatureKind::Tac | CurvatureKind::Trv => a.min(T::one()),
            CurvatureKind::Tsc => {
                if T::two() * a * a >= T::one() {
                    T::one()
                } else {
                    T::two() * a * (T::one() - a * a).sqrt()
                }
            }
        }
    }

    /// Amount by which `eta` violates the profile constraint, `0` when feasible.
    ///
    /// TRV uses the squared form `max(0, a)² + (b/α)² - 1`, which stays well
    /// conditioned near `|b| = α`.
    pub fn profile_violation(&self, eta: ProfilePoint<T>) -> T {
        let a = self.alpha;
        let (x, t) = (eta.xi_x_theta, eta.xi_theta);
        let v = match self.kind {
            CurvatureKind::Tac => (x - T::one()).max(t.abs() - a),
            CurvatureKind::Trv => {
                let xp = x.max(T::zero());
                let r = t / a;
                xp * xp + r * r - T::one()
            }
            CurvatureKind::Tsc => {
                let r = t / (T::two() * a);
                x + r * r - T::one()
            }
        };
        v.max(T::zero())
    }

    /// Violation of `ξ ∈ H(θ)`.
    pub fn h_violation(&self, theta: T, xi: [T; 3]) -> T {
        let along = xi[0] * theta.cos() + xi[1] * theta.sin();
        self.profile_violation(ProfilePoint::new(along, xi[2]))
    }

    /// Euclidean projection onto the profile `P`.
    pub fn project_profile(&self, eta: ProfilePoint<T>) -> Result<ProfilePoint<T>> {
        let a = self.alpha;
        let (x, t) = (eta.xi_x_theta, eta.xi_theta);
        if !x.is_finite() || !t.is_finite() {
            return Err(Error::Projection(format!("non-finite input ({x}, {t})")));
        }
        match self.kind {
            CurvatureKind::Tac => Ok(ProfilePoint::new(x.min(T::one()), t.max(-a).min(a))),
            CurvatureKind::Trv => {
                let xp = x.max(T::zero());
                let r = t / a;
                if xp * xp + r * r <= T::one() {
                    return Ok(eta);
                }
                if x <= T::zero() {
                    return Ok(ProfilePoint::new(x, t.max(-a).min(a)));
                }
                let lambda = if a == T::one() {
                    T::half() * ((x * x + t * t).sqrt() - T::one())
                } else {
                    trv_multiplier(a, x, t)?.0
                };
                let two_l = T::two() * lambda;
                Ok(ProfilePoint::new(
                    x / (T::one() + two_l),
                    t / (T::one() + two_l / (a * a)),
                ))
            }
            CurvatureKind::Tsc => {
                let r = t / (T::two() * a);
                if x + r * r <= T::one() {
                    return Ok(eta);
                }
                let lambda = tsc_multiplier(a, x, t)?.0;
                let two_a2 = T::two() * a * a;
                Ok(ProfilePoint::new(x - lambda, t * two_a2 / (two_a2 + lambda)))
            }
        }
    }

    /// Euclidean projection of `eta` onto `H(θ)`.
    pub fn project_h(&self, theta: T, eta: [T; 3]) -> Result<[T; 3]> {
        self.project_h_dir(theta.cos(), theta.sin(), eta)
    }

    /// [`project_h`](Self::project_h) with the direction `θ̲ = (c, s)` already evaluated.
    #[inline]
    pub fn project_h_dir(&self, c: T, s: T, eta: [T; 3]) -> Result<[T; 3]> {
        let along = eta[0] * c + eta[1] * s;
        let q = self.project_profile(ProfilePoint::new(along, eta[2]))?;
        let shift = along - q.xi_x_theta;
        Ok([eta[0] - c * shift, eta[1] - s * shift, q.xi_theta])
    }

    /// Fenchel gap `h(θ, p) - ξ·p` for a feasible `ξ ∈ H(θ)`.
    pub fn support_gap(&self, theta: T, p: [T; 3], xi: [T; 3]) -> Result<T> {
        let violation = self.h_violation(theta, xi);
        if violation > T::lit(1e-9) {
            return Err(Error::Infeasible {
                violation: violation.to_f64_lossy(),
            });
        }
        let h = self.h_eval(theta, p);
        if !h.is_finite() {
            return Err(Error::InfiniteEnergy);
        }
        Ok(h - (xi[0] * p[0] + xi[1] * p[1] + xi[2] * p[2]))
    }
}

/// Lagrange multiplier of the TRV projection for a point `(x, t)` with `x > 0`
/// outside the profile: the root of
/// `(α + 2λ/α)² x² + (1 + 2λ)² t² - (1 + 2λ)² (α + 2λ/α)²` in `λ > 0`.
///
/// Returns the multiplier and the number of iterations spent.
pub fn trv_multiplier<T: Scalar>(alpha: T, x: T, t: T) -> Result<(T, usize)> {
    let one = T::one();
    let two = T::two();
    let quartic = |l: T| {
        let p = alpha + two * l / alpha;
        let q = one + two * l;
        let val = p * p * x * x + q * q * t * t - q * q * p * p;
        let dp = two / alpha;
        let dq = two;
        let der = T::two() * p * dp * x * x + two * q * dq * t * t - two * q * dq * p * p - two * p * dp * q * q;
        (val, der)
    };
    // both terms of the secular equation are at most 1/2 beyond this point
    let sqrt2 = two.sqrt();
    let upper = (T::half() * (sqrt2 * x - one)).max(T::half() * alpha * (sqrt2 * t.abs() - alpha));
    let hi = if upper > T::zero() { upper } else { T::lit(LAMBDA_INIT) };
    safeguarded_root(quartic, T::zero(), hi)
}

/// Lagrange multiplier of the TSC projection: the root of
/// `(2α² + λ)² (x - 1 - λ) + (α t)²` in `λ > 0`.
pub fn tsc_multiplier<T: Scalar>(alpha: T, x: T, t: T) -> Result<(T, usize)> {
    let one = T::one();
    let two_a2 = T::two() * alpha * alpha;
    let at2 = alpha * t * alpha * t;
    let cubic = |l: T| {
        let w = two_a2 + l;
        let r = x - one - l;
        (w * w * r + at2, T::two() * w * r - w * w)
    };
    // the multiplier is the x-displacement of the projection, which cannot
    // exceed the distance to the feasible point (min(x, 1), 0)
    let dx = (x - one).max(T::zero());
    let upper = (dx * dx + t * t).sqrt();
    let hi = if upper > T::zero() { upper } else { T::lit(LAMBDA_INIT) };
    safeguarded_root(cubic, T::zero(), hi)
}

/// Newton's method on a function that is positive at `lo` and nonpositive at
/// `hi`, started from `hi`. Steps that leave the bracket are replaced by
/// bisection; after the Newton budget plain bisection takes over.
fn safeguarded_root<T: Scalar>(g: impl Fn(T) -> (T, T), lo: T, hi: T) -> Result<(T, usize)> {
    let (mut lo, mut hi) = (lo, hi);
    let (g_hi, _) = g(hi);
    if g_hi > T::zero() {
        // widen until the sign changes
        let mut h = hi;
        let mut tries = 0;
        loop {
            h = h * T::lit(4.0) + T::one();
            tries += 1;
            if g(h).0 <= T::zero() {
                break;
            }
            if tries > 200 || !h.is_finite() {
                return Err(Error::Projection("could not bracket the multiplier".into()));
            }
        }
        lo = hi;
        hi = h;
    }
    let eps = T::epsilon() * T::lit(4.0);
    let mut lambda = hi;
    for it in 0..NEWTON_MAX_ITERS + BISECTION_MAX_ITERS {
        let (val, der) = g(lambda);
        if val == T::zero() {
            return Ok((lambda, it));
        }
        if val > T::zero() {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let scale = T::one().max(lambda.abs());
        let mut next = if it < NEWTON_MAX_ITERS && der != T::zero() {
            lambda - val / der
        } else {
            T::nan()
        };
        if (next - lambda).abs() <= eps * scale {
            return Ok((lambda, it + 1));
        }
        if !(next > lo && next < hi) {
            next = T::half() * (lo + hi);
        }
        if (next - lambda).abs() <= eps * scale || hi - lo <= eps * scale {
            return Ok((next, it + 1));
        }
        lambda = next;
    }
    Err(Error::Projection(format!(
        "multiplier did not converge, bracket [{lo}, {hi}]"
    )))
}
