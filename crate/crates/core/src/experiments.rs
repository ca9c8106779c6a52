//! Synthetic problem generators, masks and noise models used by the experiment drivers.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::curvature::CurvatureModel;
use crate::data_term::DataTerm;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Image};
use crate::scalar::Scalar;
use crate::solver::SolverConfig;

/// Inpainting instance: known image values outside `free`.
#[derive(Debug, Clone, PartialEq)]
pub struct InpaintProblem<T> {
    pub grid: GridSpec<T>,
    pub reference: Image<T>,
    pub free: Array2<bool>,
    pub model: CurvatureModel<T>,
}

impl<T: Scalar> InpaintProblem<T> {
    pub fn term(&self) -> Result<DataTerm<T>> {
        DataTerm::inpaint(self.reference.clone(), self.free.clone())
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }
}

/// Disk of radius `r` in an `n × n` image with a free annulus of width `band` around it.
///
/// Pixels closer than `r - band/2` to the image center are 1, pixels farther
/// than `r + band/2` are 0, the rest is free. The model is TSC with the given `alpha`.
pub fn make_disk_problem<T: Scalar>(n: usize, r: T, band: T, alpha: T, ntheta: usize) -> Result<InpaintProblem<T>> {
    if !(r > T::zero()) || !(band >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "disk radius must be positive and band nonnegative, got r={r}, band={band}"
        )));
    }
    let grid = GridSpec::unit(n, n, ntheta)?;
    let center = T::from_count(n) * T::half();
    let (inner, outer) = (r - band * T::half(), r + band * T::half());
    if outer > center {
        return Err(Error::InvalidParameter(format!(
            "band reaches radius {outer}, beyond the half width {center} of the image"
        )));
    }
    let dist = |j: usize, i: usize| {
        let x = T::from_count(i) + T::half() - center;
        let y = T::from_count(j) + T::half() - center;
        x.hypot(y)
    };
    let reference = Image::new(Array2::from_shape_fn(grid.image_dims(), |(j, i)| {
        let d = dist(j, i);
        if d < inner {
            T::one()
        } else if d > outer {
            T::zero()
        } else {
            T::half()
        }
    }));
    let free = Array2::from_shape_fn(grid.image_dims(), |(j, i)| {
        let d = dist(j, i);
        d >= inner && d <= outer
    });
    Ok(InpaintProblem {
        grid,
        reference,
        free,
        model: CurvatureModel::tsc(alpha)?,
    })
}

/// Solver settings for the disk benchmark: a long budget and primal steps
/// scaled down against the dual ones, which reaches the residual tolerances
/// several times faster than the unbalanced steps on this problem.
pub fn disk_config<T: Scalar>() -> SolverConfig<T> {
    SolverConfig {
        max_iters: 20_000,
        step_balance: T::lit(0.03),
        ..SolverConfig::default()
    }
}

/// Horizontal bar of height `width` across an `n1 × n2` image, with a free
/// vertical strip of `gap` columns in the middle.
pub fn make_gap_problem<T: Scalar>(
    n1: usize,
    n2: usize,
    width: usize,
    gap: usize,
    ntheta: usize,
    model: CurvatureModel<T>,
) -> Result<InpaintProblem<T>> {
    let grid = GridSpec::unit(n1, n2, ntheta)?;
    if width == 0 || width + 2 > n2 {
        return Err(Error::InvalidParameter(format!(
            "bar height {width} must leave background above and below in {n2} rows"
        )));
    }
    if gap == 0 || gap + 2 > n1 {
        return Err(Error::InvalidParameter(format!(
            "gap of {gap} columns must leave data on both sides in {n1} columns"
        )));
    }
    let top = (n2 - width) / 2;
    let left = (n1 - gap) / 2;
    let reference = Image::new(Array2::from_shape_fn(grid.image_dims(), |(j, _)| {
        if (top..top + width).contains(&j) {
            T::one()
        } else {
            T::zero()
        }
    }));
    let free = Array2::from_shape_fn(grid.image_dims(), |(_, i)| (left..left + gap).contains(&i));
    Ok(InpaintProblem {
        grid,
        reference,
        free,
        model,
    })
}

fn check_fraction(fraction: f64) -> Result<()> {
    if (0.0..=1.0).contains(&fraction) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "fraction must lie in [0, 1], got {fraction}"
        )))
    }
}

/// Marks `round(fraction · height)` uniformly chosen rows as free.
pub fn remove_lines(width: usize, height: usize, fraction: f64, seed: u64) -> Result<Array2<bool>> {
    check_fraction(fraction)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = (fraction * height as f64).round() as usize;
    let mut free = Array2::from_elem((height, width), false);
    for j in sample(&mut rng, height, count) {
        free.row_mut(j).fill(true);
    }
    Ok(free)
}

/// Marks `round(fraction · width · height)` uniformly chosen pixels as free.
pub fn remove_pixels(width: usize, height: usize, fraction: f64, seed: u64) -> Result<Array2<bool>> {
    check_fraction(fraction)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = width * height;
    let count = (fraction * total as f64).round() as usize;
    let mut free = Array2::from_elem((height, width), false);
    for p in sample(&mut rng, total, count) {
        free[[p / width, p % width]] = true;
    }
    Ok(free)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    /// Additive zero-mean Gaussian noise, result clamped to `[0, 1]`.
    Gaussian { stddev: f64 },
    /// `round(fraction · N)` uniformly chosen pixels set to 0 or 1 with equal probability.
    SaltPepper { fraction: f64 },
}

pub fn add_noise<T: Scalar>(img: &Image<T>, noise: Noise, seed: u64) -> Result<Image<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = img.clone();
    match noise {
        Noise::Gaussian { stddev } => {
            if !(stddev >= 0.0) {
                return Err(Error::InvalidParameter(format!("invalid standard deviation {stddev}")));
            }
            let normal = Normal::new(0.0, stddev)
                .map_err(|_| Error::InvalidParameter(format!("invalid standard deviation {stddev}")))?;
            if stddev == 0.0 {
                return Ok(out);
            }
            for v in out.values.iter_mut() {
                let noisy = v.to_f64_lossy() + normal.sample(&mut rng);
                *v = T::lit(noisy.clamp(0.0, 1.0));
            }
        }
        Noise::SaltPepper { fraction } => {
            check_fraction(fraction)?;
            let (h, w) = out.values.dim();
            let count = (fraction * (w * h) as f64).round() as usize;
            for p in sample(&mut rng, w * h, count) {
                out.values[[p / w, p % w]] = if rng.random_bool(0.5) { T::one() } else { T::zero() };
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_disk_layout() {
        let p = make_disk_problem(40, 10.0, 10.0, 10.0, 16).unwrap();
        assert_eq!(p.reference.values.dim(), (40, 40));
        assert_eq!(p.reference.values[[20, 20]], 1.0);
        assert_eq!(p.reference.values[[0, 0]], 0.0);
        assert!(p.free[[20, 30]]);
        assert!(!p.free[[20, 20]] && !p.free[[0, 20]]);
        // annulus area π(15² - 5²) ≈ 628
        let n = p.free_count() as f64;
        assert!((n - 200.0 * std::f64::consts::PI).abs() < 30.0, "{n}");
        // symmetric under the dihedral group of the square
        let f = &p.free;
        assert_eq!(f, &f.t().to_owned());
        assert_eq!(f, &f.slice(ndarray::s![..;-1, ..]).to_owned());
    }

    #[test]
    fn disk_band_must_fit() {
        assert!(make_disk_problem(40, 15.0, 12.0, 10.0, 8).is_err());
        assert!(make_disk_problem(40, -1.0, 2.0, 10.0, 8).is_err());
        let p = make_disk_problem(40, 10.0, 0.0, 10.0, 8).unwrap();
        assert_eq!(p.free_count(), 0);
    }

    #[test]
    fn gap_problem_layout() {
        let p = make_gap_problem(20, 12, 4, 6, 8, CurvatureModel::tac(1.0).unwrap()).unwrap();
        assert_eq!(p.free_count(), 6 * 12);
        assert_eq!(p.reference.values[[4, 0]], 1.0);
        assert_eq!(p.reference.values[[3, 0]], 0.0);
        assert!(p.free[[0, 7]] && !p.free[[0, 6]] && !p.free[[0, 13]]);
    }

    #[test]
    fn removal_masks_have_exact_counts() {
        let m = remove_lines(30, 20, 0.8, 3).unwrap();
        let rows = (0..20).filter(|&j| m.row(j).iter().all(|&f| f)).count();
        assert_eq!(rows, 16);
        assert_eq!(m.iter().filter(|&&f| f).count(), 16 * 30);
        let m = remove_pixels(30, 20, 0.9, 3).unwrap();
        assert_eq!(m.iter().filter(|&&f| f).count(), 540);
        assert_eq!(m, remove_pixels(30, 20, 0.9, 3).unwrap());
        assert!(remove_pixels(3, 3, 1.5, 0).is_err());
    }

    #[test]
    fn noise_identities() {
        let img = Image::new(Array2::from_shape_fn((7, 9), |(j, i)| (i + j) as f64 / 14.0));
        assert_eq!(add_noise(&img, Noise::Gaussian { stddev: 0.0 }, 1).unwrap(), img);
        assert_eq!(add_noise(&img, Noise::SaltPepper { fraction: 0.0 }, 1).unwrap(), img);
        let sp = add_noise(&img, Noise::SaltPepper { fraction: 1.0 }, 1).unwrap();
        assert!(sp.values.iter().all(|&v| v == 0.0 || v == 1.0));
        let zeros = sp.values.iter().filter(|&&v| v == 0.0).count();
        assert!(zeros > 10 && zeros < 53);
    }

    #[test]
    fn noise_is_seeded_and_clamped() {
        let img = Image::new(Array2::from_elem((16, 16), 0.5));
        let a = add_noise(&img, Noise::Gaussian { stddev: 1.0 }, 9).unwrap();
        let b = add_noise(&img, Noise::Gaussian { stddev: 1.0 }, 9).unwrap();
        let c = add_noise(&img, Noise::Gaussian { stddev: 1.0 }, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let sp = add_noise(&img, Noise::SaltPepper { fraction: 0.25 }, 4).unwrap();
        assert_eq!(sp.values.iter().filter(|&&v| v != 0.5).count(), 64);
        assert!(add_noise(&img, Noise::Gaussian { stddev: -1.0 }, 0).is_err());
    }
}
