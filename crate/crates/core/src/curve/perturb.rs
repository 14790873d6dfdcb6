use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::{CurveError, Expr, KnotCurve, PERIOD};

/// Highest harmonic used by [`perturb`].
pub const PERTURBATION_ORDER: u32 = 4;

const SAMPLES: usize = 4096;

/// Adds a seeded trigonometric polynomial of orders `1..=4` to each coordinate.
///
/// Coefficients are drawn uniformly from `[-1, 1]` by a SplitMix64 stream and
/// the whole displacement is rescaled so that `max_t |δ(t)| ≤ amplitude`. The
/// sampled maximum is corrected with Bernstein's inequality
/// (`|δ'| ≤ n max|δ|`), so the bound holds between samples too.
pub fn perturb(curve: &KnotCurve, amplitude: f64, seed: u64) -> Result<KnotCurve, CurveError> {
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(CurveError::InvalidAmplitude(amplitude));
    }
    if amplitude == 0.0 {
        return Ok(curve.clone());
    }

    let mut rng = SplitMix64::seed_from_u64(seed);
    let order = PERTURBATION_ORDER as usize;
    let mut coeffs = [[(0.0f64, 0.0f64); PERTURBATION_ORDER as usize]; 3];
    for axis in coeffs.iter_mut() {
        for pair in axis.iter_mut() {
            *pair = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        }
    }

    let displacement = |t: f64| -> Vector3<f64> {
        let mut d = Vector3::zeros();
        for (axis, terms) in coeffs.iter().enumerate() {
            for (k, (a, b)) in terms.iter().enumerate() {
                let kt = (k + 1) as f64 * t;
                d[axis] += a * kt.cos() + b * kt.sin();
            }
        }
        d
    };
    let sampled_max = (0..SAMPLES)
        .map(|i| displacement(PERIOD * i as f64 / SAMPLES as f64).norm())
        .fold(0.0, f64::max);
    if sampled_max == 0.0 {
        return Ok(curve.clone());
    }
    let bernstein = 1.0 - order as f64 * PI / SAMPLES as f64;
    let scale = amplitude * bernstein / sampled_max;

    let position = curve.components().clone();
    let mut perturbed = position.clone();
    for (axis, terms) in coeffs.iter().enumerate() {
        let mut sum = Expr::Const(0.0);
        for (k, (a, b)) in terms.iter().enumerate() {
            let arg = Expr::mul(Expr::Const((k + 1) as f64), Expr::Var);
            sum = Expr::add(sum, Expr::mul(Expr::Const(scale * a), Expr::cos(arg.clone())));
            sum = Expr::add(sum, Expr::mul(Expr::Const(scale * b), Expr::sin(arg)));
        }
        perturbed[axis] = Expr::add(position[axis].clone(), sum);
    }
    KnotCurve::new(perturbed).map_err(|source| CurveError::PerturbationTooLarge {
        amplitude,
        source: Box::new(source),
    })
}
