//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0, max_intervals: 2000 }
    }

    pub fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel, max_intervals: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut fv = [0.0; 15];
    fv[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv[j] = f1;
        fv[14 - j] = f2;
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kron * 0.5;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let asc = asc * half.abs();
    let value = kron * half;
    let mut error = ((kron - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]`, bisecting the segment with the largest error
/// estimate until the total error meets `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("integration limits must be finite"));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let mut segments = vec![kronrod(&mut f, a, b)];
    let mut evaluations = 15;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Estimate { value, error, evaluations });
        }
        if segments.len() >= tol.max_intervals {
            return Err(Error::NumericalFailure(format!(
                "quadrature on [{a}, {b}] did not converge: value {value:e}, error {error:e} after {} intervals",
                segments.len()
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // Interval can no longer be split in floating point; accept it.
            segments.push(Segment { error: 0.0, ..s });
            continue;
        }
        segments.push(kronrod(&mut f, s.a, mid));
        segments.push(kronrod(&mut f, mid, s.b));
        evaluations += 30;
    }
}

/// Integrates over `[a, b]` after the change of variables
/// `x = (a+b)/2 + (b-a)/2 · sin t`, which absorbs inverse square-root
/// singularities at either endpoint.
pub fn integrate_sqrt_ends<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let h = std::f64::consts::FRAC_PI_2;
    integrate(
        |t| {
            let c = t.cos();
            if c <= 0.0 {
                return 0.0;
            }
            let x = (mid + half * t.sin()).clamp(a.min(b), a.max(b));
            f(x) * half * c
        },
        -h,
        h,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, Tolerance::absolute(1e-14))
            .unwrap();
        // [x^6/6 - x^3 + x] from -1 to 2
        let exact = (64.0 / 6.0 - 8.0 + 2.0) - (1.0 / 6.0 + 1.0 - 1.0);
        assert!((r.value - exact).abs() < 1e-13);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x| (10.0 * x).sin().powi(2), 0.0, PI, Tolerance::absolute(1e-12)).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-11);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let f = |x: f64| x.exp();
        let fwd = integrate(f, 0.0, 1.0, Tolerance::absolute(1e-13)).unwrap().value;
        let rev = integrate(f, 1.0, 0.0, Tolerance::absolute(1e-13)).unwrap().value;
        assert!((fwd + rev).abs() < 1e-14);
        assert!((fwd - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn inverse_sqrt_endpoints() {
        // ∫_0^1 dx / sqrt(x(1-x)) = π
        let r = integrate_sqrt_ends(|x| 1.0 / (x * (1.0 - x)).sqrt(), 0.0, 1.0, Tolerance::absolute(1e-12))
            .unwrap();
        assert!((r.value - PI).abs() < 1e-11);
        let r = integrate_sqrt_ends(|x| 1.0 / x.sqrt(), 0.0, 4.0, Tolerance::absolute(1e-11)).unwrap();
        assert!((r.value - 4.0).abs() < 1e-10);
    }

    #[test]
    fn kink_handled_adaptively() {
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, Tolerance::absolute(1e-12)).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let tol = Tolerance { abs: 1e-15, rel: 0.0, max_intervals: 4 };
        let err = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, tol).unwrap_err();
        assert_eq!(err.class(), "numerical-failure");
    }
}
