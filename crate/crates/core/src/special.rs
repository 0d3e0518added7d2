// The erf/erfc rational approximations below follow FreeBSD's
// /usr/src/lib/msun/src/s_erf.c, which carries this notice:
//
// ====================================================
// Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
//
// Developed at SunPro, a Sun Microsystems, Inc. business.
// Permission to use, copy, modify, and distribute this
// software is freely granted, provided that this notice
// is preserved.
// ====================================================

//! Error function, complementary error function, `log erfc` without
//! underflow, and their inverses by safeguarded Newton iteration.

#![allow(clippy::excessive_precision)]

const ERX: f64 = 8.45062911510467529297e-01;
const EFX: f64 = 1.28379167095512586316e-01;
const PP: [f64; 5] = [
    1.28379167095512558561e-01,
    -3.25042107247001499370e-01,
    -2.84817495755985104766e-02,
    -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
];
const QQ: [f64; 5] = [
    3.97917223959155352819e-01,
    6.50222499887672944485e-02,
    5.08130628187576562776e-03,
    1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
];
const PA: [f64; 7] = [
    -2.36211856075265944077e-03,
    4.14856118683748331666e-01,
    -3.72207876035701323847e-01,
    3.18346619901161753674e-01,
    -1.10894694282396677476e-01,
    3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
];
const QA: [f64; 6] = [
    1.06420880400844228286e-01,
    5.40397917702171048937e-01,
    7.18286544141962662868e-02,
    1.26171219808761642112e-01,
    1.36370839120290507362e-02,
    1.19844998467991074170e-02,
];
const RA: [f64; 8] = [
    -9.86494403484714822705e-03,
    -6.93858572707181764372e-01,
    -1.05586262253232909814e+01,
    -6.23753324503260060396e+01,
    -1.62396669462573470355e+02,
    -1.84605092906711035994e+02,
    -8.12874355063065934246e+01,
    -9.81432934416914548592e+00,
];
const SA: [f64; 8] = [
    1.96512716674392571292e+01,
    1.37657754143519042600e+02,
    4.34565877475229228821e+02,
    6.45387271733267880336e+02,
    4.29008140027567833386e+02,
    1.08635005541779435134e+02,
    6.57024977031928170135e+00,
    -6.04244152148580987438e-02,
];
const RB: [f64; 7] = [
    -9.86494292470009928597e-03,
    -7.99283237680523006574e-01,
    -1.77579549177547519889e+01,
    -1.60636384855821916062e+02,
    -6.37566443368389627722e+02,
    -1.02509513161107724954e+03,
    -4.83519191608651397019e+02,
];
const SB: [f64; 7] = [
    3.03380607434824582924e+01,
    3.25792512996573918826e+02,
    1.53672958608443695994e+03,
    3.19985821950859553908e+03,
    2.55305040643316442583e+03,
    4.74528541206955367215e+02,
    -2.24409524465858183362e+01,
];

/// `ln √π`
pub const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;
/// `2/√π`
const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// `1 + x·poly(c, x)`
fn poly1(c: &[f64], x: f64) -> f64 {
    1.0 + x * poly(c, x)
}

/// `erf(x) − x` ratio on `|x| < 0.84375`.
fn small_ratio(x: f64) -> f64 {
    let z = x * x;
    poly(&PP, z) / poly1(&QQ, z)
}

/// `erf(1+s) − ERX` on `|x| ∈ [0.84375, 1.25)`.
fn near_one(x: f64) -> f64 {
    let s = x - 1.0;
    poly(&PA, s) / poly1(&QA, s)
}

/// `ln(x·erfc(x))` for `x ≥ 1.25`, returned as the pair
/// `(−z² − 0.5625, (z − x)(z + x) + R/S)` where `z` is `x` truncated to
/// 21 significant bits, so `z²` is exact.
fn tail_parts(x: f64) -> (f64, f64) {
    let s = 1.0 / (x * x);
    let rs = if x < 1.0 / 0.35 { poly(&RA, s) / poly1(&SA, s) } else { poly(&RB, s) / poly1(&SB, s) };
    let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    (-z * z - 0.5625, (z - x) * (z + x) + rs)
}

/// `erfc(x)` for `x ≥ 1.25`.
fn erfc_tail(x: f64) -> f64 {
    let (a, b) = tail_parts(x);
    a.exp() * b.exp() / x
}

pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let a = x.abs();
    let r = if a < 0.84375 {
        if a < 3.7252902984619140625e-9 {
            a + EFX * a
        } else {
            a + a * small_ratio(a)
        }
    } else if a < 1.25 {
        ERX + near_one(a)
    } else if a >= 6.0 {
        1.0
    } else {
        1.0 - erfc_tail(a)
    };
    r.copysign(x)
}

pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let a = x.abs();
    if a < 0.84375 {
        let t = if a < 0.25 {
            x + x * small_ratio(a)
        } else {
            // 1 − erf(x) written to avoid cancellation near x = 1/2.
            let v = 0.5 + (a * small_ratio(a) + (a - 0.5));
            v.copysign(x)
        };
        return 1.0 - t;
    }
    if a < 1.25 {
        let p = near_one(a);
        return if x > 0.0 { 1.0 - ERX - p } else { 1.0 + ERX + p };
    }
    if x > 0.0 {
        erfc_tail(a)
    } else if a < 6.0 {
        2.0 - erfc_tail(a)
    } else {
        2.0
    }
}

/// `ln erfc(x)` for every real `x`, without underflow for large `x`.
pub fn log_erfc(x: f64) -> f64 {
    if x >= 1.25 {
        if x.is_infinite() {
            return f64::NEG_INFINITY;
        }
        let (a, b) = tail_parts(x);
        a + b - x.ln()
    } else {
        erfc(x).ln()
    }
}

/// `d/dx ln erfc(x) = −(2/√π)·e^{−x²}/erfc(x)`.
pub fn log_erfc_derivative(x: f64) -> f64 {
    -TWO_OVER_SQRT_PI * (-x * x - log_erfc(x)).exp()
}

/// Solves `ln erfc(x) = target` for `x ≥ 0`, i.e. `target ≤ 0`.
///
/// `ln erfc` is concave and decreasing, so Newton started at `x = 0`
/// overshoots once and then descends monotonically onto the root.
pub fn inv_log_erfc(target: f64) -> f64 {
    debug_assert!(target <= 0.0);
    if target >= 0.0 {
        return 0.0;
    }
    if target == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    // Asymptotic start: erfc(x) ≈ e^{−x²}/(x√π).
    let mut x = if target < -2.0 { (-target - LN_SQRT_PI).max(1.0).sqrt() } else { 0.0 };
    for _ in 0..100 {
        let g = log_erfc(x) - target;
        let step = g / log_erfc_derivative(x);
        let next = (x - step).max(0.0);
        if (next - x).abs() <= 1e-16 * x.max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

/// `erfc⁻¹(y)` for `y ∈ (0, 2)`.
pub fn erfc_inv(y: f64) -> f64 {
    if !(y > 0.0 && y < 2.0) {
        return if y == 0.0 {
            f64::INFINITY
        } else if y == 2.0 {
            f64::NEG_INFINITY
        } else {
            f64::NAN
        };
    }
    if y <= 1.0 {
        inv_log_erfc(y.ln())
    } else {
        -inv_log_erfc((2.0 - y).ln())
    }
}

/// `erf⁻¹(y)` for `y ∈ (−1, 1)`.
pub fn erf_inv(y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    if !(y.abs() < 1.0) {
        return if y == 1.0 {
            f64::INFINITY
        } else if y == -1.0 {
            f64::NEG_INFINITY
        } else {
            f64::NAN
        };
    }
    inv_log_erfc((-y.abs()).ln_1p()).copysign(y)
}
