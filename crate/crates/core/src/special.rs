//! Scalar special functions for the Gaussian world and the KS test.
//!
//! Hand-rolled from published double-precision algorithms so the crate stays
//! dependency-free and bit-reproducible:
//! - normal CDF: G. West, "Better approximations to cumulative normal
//!   functions" (Wilmott, 2005), |error| ~ 1e-15;
//! - normal quantile: M. Wichura, algorithm AS 241 (PPND16), |error| ~ 1e-15;
//! - Kolmogorov tail: the classic alternating series, truncated at a fixed
//!   term count.

use std::f64::consts::TAU;

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / TAU.sqrt()
}

/// Standard normal cumulative distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    let xabs = x.abs();
    if xabs > 37.0 {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let e = (-xabs * xabs / 2.0).exp();
    let cnd = if xabs < 7.071_067_811_865_47 {
        let mut num = 3.526_249_659_989_11e-2 * xabs + 0.700_383_064_443_688;
        num = num * xabs + 6.373_962_203_531_65;
        num = num * xabs + 33.912_866_078_383;
        num = num * xabs + 112.079_291_497_871;
        num = num * xabs + 221.213_596_169_931;
        num = num * xabs + 220.206_867_912_376;
        let mut den = 8.838_834_764_831_84e-2 * xabs + 1.755_667_163_182_64;
        den = den * xabs + 16.064_177_579_207;
        den = den * xabs + 86.780_732_202_946_1;
        den = den * xabs + 296.564_248_779_674;
        den = den * xabs + 637.333_633_378_831;
        den = den * xabs + 793.826_512_519_948;
        den = den * xabs + 440.413_735_824_752;
        e * num / den
    } else {
        let mut build = xabs + 0.65;
        build = xabs + 4.0 / build;
        build = xabs + 3.0 / build;
        build = xabs + 2.0 / build;
        build = xabs + 1.0 / build;
        e / build / 2.506_628_274_631_000_5
    };
    if x > 0.0 {
        1.0 - cnd
    } else {
        cnd
    }
}

/// Horner evaluation with coefficients ordered from the highest power down.
#[inline]
fn poly(x: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Standard normal quantile (inverse CDF), AS 241 / PPND16.
///
/// Panics on `p` outside (0, 1); callers clip their probabilities first
/// (the zigzag estimator's `q_clip` exists exactly for this reason).
pub fn norm_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile requires p in (0,1), got {p}");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = poly(
            r,
            &[
                2.509_080_928_730_122_7e3,
                3.343_057_558_358_813e4,
                6.726_577_092_700_87e4,
                4.592_195_393_154_987e4,
                1.373_169_376_550_946_1e4,
                1.971_590_950_306_551_3e3,
                1.331_416_678_917_843_8e2,
                3.387_132_872_796_366_5,
            ],
        );
        let den = poly(
            r,
            &[
                5.226_495_278_852_545_5e3,
                2.872_908_573_572_194_3e4,
                3.930_789_580_009_271e4,
                2.121_379_430_158_659_7e4,
                5.394_196_021_424_751e3,
                6.871_870_074_920_579e2,
                4.231_333_070_160_091e1,
                1.0,
            ],
        );
        return q * num / den;
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        poly(
            r,
            &[
                7.745_450_142_783_414e-4,
                2.272_384_498_926_918_4e-2,
                2.417_807_251_774_506e-1,
                1.270_458_252_452_368_4,
                3.647_848_324_763_204_5,
                5.769_497_221_460_691,
                4.630_337_846_156_546,
                1.423_437_110_749_683_5,
            ],
        ) / poly(
            r,
            &[
                1.050_750_071_644_416_9e-9,
                5.475_938_084_995_345e-4,
                1.519_866_656_361_645_7e-2,
                1.481_039_764_274_800_8e-1,
                6.897_673_349_851e-1,
                1.676_384_830_183_803_8,
                2.053_191_626_637_758_8,
                1.0,
            ],
        )
    } else {
        let r = r - 5.0;
        poly(
            r,
            &[
                2.010_334_399_292_288_1e-7,
                2.711_555_568_743_487_6e-5,
                1.242_660_947_388_078_4e-3,
                2.653_218_952_657_612_4e-2,
                2.965_605_718_285_048_7e-1,
                1.784_826_539_917_291_3,
                5.463_784_911_164_114,
                6.657_904_643_501_103,
            ],
        ) / poly(
            r,
            &[
                2.044_263_103_389_939_7e-15,
                1.421_511_758_316_446e-7,
                1.846_318_317_510_054_8e-5,
                7.868_691_311_456_133e-4,
                1.487_536_129_085_061_5e-2,
                1.369_298_809_227_358e-1,
                5.998_322_065_558_88e-1,
                1.0,
            ],
        )
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Number of terms kept in the Kolmogorov tail series.
const KOLMOGOROV_TERMS: usize = 100;

/// Kolmogorov asymptotic survival function Q(lambda) = P(sup |B(t)| > lambda).
///
/// Q(lambda) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2), truncated at
/// [`KOLMOGOROV_TERMS`]; the result is clamped to [0, 1].
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=KOLMOGOROV_TERMS {
        let kf = k as f64;
        sum += sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
