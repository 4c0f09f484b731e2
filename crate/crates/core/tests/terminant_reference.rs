//! Terminant values against `e^{iπp} Γ(p) Γ(1-p, w)/(2πi)`, where the upper
//! incomplete gamma is continued through `Γ(a) - w^a γ*(a, w)` with the entire
//! function `γ*`. Values frozen from an independent arbitrary-precision run.

use resurgamma::numerics::cabs;
use resurgamma::terminant::{terminant_polar, Sector};
use resurgamma::{Complex, Float, PrecisionContext};

const REFERENCE: &[(&str, &str, &str, &str, &str)] = &[
    ("10.5", "10", "2.5", "0.0215881028610804088964365047444", "0.00880914868376339391076715211092"),
    ("10.5", "10", "3.4", "0.791390715137102373927731609968", "-0.00482867588652319116868712714948"),
    ("10.5", "10", "5.1", "1.00000004904031110063608797043", "-0.0000000600716601126461817417496222681"),
    ("25.5", "25", "-4.6", "0.999999999992222647045585235918", "1.10814960255052179450771811276e-11"),
    ("3.25", "4", "0.7", "-0.0000785797343610531710204308753939", "-0.000102220962632257673969988283107"),
    ("40.5", "40", "3.1", "0.396369184489469798606486436853", "-0.0094238688595424409890212098628"),
];

fn parse(s: &str, prec: u32) -> Float {
    Float::with_val(prec, Float::parse(s).unwrap())
}

#[test]
fn matches_incomplete_gamma_continuation() {
    let ctx = PrecisionContext::new(128).unwrap();
    for &(p, r, phi, re, im) in REFERENCE {
        let t = terminant_polar(&parse(p, 128), &parse(r, 128), &parse(phi, 128), &ctx).unwrap();
        let expect = Complex::with_val(128, (parse(re, 128), parse(im, 128)));
        let diff = cabs(&Complex::with_val(128, &t.value - &expect), 128);
        let tol = cabs(&expect, 128) * 1e-25;
        assert!(diff <= tol, "p={p} |w|={r} φ={phi}: diff {diff}");
        let beyond = parse(phi, 64).abs() > std::f64::consts::PI;
        assert_eq!(t.sector == Sector::Continued, beyond);
    }
}
