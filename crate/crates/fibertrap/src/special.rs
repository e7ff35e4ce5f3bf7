//! Bessel functions J0, J1, I0, I1, K0, K1 via the classic Abramowitz-Stegun
//! rational approximations (absolute error < 5e-8 for J, relative < 5e-7 for
//! I and K). None of the numeric crates we pull in provide modified Bessels,
//! and this accuracy is far beyond what the mode solver needs.

pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 3.0 {
        let t = (x / 3.0) * (x / 3.0);
        1.0 + t * (-2.2499997
            + t * (1.2656208
                + t * (-0.3163866 + t * (0.0444479 + t * (-0.0039444 + t * 0.0002100)))))
    } else {
        let t = 3.0 / ax;
        let f = 0.79788456
            + t * (-0.00000077
                + t * (-0.00552740
                    + t * (-0.00009512 + t * (0.00137237 + t * (-0.00072805 + t * 0.00014476)))));
        let th = ax - 0.78539816
            + t * (-0.04166397
                + t * (-0.00003954
                    + t * (0.00262573 + t * (-0.00054125 + t * (-0.00029333 + t * 0.00013558)))));
        f * th.cos() / ax.sqrt()
    }
}

pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 3.0 {
        let t = (x / 3.0) * (x / 3.0);
        x * (0.5
            + t * (-0.56249985
                + t * (0.21093573
                    + t * (-0.03954289 + t * (0.00443319 + t * (-0.00031761 + t * 0.00001109))))))
    } else {
        let t = 3.0 / ax;
        let f = 0.79788456
            + t * (0.00000156
                + t * (0.01659667
                    + t * (0.00017105 + t * (-0.00249511 + t * (0.00113653 - t * 0.00020033)))));
        let th = ax - 2.35619449
            + t * (0.12499612
                + t * (0.00005650
                    + t * (-0.00637879 + t * (0.00074348 + t * (0.00079824 - t * 0.00029166)))));
        let v = f * th.cos() / ax.sqrt();
        if x >= 0.0 {
            v
        } else {
            -v
        }
    }
}

pub fn bessel_i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 3.75 {
        let t = (x / 3.75) * (x / 3.75);
        1.0 + t * (3.5156229
            + t * (3.0899424 + t * (1.2067492 + t * (0.2659732 + t * (0.0360768 + t * 0.0045813)))))
    } else {
        let t = 3.75 / ax;
        (ax.exp() / ax.sqrt())
            * (0.39894228
                + t * (0.01328592
                    + t * (0.00225319
                        + t * (-0.00157565
                            + t * (0.00916281
                                + t * (-0.02057706
                                    + t * (0.02635537 + t * (-0.01647633 + t * 0.00392377))))))))
    }
}

pub fn bessel_i1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < 3.75 {
        let t = (x / 3.75) * (x / 3.75);
        ax * (0.5
            + t * (0.87890594
                + t * (0.51498869
                    + t * (0.15084934 + t * (0.02658733 + t * (0.00301532 + t * 0.00032411))))))
    } else {
        let t = 3.75 / ax;
        (ax.exp() / ax.sqrt())
            * (0.39894228
                + t * (-0.03988024
                    + t * (-0.00362018
                        + t * (0.00163801
                            + t * (-0.01031555
                                + t * (0.02282967
                                    + t * (-0.02895312 + t * (0.01787654 - t * 0.00420059))))))))
    };
    if x >= 0.0 {
        v
    } else {
        -v
    }
}

/// Requires x > 0.
pub fn bessel_k0(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 2.0 {
        let t = x * x / 4.0;
        -(x / 2.0).ln() * bessel_i0(x) - 0.57721566
            + t * (0.42278420
                + t * (0.23069756
                    + t * (0.03488590 + t * (0.00262698 + t * (0.00010750 + t * 0.00000740)))))
    } else {
        let t = 2.0 / x;
        ((-x).exp() / x.sqrt())
            * (1.25331414
                + t * (-0.07832358
                    + t * (0.02189568
                        + t * (-0.01062446 + t * (0.00587872 + t * (-0.00251540 + t * 0.00053208))))))
    }
}

/// Requires x > 0.
pub fn bessel_k1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 2.0 {
        let t = x * x / 4.0;
        (x / 2.0).ln() * bessel_i1(x)
            + (1.0 / x)
                * (1.0
                    + t * (0.15443144
                        + t * (-0.67278579
                            + t * (-0.18156897
                                + t * (-0.01919402 + t * (-0.00110404 - t * 0.00004686))))))
    } else {
        let t = 2.0 / x;
        ((-x).exp() / x.sqrt())
            * (1.25331414
                + t * (0.23498619
                    + t * (-0.03655620
                        + t * (0.01504268 + t * (-0.00780353 + t * (0.00325614 - t * 0.00068245))))))
    }
}

/// K2(x) = K0(x) + 2 K1(x)/x.
pub fn bessel_k2(x: f64) -> f64 {
    bessel_k0(x) + 2.0 * bessel_k1(x) / x
}

/// J1'(x) = J0(x) - J1(x)/x.
pub fn bessel_j1_prime(x: f64) -> f64 {
    bessel_j0(x) - bessel_j1(x) / x
}

/// K1'(x) = -K0(x) - K1(x)/x.
pub fn bessel_k1_prime(x: f64) -> f64 {
    -bessel_k0(x) - bessel_k1(x) / x
}
