//! Scalar special functions behind the analytic formulas and the test
//! statistics: log-gamma, the regularized incomplete gamma, and the
//! Kolmogorov tail.

/// Bernoulli-number coefficients B_2k / (2k (2k-1)) of the Stirling series.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

const HALF_LN_TWO_PI: f64 = 0.918938533204672741780329736406;

/// ln Gamma(x) for x > 0.
///
/// Stirling series for x >= 8 with a recurrence shift below; relative error
/// is under 1e-13 across [0.5, 1e7] away from the zeros of ln Gamma (x = 1,
/// x = 2), where cancellation bounds the error absolutely at a few 1e-15.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    let mut x = x;
    let mut shift = 0.0;
    while x < 8.0 {
        shift += x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut term = inv;
    for b in STIRLING {
        series += b * term;
        term *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + series - shift
}

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_ITMAX: usize = 500;

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a),
/// for a > 0, x >= 0. This is the chi-square tail: p = Q(k/2, chi2/2).
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "Q(a, x) requires a > 0, x >= 0");
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_continued_fraction(a, x)
    }
}

/// P(a, x) by the classic series, for x < a + 1.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut term = sum;
    for _ in 0..GAMMA_ITMAX {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Q(a, x) by the Lentz continued fraction, for x >= a + 1.
fn upper_continued_fraction(a: f64, x: f64) -> f64 {
    const FPMIN: f64 = f64::MIN_POSITIVE / f64::EPSILON;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMA_ITMAX {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Tail of the Kolmogorov distribution,
/// Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut prev = f64::INFINITY;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        if term <= 1e-17 * sum.abs() || term >= prev {
            break;
        }
        prev = term;
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
