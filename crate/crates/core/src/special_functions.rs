//! Integer-order Bessel functions of the first kind.
//!
//! Small arguments (`|x| <= 12`) use the ascending power series. Larger
//! arguments use Miller's backward recurrence normalized by the sum rule
//! `J_0 + 2 * sum_k J_{2k} = 1`.

use thiserror::Error;

use crate::search;

/// Largest supported order magnitude.
pub const MAX_ORDER: i32 = 200;

/// Arguments at or below this magnitude are summed from the power series.
pub const SERIES_LIMIT: f64 = 12.0;

/// Extra orders above `max(n, ceil(|x|))` where the backward recurrence starts.
const MILLER_PADDING: u32 = 40;

const RESCALE_ABOVE: f64 = 1e250;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BesselError {
    #[error("order {0} outside the supported range |n| <= {MAX_ORDER}")]
    OrderOutOfRange(i64),
    #[error("argument {0} is not finite")]
    NonFiniteArgument(f64),
}

/// `J_n(x)` for integer `n` with `|n| <= 200` and finite `x`.
pub fn bessel_j(n: i32, x: f64) -> Result<f64, BesselError> {
    if n.unsigned_abs() > MAX_ORDER as u32 {
        return Err(BesselError::OrderOutOfRange(n as i64));
    }
    if !x.is_finite() {
        return Err(BesselError::NonFiniteArgument(x));
    }
    Ok(jn(n, x))
}

/// Unchecked variant used on hot paths where the order was validated upstream.
pub(crate) fn jn(n: i32, x: f64) -> f64 {
    let order = n.unsigned_abs();
    let mut value = if x.abs() <= SERIES_LIMIT {
        series(order, x.abs())
    } else {
        miller(order, x.abs())
    };
    // J_n(-x) = (-1)^n J_n(x) and J_{-n}(x) = (-1)^n J_n(x).
    let odd = order % 2 == 1;
    if odd && (x < 0.0) != (n < 0) {
        value = -value;
    }
    value
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for j in 1..=n {
        term *= half / j as f64;
    }
    if term == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 1u32;
    loop {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k as f64 > half {
            break;
        }
        k += 1;
        if k > 500 {
            break;
        }
    }
    sum
}

fn miller(n: u32, x: f64) -> f64 {
    let base = n.max(x.ceil() as u32) + MILLER_PADDING;
    let start = base + base % 2;
    let mut upper = 0.0f64; // J_{k+1}
    let mut current = 1.0f64; // J_k, unnormalized
    let mut norm = 2.0 * current; // start is even
    let mut result = if start == n { current } else { 0.0 };
    for k in (1..=start).rev() {
        let lower = (2.0 * k as f64 / x) * current - upper;
        upper = current;
        current = lower;
        let idx = k - 1;
        if idx == n {
            result = current;
        }
        if idx == 0 {
            norm += current;
        } else if idx % 2 == 0 {
            norm += 2.0 * current;
        }
        if current.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            upper *= s;
            norm *= s;
            result *= s;
        }
    }
    result / norm
}

/// Location and value of the first positive maximum of `J_n`, `1 <= n <= 50`.
pub fn bessel_j_argmax(n: u32) -> (f64, f64) {
    assert!((1..=50).contains(&n), "bessel_j_argmax supports 1 <= n <= 50");
    let order = n as i32;
    let f = |x: f64| jn(order, x);
    // J_n rises monotonically up to its first maximum, which lies beyond x = n.
    let step = 0.05;
    let mut x = n as f64;
    let mut prev = f(x);
    loop {
        let next = f(x + step);
        if next < prev {
            break;
        }
        prev = next;
        x += step;
    }
    let (lo, hi) = ((x - step).max(0.0), x + step);
    let (coarse, _) = search::golden_section_max(f, lo, hi, 1e-12);

    // Polish on the derivative J_n' = (J_{n-1} - J_{n+1}) / 2.
    let slope = |x: f64| 0.5 * (jn(order - 1, x) - jn(order + 1, x));
    let width = 1e-5;
    let x_star = search::bisect_root(slope, coarse - width, coarse + width, 1e-15)
        .unwrap_or(coarse);
    (x_star, f(x_star))
}
