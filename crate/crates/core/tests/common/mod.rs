#![allow(dead_code)]

//! Oracles written independently of the library code paths.

/// `f(t)` for exponential discounting. With `m = f^{1/(1-p)}` the `f`
/// equation becomes linear, `m' = γm - 1`, `m(T) = 1`, where
/// `γ = (δ - K)/(1-p)` and `K = rp + pμ²/(2(1-p)σ²)`.
pub fn exponential_f(r: f64, mu: f64, sigma: f64, p: f64, delta: f64, horizon: f64, t: f64) -> f64 {
    let k = r * p + p * mu * mu / (2.0 * (1.0 - p) * sigma * sigma);
    let gamma = (delta - k) / (1.0 - p);
    let tau = horizon - t;
    // (1 - e^{-γτ})/γ, written to stay accurate as γ → 0
    let integral = if gamma == 0.0 { tau } else { -(-gamma * tau).exp_m1() / gamma };
    let m = (-gamma * tau).exp() + integral;
    m.powf(1.0 - p)
}

/// Root of `f` in `[lo, hi]` by bisection; requires a sign change.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Brackets `[z_i, z_{i+1}]` of a uniform scan where `f` changes sign.
pub fn sign_changes(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut prev_z = lo;
    let mut prev = f(lo);
    for i in 1..=n {
        let z = lo + (hi - lo) * i as f64 / n as f64;
        let v = f(z);
        if prev.is_finite() && v.is_finite() && (prev < 0.0) != (v < 0.0) {
            out.push((prev_z, z));
        }
        prev_z = z;
        prev = v;
    }
    out
}

pub fn premium(mu: f64, sigma: f64, p: f64) -> f64 {
    mu * mu / (2.0 * (1.0 - p) * sigma * sigma)
}

/// `1/z - [λ/(ρ₁ - k̃) + (1-λ)/(ρ₂ - k̃)]`, `k̃ = p(r + premium - z)`;
/// NaN where the integral diverges.
pub fn type_one_gap(r: f64, mu: f64, sigma: f64, p: f64, lambda: f64, rho1: f64, rho2: f64, z: f64) -> f64 {
    let kt = p * (r + premium(mu, sigma, p) - z);
    if rho1 <= kt || rho2 <= kt {
        return f64::NAN;
    }
    1.0 / z - (lambda / (rho1 - kt) + (1.0 - lambda) / (rho2 - kt))
}

/// `1/z - [1/(ρ - k̃) + λ/(ρ - k̃)²]`; NaN where the integral diverges.
pub fn type_two_gap(r: f64, mu: f64, sigma: f64, p: f64, lambda: f64, rho: f64, z: f64) -> f64 {
    let kt = p * (r + premium(mu, sigma, p) - z);
    if rho <= kt {
        return f64::NAN;
    }
    let d = rho - kt;
    1.0 / z - (1.0 / d + lambda / (d * d))
}

/// Parameters of the two-equilibria construction with gap `eps`:
/// `(r, μ, σ, p, λ, ρ₁, ρ₂)` with `ρ₁,₂ = py ± ε`.
pub fn two_equilibria(eps: f64) -> (f64, f64, f64, f64, f64, f64, f64) {
    let (r, mu, sigma, p, lambda) = (0.02, 0.1, 0.3, 0.55, 0.998);
    let y = r + premium(mu, sigma, p);
    (r, mu, sigma, p, lambda, p * y + eps, p * y - eps)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
