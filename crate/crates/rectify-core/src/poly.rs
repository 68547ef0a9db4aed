//! Dense univariate polynomial arithmetic (degree <= 8) and real root
//! extraction for the determinant quartic of the minimal solver.
//!
//! Roots come from the closed-form resolvent factorization; every returned
//! root is polished with Newton steps and gated on its residual, so the
//! usual precision loss of raw closed-form quartics does not propagate.

use crate::tol;

/// Coefficients in ascending powers. Entries above [`Poly::MAX_DEG`] do
/// not exist; products asserting a higher degree are a programming error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Poly {
    c: [f64; Poly::MAX_DEG + 1],
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    /// All coefficients vanish; the constraint configuration is degenerate.
    #[error("polynomial is identically zero")]
    IdenticallyZero,
}

impl Poly {
    pub const MAX_DEG: usize = 8;

    pub fn zero() -> Self {
        Poly { c: [0.0; Self::MAX_DEG + 1] }
    }

    pub fn constant(c0: f64) -> Self {
        let mut p = Self::zero();
        p.c[0] = c0;
        p
    }

    /// `c0 + c1 * x`.
    pub fn linear(c0: f64, c1: f64) -> Self {
        let mut p = Self::zero();
        p.c[0] = c0;
        p.c[1] = c1;
        p
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        assert!(coeffs.len() <= Self::MAX_DEG + 1);
        let mut p = Self::zero();
        p.c[..coeffs.len()].copy_from_slice(coeffs);
        p
    }

    pub fn coeff(&self, i: usize) -> f64 {
        if i <= Self::MAX_DEG {
            self.c[i]
        } else {
            0.0
        }
    }

    /// Exact degree (index of the highest nonzero coefficient).
    pub fn degree(&self) -> usize {
        (0..=Self::MAX_DEG).rev().find(|&i| self.c[i] != 0.0).unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.c.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for i in (1..=Self::MAX_DEG).rev() {
            acc = acc * x + self.c[i] * i as f64;
        }
        acc
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        for c in &mut out.c {
            *c *= s;
        }
        out
    }
}

impl std::ops::Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        let mut out = self;
        for i in 0..=Poly::MAX_DEG {
            out.c[i] += rhs.c[i];
        }
        out
    }
}

impl std::ops::Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        let mut out = self;
        for i in 0..=Poly::MAX_DEG {
            out.c[i] -= rhs.c[i];
        }
        out
    }
}

impl std::ops::Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        let mut out = Poly::zero();
        for i in 0..=Poly::MAX_DEG {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..=Poly::MAX_DEG {
                if rhs.c[j] == 0.0 {
                    continue;
                }
                debug_assert!(i + j <= Poly::MAX_DEG, "product degree exceeds {}", Poly::MAX_DEG);
                out.c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        out
    }
}

impl std::ops::Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scaled(-1.0)
    }
}

/// Real roots of `a x^2 + b x + c` via the cancellation-free formula.
fn quadratic_roots(a: f64, b: f64, c: f64, out: &mut Vec<f64>) {
    if a == 0.0 {
        if b != 0.0 {
            out.push(-c / b);
        }
        return;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        // Keep a borderline double root; Newton polish and the residual
        // gate decide whether it survives.
        if disc > -1e-12 * (b * b + 4.0 * (a * c).abs()) {
            out.push(-b / (2.0 * a));
        }
        return;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    if q != 0.0 {
        out.push(q / a);
        out.push(c / q);
    } else {
        out.push(0.0);
        out.push(-b / a);
    }
}

/// Real roots of the monic cubic `x^3 + a x^2 + b x + c`.
fn cubic_roots_monic(a: f64, b: f64, c: f64, out: &mut Vec<f64>) {
    let q = (a * a - 3.0 * b) / 9.0;
    let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
    let q3 = q * q * q;
    if r * r < q3 {
        let theta = (r / q3.sqrt()).clamp(-1.0, 1.0).acos();
        let m = -2.0 * q.sqrt();
        out.push(m * (theta / 3.0).cos() - a / 3.0);
        out.push(m * ((theta + std::f64::consts::TAU) / 3.0).cos() - a / 3.0);
        out.push(m * ((theta - std::f64::consts::TAU) / 3.0).cos() - a / 3.0);
    } else {
        let big_a = -r.signum() * (r.abs() + (r * r - q3).sqrt()).cbrt();
        let big_b = if big_a != 0.0 { q / big_a } else { 0.0 };
        out.push(big_a + big_b - a / 3.0);
    }
}

/// Real roots of the monic quartic `x^4 + a x^3 + b x^2 + c x + d` through
/// the resolvent-cubic factorization into two quadratics.
fn quartic_roots_monic(a: f64, b: f64, c: f64, d: f64, out: &mut Vec<f64>) {
    // Depress with x = t - a/4.
    let p = b - 3.0 * a * a / 8.0;
    let q = c - a * b / 2.0 + a * a * a / 8.0;
    let r = d - a * c / 4.0 + a * a * b / 16.0 - 3.0 * a * a * a * a / 256.0;
    let shift = -a / 4.0;

    let scale = p.abs().max(r.abs().sqrt()).max(1e-30);
    if q.abs() <= 1e-14 * scale.powi(2).max(scale) {
        // Biquadratic: t^2 solves y^2 + p y + r = 0.
        let mut ys = Vec::with_capacity(2);
        quadratic_roots(1.0, p, r, &mut ys);
        for y in ys {
            if y >= 0.0 {
                out.push(y.sqrt() + shift);
                out.push(-y.sqrt() + shift);
            } else if y > -1e-12 * scale {
                out.push(shift);
            }
        }
        return;
    }

    // Resolvent: 8 m^3 + 8 p m^2 + (2 p^2 - 8 r) m - q^2 = 0 always has a
    // positive real root when q != 0; the largest is the most stable.
    let mut ms = Vec::with_capacity(3);
    cubic_roots_monic(p, (2.0 * p * p - 8.0 * r) / 8.0, -q * q / 8.0, &mut ms);
    let m = ms.into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !(m > 0.0) {
        return; // fully degenerate; residual gate drops anything bogus
    }
    let alpha = (2.0 * m).sqrt();
    let beta = q / (2.0 * alpha);
    let mut ts = Vec::with_capacity(4);
    quadratic_roots(1.0, -alpha, p / 2.0 + m + beta, &mut ts);
    quadratic_roots(1.0, alpha, p / 2.0 + m - beta, &mut ts);
    for t in ts {
        out.push(t + shift);
    }
}

fn newton_polish(p: &Poly, mut x: f64) -> f64 {
    let mut best = x;
    let mut best_res = p.eval(x).abs();
    for _ in 0..4 {
        let dp = p.eval_deriv(x);
        if dp.abs() < 1e-300 {
            break;
        }
        x -= p.eval(x) / dp;
        if !x.is_finite() {
            break;
        }
        let res = p.eval(x).abs();
        if res < best_res {
            best = x;
            best_res = res;
        }
    }
    best
}

/// All real roots of a polynomial of degree <= 4 inside `interval`,
/// Newton-polished, residual-gated, and deduplicated.
///
/// Degree drop (leading coefficients below `1e-12 * max|c_i|`) falls
/// through to the cubic/quadratic/linear solver.
pub fn real_roots_quartic(p: &Poly, interval: (f64, f64)) -> Result<Vec<f64>, PolyError> {
    debug_assert!(p.degree() <= 4, "expected a quartic, got degree {}", p.degree());
    let maxc = p.max_abs_coeff();
    if maxc == 0.0 {
        return Err(PolyError::IdenticallyZero);
    }
    let live = |i: usize| p.coeff(i).abs() > 1e-12 * maxc;
    let deg = (0..=4usize).rev().find(|&i| live(i)).unwrap_or(0);

    let mut raw = Vec::with_capacity(4);
    match deg {
        0 => {} // nonzero constant: no roots
        1 => raw.push(-p.coeff(0) / p.coeff(1)),
        2 => quadratic_roots(p.coeff(2), p.coeff(1), p.coeff(0), &mut raw),
        3 => {
            let c3 = p.coeff(3);
            cubic_roots_monic(p.coeff(2) / c3, p.coeff(1) / c3, p.coeff(0) / c3, &mut raw);
        }
        _ => {
            let c4 = p.coeff(4);
            quartic_roots_monic(
                p.coeff(3) / c4,
                p.coeff(2) / c4,
                p.coeff(1) / c4,
                p.coeff(0) / c4,
                &mut raw,
            );
        }
    }

    let mut roots: Vec<f64> = raw
        .into_iter()
        .filter(|r| r.is_finite())
        .map(|r| newton_polish(p, r))
        .filter(|&r| r >= interval.0 && r <= interval.1)
        .filter(|&r| p.eval(r).abs() <= tol::ROOT_RESIDUAL_REL * maxc * r.abs().max(1.0).powi(deg as i32))
        .collect();

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= tol::ROOT_MERGE_REL * a.abs().max(1.0));
    Ok(roots)
}
