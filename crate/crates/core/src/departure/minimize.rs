//! Derivative-free one-dimensional minimizers with call accounting.
//!
//! All three locate the minimizer of a unimodal objective on `[a, b]` to
//! within `tol` and report the best point actually evaluated. Infinite
//! objective values are allowed; every comparison treats them as worse than
//! any finite value, so the search drifts towards the finite side.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const INV_PHI2: f64 = 0.381_966_011_250_105_1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Golden,
    Fibonacci,
    Brent,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Golden, Method::Fibonacci, Method::Brent];

    pub fn name(self) -> &'static str {
        match self {
            Method::Golden => "golden",
            Method::Fibonacci => "fibonacci",
            Method::Brent => "brent",
        }
    }

    pub fn minimize<F: FnMut(f64) -> f64>(self, f: F, a: f64, b: f64, tol: f64) -> Result<Minimum> {
        match self {
            Method::Golden => golden_section(f, a, b, tol),
            Method::Fibonacci => fibonacci_search(f, a, b, tol),
            Method::Brent => brent(f, a, b, tol),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "golden" | "gss" => Ok(Method::Golden),
            "fibonacci" | "fib" => Ok(Method::Fibonacci),
            "brent" => Ok(Method::Brent),
            _ => Err(Error::arg(format!("unknown minimizer {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    /// Objective evaluations spent.
    pub calls: usize,
}

fn check(a: f64, b: f64, tol: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::arg("bracket must satisfy a < b"));
    }
    if !(tol > 0.0) {
        return Err(Error::arg("tolerance must be positive"));
    }
    Ok(())
}

fn finish(x: f64, fx: f64, calls: usize) -> Result<Minimum> {
    if fx.is_finite() {
        Ok(Minimum { x, fx, calls })
    } else {
        Err(Error::NonFiniteObjective)
    }
}

/// `a < b` where NaN counts as +∞.
fn lt(a: f64, b: f64) -> bool {
    let key = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
    key(a) < key(b)
}

/// Golden-section search. Stops as soon as the retained interval is no
/// wider than `tol`; the point evaluated last is never wasted.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Minimum> {
    check(a, b, tol)?;
    let (mut a, mut b) = (a, b);
    if b - a <= tol {
        let x = 0.5 * (a + b);
        return finish(x, f(x), 1);
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut calls = 2;
    loop {
        let keep_left = !lt(f2, f1);
        if keep_left {
            b = x2;
        } else {
            a = x1;
        }
        if b - a <= tol {
            let (x, fx) = if keep_left { (x1, f1) } else { (x2, f2) };
            return finish(x, fx, calls);
        }
        if keep_left {
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        calls += 1;
    }
}

/// Fibonacci search on the lattice `a + j·(b − a)/F_k`, `F_k` being the
/// first Fibonacci number with `(b − a)/F_k ≤ tol`. Only interior lattice
/// points are evaluated and the final two candidates are adjacent, so the
/// answer is within one lattice spacing of the minimizer; `F_k` takes
/// `k − 2` evaluations.
pub fn fibonacci_search<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Minimum> {
    check(a, b, tol)?;
    // fib[i] = F_i with F_1 = F_2 = 1
    let mut fib: Vec<u64> = vec![0, 1, 1];
    while (fib[fib.len() - 1] as f64) < (b - a) / tol || fib.len() < 5 {
        let n = fib.len();
        fib.push(fib[n - 1] + fib[n - 2]);
        if n > 90 {
            return Err(Error::arg("tolerance too small for the bracket"));
        }
    }
    let mut m = fib.len() - 1;
    let delta = (b - a) / fib[m] as f64;
    let at = |j: u64| a + j as f64 * delta;

    let mut lo: u64 = 0;
    let mut i1 = lo + fib[m - 2];
    let mut i2 = lo + fib[m - 1];
    let (mut f1, mut f2) = (f(at(i1)), f(at(i2)));
    let mut calls = 2;
    while m > 4 {
        if !lt(f2, f1) {
            m -= 1;
            i2 = i1;
            f2 = f1;
            i1 = lo + fib[m - 2];
            f1 = f(at(i1));
        } else {
            lo = i1;
            m -= 1;
            i1 = i2;
            f1 = f2;
            i2 = lo + fib[m - 1];
            f2 = f(at(i2));
        }
        calls += 1;
    }
    if lt(f2, f1) {
        finish(at(i2), f2, calls)
    } else {
        finish(at(i1), f1, calls)
    }
}

/// Brent's method: parabolic interpolation through the three best points
/// with a golden-section fallback whenever the parabola is unusable.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Minimum> {
    check(a, b, tol)?;
    let (mut a, mut b) = (a, b);
    let sqrt_eps = f64::EPSILON.sqrt();
    let mut x = a + INV_PHI2 * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut calls = 1;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    loop {
        let xm = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            return finish(x, fx, calls);
        }
        let mut golden = true;
        if e.abs() > tol1 && fx.is_finite() && fw.is_finite() && fv.is_finite() {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = INV_PHI2 * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        calls += 1;
        if !lt(fx, fu) {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if !lt(fw, fu) || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if !lt(fv, fu) || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
}
