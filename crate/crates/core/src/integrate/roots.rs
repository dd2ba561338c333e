//! Real roots of univariate f64 polynomials on a bounded interval.
//!
//! The critical points of p split [lo, hi] into monotone pieces, so each
//! piece holds at most one root; critical points come from the same routine
//! applied to p′.

/// Coefficients lowest power first.
pub fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * t + v)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &v)| v * k as f64).collect()
}

/// Drops leading coefficients that cannot matter on |t| ≤ r.
fn trim(c: &[f64], r: f64) -> &[f64] {
    let r = r.max(1.0);
    let scale: f64 = c.iter().enumerate().map(|(k, v)| v.abs() * r.powi(k as i32)).sum();
    let mut d = c.len();
    while d > 0 && c[d - 1].abs() * r.powi(d as i32 - 1) <= 1e-15 * scale {
        d -= 1;
    }
    &c[..d]
}

/// Sorted sign-change roots of `c` strictly inside (lo, hi).
pub fn real_roots(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c = trim(c, lo.abs().max(hi.abs()));
    let mut out = Vec::new();
    roots_rec(c, lo, hi, &mut out);
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs().max(1.0));
    out
}

fn roots_rec(c: &[f64], lo: f64, hi: f64, out: &mut Vec<f64>) {
    match c.len() {
        0 | 1 => {}
        2 => {
            let r = -c[0] / c[1];
            if r > lo && r < hi {
                out.push(r);
            }
        }
        _ => {
            let dc = derivative(c);
            let mut crit = Vec::new();
            roots_rec(&dc, lo, hi, &mut crit);
            crit.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let mut pts = Vec::with_capacity(crit.len() + 2);
            pts.push(lo);
            pts.extend(crit);
            pts.push(hi);
            for w in pts.windows(2) {
                let (a, b) = (w[0], w[1]);
                let fa = horner(c, a);
                let fb = horner(c, b);
                if fa == 0.0 && a > lo {
                    out.push(a);
                } else if fa * fb < 0.0 {
                    out.push(refine(c, &dc, a, b, fa));
                }
            }
        }
    }
}

/// Safeguarded Newton on a sign-changing bracket.
fn refine(c: &[f64], dc: &[f64], mut a: f64, mut b: f64, fa: f64) -> f64 {
    let neg_at_a = fa < 0.0;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = horner(c, x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == neg_at_a {
            a = x;
        } else {
            b = x;
        }
        if b - a <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            break;
        }
        let d = horner(dc, x);
        let newton = if d != 0.0 { x - fx / d } else { f64::NAN };
        x = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (x - a).min(b - x) <= 0.0 {
            x = 0.5 * (a + b);
        }
    }
    x
}
