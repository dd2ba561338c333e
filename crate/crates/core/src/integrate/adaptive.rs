//! Globally adaptive Gauss–Kronrod integration on finite intervals.
//!
//! The integrand may report an absolute error for each of its values (it is
//! itself an inner integral in the nested scheme). Those errors are carried
//! through the Kronrod weights but are not reduced by bisection.

use super::rules::Kronrod;

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    inner_err: f64,
}

#[derive(Clone, Debug)]
pub struct AdaptiveOutcome {
    pub value: f64,
    /// Quadrature error plus propagated inner error.
    pub error: f64,
    pub converged: bool,
    /// (number of intervals, value) after each doubling of the interval count.
    pub history: Vec<(usize, f64)>,
}

fn kronrod(rule: &Kronrod, f: &mut impl FnMut(f64) -> (f64, f64), a: f64, b: f64) -> Segment {
    let n = rule.xgk.len() - 1;
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let (fc, ec) = f(center);
    let mut resg = fc * rule.gauss_centre_weight();
    let mut resk = fc * rule.wgk[n];
    let mut resabs = resk.abs();
    let mut inner = ec * rule.wgk[n];
    let mut fv1 = [0.0; 32];
    let mut fv2 = [0.0; 32];
    for j in 0..n {
        let dx = half * rule.xgk[j];
        let (f1, e1) = f(center - dx);
        let (f2, e2) = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += rule.wgk[j] * (f1 + f2);
        resabs += rule.wgk[j] * (f1.abs() + f2.abs());
        inner += rule.wgk[j] * (e1 + e2);
        if j % 2 == 1 {
            resg += rule.wg[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = rule.wgk[n] * (fc - mean).abs();
    for j in 0..n {
        resasc += rule.wgk[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Segment { a, b, value, err, inner_err: inner * half.abs() }
}

/// Integrates `f` over [points[0], points.last()] with the listed breakpoints.
///
/// Stops when the quadrature error is at most max(abs_tol, rel_tol·|I|) or
/// after `limit` intervals.
pub fn integrate(
    rule: &Kronrod,
    mut f: impl FnMut(f64) -> (f64, f64),
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    limit: usize,
) -> AdaptiveOutcome {
    assert!(points.len() >= 2, "need an interval");
    let mut segs: Vec<Segment> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(rule, &mut f, w[0], w[1]))
        .collect();
    let mut history = Vec::new();
    let mut next_mark = segs.len().max(1);
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        if segs.len() >= next_mark {
            history.push((segs.len(), value));
            next_mark *= 2;
        }
        let tol = abs_tol.max(rel_tol * value.abs());
        let converged = err <= tol;
        if converged || segs.len() >= limit {
            let inner: f64 = segs.iter().map(|s| s.inner_err).sum();
            if history.last().map(|h| h.0) != Some(segs.len()) {
                history.push((segs.len(), value));
            }
            return AdaptiveOutcome { value, error: err + inner, converged, history };
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap_or(std::cmp::Ordering::Equal))
            .expect("non-empty");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // Interval exhausted at machine precision; freeze its error.
            segs.push(Segment { err: 0.0, inner_err: s.inner_err + s.err, ..s });
            continue;
        }
        segs.push(kronrod(rule, &mut f, s.a, mid));
        segs.push(kronrod(rule, &mut f, mid, s.b));
    }
}
