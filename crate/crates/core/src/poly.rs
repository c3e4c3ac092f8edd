//! Dense real polynomials with ascending coefficients, and their roots.

/// Relative size below which a leading coefficient is treated as zero.
pub const LEADING_EPS: f64 = 1e-12;

pub fn eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| k as f64 * a)
        .collect()
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(0.0) + b.get(k).copied().unwrap_or(0.0))
        .collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn max_abs(c: &[f64]) -> f64 {
    c.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Index of the highest coefficient that is not negligible relative to the others.
pub fn effective_degree(c: &[f64]) -> usize {
    let m = max_abs(c);
    if m == 0.0 {
        return 0;
    }
    let mut d = c.len() - 1;
    while d > 0 && c[d].abs() <= LEADING_EPS * m {
        d -= 1;
    }
    d
}

/// Reversed coefficient order: roots `t` become `1/t`.
pub fn reversed(c: &[f64]) -> Vec<f64> {
    c.iter().rev().copied().collect()
}

/// Cauchy bound: every root satisfies `|t| <= bound`.
pub fn root_bound(c: &[f64]) -> f64 {
    let deg = effective_degree(c);
    if deg == 0 {
        return 0.0;
    }
    let lead = c[deg].abs();
    1.0 + c[..deg].iter().fold(0.0, |m: f64, a| m.max(a.abs() / lead))
}

/// Magnitude scale of `c` near `t`, used to judge whether a value is zero.
pub fn eval_scale(c: &[f64], t: f64) -> f64 {
    let at = t.abs();
    c.iter().rev().fold(0.0, |acc, &a| acc * at + a.abs())
}

/// Result of a real-root search.
#[derive(Debug, Clone, Default)]
pub struct RealRoots {
    /// Distinct real roots in increasing order, each with multiplicity 1 or 2+.
    pub roots: Vec<(f64, usize)>,
    /// Local extrema that come close to zero without crossing it.
    pub near_real: usize,
}

/// Real roots by recursive isolation: the real roots of the derivative split
/// the line into monotone pieces, each bracketing at most one simple root.
/// An extremum whose value is below `touch_tol` (relative to [`eval_scale`])
/// is reported as a multiple root; below `near_tol` it only raises `near_real`.
pub fn real_roots(c: &[f64], touch_tol: f64, near_tol: f64) -> RealRoots {
    let deg = effective_degree(c);
    let c = &c[..=deg];
    let mut out = RealRoots::default();
    if deg == 0 {
        return out;
    }
    if deg == 1 {
        out.roots.push((-c[0] / c[1], 1));
        return out;
    }
    let crit = real_roots(&derivative(c), touch_tol, near_tol);
    let bound = root_bound(c);
    let mut knots = vec![-bound];
    for &(x, _) in &crit.roots {
        if x > -bound && x < bound {
            knots.push(x);
        }
    }
    knots.push(bound);
    // double roots at extrema
    let mut touching = vec![false; knots.len()];
    for k in 1..knots.len() - 1 {
        let x = knots[k];
        let v = eval(c, x).abs();
        let s = eval_scale(c, x);
        if v <= touch_tol * s {
            touching[k] = true;
            out.roots.push((x, 2));
        } else if v <= near_tol * s {
            out.near_real += 1;
        }
    }
    for k in 0..knots.len() - 1 {
        if touching[k] || touching[k + 1] {
            continue;
        }
        let (a, b) = (knots[k], knots[k + 1]);
        let (fa, fb) = (eval(c, a), eval(c, b));
        if fa == 0.0 {
            if k == 0 {
                out.roots.push((a, 1));
            }
            continue;
        }
        if fb == 0.0 {
            out.roots.push((b, 1));
            continue;
        }
        if fa.signum() != fb.signum() {
            out.roots.push((bracketed_root(c, a, b), 1));
        }
    }
    out.roots.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    out.roots.dedup_by(|x, y| {
        if (x.0 - y.0).abs() <= 1e-14 * (1.0 + x.0.abs()) {
            y.1 = y.1.max(x.1);
            true
        } else {
            false
        }
    });
    out
}

/// Safeguarded Newton/bisection on a sign-changing bracket.
fn bracketed_root(c: &[f64], mut a: f64, mut b: f64) -> f64 {
    let dc = derivative(c);
    let fa_sign = eval(c, a).signum();
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = eval(c, x);
        if fx == 0.0 {
            return x;
        }
        if fx.signum() == fa_sign {
            a = x;
        } else {
            b = x;
        }
        let d = eval(&dc, x);
        let newton = if d != 0.0 { x - fx / d } else { f64::NAN };
        x = if newton.is_finite() && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (b - a).abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Divides `c` by `(t − r)²`. Returns `(quotient, remainder)` with the
/// remainder given as `[r0, r1]` (`r0 + r1·t`).
pub fn deflate_double(c: &[f64], r: f64) -> (Vec<f64>, [f64; 2]) {
    let (q1, rem1) = synthetic_division(c, r);
    let (q2, rem2) = synthetic_division(&q1, r);
    // c = (t − r)·q1 + rem1,  q1 = (t − r)·q2 + rem2
    // → c = (t − r)²·q2 + rem2·(t − r) + rem1
    (q2, [rem1 - rem2 * r, rem2])
}

fn synthetic_division(c: &[f64], r: f64) -> (Vec<f64>, f64) {
    if c.len() <= 1 {
        return (Vec::new(), c.first().copied().unwrap_or(0.0));
    }
    let n = c.len() - 1;
    let mut q = vec![0.0; n];
    let mut acc = c[n];
    for k in (0..n).rev() {
        q[k] = acc;
        acc = c[k] + acc * r;
    }
    (q, acc)
}

/// Discriminant of a polynomial of degree ≤ 3, padded with zeros as needed.
pub fn discriminant(c: &[f64]) -> f64 {
    let get = |k: usize| c.get(k).copied().unwrap_or(0.0);
    match c.len() {
        0..=2 => 0.0,
        3 => {
            let (a0, a1, a2) = (get(0), get(1), get(2));
            a1 * a1 - 4.0 * a2 * a0
        }
        _ => {
            let (d, cc, b, a) = (get(0), get(1), get(2), get(3));
            18.0 * a * b * cc * d - 4.0 * b * b * b * d + b * b * cc * cc
                - 4.0 * a * cc * cc * cc
                - 27.0 * a * a * d * d
        }
    }
}
