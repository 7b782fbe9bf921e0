//! Small float utilities: polynomial real roots, bisection, regression, radius grids.

/// Evaluates `sum c[k] x^k`.
pub fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect()
}

fn trim(c: &[f64]) -> &[f64] {
    let mut n = c.len();
    while n > 0 && c[n - 1] == 0.0 {
        n -= 1;
    }
    &c[..n]
}

fn near_zero(c: &[f64], x: f64) -> bool {
    let scale: f64 = c
        .iter()
        .enumerate()
        .map(|(k, a)| a.abs() * x.abs().powi(k as i32))
        .sum();
    horner(c, x).abs() <= 1e-9 * scale.max(1e-300)
}

/// Real roots with multiplicities, ascending. `c[k]` is the coefficient of `x^k`.
pub fn real_roots(c: &[f64]) -> Vec<(f64, u32)> {
    let c = trim(c);
    if c.len() <= 1 {
        return Vec::new();
    }
    if c.len() == 2 {
        return vec![(-c[0] / c[1], 1)];
    }
    let lead = c[c.len() - 1];
    let bound = 1.0 + c[..c.len() - 1].iter().map(|a| (a / lead).abs()).fold(0.0, f64::max);
    let dc = derivative(c);
    let crit: Vec<f64> = real_roots(&dc).into_iter().map(|(r, _)| r).collect();

    let mut roots: Vec<f64> = crit.iter().copied().filter(|&r| near_zero(c, r)).collect();
    let mut marks = vec![-bound];
    marks.extend(crit.iter().copied());
    marks.push(bound);
    for w in marks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (horner(c, a), horner(c, b));
        if fa == 0.0 || fb == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        if roots.iter().any(|&r| r == a || r == b) {
            continue;
        }
        roots.push(bisect(|x| horner(c, x), a, b, 200));
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));

    roots
        .into_iter()
        .map(|r| {
            let mut m = 1;
            let mut d = dc.clone();
            while (m as usize) < c.len() - 1 && near_zero(&d, r) {
                m += 1;
                d = derivative(&d);
            }
            (r, m)
        })
        .collect()
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let mut fa = f(a);
    for _ in 0..iters {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    slope(&lx, &ly)
}

/// `k` log-spaced values from `a` to `b` inclusive.
pub fn log_spaced(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..k)
        .map(|i| (la + (lb - la) * i as f64 / (k - 1) as f64).exp())
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn normalize4(v: [f64; 4]) -> [f64; 4] {
    let n = dot(&v, &v).sqrt();
    if n == 0.0 {
        v
    } else {
        v.map(|a| a / n)
    }
}
