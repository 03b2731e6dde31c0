//! Brute-force oracles shared by the integration tests. They use plain
//! vectors, bisection and grid search, and share no code with the library.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use simplex_means::compositional::EuclideanSample;

pub type Rows = Vec<Vec<f64>>;

pub fn sample(rows: &Rows) -> EuclideanSample {
    EuclideanSample::from_rows(rows).unwrap()
}

pub fn column(values: &[f64]) -> EuclideanSample {
    sample(&values.iter().map(|&v| vec![v]).collect())
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

/// `−2 log` of the one-sample EL ratio at `mu`, scalar data.
pub fn el_1d_partial(x: &[f64], mu: f64) -> f64 {
    let z: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let (zmin, zmax) = z.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
        (a.min(v), b.max(v))
    });
    assert!(zmin < 0.0 && zmax > 0.0, "mu outside the range of the data");
    // Σ z/(1+λz) decreases on (−1/zmax, −1/zmin).
    let eps = 1e-15;
    let lambda = bisect(-1.0 / zmax + eps, -1.0 / zmin - eps, |l| {
        z.iter().map(|v| v / (1.0 + l * v)).sum()
    });
    2.0 * z.iter().map(|v| (1.0 + lambda * v).ln()).sum::<f64>()
}

/// Two-sample EL statistic for scalar data: grid then golden-section search
/// over the common mean.
pub fn el_1d_oracle(x: &[f64], y: &[f64]) -> f64 {
    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (a, b) = (min(x).max(min(y)), max(x).min(max(y)));
    let f = |m: f64| el_1d_partial(x, m) + el_1d_partial(y, m);
    let steps = 4000;
    let h = (b - a) / steps as f64;
    let (mut best, mut best_m) = (f64::INFINITY, a);
    for i in 1..steps {
        let m = a + i as f64 * h;
        let v = f(m);
        if v < best {
            best = v;
            best_m = m;
        }
    }
    golden_min((best_m - h).max(a + 1e-12), (best_m + h).min(b - 1e-12), f)
}

fn tilt(v: &[f64], t: f64) -> Vec<f64> {
    let m = v.iter().map(|x| t * x).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = v.iter().map(|x| (t * x - m).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|wi| wi / s).collect()
}

fn weighted_mean(v: &[f64], p: &[f64]) -> f64 {
    v.iter().zip(p).map(|(a, b)| a * b).sum()
}

/// Two-sample EEL statistic for scalar data. Weights `∝ exp(λx)` and
/// `∝ exp(−(n₁/n₂)λy)`, with `λ` found by bisection on the difference of the
/// tilted means.
pub fn eel_1d_oracle(x: &[f64], y: &[f64]) -> f64 {
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let c = n1 / n2;
    let gap = |l: f64| weighted_mean(x, &tilt(x, l)) - weighted_mean(y, &tilt(y, -c * l));
    // gap is increasing in λ; widen until it changes sign.
    let mut r = 1.0;
    while gap(-r) > 0.0 || gap(r) < 0.0 {
        r *= 2.0;
        assert!(r < 1e6, "no root");
    }
    let l = bisect(-r, r, gap);
    let (p, q) = (tilt(x, l), tilt(y, -c * l));
    let kl = |w: &[f64], n: f64| n * w.iter().map(|wi| wi * (n * wi).ln()).sum::<f64>();
    2.0 * (kl(&p, n1) + kl(&q, n2))
}

fn mean_and_cov(rows: &Rows) -> (Vec<f64>, Rows) {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n)
        .collect();
    let cov = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    rows.iter()
                        .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
                        .sum::<f64>()
                        / (n - 1.0)
                })
                .collect()
        })
        .collect();
    (mean, cov)
}

fn matmul(a: &Rows, b: &Rows) -> Rows {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    (0..r)
        .map(|i| (0..c).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect())
        .collect()
}

fn trace(a: &Rows) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

fn scale(a: &Rows, s: f64) -> Rows {
    a.iter().map(|r| r.iter().map(|v| v * s).collect()).collect()
}

fn add(a: &Rows, b: &Rows) -> Rows {
    a.iter()
        .zip(b)
        .map(|(r, q)| r.iter().zip(q).map(|(x, y)| x + y).collect())
        .collect()
}

/// Gauss–Jordan inverse with partial pivoting.
pub fn invert(a: &Rows) -> Rows {
    let d = a.len();
    let mut m: Rows = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..d).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for i in 0..d {
            if i != col {
                let f = m[i][col];
                let pivot_row = m[col].clone();
                for (v, pr) in m[i].iter_mut().zip(pivot_row) {
                    *v -= f * pr;
                }
            }
        }
    }
    m.into_iter().map(|r| r[d..].to_vec()).collect()
}

pub struct JamesOracle {
    pub t2: f64,
    pub hotelling: f64,
    pub a: f64,
    pub b: f64,
    pub nu: f64,
}

/// James and Hotelling quantities computed directly from their definitions.
pub fn james_oracle(x: &Rows, y: &Rows) -> JamesOracle {
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let d = x[0].len() as f64;
    let (m1, c1) = mean_and_cov(x);
    let (m2, c2) = mean_and_cov(y);
    let diff: Vec<f64> = m1.iter().zip(&m2).map(|(a, b)| a - b).collect();
    let quad = |m: &Rows| -> f64 {
        let inv = invert(m);
        (0..diff.len())
            .map(|i| {
                (0..diff.len())
                    .map(|j| diff[i] * inv[i][j] * diff[j])
                    .sum::<f64>()
            })
            .sum()
    };
    let s1t = scale(&c1, 1.0 / n1);
    let s2t = scale(&c2, 1.0 / n2);
    let st = add(&s1t, &s2t);
    let sinv = invert(&st);
    let pooled = scale(
        &add(&scale(&c1, n1 - 1.0), &scale(&c2, n2 - 1.0)),
        1.0 / (n1 + n2 - 2.0),
    );
    let hotelling = quad(&scale(&pooled, 1.0 / n1 + 1.0 / n2));

    let mut a_sum = 0.0;
    let mut b_sq = 0.0;
    let mut nu_den = 0.0;
    for (si, ni) in [(&s1t, n1), (&s2t, n2)] {
        let m = matmul(&sinv, si);
        let tr = trace(&m);
        let tr_sq = trace(&matmul(&m, &m));
        a_sum += tr * tr / (ni - 1.0);
        b_sq += tr_sq / (ni - 1.0);
        // tr(S̃ᵢS̃⁻¹) equals tr(S̃⁻¹S̃ᵢ); use the other order deliberately.
        let k = matmul(si, &sinv);
        nu_den += (trace(&matmul(&k, &k)) + trace(&k).powi(2)) / ni;
    }
    JamesOracle {
        t2: quad(&st),
        hotelling,
        a: 1.0 + a_sum / (2.0 * d),
        b: (0.5 * b_sq + 0.5 * a_sum) / (d * (d + 2.0)),
        nu: (d + d * d) / nu_den,
    }
}

/// Rows of `N(mean, LLᵀ)`.
pub fn normal_rows<R: Rng>(rng: &mut R, n: usize, mean: &[f64], chol: &Rows) -> Rows {
    let d = mean.len();
    (0..n)
        .map(|_| {
            let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            (0..d)
                .map(|i| mean[i] + (0..=i).map(|j| chol[i][j] * z[j]).sum::<f64>())
                .collect()
        })
        .collect()
}

/// Kolmogorov–Smirnov distance between the empirical law of `ps` and U(0, 1).
pub fn ks_uniform(ps: &[f64]) -> f64 {
    let mut v = ps.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &p)| ((i as f64 + 1.0) / n - p).max(p - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Asymptotic 5% critical value of the one-sample KS statistic.
pub fn ks_critical_5pct(n: usize) -> f64 {
    1.3581 / (n as f64).sqrt()
}

/// Fixed six-point scalar samples with overlapping ranges.
pub const X6: [f64; 6] = [0.12, -0.43, 0.88, 0.35, -0.05, 0.61];
pub const Y6: [f64; 6] = [0.71, 0.29, 1.34, 0.02, 0.95, 0.54];
