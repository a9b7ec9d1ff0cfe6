//! Exact weighted 1D TV proximal map in linear time (dynamic programming
//! over piecewise-linear message derivatives, Johnson 2013).

/// Minimizer of `lambda * sum |x_{i+1} - x_i| + 1/2 sum w_i (x_i - y_i)^2`.
pub fn tv1d_prox(y: &[f64], w: &[f64], lambda: f64) -> Vec<f64> {
    let n = y.len();
    assert_eq!(n, w.len());
    if n == 0 {
        return Vec::new();
    }
    if n == 1 || lambda == 0.0 {
        return y.to_vec();
    }
    // Knot positions with slope/intercept increments of the message derivative.
    let mut x = vec![0.0; 2 * n];
    let mut a = vec![0.0; 2 * n];
    let mut b = vec![0.0; 2 * n];
    // Back-pointer clamps.
    let mut tm = vec![0.0; n - 1];
    let mut tp = vec![0.0; n - 1];

    tm[0] = -lambda / w[0] + y[0];
    tp[0] = lambda / w[0] + y[0];
    let mut l = n - 1;
    let mut r = n;
    x[l] = tm[0];
    x[r] = tp[0];
    a[l] = w[0];
    b[l] = -w[0] * y[0] + lambda;
    a[r] = -w[0];
    b[r] = w[0] * y[0] + lambda;
    let mut afirst = w[1];
    let mut bfirst = -w[1] * y[1] - lambda;
    let mut alast = -w[1];
    let mut blast = w[1] * y[1] - lambda;

    for k in 1..n - 1 {
        let (mut alo, mut blo) = (afirst, bfirst);
        let mut lo = l;
        while lo <= r {
            if alo * x[lo] + blo > -lambda {
                break;
            }
            alo += a[lo];
            blo += b[lo];
            lo += 1;
        }
        tm[k] = (-lambda - blo) / alo;
        l = lo - 1;
        x[l] = tm[k];

        let (mut ahi, mut bhi) = (alast, blast);
        let mut hi = r;
        while hi >= l {
            if -ahi * x[hi] - bhi < lambda {
                break;
            }
            ahi += a[hi];
            bhi += b[hi];
            hi -= 1;
        }
        tp[k] = (lambda + bhi) / (-ahi);
        r = hi + 1;
        x[r] = tp[k];

        a[l] = alo;
        b[l] = blo + lambda;
        a[r] = ahi;
        b[r] = bhi + lambda;
        afirst = w[k + 1];
        bfirst = -w[k + 1] * y[k + 1] - lambda;
        alast = -w[k + 1];
        blast = w[k + 1] * y[k + 1] - lambda;
    }

    let (mut alo, mut blo) = (afirst, bfirst);
    let mut lo = l;
    while lo <= r {
        if alo * x[lo] + blo > 0.0 {
            break;
        }
        alo += a[lo];
        blo += b[lo];
        lo += 1;
    }
    let mut beta = vec![0.0; n];
    beta[n - 1] = -blo / alo;
    for k in (0..n - 1).rev() {
        beta[k] = beta[k + 1].clamp(tm[k], tp[k]);
    }
    beta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selftest::taut_string;

    #[test]
    fn matches_taut_string() {
        let mut rng = crate::experiment::NoiseRng::new(3);
        for trial in 0..300 {
            let n = 2 + trial % 40;
            let y: Vec<f64> = (0..n).map(|_| 3.0 * rng.standard_normal()).collect();
            let w: Vec<f64> = (0..n).map(|_| 0.1 + rng.uniform()).collect();
            let lambda = 0.05 + 2.0 * rng.uniform();
            let got = tv1d_prox(&y, &w, lambda);
            let want = taut_string(&y, &w, lambda);
            for (g, e) in got.iter().zip(&want) {
                assert!((g - e).abs() < 1e-9, "trial {trial}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(tv1d_prox(&[], &[], 1.0), Vec::<f64>::new());
        assert_eq!(tv1d_prox(&[2.0], &[1.0], 1.0), vec![2.0]);
        assert_eq!(tv1d_prox(&[1.0, 3.0], &[1.0, 1.0], 0.0), vec![1.0, 3.0]);
    }
}
