//! Exact weighted 1D TV proximal map by the taut-string construction.
//!
//! Solves `min_x lambda * sum |x_{i+1} - x_i| + 1/2 sum w_i (x_i - b_i)^2`.
//! The running integral of the solution is the shortest path from
//! `(0, 0)` to `(sum w, sum w b)` inside the tube `S_k ± lambda`, where
//! `S_k` is the running integral of the data over the abscissa `t_k = sum_{i<k} w_i`.
//! The minimizer on cell `i` is the slope of that path. Quadratic-time; oracle use only.

pub fn taut_string(data: &[f64], weights: &[f64], lambda: f64) -> Vec<f64> {
    let n = data.len();
    assert_eq!(n, weights.len());
    assert!(lambda >= 0.0);
    if n == 0 {
        return Vec::new();
    }
    let mut t = vec![0.0; n + 1];
    let mut s = vec![0.0; n + 1];
    for i in 0..n {
        t[i + 1] = t[i] + weights[i];
        s[i + 1] = s[i] + weights[i] * data[i];
    }
    let lower = |k: usize| if k == 0 || k == n { s[k] } else { s[k] - lambda };
    let upper = |k: usize| if k == 0 || k == n { s[k] } else { s[k] + lambda };

    let mut x = vec![0.0; n];
    let (mut k0, mut y0) = (0usize, 0.0f64);
    while k0 < n {
        let slope = |k: usize, y: f64| (y - y0) / (t[k] - t[k0]);
        let (mut lo, mut lo_at) = (f64::NEG_INFINITY, k0);
        let (mut hi, mut hi_at) = (f64::INFINITY, k0);
        // Next bend: (node, height, slope of the segment reaching it).
        let mut bend = None;
        for j in k0 + 1..=n {
            let (l, u) = (slope(j, lower(j)), slope(j, upper(j)));
            if l > hi {
                bend = Some((hi_at, upper(hi_at), hi));
                break;
            }
            if u < lo {
                bend = Some((lo_at, lower(lo_at), lo));
                break;
            }
            if l > lo {
                lo = l;
                lo_at = j;
            }
            if u < hi {
                hi = u;
                hi_at = j;
            }
        }
        let (k1, y1, sl) = bend.unwrap_or((n, s[n], slope(n, s[n])));
        x[k0..k1].iter_mut().for_each(|v| *v = sl);
        k0 = k1;
        y0 = y1;
    }
    x
}
