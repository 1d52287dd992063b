//! Derivative-free local minimisation used by the pointwise Hopf–Lax solver and the
//! restricted power-cost conjugate.

/// Compass search over the 3^m − 1 directions {−1, 0, 1}^m ∖ {0}. Moves to the best
/// improving poll point; halves the step when none improves. Infinite values act as
/// barriers. Returns (argmin, min).
pub fn pattern_search(f: impl Fn(&[f64]) -> f64, x0: &[f64], step0: f64, rel_tol: f64) -> (Vec<f64>, f64) {
    let m = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if m == 0 {
        return (x, fx);
    }
    let dirs = directions(m);
    let mut step = step0;
    let mut trial = vec![0.0; m];
    let mut stalls = 0;
    while step > rel_tol * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
        let mut best = fx;
        let mut best_dir = None;
        for (k, d) in dirs.iter().enumerate() {
            let s = if d.iter().filter(|v| **v != 0.0).count() > 1 { step / (m as f64).sqrt() } else { step };
            for i in 0..m {
                trial[i] = x[i] + s * d[i];
            }
            let v = f(&trial);
            if v < best {
                best = v;
                best_dir = Some((k, s));
            }
        }
        match best_dir {
            Some((k, s)) => {
                for i in 0..m {
                    x[i] += s * dirs[k][i];
                }
                fx = best;
                stalls += 1;
                // repeated success in one direction: try a larger stride
                if stalls >= 4 {
                    step *= 2.0;
                    stalls = 0;
                }
            }
            None => {
                step *= 0.5;
                stalls = 0;
            }
        }
    }
    (x, fx)
}

fn directions(m: usize) -> Vec<Vec<f64>> {
    let total = 3usize.pow(m as u32);
    let mut out = Vec::with_capacity(total - 1);
    for code in 0..total {
        let mut c = code;
        let d: Vec<f64> = (0..m)
            .map(|_| {
                let v = (c % 3) as f64 - 1.0;
                c /= 3;
                v
            })
            .collect();
        if d.iter().any(|v| *v != 0.0) {
            out.push(d);
        }
    }
    // axis directions first for deterministic tie behaviour
    out.sort_by_key(|d| d.iter().filter(|v| **v != 0.0).count());
    out
}
