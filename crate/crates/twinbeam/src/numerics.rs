//! Small numeric kernels shared by the distribution and detection code.

/// Probabilities below this are treated as zero, with the removed mass
/// folded into the tail. Keeps ratios of tiny bins from producing
/// denormal garbage.
pub(crate) const PROB_FLOOR: f64 = 1e-300;

/// Kahan compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum
    }
}

pub(crate) fn kahan_sum(xs: &[f64]) -> f64 {
    let mut acc = Kahan::default();
    for &x in xs {
        acc.add(x);
    }
    acc.total()
}

/// Binomial pmf over 0..=k successes out of k trials at success
/// probability p. The recurrence starts from whichever end carries the
/// larger mass so intermediate terms stay representable.
pub(crate) fn binomial_row(k: usize, p: f64) -> Vec<f64> {
    debug_assert!((0.0..=1.0).contains(&p));
    let mut row = vec![0.0; k + 1];
    if p == 0.0 || k == 0 {
        row[0] = 1.0;
        return row;
    }
    if p == 1.0 {
        row[k] = 1.0;
        return row;
    }
    if p <= 0.5 {
        let ratio = p / (1.0 - p);
        let mut term = (1.0 - p).powi(k as i32);
        row[0] = term;
        for m in 0..k {
            term *= ratio * (k - m) as f64 / (m + 1) as f64;
            row[m + 1] = term;
        }
    } else {
        let ratio = (1.0 - p) / p;
        let mut term = p.powi(k as i32);
        row[k] = term;
        for m in (1..=k).rev() {
            term *= ratio * m as f64 / (k - m + 1) as f64;
            row[m - 1] = term;
        }
    }
    row
}

/// Poisson pmf over 0..=n_max plus the mass beyond n_max.
pub(crate) fn poisson_row(mean: f64, n_max: usize) -> (Vec<f64>, f64) {
    debug_assert!(mean >= 0.0);
    let mut row = vec![0.0; n_max + 1];
    if mean == 0.0 {
        row[0] = 1.0;
        return (row, 0.0);
    }
    let mut acc = Kahan::default();
    let mut term = (-mean).exp();
    for (n, slot) in row.iter_mut().enumerate() {
        *slot = term;
        acc.add(term);
        term *= mean / (n + 1) as f64;
    }
    let tail = (1.0 - acc.total()).max(0.0);
    (row, tail)
}

/// Truncated convolution: out[m] = sum over i + j = m of a[i] * b[j],
/// kept for m <= n_max. Mass that lands beyond n_max is dropped here;
/// callers recover it as 1 minus the in-range total.
pub(crate) fn convolve(a: &[f64], b: &[f64], n_max: usize) -> Vec<f64> {
    let mut out = vec![Kahan::default(); n_max + 1];
    for (i, &ai) in a.iter().enumerate() {
        if i > n_max {
            break;
        }
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if i + j > n_max {
                break;
            }
            out[i + j].add(ai * bj);
        }
    }
    out.iter().map(Kahan::total).collect()
}
