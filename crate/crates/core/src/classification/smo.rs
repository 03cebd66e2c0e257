//! Sequential minimal optimization for a soft-margin binary SVM with an RBF
//! kernel, following Platt's working-set heuristics with deterministic
//! tie-breaking.

/// RBF kernel exp(-gamma * ||u - v||^2).
pub fn rbf_kernel(u: &[f64], v: &[f64], gamma: f64) -> f64 {
    let mut d2 = 0.0;
    for (a, b) in u.iter().zip(v) {
        let d = a - b;
        d2 += d * d;
    }
    (-gamma * d2).exp()
}

pub struct SmoResult {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub passes: usize,
}

pub struct BinarySmo<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [f64],
    c: f64,
    tol: f64,
    kernel: Vec<f64>,
    n: usize,
    alpha: Vec<f64>,
    bias: f64,
    errors: Vec<f64>,
}

const EPS: f64 = 1e-12;

impl<'a> BinarySmo<'a> {
    pub fn new(xs: &'a [Vec<f64>], ys: &'a [f64], c: f64, gamma: f64, tol: f64) -> Self {
        let n = xs.len();
        let mut kernel = vec![0.0f64; n * n];
        for i in 0..n {
            for j in i..n {
                let k = rbf_kernel(&xs[i], &xs[j], gamma);
                kernel[i * n + j] = k;
                kernel[j * n + i] = k;
            }
        }
        // With all alphas at zero, f(x) = 0 and the error is -y.
        let errors = ys.iter().map(|&y| -y).collect();
        BinarySmo {
            xs,
            ys,
            c,
            tol,
            kernel,
            n,
            alpha: vec![0.0; n],
            bias: 0.0,
            errors,
        }
    }

    #[inline]
    fn k(&self, i: usize, j: usize) -> f64 {
        self.kernel[i * self.n + j]
    }

    fn is_non_bound(&self, i: usize) -> bool {
        self.alpha[i] > EPS && self.alpha[i] < self.c - EPS
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1_old, a2_old) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.ys[i1], self.ys[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;
        let (lo, hi) = if s < 0.0 {
            (
                (a2_old - a1_old).max(0.0),
                (self.c + a2_old - a1_old).min(self.c),
            )
        } else {
            (
                (a2_old + a1_old - self.c).max(0.0),
                (a2_old + a1_old).min(self.c),
            )
        };
        if hi - lo < EPS {
            return false;
        }
        let eta = self.k(i1, i1) + self.k(i2, i2) - 2.0 * self.k(i1, i2);
        let mut a2 = if eta > EPS {
            (a2_old + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // Degenerate curvature (duplicate points): move to whichever end
            // lowers the objective; evaluate via the first-order term.
            let f_lo = y2 * (e1 - e2) * lo;
            let f_hi = y2 * (e1 - e2) * hi;
            if f_lo < f_hi - EPS {
                lo
            } else if f_hi < f_lo - EPS {
                hi
            } else {
                return false;
            }
        };
        if (a2 - a2_old).abs() < EPS * (a2 + a2_old + EPS) {
            return false;
        }
        if a2 < EPS {
            a2 = 0.0;
        } else if a2 > self.c - EPS {
            a2 = self.c;
        }
        let a1 = (a1_old + s * (a2_old - a2)).clamp(0.0, self.c);

        let d1 = y1 * (a1 - a1_old);
        let d2 = y2 * (a2 - a2_old);
        let b1 = self.bias - e1 - d1 * self.k(i1, i1) - d2 * self.k(i1, i2);
        let b2 = self.bias - e2 - d1 * self.k(i1, i2) - d2 * self.k(i2, i2);
        let new_bias = if a1 > EPS && a1 < self.c - EPS {
            b1
        } else if a2 > EPS && a2 < self.c - EPS {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let delta_b = new_bias - self.bias;
        self.alpha[i1] = a1;
        self.alpha[i2] = a2;
        self.bias = new_bias;
        for i in 0..self.n {
            self.errors[i] += d1 * self.k(i1, i) + d2 * self.k(i2, i) + delta_b;
        }
        true
    }

    fn examine(&mut self, i2: usize) -> bool {
        let y2 = self.ys[i2];
        let a2 = self.alpha[i2];
        let e2 = self.errors[i2];
        let r2 = e2 * y2;
        let violates = (r2 < -self.tol && a2 < self.c - EPS) || (r2 > self.tol && a2 > EPS);
        if !violates {
            return false;
        }
        // Second-choice heuristic: largest |E1 - E2| among non-bound points,
        // ties to the smallest index.
        let mut best: Option<(f64, usize)> = None;
        for i in 0..self.n {
            if self.is_non_bound(i) {
                let gap = (self.errors[i] - e2).abs();
                if best.map_or(true, |(bg, _)| gap > bg) {
                    best = Some((gap, i));
                }
            }
        }
        if let Some((_, i1)) = best {
            if self.take_step(i1, i2) {
                return true;
            }
        }
        for off in 1..=self.n {
            let i1 = (i2 + off) % self.n;
            if self.is_non_bound(i1) && self.take_step(i1, i2) {
                return true;
            }
        }
        for off in 1..=self.n {
            let i1 = (i2 + off) % self.n;
            if self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }

    /// Decision value for training row `i`.
    pub fn decision_on_row(&self, i: usize) -> f64 {
        self.errors[i] + self.ys[i]
    }

    /// Count of KKT violations at tolerance `tol`.
    pub fn kkt_violations(&self, tol: f64) -> usize {
        (0..self.n)
            .filter(|&i| {
                let yf = self.ys[i] * self.decision_on_row(i);
                if self.alpha[i] <= EPS {
                    yf < 1.0 - tol
                } else if self.alpha[i] >= self.c - EPS {
                    yf > 1.0 + tol
                } else {
                    (yf - 1.0).abs() > tol
                }
            })
            .count()
    }

    /// Run passes until a full sweep makes no progress or `max_iter` passes
    /// elapse. Returns the result snapshot.
    pub fn solve(&mut self, max_iter: usize) -> SmoResult {
        let mut examine_all = true;
        let mut passes = 0usize;
        loop {
            let mut changed = 0usize;
            if examine_all {
                for i in 0..self.n {
                    if self.examine(i) {
                        changed += 1;
                    }
                }
            } else {
                for i in 0..self.n {
                    if self.is_non_bound(i) && self.examine(i) {
                        changed += 1;
                    }
                }
            }
            passes += 1;
            if passes >= max_iter {
                break;
            }
            if examine_all {
                if changed == 0 {
                    break;
                }
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
            }
        }
        self.finalize_bias();
        SmoResult {
            alpha: self.alpha.clone(),
            bias: self.bias,
            passes,
        }
    }

    // When every multiplier ends on a bound the incremental bias estimate can
    // sit outside the interval the KKT conditions allow; recenter it the way
    // libsvm computes rho (mean over free vectors, else interval midpoint).
    fn finalize_bias(&mut self) {
        let mut free_sum = 0.0f64;
        let mut free_count = 0usize;
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for i in 0..self.n {
            let g = self.errors[i] + self.ys[i] - self.bias; // f without bias
            let target = self.ys[i] - g;
            if self.is_non_bound(i) {
                free_sum += target;
                free_count += 1;
            } else {
                let at_upper = self.alpha[i] >= self.c - EPS;
                // y=+1 at C or y=-1 at 0 require f <= y; the others f >= y.
                if (self.ys[i] > 0.0) == at_upper {
                    upper = upper.min(target);
                } else {
                    lower = lower.max(target);
                }
            }
        }
        let new_bias = if free_count > 0 {
            free_sum / free_count as f64
        } else if lower.is_finite() && upper.is_finite() {
            (lower + upper) / 2.0
        } else {
            self.bias
        };
        let delta = new_bias - self.bias;
        if delta != 0.0 {
            self.bias = new_bias;
            for e in &mut self.errors {
                *e += delta;
            }
        }
    }

    pub fn xs(&self) -> &[Vec<f64>] {
        self.xs
    }

    pub fn ys(&self) -> &[f64] {
        self.ys
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
}
