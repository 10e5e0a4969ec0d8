//! Monotone FISTA for ‖y − A v‖² + λ Σ w_i |v_i|.
//!
//! The unknown is either a complex vector (phase-preserving soft threshold)
//! or a nonnegative real vector stored in the real parts (one-sided
//! threshold). The objective never increases between accepted iterates.

use num_complex::Complex64;

/// Linear map used by the solver. `apply` fills an m-vector, `adjoint` an N-vector.
pub trait LinearMap {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, v: &[Complex64], scratch: &mut Vec<Complex64>, out: &mut [Complex64]);
    fn adjoint(&self, r: &[Complex64], out: &mut [Complex64]);
    /// Upper bound on ‖A‖².
    fn norm_sqr(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Complex,
    NonnegativeReal,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    pub objective: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

pub struct Problem<'a, A: LinearMap> {
    pub op: &'a A,
    pub y: &'a [Complex64],
    pub lambda: f64,
    pub weights: &'a [f64],
    pub domain: Domain,
    pub tol: f64,
    pub max_iters: usize,
}

fn residual_energy(ax: &[Complex64], y: &[Complex64]) -> f64 {
    ax.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum()
}

fn penalty(x: &[Complex64], weights: &[f64]) -> f64 {
    x.iter().zip(weights).map(|(v, w)| w * v.norm()).sum()
}

fn prox(v: Complex64, tau: f64, domain: Domain) -> Complex64 {
    match domain {
        Domain::Complex => {
            let r = v.norm();
            if r <= tau {
                Complex64::new(0.0, 0.0)
            } else {
                v * ((r - tau) / r)
            }
        }
        Domain::NonnegativeReal => Complex64::new((v.re - tau).max(0.0), 0.0),
    }
}

impl<A: LinearMap> Problem<'_, A> {
    pub fn objective(&self, x: &[Complex64]) -> f64 {
        let mut scratch = Vec::new();
        let mut ax = vec![Complex64::new(0.0, 0.0); self.op.rows()];
        self.op.apply(x, &mut scratch, &mut ax);
        residual_energy(&ax, self.y) + self.lambda * penalty(x, self.weights)
    }

    pub fn solve(&self) -> SolveReport {
        let n = self.op.cols();
        let m = self.op.rows();
        let zero = Complex64::new(0.0, 0.0);
        let mut scratch = Vec::with_capacity(n);

        let mut x_prev = vec![zero; n];
        let mut ax_prev = vec![zero; m];
        let mut f_prev = residual_energy(&ax_prev, self.y);
        let mut yk = x_prev.clone();
        let mut ay = ax_prev.clone();
        let mut z = vec![zero; n];
        let mut az = vec![zero; m];
        let mut grad = vec![zero; n];
        let mut resid = vec![zero; m];
        let mut history = vec![f_prev];

        let mut lip = (2.0 * self.op.norm_sqr()).max(f64::MIN_POSITIVE);
        let mut t = 1.0f64;
        let mut converged = false;
        let mut iterations = 0;

        if f_prev == 0.0 {
            return SolveReport { x: x_prev, iterations: 0, objective: 0.0, converged: true, history };
        }

        for iter in 1..=self.max_iters {
            iterations = iter;
            for ((r, a), b) in resid.iter_mut().zip(&ay).zip(self.y) {
                *r = a - b;
            }
            let fy = resid.iter().map(|v| v.norm_sqr()).sum::<f64>();
            self.op.adjoint(&resid, &mut grad);
            grad.iter_mut().for_each(|g| *g *= 2.0);
            if self.domain == Domain::NonnegativeReal {
                grad.iter_mut().for_each(|g| g.im = 0.0);
            }

            // Backtracking on the quadratic upper bound; with the exact
            // operator norm the first trial is accepted.
            let fz = loop {
                let step = lip.recip();
                for i in 0..n {
                    z[i] = prox(yk[i] - grad[i] * step, self.lambda * self.weights[i] * step, self.domain);
                }
                self.op.apply(&z, &mut scratch, &mut az);
                let fz_smooth = residual_energy(&az, self.y);
                let mut lin = 0.0;
                let mut dist = 0.0;
                for i in 0..n {
                    let d = z[i] - yk[i];
                    lin += (grad[i].conj() * d).re;
                    dist += d.norm_sqr();
                }
                if fz_smooth <= fy + lin + 0.5 * lip * dist + 1e-12 * fy.max(1e-300) {
                    break fz_smooth + self.lambda * penalty(&z, self.weights);
                }
                lip *= 2.0;
            };

            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let accepted = fz <= f_prev;
            if accepted {
                // y = z + ((t − 1)/t_next)(z − x_prev)
                let beta = (t - 1.0) / t_next;
                for i in 0..n {
                    yk[i] = z[i] + (z[i] - x_prev[i]) * beta;
                }
                for i in 0..m {
                    ay[i] = az[i] + (az[i] - ax_prev[i]) * beta;
                }
                let change = (f_prev - fz).abs() / f_prev.max(f64::MIN_POSITIVE);
                std::mem::swap(&mut x_prev, &mut z);
                std::mem::swap(&mut ax_prev, &mut az);
                f_prev = fz;
                history.push(f_prev);
                if change < self.tol || f_prev == 0.0 {
                    converged = true;
                    break;
                }
            } else {
                // y = x_prev + (t/t_next)(z − x_prev)
                let alpha = t / t_next;
                for i in 0..n {
                    yk[i] = x_prev[i] + (z[i] - x_prev[i]) * alpha;
                }
                for i in 0..m {
                    ay[i] = ax_prev[i] + (az[i] - ax_prev[i]) * alpha;
                }
                history.push(f_prev);
            }
            t = t_next;
        }

        SolveReport { x: x_prev, iterations, objective: f_prev, converged, history }
    }
}
