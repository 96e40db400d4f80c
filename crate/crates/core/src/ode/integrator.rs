//! Dormand–Prince 5(4) with first-same-as-last reuse, for autonomous
//! systems.

#![allow(clippy::needless_range_loop)]

/// An autonomous right side. `eval` returns `false` when `y` lies outside the
/// region where the field is defined; the step is then retried smaller.
pub(crate) trait Field {
    fn eval(&mut self, y: &[f64], dy: &mut [f64]) -> bool;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) enum Attempt {
    /// `y` and the stored derivative now hold the new point.
    Accepted { err: f64 },
    Rejected { err: f64 },
    /// A stage left the domain of the field.
    Infeasible,
}

pub(crate) struct Stepper {
    dim: usize,
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    tol: Tolerances,
}

impl Stepper {
    pub fn new(dim: usize, tol: Tolerances) -> Self {
        Self {
            dim,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            ytmp: vec![0.0; dim],
            ynew: vec![0.0; dim],
            tol,
        }
    }

    /// Evaluates the derivative at the starting point.
    pub fn init<F: Field>(&mut self, f: &mut F, y: &[f64]) -> bool {
        f.eval(y, &mut self.k[0])
    }

    pub fn attempt<F: Field>(&mut self, f: &mut F, y: &mut [f64], h: f64) -> Attempt {
        let n = self.dim;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..s {
                    acc += h * A[s][j] * self.k[j][i];
                }
                self.ytmp[i] = acc;
            }
            let (_, rest) = self.k.split_at_mut(s);
            if !f.eval(&self.ytmp, &mut rest[0]) {
                return Attempt::Infeasible;
            }
        }
        // Stage 7 was evaluated at the fifth-order solution.
        self.ynew.copy_from_slice(&self.ytmp);
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for s in 0..7 {
                e += E[s] * self.k[s][i];
            }
            let scale = self.tol.atol + self.tol.rtol * y[i].abs().max(self.ynew[i].abs());
            err = err.max((h * e).abs() / scale);
        }
        if err <= 1.0 {
            y.copy_from_slice(&self.ynew);
            let (first, rest) = self.k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            Attempt::Accepted { err }
        } else {
            Attempt::Rejected { err }
        }
    }
}

/// Next step size from the error of the last attempt.
pub(crate) fn next_step(h: f64, err: f64) -> f64 {
    let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
    h * factor
}
