//! Tridiagonal solves (Thomas algorithm) and small grid utilities shared by
//! the time stepper and the stationary solvers.

/// Tridiagonal matrix stored as three diagonals.
///
/// Row `i` reads `lower[i] * x[i-1] + diag[i] * x[i] + upper[i] * x[i+1]`;
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    /// Precompute the elimination so repeated solves cost one sweep each.
    ///
    /// No pivoting: callers only factor diagonally dominant (M-matrix)
    /// operators.
    pub fn factor(&self) -> Factored {
        let n = self.len();
        let mut c_prime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        if n == 0 {
            return Factored {
                lower: Vec::new(),
                c_prime,
                denom,
            };
        }
        denom[0] = self.diag[0];
        c_prime[0] = if n > 1 { self.upper[0] / denom[0] } else { 0.0 };
        for i in 1..n {
            denom[i] = self.diag[i] - self.lower[i] * c_prime[i - 1];
            if i + 1 < n {
                c_prime[i] = self.upper[i] / denom[i];
            }
        }
        Factored {
            lower: self.lower.clone(),
            c_prime,
            denom,
        }
    }

    /// One-shot solve of `A x = rhs`, overwriting `rhs` with `x`.
    pub fn solve_in_place(&self, rhs: &mut [f64], scratch: &mut Vec<f64>) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        scratch.clear();
        scratch.resize(n, 0.0);
        let mut denom = self.diag[0];
        rhs[0] /= denom;
        if n > 1 {
            scratch[0] = self.upper[0] / denom;
        }
        for i in 1..n {
            denom = self.diag[i] - self.lower[i] * scratch[i - 1];
            if i + 1 < n {
                scratch[i] = self.upper[i] / denom;
            }
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= scratch[i] * rhs[i + 1];
        }
    }
}

/// A factored tridiagonal operator.
#[derive(Debug, Clone)]
pub struct Factored {
    lower: Vec<f64>,
    c_prime: Vec<f64>,
    denom: Vec<f64>,
}

impl Factored {
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.denom.len();
        debug_assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        rhs[0] /= self.denom[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / self.denom[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c_prime[i] * rhs[i + 1];
        }
    }
}

/// Composite trapezoid rule for samples on a uniform grid of spacing `dx`.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            dx * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Linear interpolation of uniform samples covering `[x0, x1]`.
/// Points outside the interval are clamped to the end values.
pub fn interpolate_uniform(values: &[f64], x0: f64, x1: f64, x: f64) -> f64 {
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n == 1 || x <= x0 {
        return values[0];
    }
    if x >= x1 {
        return values[n - 1];
    }
    let s = (x - x0) / (x1 - x0) * (n - 1) as f64;
    let i = (s.floor() as usize).min(n - 2);
    let frac = s - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_system() -> (Tridiagonal, Vec<f64>) {
        let n = 7;
        let mut a = Tridiagonal::zeros(n);
        for i in 0..n {
            a.lower[i] = -1.0 - 0.1 * i as f64;
            a.diag[i] = 4.0 + i as f64;
            a.upper[i] = -0.5;
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 1.0).collect();
        (a, x)
    }

    #[test]
    fn one_shot_and_factored_agree() {
        let (a, x) = sample_system();
        let mut rhs = vec![0.0; x.len()];
        a.apply(&x, &mut rhs);

        let mut one_shot = rhs.clone();
        a.solve_in_place(&mut one_shot, &mut Vec::new());
        let mut factored = rhs;
        a.factor().solve_in_place(&mut factored);

        for i in 0..x.len() {
            assert_abs_diff_eq!(one_shot[i], x[i], epsilon = 1e-13);
            assert_abs_diff_eq!(factored[i], x[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let xs: Vec<f64> = (0..11).map(|i| 2.0 * i as f64 / 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 1.0).collect();
        assert_abs_diff_eq!(trapezoid(&ys, 0.2), 8.0, epsilon = 1e-12);
        assert_eq!(trapezoid(&[1.0], 0.1), 0.0);
    }

    #[test]
    fn interpolation_hits_nodes_and_midpoints() {
        let v = [0.0, 1.0, 4.0];
        assert_eq!(interpolate_uniform(&v, 0.0, 2.0, 1.0), 1.0);
        assert_abs_diff_eq!(interpolate_uniform(&v, 0.0, 2.0, 1.5), 2.5);
        assert_eq!(interpolate_uniform(&v, 0.0, 2.0, 3.0), 4.0);
        assert_eq!(interpolate_uniform(&v, 0.0, 2.0, -1.0), 0.0);
    }
}
