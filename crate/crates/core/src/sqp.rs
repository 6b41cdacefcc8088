//! Bound-constrained sequential quadratic programming with finite-difference
//! gradients.
//!
//! The solver works in coordinates normalised to the unit box. Each iteration solves
//! `min g·d + ½ dᵀBd` over the box with a primal active-set method, `B` being a
//! Powell-damped BFGS approximation, then backtracks on the objective (the only merit
//! needed, since every trial point is feasible by construction).
//!
//! The objective may refuse a point by returning a penalised [`Evaluation`]. Such
//! points are rejected by the line search, avoided by the finite-difference stencil
//! when possible, and never returned as the optimum.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    /// The model failed and `value` is a stand-in.
    pub penalized: bool,
}

impl Evaluation {
    pub fn ok(value: f64) -> Self {
        Self {
            value,
            penalized: false,
        }
    }

    pub fn penalty(value: f64) -> Self {
        Self { value, penalized: true }
    }

    fn usable(&self) -> bool {
        !self.penalized && self.value.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite()) {
                return Err(Error::InvalidBounds(alloc::format!("x{i}")));
            }
            if l > u {
                return Err(Error::Infeasible);
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| v.clamp(l, u))
            .collect()
    }

    /// Largest bound violation.
    pub fn violation(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| (l - v).max(v - u).max(0.0))
            .fold(0.0, f64::max)
    }

    fn width(&self, i: usize) -> f64 {
        let w = self.upper[i] - self.lower[i];
        if w > 0.0 {
            w
        } else {
            1.0
        }
    }

    fn box_to_unit(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len()).map(|i| (x[i] - self.lower[i]) / self.width(i)).collect()
    }

    fn unit_to_box(&self, z: &[f64]) -> Vec<f64> {
        (0..z.len())
            .map(|i| (self.lower[i] + z[i] * self.width(i)).clamp(self.lower[i], self.upper[i]))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqpOptions {
    pub max_iterations: usize,
    /// Stop after two successive accepted steps change the cost by less than this.
    pub ftol: f64,
    pub violation_tol: f64,
    /// Relative finite-difference step in normalised coordinates.
    pub fd_step: f64,
    pub armijo_c1: f64,
    pub max_backtracks: usize,
}

impl Default for SqpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            ftol: 1e-8,
            violation_tol: 1e-6,
            fd_step: 1e-6,
            armijo_c1: 1e-4,
            max_backtracks: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
    /// The line search failed even after a Hessian reset.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub x: Vec<f64>,
    pub cost: f64,
    pub violation: f64,
    /// Norm of the projected gradient in physical units.
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqpResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// Gradient at `x` in physical units.
    pub gradient: Vec<f64>,
    pub iterates: Vec<Iterate>,
    pub termination: Termination,
    pub evaluations: usize,
}

struct Counted<F> {
    f: F,
    bounds: Bounds,
    count: usize,
}

impl<F: FnMut(&[f64]) -> Evaluation> Counted<F> {
    fn at_unit(&mut self, z: &[f64]) -> Evaluation {
        self.count += 1;
        let x = self.bounds.unit_to_box(z);
        (self.f)(&x)
    }
}

/// Finite-difference gradient of `f` at `x`. Step `h_i = step · max(|x_i|, 1)`;
/// central differences in the interior, second-order one-sided stencils against a
/// bound, and a first-order one-sided fallback when a stencil point is penalised.
pub fn fd_gradient<F: FnMut(&[f64]) -> Evaluation>(
    mut f: F,
    x: &[f64],
    fx: f64,
    step: f64,
    bounds: Option<&Bounds>,
) -> Vec<f64> {
    let mut g = alloc::vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = step * x[i].abs().max(1.0);
        let (room_lo, room_hi) = match bounds {
            Some(b) => (x[i] - b.lower[i] >= h, b.upper[i] - x[i] >= h),
            None => (true, true),
        };
        let mut eval = |d: f64| {
            xp[i] = x[i] + d;
            let e = f(&xp);
            xp[i] = x[i];
            e.usable().then_some(e.value)
        };
        let central = if room_lo && room_hi {
            match (eval(h), eval(-h)) {
                (Some(p), Some(m)) => Some((p - m) / (2.0 * h)),
                (Some(p), None) => Some((p - fx) / h),
                (None, Some(m)) => Some((fx - m) / h),
                (None, None) => None,
            }
        } else {
            None
        };
        g[i] = match central {
            Some(v) => v,
            None if room_hi => match (eval(h), eval(2.0 * h)) {
                (Some(p1), Some(p2)) => (-3.0 * fx + 4.0 * p1 - p2) / (2.0 * h),
                (Some(p1), None) => (p1 - fx) / h,
                _ => 0.0,
            },
            None if room_lo => match (eval(-h), eval(-2.0 * h)) {
                (Some(m1), Some(m2)) => (3.0 * fx - 4.0 * m1 + m2) / (2.0 * h),
                (Some(m1), None) => (fx - m1) / h,
                _ => 0.0,
            },
            None => 0.0,
        };
    }
    g
}

/// Gradient norm with components that push against an active bound removed.
pub fn projected_gradient_norm(x: &[f64], g: &[f64], bounds: &Bounds, tol: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        let w = bounds.width(i);
        let at_lo = (x[i] - bounds.lower[i]) <= tol * w && g[i] > 0.0;
        let at_hi = (bounds.upper[i] - x[i]) <= tol * w && g[i] < 0.0;
        if !(at_lo || at_hi) {
            s += g[i] * g[i];
        }
    }
    libm::sqrt(s)
}

/// `min g·d + ½ dᵀBd` subject to `lo <= d <= hi` (with `lo <= 0 <= hi`), primal
/// active-set method starting from `d = 0`.
pub fn box_qp(b: &DMatrix<f64>, g: &DVector<f64>, lo: &[f64], hi: &[f64]) -> DVector<f64> {
    let n = g.len();
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Free,
        Lower,
        Upper,
    }
    let mut state: Vec<State> = (0..n)
        .map(|i| {
            if lo[i] >= 0.0 && g[i] > 0.0 {
                State::Lower
            } else if hi[i] <= 0.0 && g[i] < 0.0 {
                State::Upper
            } else {
                State::Free
            }
        })
        .collect();
    let mut d = DVector::from_fn(n, |i, _| match state[i] {
        State::Lower => lo[i],
        State::Upper => hi[i],
        State::Free => 0.0,
    });
    for _ in 0..(10 * n + 10) {
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == State::Free).collect();
        // Minimiser over the free variables with the others held at their bounds.
        let mut target = d.clone();
        if !free.is_empty() {
            let bff = DMatrix::from_fn(free.len(), free.len(), |r, c| b[(free[r], free[c])]);
            let rhs = DVector::from_fn(free.len(), |r, _| {
                let i = free[r];
                let mut v = -g[i];
                for j in 0..n {
                    if state[j] != State::Free {
                        v -= b[(i, j)] * d[j];
                    }
                }
                v
            });
            let sol = match bff.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => match bff.lu().solve(&rhs) {
                    Some(s) => s,
                    None => return d,
                },
            };
            for (r, &i) in free.iter().enumerate() {
                target[i] = sol[r];
            }
        }
        // Ratio test from the current feasible point toward the target.
        let mut t = 1.0;
        let mut blocking = None;
        for &i in &free {
            let step = target[i] - d[i];
            if step > 0.0 && target[i] > hi[i] {
                let ti = (hi[i] - d[i]) / step;
                if ti < t {
                    t = ti;
                    blocking = Some((i, State::Upper));
                }
            } else if step < 0.0 && target[i] < lo[i] {
                let ti = (lo[i] - d[i]) / step;
                if ti < t {
                    t = ti;
                    blocking = Some((i, State::Lower));
                }
            }
        }
        for &i in &free {
            d[i] += t * (target[i] - d[i]);
        }
        if let Some((i, s)) = blocking {
            d[i] = if s == State::Upper { hi[i] } else { lo[i] };
            state[i] = s;
            continue;
        }
        // Full step taken: check multipliers of the fixed variables.
        let grad = b * &d + g;
        let mut worst = None;
        let mut worst_val = 0.0;
        for i in 0..n {
            let wrong = match state[i] {
                State::Lower => -grad[i],
                State::Upper => grad[i],
                State::Free => 0.0,
            };
            if wrong > worst_val + 1e-14 {
                worst_val = wrong;
                worst = Some(i);
            }
        }
        match worst {
            Some(i) => state[i] = State::Free,
            None => return d,
        }
    }
    d
}

/// Minimises `f` over the box `bounds` starting from `x0` (projected onto the box).
pub fn minimize_bounded<F: FnMut(&[f64]) -> Evaluation>(
    f: F,
    x0: &[f64],
    bounds: &Bounds,
    opts: &SqpOptions,
) -> Result<SqpResult> {
    let n = bounds.dimension();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite initial guess".into()));
    }
    let widths: Vec<f64> = (0..n).map(|i| bounds.width(i)).collect();
    let unit = Bounds {
        lower: alloc::vec![0.0; n],
        upper: (0..n)
            .map(|i| if bounds.upper[i] > bounds.lower[i] { 1.0 } else { 0.0 })
            .collect(),
    };
    let mut obj = Counted {
        f,
        bounds: bounds.clone(),
        count: 0,
    };
    let to_phys_grad = |gz: &[f64]| gz.iter().zip(&widths).map(|(g, w)| g / w).collect::<Vec<_>>();

    let x0p = bounds.project(x0);
    let mut z = bounds.box_to_unit(&x0p);
    let first = obj.at_unit(&z);
    if !first.usable() {
        return Err(Error::InitialGuessFails);
    }
    let mut fz = first.value;
    let grad_at =
        |obj: &mut Counted<F>, z: &[f64], fz: f64| fd_gradient(|p| obj.at_unit(p), z, fz, opts.fd_step, Some(&unit));
    let mut g = grad_at(&mut obj, &z, fz);
    let mut hess = DMatrix::<f64>::identity(n, n);
    let record = |z: &[f64], fz: f64, g: &[f64], viol: f64| {
        let x = bounds.unit_to_box(z);
        let gp = to_phys_grad(g);
        Iterate {
            gradient_norm: projected_gradient_norm(&x, &gp, bounds, 1e-9),
            x,
            cost: fz,
            violation: viol,
        }
    };
    let mut iterates = alloc::vec![record(&z, fz, &g, bounds.violation(x0))];
    let mut termination = Termination::MaxIter;
    let mut small_steps = 0;

    for _ in 0..opts.max_iterations {
        let lo: Vec<f64> = (0..n).map(|i| unit.lower[i] - z[i]).collect();
        let hi: Vec<f64> = (0..n).map(|i| unit.upper[i] - z[i]).collect();
        let gv = DVector::from_column_slice(&g);
        let mut reset = false;
        let accepted = loop {
            let d = box_qp(&hess, &gv, &lo, &hi);
            let slope = gv.dot(&d);
            let mut found = None;
            if slope < 0.0 {
                let mut t = 1.0;
                for _ in 0..=opts.max_backtracks {
                    let zt: Vec<f64> = (0..n)
                        .map(|i| (z[i] + t * d[i]).clamp(unit.lower[i], unit.upper[i]))
                        .collect();
                    let e = obj.at_unit(&zt);
                    if e.usable() && e.value <= fz + opts.armijo_c1 * t * slope {
                        found = Some((zt, e.value));
                        break;
                    }
                    t *= 0.5;
                }
            }
            match found {
                Some(step) => break Some(step),
                None if !reset && hess != DMatrix::identity(n, n) => {
                    hess = DMatrix::identity(n, n);
                    reset = true;
                }
                None => break None,
            }
        };
        let Some((z_new, f_new)) = accepted else {
            let pg = projected_gradient_norm(&z, &g, &unit, 1e-9);
            termination = if pg < 1e-6 {
                Termination::Converged
            } else {
                Termination::Stalled
            };
            break;
        };
        let g_new = grad_at(&mut obj, &z_new, f_new);
        // Powell-damped BFGS update.
        let s = DVector::from_fn(n, |i, _| z_new[i] - z[i]);
        let y = DVector::from_fn(n, |i, _| g_new[i] - g[i]);
        let bs = &hess * &s;
        let sbs = s.dot(&bs);
        if sbs > 1e-300 {
            let sy = s.dot(&y);
            let theta = if sy >= 0.2 * sbs { 1.0 } else { 0.8 * sbs / (sbs - sy) };
            let r = &y * theta + &bs * (1.0 - theta);
            let sr = s.dot(&r);
            if sr > 1e-300 {
                hess += &r * r.transpose() / sr - &bs * bs.transpose() / sbs;
            }
        }
        let df = (fz - f_new).abs();
        z = z_new;
        fz = f_new;
        g = g_new;
        iterates.push(record(&z, fz, &g, 0.0));
        // Two consecutive small cost changes: one alone can be a short step far
        // from the optimum.
        small_steps = if df < opts.ftol { small_steps + 1 } else { 0 };
        if small_steps >= 2 && unit.violation(&z) < opts.violation_tol {
            termination = Termination::Converged;
            break;
        }
    }

    // Accepted iterates have non-increasing cost, so the last one is the best.
    let x = bounds.project(&bounds.unit_to_box(&z));
    Ok(SqpResult {
        gradient: to_phys_grad(&g),
        x,
        value: fz,
        iterates,
        termination,
        evaluations: obj.count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn quadratic(c: Vec<f64>) -> impl FnMut(&[f64]) -> Evaluation {
        move |x: &[f64]| Evaluation::ok(x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    fn boxed(n: usize, lo: f64, hi: f64) -> Bounds {
        Bounds::new(vec![lo; n], vec![hi; n]).unwrap()
    }

    #[test]
    fn interior_minimum() {
        let c = vec![0.3, -1.2, 2.5];
        let r = minimize_bounded(
            quadratic(c.clone()),
            &[0.0; 3],
            &boxed(3, -5.0, 5.0),
            &SqpOptions::default(),
        )
        .unwrap();
        assert_eq!(r.termination, Termination::Converged);
        for i in 0..3 {
            assert!((r.x[i] - c[i]).abs() < 1e-6, "{:?}", r.x);
        }
    }

    #[test]
    fn minimum_outside_box_is_projected() {
        let c = vec![0.3, 7.0, -9.0];
        let b = boxed(3, -5.0, 5.0);
        let r = minimize_bounded(quadratic(c), &[0.0; 3], &b, &SqpOptions::default()).unwrap();
        assert!((r.x[0] - 0.3).abs() < 1e-6);
        assert_eq!(r.x[1], 5.0);
        assert_eq!(r.x[2], -5.0);
        // Grid check of the projection on the second coordinate.
        let best = (0..=100)
            .map(|k| -5.0 + 0.1 * k as f64)
            .min_by(|a, b| (a - 7.0f64).abs().total_cmp(&(b - 7.0f64).abs()))
            .unwrap();
        assert_eq!(best, r.x[1]);
    }

    #[test]
    fn rosenbrock_in_box() {
        let f = |x: &[f64]| Evaluation::ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let r = minimize_bounded(f, &[-1.2, 1.0], &boxed(2, -2.0, 2.0), &SqpOptions::default()).unwrap();
        assert!(
            (r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 2e-3,
            "{:?} {:?}",
            r.x,
            r.termination
        );
    }

    #[test]
    fn costs_never_increase() {
        let f = |x: &[f64]| Evaluation::ok(libm::exp(x[0]) + (x[1] - 0.5).powi(4) + x[0] * x[1]);
        let r = minimize_bounded(f, &[1.0, -1.0], &boxed(2, -3.0, 3.0), &SqpOptions::default()).unwrap();
        for w in r.iterates.windows(2) {
            assert!(w[1].cost <= w[0].cost);
        }
        assert!(r.x.iter().all(|v| (-3.0..=3.0).contains(v)));
    }

    #[test]
    fn failures() {
        let b = boxed(2, 0.0, 1.0);
        let bad = |_: &[f64]| Evaluation::penalty(1e6);
        assert_eq!(
            minimize_bounded(bad, &[0.5, 0.5], &b, &SqpOptions::default()),
            Err(Error::InitialGuessFails)
        );
        assert_eq!(Bounds::new(vec![1.0], vec![0.0]), Err(Error::Infeasible));
        assert!(Bounds::new(vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn penalized_region_is_never_returned() {
        // True minimum at (2, 2) sits inside a failing disc; the optimum must land on
        // an evaluable point.
        let f = |x: &[f64]| {
            let r2 = (x[0] - 2.0).powi(2) + (x[1] - 2.0).powi(2);
            if r2 < 0.25 {
                Evaluation::penalty(1e6)
            } else {
                Evaluation::ok(r2)
            }
        };
        let r = minimize_bounded(f, &[0.0, 0.0], &boxed(2, -3.0, 3.0), &SqpOptions::default()).unwrap();
        let r2 = (r.x[0] - 2.0).powi(2) + (r.x[1] - 2.0).powi(2);
        assert!(r2 >= 0.25 && r.value < 1e6);
    }

    #[test]
    fn deterministic_trace() {
        let run = || {
            let f = |x: &[f64]| Evaluation::ok(libm::sin(x[0]) + libm::cos(x[1]) + 0.1 * x[0] * x[0]);
            minimize_bounded(f, &[0.5, 0.5], &boxed(2, -4.0, 4.0), &SqpOptions::default()).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn box_qp_kkt() {
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let g = DVector::from_vec(vec![-4.0, 1.0]);
        let d = box_qp(&b, &g, &[-1.0, -1.0], &[1.0, 1.0]);
        // Grid search oracle.
        let q = |x: f64, y: f64| g[0] * x + g[1] * y + 0.5 * (2.0 * x * x + x * y + y * y);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=400 {
            for j in 0..=400 {
                let (x, y) = (-1.0 + i as f64 / 200.0, -1.0 + j as f64 / 200.0);
                if q(x, y) < best.0 {
                    best = (q(x, y), x, y);
                }
            }
        }
        assert!(
            (d[0] - best.1).abs() < 0.01 && (d[1] - best.2).abs() < 0.01,
            "{d:?} {best:?}"
        );
        assert_eq!(d[0], 1.0);
    }

    #[test]
    fn one_sided_gradient_at_bound() {
        let b = boxed(1, 0.0, 1.0);
        let f = |x: &[f64]| Evaluation::ok(x[0] * x[0] * x[0]);
        let g = fd_gradient(f, &[1.0], 1.0, 1e-6, Some(&b));
        assert!((g[0] - 3.0).abs() < 1e-6);
        let g = fd_gradient(f, &[0.0], 0.0, 1e-6, Some(&b));
        assert!(g[0].abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn fd_step_consistency(a in -3.0f64..3.0, b in -3.0f64..3.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let f = |p: &[f64]| Evaluation::ok(libm::sin(a * p[0]) * libm::exp(0.3 * p[1]) + b * p[0] * p[1] * p[1]);
            let fx = f(&[x, y]).value;
            let g6 = fd_gradient(f, &[x, y], fx, 1e-6, None);
            let g7 = fd_gradient(f, &[x, y], fx, 1e-7, None);
            for i in 0..2 {
                let scale = g6[i].abs().max(1e-2);
                prop_assert!((g6[i] - g7[i]).abs() <= 0.01 * scale, "{:?} {:?}", g6, g7);
            }
        }

        #[test]
        fn bounded_quadratic_kkt(c in proptest::collection::vec(-3.0f64..3.0, 3), x0 in proptest::collection::vec(-1.0f64..1.0, 3)) {
            let b = boxed(3, -1.0, 1.0);
            let r = minimize_bounded(quadratic(c.clone()), &x0, &b, &SqpOptions::default()).unwrap();
            for i in 0..3 {
                prop_assert!((r.x[i] - c[i].clamp(-1.0, 1.0)).abs() < 1e-6);
            }
            prop_assert!(r.value <= r.iterates[0].cost);
        }
    }
}
