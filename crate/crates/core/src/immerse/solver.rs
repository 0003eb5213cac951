//! Pseudo-spectral method of lines for periodic evolution equations
//! `u_t = F(z0, ..., zk)`.
//!
//! `F` is split into its constant-coefficient linear part at `z = 0`,
//! which is treated implicitly in Fourier space, and the remainder, which
//! is extrapolated explicitly (second-order semi-implicit BDF). The time
//! direction is chosen so the implicit symbol is dissipative: a
//! backward-parabolic equation such as `u_t = u_xxxx` is marched from
//! terminal data at `t1` down to `t0`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::grid::{GridSpec, Provenance, SolutionGrid};
use super::ImmerseError;
use crate::jetexpr::{
    canonical, partial_canon, Canon, Compiled, EquationDef, Expr, Scheme, Slot, Var,
};

/// Settings for [`solve_periodic`].
#[derive(Clone, Debug)]
pub struct NumericSpec {
    /// Data `u(x)` at the starting time of the marching direction.
    pub data: Expr,
    /// Solver steps per grid time interval.
    pub substeps: usize,
    /// Tolerance on the residual audit.
    pub tol: f64,
    /// Amplitude above which the run counts as blown up.
    pub blow_up: f64,
}

impl NumericSpec {
    pub fn new(data: Expr) -> NumericSpec {
        NumericSpec {
            data,
            substeps: 8,
            tol: 1e-2,
            blow_up: 1e6,
        }
    }
}

/// Which way the solver marched.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

struct Spectral {
    n: usize,
    wavenumbers: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    fn new(n: usize, period: f64) -> Spectral {
        let mut planner = FftPlanner::new();
        let wavenumbers = (0..n)
            .map(|j| {
                let m = if j <= n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                2.0 * PI * m / period
            })
            .collect();
        Spectral {
            n,
            wavenumbers,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse(&self, hat: &[Complex64]) -> Vec<f64> {
        let mut buf = hat.to_vec();
        self.inv.process(&mut buf);
        buf.iter().map(|c| c.re / self.n as f64).collect()
    }

    /// `(i k)^order`, with the unpaired Nyquist mode dropped for odd orders.
    fn multiplier(&self, j: usize, order: u32) -> Complex64 {
        if order % 2 == 1 && self.n % 2 == 0 && j == self.n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.wavenumbers[j]).powu(order)
    }

    fn derivative(&self, hat: &[Complex64], order: u32) -> Vec<f64> {
        let d: Vec<Complex64> = hat
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.multiplier(j, order))
            .collect();
        self.inverse(&d)
    }
}

struct Rhs {
    order: u32,
    linear: Vec<f64>,
    full: Compiled,
    inputs: Vec<u32>,
}

impl Rhs {
    fn new(eq: &EquationDef) -> Result<Rhs, ImmerseError> {
        let f = canonical(eq.rhs());
        if let Some(p) = f.params().into_iter().next() {
            return Err(ImmerseError::MissingSymbol(p));
        }
        let order = eq.order();
        let at_zero = |c: &Canon| -> Result<f64, ImmerseError> {
            let prog = Compiled::new(c);
            for s in prog.slots() {
                if let Slot::Var(Var::X | Var::T) = s {
                    return Err(ImmerseError::Unsupported(
                        "the numeric solver needs an autonomous right-hand side".into(),
                    ));
                }
            }
            let v = prog.eval(&vec![0.0; prog.slots().len()]);
            Ok(if v.is_finite() { v } else { 0.0 })
        };
        let linear = (0..=order)
            .map(|i| at_zero(&partial_canon(&f, Var::Z(i))))
            .collect::<Result<Vec<_>, _>>()?;
        let full = Compiled::new(&f);
        let inputs = full
            .slots()
            .iter()
            .map(|s| match s {
                Slot::Var(Var::Z(i)) => Ok(*i),
                other => Err(ImmerseError::Unsupported(format!(
                    "unexpected symbol {other:?} in the right-hand side"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Rhs {
            order,
            linear,
            full,
            inputs,
        })
    }

    fn symbol(&self, sp: &Spectral, j: usize) -> Complex64 {
        self.linear
            .iter()
            .enumerate()
            .map(|(i, c)| sp.multiplier(j, i as u32) * *c)
            .sum()
    }

    /// Spectral jets `z0..=zk` of `u`.
    fn jets(&self, sp: &Spectral, hat: &[Complex64], upto: u32) -> Vec<Vec<f64>> {
        (0..=upto).map(|i| sp.derivative(hat, i)).collect()
    }

    fn eval(&self, jets: &[Vec<f64>], node: usize) -> f64 {
        let inputs: Vec<f64> = self
            .inputs
            .iter()
            .map(|&i| jets[i as usize][node])
            .collect();
        self.full.eval(&inputs)
    }

    /// `F(u) − L u` in Fourier space.
    fn nonlinear_hat(&self, sp: &Spectral, hat: &[Complex64]) -> Vec<Complex64> {
        let jets = self.jets(sp, hat, self.order);
        let vals: Vec<f64> = (0..sp.n).map(|k| self.eval(&jets, k)).collect();
        let mut out = sp.forward(&vals);
        for (j, o) in out.iter_mut().enumerate() {
            *o -= self.symbol(sp, j) * hat[j];
        }
        out
    }
}

/// Solve `u_t = F` on a periodic grid. The period is `x1 − x0`, so the last
/// grid column repeats the first.
pub fn solve_periodic(
    eq: &EquationDef,
    jets: &BTreeSet<Var>,
    spec: &GridSpec,
    numeric: &NumericSpec,
) -> Result<(SolutionGrid, Direction), ImmerseError> {
    if eq.scheme() != Scheme::Evolution {
        return Err(ImmerseError::Unsupported(
            "the numeric solver handles evolution equations only".into(),
        ));
    }
    if spec.nx < 5 || spec.nt < 2 || numeric.substeps == 0 {
        return Err(ImmerseError::InvalidGrid(
            "numeric runs need nx >= 5, nt >= 2 and at least one substep".into(),
        ));
    }
    if let Some(v) = jets.iter().find(|v| matches!(v, Var::W(_))) {
        return Err(ImmerseError::MissingSymbol(v.name()));
    }
    let rhs = Rhs::new(eq)?;
    let n = spec.nx - 1;
    let sp = Spectral::new(n, spec.x1 - spec.x0);

    let growth = |sign: f64| {
        (0..n)
            .map(|j| sign * rhs.symbol(&sp, j).re)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let direction = if growth(1.0) <= growth(-1.0) {
        Direction::Forward
    } else {
        Direction::Backward
    };
    let sigma = match direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };

    let data = canonical(&numeric.data);
    if let Some(v) = data.variables().into_iter().find(|v| *v != Var::X) {
        return Err(ImmerseError::InvalidSolution(format!(
            "numeric data may only depend on x, found {}",
            v.name()
        )));
    }
    if let Some(p) = data.params().into_iter().next() {
        return Err(ImmerseError::MissingSymbol(p));
    }
    let prog = Compiled::new(&data);
    let u0: Vec<f64> = (0..n)
        .map(|i| prog.eval(&vec![spec.x(i); prog.slots().len()]))
        .collect();
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(ImmerseError::InvalidSolution(
            "data is not finite on the grid".into(),
        ));
    }

    let ds = spec.ht() / numeric.substeps as f64;
    let symbols: Vec<Complex64> = (0..n).map(|j| rhs.symbol(&sp, j) * sigma).collect();
    let mut levels: Vec<Vec<Complex64>> = Vec::with_capacity(spec.nt);
    let mut cur = sp.forward(&u0);
    let mut prev: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
    levels.push(cur.clone());
    let mut s = 0.0;
    for _ in 1..spec.nt {
        for _ in 0..numeric.substeps {
            let nl: Vec<Complex64> = rhs
                .nonlinear_hat(&sp, &cur)
                .into_iter()
                .map(|c| c * sigma)
                .collect();
            let next: Vec<Complex64> = match &prev {
                None => (0..n)
                    .map(|j| (cur[j] + nl[j] * ds) / (1.0 - symbols[j] * ds))
                    .collect(),
                Some((up, nlp)) => (0..n)
                    .map(|j| {
                        (cur[j] * 4.0 - up[j] + (nl[j] * 2.0 - nlp[j]) * (2.0 * ds))
                            / (3.0 - symbols[j] * (2.0 * ds))
                    })
                    .collect(),
            };
            prev = Some((cur, nl));
            cur = next;
            s += ds;
            let amp = cur.iter().map(|c| c.norm()).fold(0.0, f64::max) / n as f64;
            if !(amp.is_finite() && amp < numeric.blow_up) {
                let t = match direction {
                    Direction::Forward => spec.t0 + s,
                    Direction::Backward => spec.t1 - s,
                };
                return Err(ImmerseError::SolverBlowUp { t });
            }
        }
        levels.push(cur.clone());
    }
    if direction == Direction::Backward {
        levels.reverse();
    }

    let top = jets.iter().filter_map(|v| match v {
        Var::Z(i) => Some(*i),
        _ => None,
    });
    let upto = top.max().unwrap_or(0).max(rhs.order);
    let mut samples: BTreeMap<Var, Vec<f64>> = BTreeMap::new();
    let mut per_level: Vec<Vec<Vec<f64>>> = Vec::with_capacity(spec.nt);
    for hat in &levels {
        per_level.push(rhs.jets(&sp, hat, upto));
    }
    for i in 0..=upto {
        let v = Var::Z(i);
        if !jets.contains(&v) && i != 0 {
            continue;
        }
        let mut col = Vec::with_capacity(spec.len());
        for lv in &per_level {
            col.extend_from_slice(&lv[i as usize]);
            col.push(lv[i as usize][0]);
        }
        samples.insert(v, col);
    }

    // Audit: u(t+h) − u(t−h) against Simpson's rule for ∫F dt.
    let ht = spec.ht();
    let mut residual: f64 = 0.0;
    for it in 1..spec.nt.saturating_sub(1) {
        for k in 0..n {
            let ut = (per_level[it + 1][0][k] - per_level[it - 1][0][k]) / (2.0 * ht);
            let f = (rhs.eval(&per_level[it - 1], k)
                + 4.0 * rhs.eval(&per_level[it], k)
                + rhs.eval(&per_level[it + 1], k))
                / 6.0;
            residual = residual.max((ut - f).abs());
        }
    }
    if !(residual <= numeric.tol) {
        return Err(ImmerseError::ResidualTooLarge {
            residual,
            tol: numeric.tol,
        });
    }
    Ok((
        SolutionGrid {
            spec: *spec,
            provenance: Provenance::FiniteDifference,
            jets: samples,
            residual,
        },
        direction,
    ))
}
