//! Numeric reconstruction of the immersed surface.
//!
//! The pipeline samples a solution on a refined grid, evaluates the forms
//! and the second fundamental form there, integrates the moving frame
//!
//! ```text
//! dX  = ω¹ e1 + ω² e2
//! de1 = ω³ e2 + ω³₁ N
//! de2 = −ω³ e1 + ω³₂ N
//! dN  = −ω³₁ e1 − ω³₂ e2,    ω³₁ = a ω¹ + b ω²,  ω³₂ = b ω¹ + c ω²
//! ```
//!
//! along grid lines with RK4 (midpoint stages read the refined nodes), and
//! audits the Gaussian curvature of the resulting positions.

mod curvature;
mod frame;
mod grid;
mod mesh;
mod solver;

pub use curvature::{curvature_check, CurvatureStats, AUDIT_MARGIN};
pub use frame::{
    evaluate_forms, integrate_frame, largest_clear_rectangle, FrameField, ImmersedSurface,
    IntegrateOptions, NodeRect, Pose, DEGENERACY_RATIO,
};
pub use grid::{needed_jets, sample_closed_form, GridSpec, Provenance, SolutionGrid};
pub use mesh::{export_mesh, import_mesh, mesh_text, sidecar_path, sidecar_text, MeshSummary};
pub use solver::{solve_periodic, Direction, NumericSpec};

use thiserror::Error;

use crate::jetexpr::Expr;
use crate::parser::ProblemDef;

#[derive(Debug, Error)]
pub enum ImmerseError {
    #[error("symbol `{0}` is not available on the grid")]
    MissingSymbol(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid solution: {0}")]
    InvalidSolution(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("PDE residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("solver blew up near t = {t}")]
    SolverBlowUp { t: f64 },
    #[error("the problem has no second fundamental form")]
    MissingSff,
    #[error("integration path crosses a degenerate node at (x, t) = ({x}, {t})")]
    PathDegenerate { x: f64, t: f64 },
    #[error("{}", degenerate_message(.masked, .total, .clear))]
    DegenerateRegion {
        masked: usize,
        total: usize,
        /// Largest clear sub-rectangle `(x0, x1, t0, t1)` of the coarse grid.
        clear: Option<(f64, f64, f64, f64)>,
    },
    #[error("compatibility residual {residual:.3e} exceeds the cap {cap:.1e}")]
    ResidualCap { residual: f64, cap: f64 },
    #[error("degenerate metric at (x, t) = ({x}, {t})")]
    DegenerateMetric { x: f64, t: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn degenerate_message(
    masked: &usize,
    total: &usize,
    clear: &Option<(f64, f64, f64, f64)>,
) -> String {
    let mut s = format!("{masked} of {total} nodes are degenerate");
    match clear {
        Some((x0, x1, t0, t1)) => s.push_str(&format!(
            "; largest clear rectangle [{x0}, {x1}] x [{t0}, {t1}]"
        )),
        None => s.push_str("; no clear rectangle"),
    }
    s
}

/// Where the solution comes from.
#[derive(Clone, Debug)]
pub enum SolutionSource {
    /// `u(x, t)` in closed form (constants included).
    ClosedForm(Expr),
    /// Periodic method-of-lines run for an evolution equation.
    Numeric(NumericSpec),
}

#[derive(Clone, Debug)]
pub struct ImmersionConfig {
    /// Output grid; the solution is sampled on its refinement.
    pub grid: GridSpec,
    pub pose: Pose,
    pub options: IntegrateOptions,
    /// PDE residual tolerance for closed-form solutions.
    pub residual_tol: f64,
}

impl ImmersionConfig {
    pub fn new(grid: GridSpec) -> ImmersionConfig {
        ImmersionConfig {
            grid,
            pose: Pose::default(),
            options: IntegrateOptions::default(),
            residual_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Immersion {
    pub solution: SolutionGrid,
    pub field: FrameField,
    pub surface: ImmersedSurface,
    pub curvature: CurvatureStats,
    /// Set for numeric runs.
    pub direction: Option<Direction>,
}

/// Coarse-grid mask: a node counts as degenerate when any refined node of
/// its neighbourhood is.
fn coarse_mask(field: &FrameField, coarse: &GridSpec) -> Vec<bool> {
    let fine = field.spec;
    (0..coarse.len())
        .map(|k| {
            let (ix, it) = (2 * (k % coarse.nx), 2 * (k / coarse.nx));
            let xs = ix.saturating_sub(1)..=(ix + 1).min(fine.nx - 1);
            xs.into_iter().any(|i| {
                (it.saturating_sub(1)..=(it + 1).min(fine.nt - 1))
                    .any(|j| field.mask[fine.idx(i, j)])
            })
        })
        .collect()
}

/// Full pipeline with curvature target −1. All parameters must be bound.
pub fn immerse(
    problem: &ProblemDef,
    source: &SolutionSource,
    config: &ImmersionConfig,
) -> Result<Immersion, ImmerseError> {
    let p = problem.instantiate();
    let sff = p.sff.as_ref().ok_or(ImmerseError::MissingSff)?;
    let exprs: Vec<&Expr> = p
        .forms
        .iter()
        .map(|(_, e)| e)
        .chain([&sff.a, &sff.b, &sff.c])
        .collect();
    if let Some(name) = exprs.iter().flat_map(|e| e.params()).next() {
        return Err(ImmerseError::MissingSymbol(name));
    }
    let jets = needed_jets(exprs.iter().copied());
    let fine = config.grid.refined();
    let (solution, direction) = match source {
        SolutionSource::ClosedForm(u) => (
            sample_closed_form(u, &p.equation, &jets, &fine, config.residual_tol)?,
            None,
        ),
        SolutionSource::Numeric(spec) => {
            let (g, d) = solve_periodic(&p.equation, &jets, &fine, spec)?;
            (g, Some(d))
        }
    };
    let field = evaluate_forms(&p, &solution)?;
    if field.masked_count() > 0 {
        let coarse = config.grid;
        let mask = coarse_mask(&field, &coarse);
        let clear = largest_clear_rectangle(&mask, coarse.nx, coarse.nt).map(|r| {
            (
                coarse.x(r.ix0),
                coarse.x(r.ix1),
                coarse.t(r.it0),
                coarse.t(r.it1),
            )
        });
        return Err(ImmerseError::DegenerateRegion {
            masked: mask.iter().filter(|m| **m).count(),
            total: coarse.len(),
            clear,
        });
    }
    let surface = integrate_frame(&field, &config.pose, &config.options)?;
    let curvature = if surface.spec.nx > 2 * AUDIT_MARGIN && surface.spec.nt > 2 * AUDIT_MARGIN {
        curvature_check(&surface, -1.0)?
    } else {
        CurvatureStats {
            k: vec![f64::NAN; surface.spec.len()],
            audited: 0,
            mean: f64::NAN,
            max_dev: f64::NAN,
            target: -1.0,
            histogram: Vec::new(),
        }
    };
    Ok(Immersion {
        solution,
        field,
        surface,
        curvature,
        direction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{get, sine_gordon_kink};
    use crate::jetexpr::Rational;

    fn kink() -> Expr {
        sine_gordon_kink().substitute(&|p| (p == "alpha").then(Expr::one))
    }

    #[test]
    fn single_node_returns_seed() {
        let p = get("sine-gordon-8").unwrap().problem;
        let grid = GridSpec::new((0.5, 0.5), (0.5, 0.5), 1, 1).unwrap();
        let mut cfg = ImmersionConfig::new(grid);
        cfg.pose.position = nalgebra::Vector3::new(1.0, 2.0, 3.0);
        let out = immerse(&p, &SolutionSource::ClosedForm(kink()), &cfg).unwrap();
        assert_eq!(out.surface.positions, vec![cfg.pose.position]);
        assert_eq!(out.surface.frames, vec![cfg.pose.frame]);
    }

    #[test]
    fn zero_solution_is_fully_degenerate() {
        let p = get("sine-gordon-8").unwrap().problem;
        let grid = GridSpec::new((0.0, 1.0), (0.0, 1.0), 11, 11).unwrap();
        let err = immerse(
            &p,
            &SolutionSource::ClosedForm(Expr::zero()),
            &ImmersionConfig::new(grid),
        )
        .unwrap_err();
        match err {
            ImmerseError::DegenerateRegion {
                masked,
                total,
                clear,
            } => {
                assert_eq!(masked, total);
                assert_eq!(clear, None);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn sine_gordon_7_masks_only_the_pi_contour() {
        let mut p = get("sine-gordon-7").unwrap().problem;
        p.bind("eta", Rational::from_integer(1.into())).unwrap();
        let spec = GridSpec::new((-3.0, 3.0), (-3.0, 3.0), 101, 101).unwrap();
        let sol = sample_closed_form(
            &kink(),
            &p.equation,
            &needed_jets([&Expr::z(1)]),
            &spec,
            1e-10,
        )
        .unwrap();
        let ff = evaluate_forms(&p, &sol).unwrap();
        assert!(ff.masked_count() > 0);
        for k in 0..spec.len() {
            let s = spec.x(k % spec.nx) + spec.t(k / spec.nx);
            if ff.mask[k] {
                assert!(s.abs() < 1e-9, "masked at x+t = {s}");
            }
        }
    }

    #[test]
    fn sine_gordon_8_degenerates_where_sin_u_vanishes() {
        let p = get("sine-gordon-8").unwrap().problem;
        let spec = GridSpec::new((-1.0, 1.0), (-1.0, 1.0), 21, 21).unwrap();
        let sol = sample_closed_form(
            &kink(),
            &p.equation,
            &needed_jets([&Expr::z(1), &Expr::w(1)]),
            &spec,
            1e-10,
        )
        .unwrap();
        let ff = evaluate_forms(&p, &sol).unwrap();
        for (k, d) in ff.det.iter().enumerate() {
            assert!((d + sol.u()[k].sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_parameter_is_reported() {
        let p = get("sine-gordon-7").unwrap().problem;
        let grid = GridSpec::new((0.0, 1.0), (0.0, 1.0), 3, 3).unwrap();
        let mut p = p;
        p.sff = get("sine-gordon-8").unwrap().problem.sff;
        let err = immerse(
            &p,
            &SolutionSource::ClosedForm(kink()),
            &ImmersionConfig::new(grid),
        )
        .unwrap_err();
        assert!(matches!(err, ImmerseError::MissingSymbol(ref s) if s == "eta"));
    }
}
