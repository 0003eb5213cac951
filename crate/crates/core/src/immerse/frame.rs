use nalgebra::{Matrix3, Rotation3, Vector3};

use super::grid::{evaluate_on_grid, GridSpec, SolutionGrid};
use super::ImmerseError;
use crate::jetexpr::canonical;
use crate::parser::ProblemDef;
use crate::verify::Coefficient;

/// Relative degeneracy threshold.
pub const DEGENERACY_RATIO: f64 = 1e-6;

/// Form and second-fundamental-form values per node.
#[derive(Clone, Debug)]
pub struct FrameField {
    pub spec: GridSpec,
    /// Indexed by [`Coefficient`] order: f11, f12, f21, f22, f31, f32.
    pub f: [Vec<f64>; 6],
    pub sff: Option<[Vec<f64>; 3]>,
    /// `f11 f22 − f21 f12` per node.
    pub det: Vec<f64>,
    /// True where the coframe degenerates.
    pub mask: Vec<bool>,
    pub eps_deg: f64,
}

impl FrameField {
    pub fn coef(&self, c: Coefficient, k: usize) -> f64 {
        self.f[coef_index(c)][k]
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}

fn coef_index(c: Coefficient) -> usize {
    Coefficient::ALL
        .iter()
        .position(|x| *x == c)
        .expect("listed")
}

/// Evaluate the forms (and sff, when present) of a fully bound problem on a
/// solution grid.
pub fn evaluate_forms(
    problem: &ProblemDef,
    sol: &SolutionGrid,
) -> Result<FrameField, ImmerseError> {
    let p = problem.instantiate();
    let spec = sol.spec;
    let eval = |e| evaluate_on_grid(&canonical(e), &spec, &sol.jets);
    let mut f: [Vec<f64>; 6] = Default::default();
    for (i, c) in Coefficient::ALL.iter().enumerate() {
        f[i] = eval(p.forms.get(*c))?;
    }
    let sff = match &p.sff {
        Some(s) => Some([eval(&s.a)?, eval(&s.b)?, eval(&s.c)?]),
        None => None,
    };
    let [f11, f12, f21, f22, _, _] = &f;
    let mut scale: f64 = 0.0;
    let det: Vec<f64> = (0..spec.len())
        .map(|k| {
            let (p1, p2) = (f11[k] * f22[k], f21[k] * f12[k]);
            if p1.is_finite() && p2.is_finite() {
                scale = scale.max(p1.abs()).max(p2.abs());
            }
            p1 - p2
        })
        .collect();
    let eps_deg = DEGENERACY_RATIO * scale;
    let mut mask: Vec<bool> = det.iter().map(|d| !(d.abs() > eps_deg)).collect();
    if let Some(s) = &sff {
        for (k, m) in mask.iter_mut().enumerate() {
            *m |= s.iter().any(|v| !v[k].is_finite());
        }
    }
    for (k, m) in mask.iter_mut().enumerate() {
        *m |= f.iter().any(|v| !v[k].is_finite());
    }
    Ok(FrameField {
        spec,
        f,
        sff,
        det,
        mask,
        eps_deg,
    })
}

/// Inclusive node rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeRect {
    pub ix0: usize,
    pub ix1: usize,
    pub it0: usize,
    pub it1: usize,
}

impl NodeRect {
    pub fn nodes(&self) -> usize {
        (self.ix1 - self.ix0 + 1) * (self.it1 - self.it0 + 1)
    }
}

/// Largest axis-aligned block of unmasked nodes, by node count.
pub fn largest_clear_rectangle(mask: &[bool], nx: usize, nt: usize) -> Option<NodeRect> {
    let mut heights = vec![0usize; nx];
    let mut best: Option<NodeRect> = None;
    for it in 0..nt {
        for ix in 0..nx {
            heights[ix] = if mask[it * nx + ix] {
                0
            } else {
                heights[ix] + 1
            };
        }
        let mut stack: Vec<usize> = Vec::new();
        for ix in 0..=nx {
            let h = if ix < nx { heights[ix] } else { 0 };
            while let Some(&top) = stack.last() {
                if heights[top] < h {
                    break;
                }
                stack.pop();
                let height = heights[top];
                if height == 0 {
                    continue;
                }
                let left = stack.last().map_or(0, |&l| l + 1);
                let r = NodeRect {
                    ix0: left,
                    ix1: ix - 1,
                    it0: it + 1 - height,
                    it1: it,
                };
                if best.is_none_or(|b| r.nodes() > b.nodes()) {
                    best = Some(r);
                }
            }
            stack.push(ix);
        }
    }
    best
}

/// Position and orthonormal frame; rows of `frame` are `e1`, `e2`, `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub frame: Matrix3<f64>,
}

impl Default for Pose {
    fn default() -> Pose {
        Pose {
            position: Vector3::zeros(),
            frame: Matrix3::identity(),
        }
    }
}

impl Pose {
    /// Apply `p ↦ R p + c` to the pose.
    pub fn transformed(&self, rot: &Rotation3<f64>, shift: &Vector3<f64>) -> Pose {
        Pose {
            position: rot * self.position + shift,
            frame: self.frame * rot.matrix().transpose(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    /// Largest compatibility residual tolerated before giving up.
    pub residual_cap: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { residual_cap: 10.0 }
    }
}

/// Reconstructed surface on the coarse grid.
#[derive(Clone, Debug)]
pub struct ImmersedSurface {
    pub spec: GridSpec,
    pub positions: Vec<Vector3<f64>>,
    pub frames: Vec<Matrix3<f64>>,
    /// Mismatch between the x-then-t and t-then-x integrations per node.
    pub compat: Vec<f64>,
    pub mask: Vec<bool>,
}

impl ImmersedSurface {
    /// A surface given by positions only; frames are left as identity.
    pub fn from_positions(spec: GridSpec, positions: Vec<Vector3<f64>>) -> ImmersedSurface {
        let n = positions.len();
        ImmersedSurface {
            spec,
            positions,
            frames: vec![Matrix3::identity(); n],
            compat: vec![0.0; n],
            mask: vec![false; n],
        }
    }

    pub fn max_compat(&self) -> f64 {
        self.compat.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest `‖R Rᵀ − I‖` over all frames.
    pub fn orthonormality_deviation(&self) -> f64 {
        self.frames
            .iter()
            .map(|r| (r * r.transpose() - Matrix3::identity()).amax())
            .fold(0.0, f64::max)
    }

    /// Largest `|det R − 1|` over all frames.
    pub fn determinant_deviation(&self) -> f64 {
        self.frames
            .iter()
            .map(|r| (r.determinant() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Nearest rotation in the Frobenius sense.
fn project(r: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = r.svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let mut q = u * vt;
    if q.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        q = u * vt;
    }
    q
}

#[derive(Clone, Copy)]
enum Dir {
    X,
    T,
}

struct Stepper<'a> {
    ff: &'a FrameField,
    sff: &'a [Vec<f64>; 3],
}

impl Stepper<'_> {
    /// Tangent vector coefficients and connection matrix at a fine node.
    fn generator(&self, k: usize, dir: Dir) -> (Vector3<f64>, Matrix3<f64>) {
        let col = |c: Coefficient| self.ff.coef(c, k);
        let (w1, w2, w3) = match dir {
            Dir::X => (
                col(Coefficient::F11),
                col(Coefficient::F21),
                col(Coefficient::F31),
            ),
            Dir::T => (
                col(Coefficient::F12),
                col(Coefficient::F22),
                col(Coefficient::F32),
            ),
        };
        let (a, b, c) = (self.sff[0][k], self.sff[1][k], self.sff[2][k]);
        let p = a * w1 + b * w2;
        let q = b * w1 + c * w2;
        let gen = Matrix3::new(0.0, w3, p, -w3, 0.0, q, -p, -q, 0.0);
        (Vector3::new(w1, w2, 0.0), gen)
    }

    /// One RK4 step from fine node `k0` over two fine cells.
    fn step(&self, pose: &Pose, nodes: [usize; 3], h: f64, dir: Dir) -> Result<Pose, ImmerseError> {
        for &k in &nodes {
            if self.ff.mask[k] {
                let spec = self.ff.spec;
                return Err(ImmerseError::PathDegenerate {
                    x: spec.x(k % spec.nx),
                    t: spec.t(k / spec.nx),
                });
            }
        }
        let rhs = |k: usize, r: &Matrix3<f64>| {
            let (v, g) = self.generator(k, dir);
            (r.transpose() * v, g * r)
        };
        let r0 = pose.frame;
        let (x1, r1) = rhs(nodes[0], &r0);
        let (x2, r2) = rhs(nodes[1], &(r0 + r1 * (h / 2.0)));
        let (x3, r3) = rhs(nodes[1], &(r0 + r2 * (h / 2.0)));
        let (x4, r4) = rhs(nodes[2], &(r0 + r3 * h));
        Ok(Pose {
            position: pose.position + (x1 + x2 * 2.0 + x3 * 2.0 + x4) * (h / 6.0),
            frame: project(&(r0 + (r1 + r2 * 2.0 + r3 * 2.0 + r4) * (h / 6.0))),
        })
    }
}

/// Integrate the frame system over a field sampled on a refined grid
/// (odd node counts). Output lives on the coarse grid.
pub fn integrate_frame(
    ff: &FrameField,
    seed: &Pose,
    opts: &IntegrateOptions,
) -> Result<ImmersedSurface, ImmerseError> {
    let sff = ff.sff.as_ref().ok_or(ImmerseError::MissingSff)?;
    let fine = ff.spec;
    let coarse = fine.coarsened().ok_or_else(|| {
        ImmerseError::InvalidGrid("frame integration needs a refined grid".into())
    })?;
    let seed = Pose {
        position: seed.position,
        frame: project(&seed.frame),
    };
    let st = Stepper { ff, sff };
    let (hx, ht) = (2.0 * fine.hx(), 2.0 * fine.ht());
    let fidx = |ix: usize, it: usize| fine.idx(2 * ix, 2 * it);
    let x_nodes =
        |ix: usize, it: usize| [fidx(ix, it), fine.idx(2 * ix + 1, 2 * it), fidx(ix + 1, it)];
    let t_nodes =
        |ix: usize, it: usize| [fidx(ix, it), fine.idx(2 * ix, 2 * it + 1), fidx(ix, it + 1)];
    let (ncx, nct) = (coarse.nx, coarse.nt);

    if ff.mask[fidx(0, 0)] {
        return Err(ImmerseError::PathDegenerate {
            x: fine.x0,
            t: fine.t0,
        });
    }

    // x first along the bottom row, then up every column.
    let mut a = vec![seed; coarse.len()];
    for ix in 1..ncx {
        a[coarse.idx(ix, 0)] =
            st.step(&a[coarse.idx(ix - 1, 0)], x_nodes(ix - 1, 0), hx, Dir::X)?;
    }
    for ix in 0..ncx {
        for it in 1..nct {
            a[coarse.idx(ix, it)] =
                st.step(&a[coarse.idx(ix, it - 1)], t_nodes(ix, it - 1), ht, Dir::T)?;
        }
    }
    // t first along the left column, then across every row.
    let mut b = vec![seed; coarse.len()];
    for it in 1..nct {
        b[coarse.idx(0, it)] =
            st.step(&b[coarse.idx(0, it - 1)], t_nodes(0, it - 1), ht, Dir::T)?;
    }
    for it in 0..nct {
        for ix in 1..ncx {
            b[coarse.idx(ix, it)] =
                st.step(&b[coarse.idx(ix - 1, it)], x_nodes(ix - 1, it), hx, Dir::X)?;
        }
    }

    let compat: Vec<f64> = a
        .iter()
        .zip(&b)
        .map(|(p, q)| {
            ((p.position - q.position).norm_squared() + (p.frame - q.frame).norm_squared()).sqrt()
        })
        .collect();
    let worst = compat.iter().cloned().fold(0.0, f64::max);
    if !(worst <= opts.residual_cap) {
        return Err(ImmerseError::ResidualCap {
            residual: worst,
            cap: opts.residual_cap,
        });
    }
    let mask = (0..coarse.len())
        .map(|k| ff.mask[fidx(k % ncx, k / ncx)])
        .collect();
    Ok(ImmersedSurface {
        spec: coarse,
        positions: a.iter().map(|p| p.position).collect(),
        frames: a.iter().map(|p| p.frame).collect(),
        compat,
        mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clear_rectangle_skips_masked_diagonal() {
        let (nx, nt) = (6, 6);
        let mask: Vec<bool> = (0..nx * nt).map(|k| k % nx + k / nx == 5).collect();
        let r = largest_clear_rectangle(&mask, nx, nt).unwrap();
        assert_eq!(r.nodes(), 9);
        for it in r.it0..=r.it1 {
            for ix in r.ix0..=r.ix1 {
                assert!(!mask[it * nx + ix]);
            }
        }
        assert_eq!(largest_clear_rectangle(&[true; 4], 2, 2), None);
        assert_eq!(
            largest_clear_rectangle(&[false; 6], 3, 2).unwrap().nodes(),
            6
        );
    }

    #[test]
    fn projection_is_a_rotation() {
        let r = Matrix3::new(1.01, 0.02, 0.0, -0.01, 0.99, 0.03, 0.0, -0.02, 1.0);
        let q = project(&r);
        assert!((q * q.transpose() - Matrix3::identity()).amax() < 1e-14);
        assert!((q.determinant() - 1.0).abs() < 1e-14);
    }
}
