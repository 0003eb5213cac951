use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use super::frame::ImmersedSurface;
use super::ImmerseError;

/// Nodes skipped along each edge by the audit stencil.
pub const AUDIT_MARGIN: usize = 2;

/// Gaussian curvature of a reconstructed surface.
#[derive(Clone, Debug)]
pub struct CurvatureStats {
    /// `K` per node; NaN outside the audited region.
    pub k: Vec<f64>,
    pub audited: usize,
    pub mean: f64,
    /// Largest `|K − target|`.
    pub max_dev: f64,
    pub target: f64,
    /// `(upper bound, count)` pairs for `|K − target|` by decade.
    pub histogram: Vec<(f64, usize)>,
}

impl CurvatureStats {
    pub fn passes(&self, tol: f64) -> bool {
        self.audited > 0 && self.max_dev < tol
    }
}

/// Brioschi curvature from positions alone, against the expected `target`.
pub fn curvature_check(
    surf: &ImmersedSurface,
    target: f64,
) -> Result<CurvatureStats, ImmerseError> {
    let spec = surf.spec;
    let (nx, nt) = (spec.nx, spec.nt);
    let m = AUDIT_MARGIN;
    if nx < 2 * m + 1 || nt < 2 * m + 1 {
        return Err(ImmerseError::InvalidGrid(format!(
            "the curvature audit needs at least {0}x{0} nodes",
            2 * m + 1
        )));
    }
    let (hu, hv) = (spec.hx(), spec.ht());
    let pos = |ix: usize, it: usize| surf.positions[spec.idx(ix, it)];
    let xu = |ix: usize, it: usize| (pos(ix + 1, it) - pos(ix - 1, it)) / (2.0 * hu);
    let xv = |ix: usize, it: usize| (pos(ix, it + 1) - pos(ix, it - 1)) / (2.0 * hv);
    let efg = |ix: usize, it: usize| {
        let (a, b): (Vector3<f64>, Vector3<f64>) = (xu(ix, it), xv(ix, it));
        (a.dot(&a), a.dot(&b), b.dot(&b))
    };
    let stencil_clear = |ix: usize, it: usize| {
        (ix - m..=ix + m).all(|i| (it - m..=it + m).all(|j| !surf.mask[spec.idx(i, j)]))
    };

    let rows: Vec<Result<Vec<f64>, ImmerseError>> = (0..nt)
        .into_par_iter()
        .map(|it| {
            let mut row = vec![f64::NAN; nx];
            if it < m || it + m >= nt {
                return Ok(row);
            }
            for (ix, slot) in row.iter_mut().enumerate().take(nx - m).skip(m) {
                if !stencil_clear(ix, it) {
                    continue;
                }
                let (e, f, g) = efg(ix, it);
                let (e_l, f_l, g_l) = efg(ix - 1, it);
                let (e_r, f_r, g_r) = efg(ix + 1, it);
                let (e_d, f_d, g_d) = efg(ix, it - 1);
                let (e_up, f_up, g_up) = efg(ix, it + 1);
                let (_, f_ru, _) = efg(ix + 1, it + 1);
                let (_, f_lu, _) = efg(ix - 1, it + 1);
                let (_, f_rd, _) = efg(ix + 1, it - 1);
                let (_, f_ld, _) = efg(ix - 1, it - 1);
                let d_u = |l: f64, r: f64| (r - l) / (2.0 * hu);
                let d_v = |d: f64, up: f64| (up - d) / (2.0 * hv);
                let e_u = d_u(e_l, e_r);
                let e_v = d_v(e_d, e_up);
                let f_u = d_u(f_l, f_r);
                let f_v = d_v(f_d, f_up);
                let g_u = d_u(g_l, g_r);
                let g_v = d_v(g_d, g_up);
                let e_vv = (e_up - 2.0 * e + e_d) / (hv * hv);
                let g_uu = (g_r - 2.0 * g + g_l) / (hu * hu);
                let f_uv = (f_ru - f_lu - f_rd + f_ld) / (4.0 * hu * hv);
                let det_metric = e * g - f * f;
                if !(det_metric > 1e-14 * (e * g).abs().max(f64::MIN_POSITIVE)) {
                    return Err(ImmerseError::DegenerateMetric {
                        x: spec.x(ix),
                        t: spec.t(it),
                    });
                }
                let m1 = Matrix3::new(
                    -0.5 * e_vv + f_uv - 0.5 * g_uu,
                    0.5 * e_u,
                    f_u - 0.5 * e_v,
                    f_v - 0.5 * g_u,
                    e,
                    f,
                    0.5 * g_v,
                    f,
                    g,
                );
                let m2 = Matrix3::new(0.0, 0.5 * e_v, 0.5 * g_u, 0.5 * e_v, e, f, 0.5 * g_u, f, g);
                *slot = (m1.determinant() - m2.determinant()) / (det_metric * det_metric);
            }
            Ok(row)
        })
        .collect();
    let mut k = Vec::with_capacity(spec.len());
    for r in rows {
        k.extend(r?);
    }

    let audited: Vec<f64> = k.iter().cloned().filter(|v| !v.is_nan()).collect();
    let n = audited.len();
    let mean = if n > 0 {
        audited.iter().sum::<f64>() / n as f64
    } else {
        f64::NAN
    };
    let max_dev = audited.iter().map(|v| (v - target).abs()).fold(
        if n > 0 { 0.0 } else { f64::INFINITY },
        |a: f64, b| {
            if b.is_finite() {
                a.max(b)
            } else {
                f64::INFINITY
            }
        },
    );
    let bounds = [1e-9, 1e-6, 1e-3, 1e-1, f64::INFINITY];
    let mut histogram: Vec<(f64, usize)> = bounds.iter().map(|b| (*b, 0)).collect();
    for v in &audited {
        let d = (v - target).abs();
        if let Some(bin) = histogram
            .iter_mut()
            .find(|(b, _)| d < *b || b.is_infinite())
        {
            bin.1 += 1;
        }
    }
    Ok(CurvatureStats {
        k,
        audited: n,
        mean,
        max_dev,
        target,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immerse::GridSpec;

    fn surface(spec: GridSpec, f: impl Fn(f64, f64) -> Vector3<f64>) -> ImmersedSurface {
        let mut pos = Vec::new();
        for it in 0..spec.nt {
            for ix in 0..spec.nx {
                pos.push(f(spec.x(ix), spec.t(it)));
            }
        }
        ImmersedSurface::from_positions(spec, pos)
    }

    #[test]
    fn plane_is_flat() {
        let spec = GridSpec::new((0.0, 1.0), (0.0, 1.0), 21, 21).unwrap();
        let s = surface(spec, |x, t| Vector3::new(x, t, 0.0));
        let st = curvature_check(&s, 0.0).unwrap();
        assert!(st.max_dev < 1e-9, "{}", st.max_dev);
        assert_eq!(st.audited, 17 * 17);
    }

    #[test]
    fn sphere_patch_has_unit_curvature() {
        let spec = GridSpec::new((0.3, 1.2), (0.2, 1.4), 101, 101).unwrap();
        let s = surface(spec, |th, ph| {
            Vector3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos())
        });
        let st = curvature_check(&s, 1.0).unwrap();
        assert!(st.max_dev < 1e-3, "{}", st.max_dev);
    }

    #[test]
    fn collapsed_surface_is_rejected() {
        let spec = GridSpec::new((0.0, 1.0), (0.0, 1.0), 7, 7).unwrap();
        let s = surface(spec, |x, _| Vector3::new(x, 0.0, 0.0));
        assert!(matches!(
            curvature_check(&s, 0.0),
            Err(ImmerseError::DegenerateMetric { .. })
        ));
    }
}
