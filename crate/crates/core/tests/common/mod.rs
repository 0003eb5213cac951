#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pseudosphere::catalog::{self, sine_gordon_kink};
use pseudosphere::immerse::{needed_jets, sample_closed_form, GridSpec};
use pseudosphere::jetexpr::{
    eval_canon, to_canon, EquationDef, EvalOptions, Expr, Point, Scheme, Var,
};

/// Random expression built from `leaves` with sums, products, sin, cos,
/// exp and quotients by `2 + leaf²`.
pub fn random_expr(rng: &mut impl Rng, depth: u32, leaves: &[Expr]) -> Expr {
    if depth == 0 || rng.gen_ratio(1, 4) {
        return if rng.gen_ratio(1, 5) {
            Expr::int(rng.gen_range(-3..=3))
        } else {
            leaves.choose(rng).expect("leaves").clone()
        };
    }
    let sub = |rng: &mut _| random_expr(rng, depth - 1, leaves);
    match rng.gen_range(0..7) {
        0 => sub(rng) + sub(rng),
        1 => sub(rng) - sub(rng),
        2 => sub(rng) * sub(rng),
        3 => Expr::sin(sub(rng)),
        4 => Expr::cos(sub(rng)),
        5 => {
            let den = leaves.choose(rng).expect("leaves").clone();
            Expr::div(sub(rng), Expr::int(2) + Expr::pow(den, 2))
        }
        _ => Expr::exp(sub(rng)),
    }
}

/// Variables a random coefficient may use under the equation's scheme.
pub fn leaves_for(eq: &EquationDef) -> Vec<Expr> {
    let mut v = vec![Expr::x(), Expr::t()];
    match eq.scheme() {
        Scheme::Evolution => v.extend((0..=eq.order()).map(Expr::z)),
        Scheme::Hyperbolic => v.extend([Expr::z(0), Expr::z(1), Expr::w(1)]),
    }
    v
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn kink(alpha: i64) -> Expr {
    sine_gordon_kink().substitute(&|p| (p == "alpha").then(|| Expr::int(alpha)))
}

pub fn catalog_equations() -> Vec<(String, EquationDef)> {
    catalog::entries()
        .unwrap()
        .into_iter()
        .map(|e| (e.name, e.problem.equation))
        .collect()
}

/// Evaluate `e` on the kink at `(x, t)` with exact jets.
pub fn eval_on_kink(e: &Expr, eq: &EquationDef, x: f64, t: f64) -> f64 {
    let spec = GridSpec::new((x, x), (t, t), 1, 1).unwrap();
    let g = sample_closed_form(&kink(1), eq, &needed_jets([e]), &spec, 1e-8).unwrap();
    let mut point = Point::new().with_var(Var::X, x).with_var(Var::T, t);
    for v in g.jets.keys() {
        point = point.with_var(*v, g.value(*v, 0, 0).unwrap());
    }
    eval_canon(&to_canon(e), &point, &EvalOptions::default()).unwrap_or(f64::NAN)
}

/// Observed order of the centred x-difference of `e` against `D_x e` on
/// the kink, from steps `h` and `h/2`, pooled over sample points.
pub fn dx_difference_order(exprs: &[Expr], eq: &EquationDef, points: &[(f64, f64)], h: f64) -> f64 {
    let (mut coarse, mut fine) = (0.0, 0.0);
    for e in exprs {
        let dx = eq.total_x(e).unwrap();
        for &(x, t) in points {
            let exact = eval_on_kink(&dx, eq, x, t);
            let cd = |h: f64| {
                (eval_on_kink(e, eq, x + h, t) - eval_on_kink(e, eq, x - h, t)) / (2.0 * h)
            };
            let (ec, ef) = ((cd(h) - exact).abs(), (cd(h / 2.0) - exact).abs());
            if ec.is_finite() && ef.is_finite() {
                coarse += ec;
                fine += ef;
            }
        }
    }
    (coarse / fine).log2()
}
