use std::fmt;

use crate::jetexpr::{normalize, Expr, Var};

/// Index of a coefficient `f_ij` in `ωⁱ = f_i1 dx + f_i2 dt`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coefficient {
    F11,
    F12,
    F21,
    F22,
    F31,
    F32,
}

impl Coefficient {
    pub const ALL: [Coefficient; 6] = [
        Coefficient::F11,
        Coefficient::F12,
        Coefficient::F21,
        Coefficient::F22,
        Coefficient::F31,
        Coefficient::F32,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Coefficient::F11 => "f11",
            Coefficient::F12 => "f12",
            Coefficient::F21 => "f21",
            Coefficient::F22 => "f22",
            Coefficient::F31 => "f31",
            Coefficient::F32 => "f32",
        }
    }

    pub fn from_name(name: &str) -> Option<Coefficient> {
        Coefficient::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The 1-forms `ω¹, ω², ω³` of a pseudo-spherical structure.
#[derive(Clone, Debug, PartialEq)]
pub struct OneFormTriple {
    pub f11: Expr,
    pub f12: Expr,
    pub f21: Expr,
    pub f22: Expr,
    pub f31: Expr,
    pub f32: Expr,
}

impl OneFormTriple {
    pub fn new(f11: Expr, f12: Expr, f21: Expr, f22: Expr, f31: Expr, f32: Expr) -> OneFormTriple {
        OneFormTriple {
            f11,
            f12,
            f21,
            f22,
            f31,
            f32,
        }
    }

    pub fn zero() -> OneFormTriple {
        let z = Expr::zero();
        OneFormTriple::new(z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), z)
    }

    pub fn get(&self, c: Coefficient) -> &Expr {
        match c {
            Coefficient::F11 => &self.f11,
            Coefficient::F12 => &self.f12,
            Coefficient::F21 => &self.f21,
            Coefficient::F22 => &self.f22,
            Coefficient::F31 => &self.f31,
            Coefficient::F32 => &self.f32,
        }
    }

    pub fn get_mut(&mut self, c: Coefficient) -> &mut Expr {
        match c {
            Coefficient::F11 => &mut self.f11,
            Coefficient::F12 => &mut self.f12,
            Coefficient::F21 => &mut self.f21,
            Coefficient::F22 => &mut self.f22,
            Coefficient::F31 => &mut self.f31,
            Coefficient::F32 => &mut self.f32,
        }
    }

    pub fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> OneFormTriple {
        OneFormTriple::new(
            f(&self.f11),
            f(&self.f12),
            f(&self.f21),
            f(&self.f22),
            f(&self.f31),
            f(&self.f32),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = (Coefficient, &Expr)> {
        Coefficient::ALL.into_iter().map(move |c| (c, self.get(c)))
    }

    /// `f₁₁f₂₂ − f₂₁f₁₂`, the coefficient of `ω¹∧ω²`.
    pub fn nondegeneracy(&self) -> Expr {
        normalize(&(self.f11.clone() * self.f22.clone() - self.f21.clone() * self.f12.clone()))
    }
}

/// Coefficients of the second fundamental form `ω³₁ = aω¹ + bω²`,
/// `ω³₂ = bω¹ + cω²`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondFundamentalForm {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
}

impl SecondFundamentalForm {
    pub fn new(a: Expr, b: Expr, c: Expr) -> SecondFundamentalForm {
        SecondFundamentalForm { a, b, c }
    }

    pub fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> SecondFundamentalForm {
        SecondFundamentalForm::new(f(&self.a), f(&self.b), f(&self.c))
    }

    /// Highest `z_i` occurring after normalization, if any jet variable occurs.
    pub fn jet_order(&self) -> Option<u32> {
        let mut order = None;
        let mut any_jet = false;
        for e in [&self.a, &self.b, &self.c] {
            for v in normalize(e).variables() {
                match v {
                    Var::Z(i) => {
                        any_jet = true;
                        order = Some(order.map_or(i, |o: u32| o.max(i)));
                    }
                    Var::W(_) => any_jet = true,
                    _ => {}
                }
            }
        }
        if any_jet {
            Some(order.unwrap_or(0))
        } else {
            None
        }
    }
}
