//! Canonical rational-function representation.
//!
//! Every expression is mapped to a quotient `num / Π fᵢ^kᵢ` where `num` is a
//! polynomial over exact rationals and the `fᵢ` are monic, content-free
//! polynomials. The indeterminates are coordinates, jet variables, parameters
//! and transcendental kernels (`sin A`, `cos A`, `ln A`, `arctan A`,
//! `sqrt p`), plus at most one `exp E` factor per monomial. Kernels are
//! treated as adjoined indeterminates subject to:
//!
//! * `cos²A → 1 − sin²A`
//! * `(sqrt p)² → p`
//! * `exp A · exp B → exp(A + B)`, `exp 0 → 1`
//! * `sin(−A) → −sin A`, `cos(−A) → cos A`
//!
//! Sine and cosine kernels whose arguments are rational multiples of one
//! another are rewritten onto a common base angle by [`Canon::harmonize`].
//! A polynomial that reduces to no terms is identically zero.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::expr::{Rational, Var};

/// Indeterminates of the polynomial ring.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(Var),
    Param(Arc<str>),
    Sin(Arc<Canon>),
    Cos(Arc<Canon>),
    Ln(Arc<Canon>),
    Atan(Arc<Canon>),
    Sqrt(Arc<Poly>),
}

/// Power product of atoms times an optional exponential factor.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    powers: BTreeMap<Atom, u32>,
    exp: Option<Arc<Canon>>,
}

impl Ord for Monomial {
    // Lexicographic, larger atoms most significant. This is a monomial order
    // on the power part, which the exact-division routine relies on.
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.powers.iter().rev().peekable();
        let mut b = other.powers.iter().rev().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((ka, ea)), Some((kb, eb))) => match ka.cmp(kb) {
                    Ordering::Greater => return Ordering::Greater,
                    Ordering::Less => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {
                            a.next();
                            b.next();
                        }
                        o => return o,
                    },
                },
            }
        }
        self.exp.cmp(&other.exp)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn atom(a: Atom) -> Monomial {
        let mut powers = BTreeMap::new();
        powers.insert(a, 1);
        Monomial { powers, exp: None }
    }

    pub fn is_one(&self) -> bool {
        self.powers.is_empty() && self.exp.is_none()
    }

    pub fn powers(&self) -> &BTreeMap<Atom, u32> {
        &self.powers
    }

    pub fn exp_arg(&self) -> Option<&Canon> {
        self.exp.as_deref()
    }

    fn with_exp(mut self, arg: Option<Canon>) -> Monomial {
        self.exp = arg.filter(|a| !a.is_zero()).map(Arc::new);
        self
    }

    /// Product without reduction. Exponential arguments are added.
    fn mul_raw(&self, other: &Monomial) -> Monomial {
        let mut powers = self.powers.clone();
        for (a, e) in &other.powers {
            *powers.entry(a.clone()).or_insert(0) += e;
        }
        let exp = match (&self.exp, &other.exp) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => {
                let s = a.as_ref().add(b);
                (!s.is_zero()).then(|| Arc::new(s))
            }
        };
        Monomial { powers, exp }
    }

    fn needs_reduction(&self) -> bool {
        self.powers
            .iter()
            .any(|(a, &e)| e >= 2 && matches!(a, Atom::Cos(_) | Atom::Sqrt(_)))
    }

    /// `self / other` on the power part, when every exponent suffices.
    fn div_powers(&self, other: &Monomial) -> Option<Monomial> {
        let mut powers = self.powers.clone();
        for (a, e) in &other.powers {
            let slot = powers.get_mut(a)?;
            if *slot < *e {
                return None;
            }
            *slot -= e;
            if *slot == 0 {
                powers.remove(a);
            }
        }
        let exp = match (&self.exp, &other.exp) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(Arc::new(b.neg())),
            (Some(a), Some(b)) => {
                let d = a.sub(b);
                (!d.is_zero()).then(|| Arc::new(d))
            }
        };
        Some(Monomial { powers, exp })
    }
}

/// Sparse polynomial with reduced monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { terms }
    }

    pub fn from_monomial(m: Monomial, c: Rational) -> Poly {
        if m.needs_reduction() {
            return reduce_monomial(m, c);
        }
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn atom(a: Atom) -> Poly {
        Poly::from_monomial(Monomial::atom(a), Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn add_poly_scaled(&mut self, p: &Poly, scale: &Rational) {
        for (m, c) in &p.terms {
            self.add_term(m.clone(), c * scale);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul_raw(mb);
                let c = ca * cb;
                if m.needs_reduction() {
                    let r = reduce_monomial(m, c);
                    out.add_poly_scaled(&r, &Rational::one());
                } else {
                    out.add_term(m, c);
                }
            }
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Poly {
        self.mul(&Poly::from_monomial(m.clone(), c.clone()))
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Re-apply the reduction rules to every term.
    fn reduced(self) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in self.terms {
            if m.needs_reduction() {
                out.add_poly_scaled(&reduce_monomial(m, c), &Rational::one());
            } else {
                out.add_term(m, c);
            }
        }
        out
    }

    /// Exact quotient `self / divisor` in the free polynomial ring, if the
    /// division leaves no remainder. `None` means "not shown divisible".
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        let (lm, lc) = divisor.leading()?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        let budget = 4 * (self.len() + 1) * (divisor.len() + 1) + 64;
        for _ in 0..budget {
            let (rm, rc) = match rem.leading() {
                None => return Some(quot.reduced()),
                Some((m, c)) => (m.clone(), c.clone()),
            };
            let qm = rm.div_powers(lm)?;
            let qc = rc / lc;
            // Subtract qm·qc·divisor without reduction, mirroring the free ring.
            for (m, c) in &divisor.terms {
                rem.add_term(qm.mul_raw(m), -(c * &qc));
            }
            quot.add_term(qm, qc);
        }
        None
    }

    /// Split into `content · monomial · primitive` where the primitive part
    /// is monic and has no common monomial factor.
    fn content_split(&self) -> (Rational, Monomial, Poly) {
        let Some((_, lc)) = self.leading() else {
            return (Rational::zero(), Monomial::one(), Poly::zero());
        };
        let lc = lc.clone();
        // Common power part (exp factors are only split off single terms).
        let mut common: Option<BTreeMap<Atom, u32>> = None;
        for m in self.terms.keys() {
            common = Some(match common {
                None => m.powers.clone(),
                Some(c) => c
                    .into_iter()
                    .filter_map(|(a, e)| m.powers.get(&a).map(|&f| (a, e.min(f))))
                    .collect(),
            });
        }
        let mut common = Monomial {
            powers: common.unwrap_or_default(),
            exp: None,
        };
        if self.terms.len() == 1 {
            common.exp = self.terms.keys().next().unwrap().exp.clone();
        }
        let inv = Rational::one() / &lc;
        let mut prim = Poly::zero();
        for (m, c) in &self.terms {
            let q = m.div_powers(&common).expect("common factor divides");
            prim.add_term(q, c * &inv);
        }
        (lc, common, prim)
    }

    /// Evaluate the atoms through `atom`, returning `None` on domain failure.
    pub fn map_atoms(&self, f: &mut dyn FnMut(&Atom) -> Canon) -> Canon {
        let mut acc = Canon::zero();
        for (m, c) in &self.terms {
            let mut term = Canon::constant(c.clone());
            for (a, e) in &m.powers {
                term = term.mul(&f(a).pow(*e));
            }
            if let Some(arg) = &m.exp {
                term = term.mul(&Canon::exp_of(arg.as_ref().clone()));
            }
            acc = acc.add(&term);
        }
        acc
    }

    pub fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        for m in self.terms.keys() {
            for a in m.powers.keys() {
                out.insert(a.clone());
            }
            if let Some(e) = &m.exp {
                e.collect_atoms(out);
            }
        }
    }
}

/// `cos^k → cos^(k mod 2)·(1 − sin²)^(k div 2)` and
/// `sqrt(p)^k → sqrt(p)^(k mod 2)·p^(k div 2)`.
fn reduce_monomial(m: Monomial, c: Rational) -> Poly {
    let mut rest = m.clone();
    let mut factor = Poly::one();
    for (a, &e) in &m.powers {
        if e < 2 {
            continue;
        }
        match a {
            Atom::Cos(arg) => {
                let sin = Poly::atom(Atom::Sin(arg.clone()));
                let one_minus = Poly::one().sub(&sin.mul(&sin));
                factor = factor.mul(&one_minus.pow(e / 2));
            }
            Atom::Sqrt(p) => {
                factor = factor.mul(&p.as_ref().pow(e / 2));
            }
            _ => continue,
        }
        if e % 2 == 0 {
            rest.powers.remove(a);
        } else {
            rest.powers.insert(a.clone(), 1);
        }
    }
    let base = Poly {
        terms: [(rest, c)].into_iter().collect(),
    };
    base.mul(&factor)
}

/// Quotient of a polynomial by a product of normalized factor powers.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Canon {
    num: Poly,
    den: BTreeMap<Poly, u32>,
}

impl Canon {
    pub fn zero() -> Canon {
        Canon::default()
    }

    pub fn one() -> Canon {
        Canon::from_poly(Poly::one())
    }

    pub fn constant(c: Rational) -> Canon {
        Canon::from_poly(Poly::constant(c))
    }

    pub fn int(n: i64) -> Canon {
        Canon::constant(Rational::from_integer(BigInt::from(n)))
    }

    pub fn from_poly(num: Poly) -> Canon {
        Canon {
            num,
            den: BTreeMap::new(),
        }
    }

    pub fn atom(a: Atom) -> Canon {
        Canon::from_poly(Poly::atom(a))
    }

    pub fn var(v: Var) -> Canon {
        Canon::atom(Atom::Var(v))
    }

    pub fn param(name: &str) -> Canon {
        Canon::atom(Atom::Param(Arc::from(name)))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &BTreeMap<Poly, u32> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else if self.num.is_zero() {
            Some(Rational::zero())
        } else {
            None
        }
    }

    /// Total number of stored terms, a size measure.
    pub fn weight(&self) -> usize {
        self.num.len() + self.den.keys().map(Poly::len).sum::<usize>()
    }

    fn den_product(den: &BTreeMap<Poly, u32>) -> Poly {
        let mut p = Poly::one();
        for (f, k) in den {
            p = p.mul(&f.pow(*k));
        }
        p
    }

    fn build(num: Poly, den: BTreeMap<Poly, u32>) -> Canon {
        if num.is_zero() {
            return Canon::zero();
        }
        let mut c = Canon { num, den };
        c.cancel();
        c
    }

    /// Remove denominator factors that divide the numerator exactly.
    fn cancel(&mut self) {
        if self.den.is_empty() {
            return;
        }
        let factors: Vec<Poly> = self.den.keys().cloned().collect();
        for f in factors {
            while let Some(k) = self.den.get(&f).copied() {
                match self.num.div_exact(&f) {
                    Some(q) => {
                        self.num = q;
                        if k == 1 {
                            self.den.remove(&f);
                        } else {
                            self.den.insert(f.clone(), k - 1);
                        }
                    }
                    None => break,
                }
            }
        }
    }

    pub fn add(&self, other: &Canon) -> Canon {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        if self.den == other.den {
            return Canon::build(self.num.add(&other.num), self.den.clone());
        }
        let mut lcm = self.den.clone();
        for (f, k) in &other.den {
            let slot = lcm.entry(f.clone()).or_insert(0);
            *slot = (*slot).max(*k);
        }
        let lift = |c: &Canon| {
            let mut extra = BTreeMap::new();
            for (f, k) in &lcm {
                let have = c.den.get(f).copied().unwrap_or(0);
                if *k > have {
                    extra.insert(f.clone(), k - have);
                }
            }
            c.num.mul(&Canon::den_product(&extra))
        };
        let num = lift(self).add(&lift(other));
        Canon::build(num, lcm)
    }

    pub fn neg(&self) -> Canon {
        Canon {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Canon) -> Canon {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Rational) -> Canon {
        Canon::build(self.num.scale(s), self.den.clone())
    }

    pub fn mul(&self, other: &Canon) -> Canon {
        if self.is_zero() || other.is_zero() {
            return Canon::zero();
        }
        let mut den = self.den.clone();
        for (f, k) in &other.den {
            *den.entry(f.clone()).or_insert(0) += k;
        }
        Canon::build(self.num.mul(&other.num), den)
    }

    pub fn pow(&self, n: u32) -> Canon {
        match n {
            0 => Canon::one(),
            1 => self.clone(),
            _ => Canon::build(
                self.num.pow(n),
                self.den.iter().map(|(f, k)| (f.clone(), k * n)).collect(),
            ),
        }
    }

    pub fn powi(&self, n: i32) -> Canon {
        if n >= 0 {
            self.pow(n as u32)
        } else {
            self.recip().pow(n.unsigned_abs())
        }
    }

    /// `1 / self`. The reciprocal of zero keeps a zero factor in the
    /// denominator, which numeric evaluation reports as a domain failure.
    pub fn recip(&self) -> Canon {
        let num = Canon::den_product(&self.den);
        let mut out = Canon::from_poly(num);
        out.divide_by_poly(&self.num);
        out.cancel();
        out
    }

    pub fn div(&self, other: &Canon) -> Canon {
        self.mul(&other.recip())
    }

    /// Divide in place by a polynomial, splitting off content and monomial
    /// factors so denominators stay normalized.
    fn divide_by_poly(&mut self, p: &Poly) {
        if p.is_zero() {
            *self.den.entry(Poly::zero()).or_insert(0) += 1;
            return;
        }
        let (content, mono, prim) = p.content_split();
        self.num = self.num.scale(&(Rational::one() / content));
        if let Some(e) = &mono.exp {
            let inv = Monomial::one().with_exp(Some(e.neg()));
            self.num = self.num.mul_monomial(&inv, &Rational::one());
        }
        for (a, &k) in &mono.powers {
            match a {
                Atom::Sqrt(rad) => {
                    // 1/sqrt(p)^k with k odd: multiply through by sqrt(p).
                    let s = Poly::atom(a.clone());
                    self.num = self.num.mul(&s.pow(k));
                    self.divide_by_poly(&rad.as_ref().pow(k));
                }
                _ => {
                    *self.den.entry(Poly::atom(a.clone())).or_insert(0) += k;
                }
            }
        }
        if prim.as_constant().is_none() {
            *self.den.entry(prim).or_insert(0) += 1;
        }
    }

    /// Map every atom to a new value and rebuild, factor by factor.
    pub fn map_atoms(&self, f: &mut dyn FnMut(&Atom) -> Canon) -> Canon {
        let mut out = self.num.map_atoms(f);
        for (p, k) in &self.den {
            out = out.div(&p.map_atoms(f).pow(*k));
        }
        out
    }

    pub fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        self.num.collect_atoms(out);
        for p in self.den.keys() {
            p.collect_atoms(out);
        }
    }

    /// Coordinates and jet variables, including those inside kernels.
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.walk_atoms(&mut |a| {
            if let Atom::Var(v) = a {
                out.insert(*v);
            }
        });
        out
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk_atoms(&mut |a| {
            if let Atom::Param(p) = a {
                out.insert(p.to_string());
            }
        });
        out
    }

    /// Visit every atom, recursing into kernel arguments.
    pub fn walk_atoms(&self, f: &mut dyn FnMut(&Atom)) {
        let mut atoms = BTreeSet::new();
        self.collect_atoms(&mut atoms);
        for a in &atoms {
            f(a);
            match a {
                Atom::Var(_) | Atom::Param(_) => {}
                Atom::Sin(c) | Atom::Cos(c) | Atom::Ln(c) | Atom::Atan(c) => c.walk_atoms(f),
                Atom::Sqrt(p) => Canon::from_poly(p.as_ref().clone()).walk_atoms(f),
            }
        }
    }

    // ---- kernel constructors -------------------------------------------

    /// Leading rational coefficient of the numerator (sign and scale of an
    /// argument).
    fn leading_coefficient(&self) -> Option<Rational> {
        self.num.leading().map(|(_, c)| c.clone())
    }

    pub fn sin_of(arg: Canon) -> Canon {
        match arg.leading_coefficient() {
            None => Canon::zero(),
            Some(c) if c.is_negative() => Canon::atom(Atom::Sin(Arc::new(arg.neg()))).neg(),
            Some(_) => Canon::atom(Atom::Sin(Arc::new(arg))),
        }
    }

    pub fn cos_of(arg: Canon) -> Canon {
        match arg.leading_coefficient() {
            None => Canon::one(),
            Some(c) if c.is_negative() => Canon::atom(Atom::Cos(Arc::new(arg.neg()))),
            Some(_) => Canon::atom(Atom::Cos(Arc::new(arg))),
        }
    }

    pub fn tan_of(arg: Canon) -> Canon {
        Canon::sin_of(arg.clone()).div(&Canon::cos_of(arg))
    }

    pub fn cot_of(arg: Canon) -> Canon {
        Canon::cos_of(arg.clone()).div(&Canon::sin_of(arg))
    }

    pub fn exp_of(arg: Canon) -> Canon {
        if arg.is_zero() {
            return Canon::one();
        }
        if let Some(inner) = arg.single_atom() {
            if let Atom::Ln(a) = inner {
                return a.as_ref().clone();
            }
        }
        Canon::from_poly(Poly::from_monomial(
            Monomial::one().with_exp(Some(arg)),
            Rational::one(),
        ))
    }

    pub fn ln_of(arg: Canon) -> Canon {
        if arg.as_constant().is_some_and(|c| c.is_one()) {
            return Canon::zero();
        }
        if arg.den.is_empty() && arg.num.len() == 1 {
            let (m, c) = arg.num.terms.iter().next().unwrap();
            if m.powers.is_empty() && c.is_one() {
                if let Some(e) = &m.exp {
                    return e.as_ref().clone();
                }
            }
        }
        Canon::atom(Atom::Ln(Arc::new(arg)))
    }

    pub fn atan_of(arg: Canon) -> Canon {
        match arg.leading_coefficient() {
            None => Canon::zero(),
            Some(c) if c.is_negative() => Canon::atom(Atom::Atan(Arc::new(arg.neg()))).neg(),
            Some(_) => Canon::atom(Atom::Atan(Arc::new(arg))),
        }
    }

    /// `sqrt(N / D) = sqrt(N·D) / D`; perfect-square constants are exact.
    pub fn sqrt_of(arg: Canon) -> Canon {
        if arg.is_zero() {
            return Canon::zero();
        }
        if let Some(c) = arg.as_constant() {
            if let Some(r) = rational_sqrt(&c) {
                return Canon::constant(r);
            }
        }
        let d = Canon::den_product(&arg.den);
        let radicand = arg.num.mul(&d);
        let root = Canon::atom(Atom::Sqrt(Arc::new(radicand)));
        if arg.den.is_empty() {
            root
        } else {
            root.div(&Canon::from_poly(d))
        }
    }

    /// The atom if `self` is exactly one atom with coefficient one.
    pub fn single_atom(&self) -> Option<&Atom> {
        if !self.den.is_empty() || self.num.len() != 1 {
            return None;
        }
        let (m, c) = self.num.terms.iter().next().unwrap();
        if !c.is_one() || m.exp.is_some() || m.powers.len() != 1 {
            return None;
        }
        let (a, e) = m.powers.iter().next().unwrap();
        (*e == 1).then_some(a)
    }

    // ---- multiple-angle harmonization ------------------------------------

    /// Rewrite `sin`/`cos` kernels whose arguments are rational multiples of a
    /// common primitive onto one base angle, so identities such as
    /// `sin A = 2 sin(A/2) cos(A/2)` become visible to the reduction rules.
    /// Only groups with more than one distinct multiple are touched.
    pub fn harmonize(&self) -> Canon {
        let mut atoms = BTreeSet::new();
        self.collect_atoms(&mut atoms);
        // primitive argument -> set of rational multiples present
        let mut groups: BTreeMap<Canon, BTreeSet<Rational>> = BTreeMap::new();
        for a in &atoms {
            if let Atom::Sin(arg) | Atom::Cos(arg) = a {
                let (q, prim) = arg.split_multiple();
                groups.entry(prim).or_default().insert(q);
            }
        }
        let mut plan: BTreeMap<Canon, Rational> = BTreeMap::new();
        for (prim, qs) in groups {
            if qs.len() > 1 {
                plan.insert(prim, rational_gcd(qs.iter()));
            }
        }
        if plan.is_empty() {
            return self.clone();
        }
        let mut rewrite = |a: &Atom| -> Canon {
            let (is_sin, arg) = match a {
                Atom::Sin(arg) => (true, arg),
                Atom::Cos(arg) => (false, arg),
                _ => return Canon::atom(a.clone()),
            };
            let (q, prim) = arg.split_multiple();
            let Some(g) = plan.get(&prim) else {
                return Canon::atom(a.clone());
            };
            let n = (q / g).to_integer().to_i64().expect("small multiple");
            let base = prim.scale(g);
            let s = Poly::atom(Atom::Sin(Arc::new(base.clone())));
            let c = Poly::atom(Atom::Cos(Arc::new(base)));
            let (sn, cn) = multiple_angle(&s, &c, n);
            Canon::from_poly(if is_sin { sn } else { cn })
        };
        self.map_atoms(&mut rewrite)
    }

    /// `self = q · primitive` with the primitive's leading coefficient one.
    fn split_multiple(&self) -> (Rational, Canon) {
        match self.leading_coefficient() {
            None => (Rational::zero(), Canon::zero()),
            Some(q) => {
                let prim = self.scale(&(Rational::one() / &q));
                (q, prim)
            }
        }
    }
}

/// `sin(nθ)`, `cos(nθ)` as polynomials in `sin θ`, `cos θ`.
fn multiple_angle(s: &Poly, c: &Poly, n: i64) -> (Poly, Poly) {
    let m = n.unsigned_abs();
    let (mut sk, mut ck) = (Poly::zero(), Poly::one());
    for _ in 0..m {
        let sn = sk.mul(c).add(&ck.mul(s));
        let cn = ck.mul(c).sub(&sk.mul(s));
        sk = sn;
        ck = cn;
    }
    if n < 0 {
        (sk.neg(), ck)
    } else {
        (sk, ck)
    }
}

fn rational_gcd<'a>(qs: impl Iterator<Item = &'a Rational>) -> Rational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for q in qs {
        num = num.gcd(q.numer());
        den = den.lcm(q.denom());
    }
    Rational::new(num, den)
}

fn rational_sqrt(c: &Rational) -> Option<Rational> {
    if c.is_negative() {
        return None;
    }
    let n = c.numer().sqrt();
    let d = c.denom().sqrt();
    (&n * &n == *c.numer() && &d * &d == *c.denom()).then(|| Rational::new(n, d))
}
