//! Expression trees in the single variable `t`.

use std::fmt;

/// An expression in the curve parameter `t`.
///
/// Trees are normally built through the smart constructors ([`Expr::add`],
/// [`Expr::mul`], ...) which fold constants and drop neutral elements, so that
/// repeated differentiation stays small.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power; exponents are restricted to integers so that
    /// differentiation is total.
    Pow(Box<Expr>, i32),
}

// Smart constructors named after the node they build; the operator traits
// would hide the folding they do.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var() -> Expr {
        Expr::Var
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            Expr::Mul(l, r) if l.as_const().is_some() => Expr::scale(-l.as_const().unwrap_or(1.0), *r),
            other => Expr::Neg(Box::new(other)),
        }
    }

    /// `c * e` with `c < 0`, as `(|c|, e)`.
    fn negative_multiple(&self) -> Option<(f64, &Expr)> {
        match self {
            Expr::Mul(l, r) => l.as_const().filter(|c| *c < 0.0).map(|c| (-c, &**r)),
            _ => None,
        }
    }

    pub fn sin(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(c.sin()),
            other => Expr::Sin(Box::new(other)),
        }
    }

    pub fn cos(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(c.cos()),
            other => Expr::Cos(Box::new(other)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => return Expr::Const(x + y),
            (Some(0.0), None) => return b,
            (None, Some(0.0)) => return a,
            _ => {}
        }
        if a == b {
            return Expr::mul(Expr::Const(2.0), a);
        }
        if let Expr::Neg(inner) = b {
            return Expr::sub(a, *inner);
        }
        if let Some((c, e)) = b.negative_multiple() {
            return Expr::sub(a, Expr::scale(c, e.clone()));
        }
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => return Expr::Const(x - y),
            (Some(0.0), None) => return Expr::neg(b),
            (None, Some(0.0)) => return a,
            _ => {}
        }
        if a == b {
            return Expr::Const(0.0);
        }
        if let Expr::Neg(inner) = b {
            return Expr::add(a, *inner);
        }
        if let Some((c, e)) = b.negative_multiple() {
            return Expr::add(a, Expr::scale(c, e.clone()));
        }
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => return Expr::Const(x * y),
            (Some(x), None) => return Expr::scale(x, b),
            (None, Some(y)) => return Expr::scale(y, a),
            _ => {}
        }
        match (a, b) {
            (Expr::Neg(x), Expr::Neg(y)) => Expr::mul(*x, *y),
            (Expr::Neg(x), y) | (y, Expr::Neg(x)) => Expr::neg(Expr::mul(*x, y)),
            (x, y) if x == y => Expr::pow(x, 2),
            (x, y) => Expr::Mul(Box::new(x), Box::new(y)),
        }
    }

    /// `c * e` with the constant kept on the left.
    fn scale(c: f64, e: Expr) -> Expr {
        if c == 0.0 {
            return Expr::Const(0.0);
        }
        if c == 1.0 {
            return e;
        }
        if c == -1.0 {
            return Expr::neg(e);
        }
        match e {
            Expr::Mul(l, r) if l.as_const().is_some() => {
                Expr::scale(c * l.as_const().unwrap_or(1.0), *r)
            }
            Expr::Neg(inner) => Expr::scale(-c, *inner),
            other => Expr::Mul(Box::new(Expr::Const(c)), Box::new(other)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != 0.0 => return Expr::Const(x / y),
            (Some(0.0), None) => return Expr::Const(0.0),
            (None, Some(1.0)) => return a,
            (None, Some(y)) if y != 0.0 => return Expr::scale(1.0 / y, a),
            _ => {}
        }
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(base: Expr, exponent: i32) -> Expr {
        match (exponent, base) {
            (0, _) => Expr::Const(1.0),
            (1, b) => b,
            (n, Expr::Const(c)) => Expr::Const(c.powi(n)),
            (n, Expr::Pow(inner, m)) => match m.checked_mul(n) {
                Some(k) => Expr::pow(*inner, k),
                None => Expr::Pow(Box::new(Expr::Pow(inner, m)), n),
            },
            (n, b) => Expr::Pow(Box::new(b), n),
        }
    }

    /// Evaluates the expression at parameter value `t`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => t,
            Expr::Neg(a) => -a.eval(t),
            Expr::Sin(a) => a.eval(t).sin(),
            Expr::Cos(a) => a.eval(t).cos(),
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
            Expr::Div(a, b) => a.eval(t) / b.eval(t),
            Expr::Pow(a, n) => a.eval(t).powi(*n),
        }
    }

    /// Exact symbolic derivative with respect to `t`.
    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var => Expr::Const(1.0),
            Expr::Neg(a) => Expr::neg(a.differentiate()),
            Expr::Sin(a) => Expr::mul(Expr::cos((**a).clone()), a.differentiate()),
            Expr::Cos(a) => Expr::neg(Expr::mul(Expr::sin((**a).clone()), a.differentiate())),
            Expr::Add(a, b) => Expr::add(a.differentiate(), b.differentiate()),
            Expr::Sub(a, b) => Expr::sub(a.differentiate(), b.differentiate()),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.differentiate(), (**b).clone()),
                Expr::mul((**a).clone(), b.differentiate()),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.differentiate(), (**b).clone()),
                    Expr::mul((**a).clone(), b.differentiate()),
                ),
                Expr::pow((**b).clone(), 2),
            ),
            Expr::Pow(a, n) => Expr::mul(
                Expr::scale(f64::from(*n), Expr::pow((**a).clone(), n - 1)),
                a.differentiate(),
            ),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var => 1,
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Pow(a, _) => 1 + a.size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if c.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_with(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let parens = self.precedence() < min_prec;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Expr::Const(c) => write!(f, "{c}")?,
            Expr::Var => f.write_str("t")?,
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_with(f, 3)?;
            }
            Expr::Sin(a) => {
                f.write_str("sin(")?;
                a.write_with(f, 0)?;
                f.write_str(")")?;
            }
            Expr::Cos(a) => {
                f.write_str("cos(")?;
                a.write_with(f, 0)?;
                f.write_str(")")?;
            }
            Expr::Add(a, b) => {
                a.write_with(f, 1)?;
                f.write_str(" + ")?;
                b.write_with(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.write_with(f, 1)?;
                f.write_str(" - ")?;
                b.write_with(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.write_with(f, 2)?;
                f.write_str("*")?;
                b.write_with(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.write_with(f, 2)?;
                f.write_str("/")?;
                b.write_with(f, 3)?;
            }
            Expr::Pow(a, n) => {
                a.write_with(f, 5)?;
                write!(f, "^{n}")?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, 0)
    }
}
